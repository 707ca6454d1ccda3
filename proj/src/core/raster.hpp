#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace lcamv {

/// Single-channel 2D raster with an optional per-pixel validity mask.
/// An empty mask means "all pixels valid". Row-major storage.
template <typename T>
class RasterT {
public:
  RasterT() = default;
  RasterT(int width, int height, T fill = T{})
      : width_(width), height_(height),
        data_(static_cast<size_t>(width) * height, fill) {
    if (width < 0 || height < 0)
      throw std::invalid_argument("raster dimensions must be non-negative");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& at(int x, int y) { return data_[idx(x, y)]; }
  const T& at(int x, int y) const { return data_[idx(x, y)]; }
  T& operator[](size_t i) { return data_[i]; }
  const T& operator[](size_t i) const { return data_[i]; }

  const std::vector<T>& data() const { return data_; }
  std::vector<T>& data() { return data_; }

  bool has_mask() const { return !mask_.empty(); }
  bool valid(int x, int y) const { return mask_.empty() || mask_[idx(x, y)] != 0; }
  bool valid(size_t i) const { return mask_.empty() || mask_[i] != 0; }

  /// Materializes the mask (all-valid) if not yet present.
  void ensure_mask() {
    if (mask_.empty()) mask_.assign(data_.size(), 1);
  }
  void set_valid(int x, int y, bool v) {
    ensure_mask();
    mask_[idx(x, y)] = v ? 1 : 0;
  }
  void set_valid(size_t i, bool v) {
    ensure_mask();
    mask_[i] = v ? 1 : 0;
  }
  void invalidate_all() { mask_.assign(data_.size(), 0); }

  const std::vector<uint8_t>& mask() const { return mask_; }
  std::vector<uint8_t>& mask_storage() { return mask_; }

  /// Keeps only pixels valid in both this raster and `other`.
  template <typename U>
  void intersect_mask(const RasterT<U>& other) {
    if (other.width() != width_ || other.height() != height_)
      throw std::invalid_argument("mask intersection: size mismatch");
    if (!other.has_mask()) return;
    ensure_mask();
    for (size_t i = 0; i < mask_.size(); ++i)
      if (!other.valid(i)) mask_[i] = 0;
  }

  size_t count_valid() const {
    if (mask_.empty()) return data_.size();
    size_t n = 0;
    for (uint8_t m : mask_) n += (m != 0);
    return n;
  }

  bool same_size(int w, int h) const { return width_ == w && height_ == h; }
  template <typename U>
  bool same_size(const RasterT<U>& o) const {
    return o.width() == width_ && o.height() == height_;
  }

private:
  size_t idx(int x, int y) const {
    return static_cast<size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
  std::vector<uint8_t> mask_;
};

/// Universal math container (phase, depth, variance, ... fields).
using ChannelRaster = RasterT<double>;
/// Capture/image stacks; float keeps 18-pattern RGB stacks in memory.
using ImageRaster = RasterT<float>;

inline ChannelRaster to_channel_raster(const ImageRaster& img) {
  ChannelRaster out(img.width(), img.height());
  for (size_t i = 0; i < img.size(); ++i) out[i] = img[i];
  if (img.has_mask()) out.mask_storage() = img.mask();
  return out;
}

}  // namespace lcamv
