#include "io/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include "core/errors.hpp"

namespace lcamv::io {

namespace {

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

template <typename Raster>
void write_gray(const std::string& path, const Raster& img, int bit_depth) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) raise(Errc::io_failure, "cannot open '" + path + "' for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    raise(Errc::io_failure, "libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    raise(Errc::io_failure, "libpng error while writing '" + path + "'");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, img.width(), img.height(), bit_depth, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  if (bit_depth == 8) {
    std::vector<png_byte> row(img.width());
    for (int y = 0; y < img.height(); ++y) {
      for (int x = 0; x < img.width(); ++x) {
        const double v = std::round(static_cast<double>(img.at(x, y)));
        row[x] = static_cast<png_byte>(v < 0 ? 0 : (v > 255 ? 255 : v));
      }
      png_write_row(png, row.data());
    }
  } else {
    std::vector<png_byte> row(static_cast<size_t>(img.width()) * 2);
    for (int y = 0; y < img.height(); ++y) {
      for (int x = 0; x < img.width(); ++x) {
        const double scaled = std::round(static_cast<double>(img.at(x, y)) * 257.0);
        const uint16_t v =
            static_cast<uint16_t>(scaled < 0 ? 0 : (scaled > 65535 ? 65535 : scaled));
        row[2 * x] = static_cast<png_byte>(v >> 8);  // PNG is big-endian
        row[2 * x + 1] = static_cast<png_byte>(v & 0xff);
      }
      png_write_row(png, row.data());
    }
  }
  png_write_end(png, info);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

void write_png8(const std::string& path, const ImageRaster& img) { write_gray(path, img, 8); }
void write_png8(const std::string& path, const ChannelRaster& img) { write_gray(path, img, 8); }
void write_png16(const std::string& path, const ChannelRaster& img) { write_gray(path, img, 16); }

ImageRaster read_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) raise(Errc::io_failure, "cannot open '" + path + "'");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    raise(Errc::io_failure, "libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    raise(Errc::parse_failure, "libpng error while reading '" + path + "'");
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);

  if (color != PNG_COLOR_TYPE_GRAY) png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  if (bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  png_read_update_info(png, info);

  const int out_depth = png_get_bit_depth(png, info);
  ImageRaster img(static_cast<int>(w), static_cast<int>(h));
  std::vector<png_byte> row(png_get_rowbytes(png, info));
  for (png_uint_32 y = 0; y < h; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (png_uint_32 x = 0; x < w; ++x) {
      double v;
      if (out_depth == 16)
        v = ((row[2 * x] << 8) | row[2 * x + 1]) / 257.0;
      else
        v = row[x];
      img.at(static_cast<int>(x), static_cast<int>(y)) = static_cast<float>(v);
    }
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

}  // namespace lcamv::io
