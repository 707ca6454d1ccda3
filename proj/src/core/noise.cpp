#include "core/noise.hpp"

#include <cmath>
#include <limits>

#include "core/errors.hpp"
#include "core/mathutil.hpp"

namespace lcamv::noise {

namespace {

template <typename T>
NoiseSample estimate_impl(const RasterT<T>& img1, const RasterT<T>& img2, const PixelRect& roi) {
  if (!img1.same_size(img2)) raise(Errc::size_mismatch, "flat-field pair sizes differ");
  const int x0 = roi.x, y0 = roi.y;
  const int x1 = roi.x + roi.width, y1 = roi.y + roi.height;
  if (x0 < 0 || y0 < 0 || x1 > img1.width() || y1 > img1.height())
    raise(Errc::invalid_argument, "ROI outside the image");

  // Pairwise-summed reductions keep long flat-field sums deterministic and accurate.
  std::vector<double> sums, diffs;
  sums.reserve(static_cast<size_t>(roi.width) * roi.height);
  diffs.reserve(sums.capacity());
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      if (!img1.valid(x, y) || !img2.valid(x, y)) continue;
      const double a = img1.at(x, y);
      const double b = img2.at(x, y);
      sums.push_back(a + b);
      diffs.push_back(a - b);
    }
  }
  const size_t n = sums.size();
  if (n < 2) raise(Errc::domain_too_small, "noise estimation needs at least 2 pixels");

  NoiseSample s;
  s.n_pixels = n;
  s.mu_hat = pairwise_sum(sums) / (2.0 * n);
  const double mu_delta = pairwise_sum(diffs) / static_cast<double>(n);
  std::vector<double> sq(n);
  for (size_t i = 0; i < n; ++i) {
    const double d = diffs[i] - mu_delta;
    sq[i] = d * d;
  }
  s.var_hat = pairwise_sum(sq) / (2.0 * (n - 1.0));
  return s;
}

}  // namespace

NoiseSample estimate_pixel_noise(const ChannelRaster& img1, const ChannelRaster& img2) {
  return estimate_impl(img1, img2, PixelRect{0, 0, img1.width(), img1.height()});
}

NoiseSample estimate_pixel_noise(const ChannelRaster& img1, const ChannelRaster& img2,
                                 const PixelRect& roi) {
  return estimate_impl(img1, img2, roi);
}

NoiseSample estimate_pixel_noise(const ImageRaster& img1, const ImageRaster& img2,
                                 const PixelRect& roi) {
  return estimate_impl(img1, img2, roi);
}

NoiseParams fit_noise_model(const std::vector<NoiseSample>& samples) {
  if (samples.size() < 2)
    raise(Errc::invalid_argument, "noise fit needs at least 2 intensity levels");

  bool distinct = false;
  for (const auto& s : samples)
    if (s.mu_hat != samples.front().mu_hat) { distinct = true; break; }
  if (!distinct) raise(Errc::degenerate_levels, "all intensity levels coincide");

  // chi^2 = sum w_i (var_i - k0 - k1 mu_i)^2,  w_i = (|D|-1) / (2 var_i^2).
  double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
  for (const auto& s : samples) {
    const double v = std::max(s.var_hat, 1e-12);
    const double w = (s.n_pixels - 1.0) / (2.0 * v * v);
    sw += w;
    swx += w * s.mu_hat;
    swy += w * s.var_hat;
    swxx += w * s.mu_hat * s.mu_hat;
    swxy += w * s.mu_hat * s.var_hat;
  }
  const double det = sw * swxx - swx * swx;
  if (std::abs(det) < 1e-30) raise(Errc::degenerate_levels, "weighted fit is degenerate");

  NoiseParams p;
  p.k1 = (sw * swxy - swx * swy) / det;
  p.k0 = (swxx * swy - swx * swxy) / det;
  if (p.k0 < 0.0) { p.k0 = 0.0; p.clamped = true; }
  if (p.k1 < 0.0) { p.k1 = 0.0; p.clamped = true; }
  return p;
}

double phase_variance(double i_a, double i_b, int steps, const NoiseParams& params) {
  if (i_b <= 0.0) return std::numeric_limits<double>::infinity();
  return 2.0 * params.variance_at(i_a) / (steps * i_b * i_b);
}

ChannelRaster phase_variance(const ChannelRaster& i_a, const ChannelRaster& i_b, int steps,
                             const NoiseParams& params) {
  if (!i_a.same_size(i_b)) raise(Errc::size_mismatch, "I_A / I_B size mismatch");
  ChannelRaster out(i_a.width(), i_a.height());
  for (size_t i = 0; i < out.size(); ++i) {
    if (!i_a.valid(i) || !i_b.valid(i))
      out[i] = std::numeric_limits<double>::infinity();
    else
      out[i] = phase_variance(i_a[i], i_b[i], steps, params);
  }
  return out;
}

}  // namespace lcamv::noise
