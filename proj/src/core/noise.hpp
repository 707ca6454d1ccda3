#pragma once

#include <cstdint>
#include <vector>

#include "core/raster.hpp"

namespace lcamv::noise {

/// Poisson-Gaussian intensity noise: sigma_n^2(I) = k0 + k1 * I.
/// k0 is signal-independent read noise (intensity^2), k1 the shot-noise slope.
struct NoiseParams {
  double k0 = 0.0;
  double k1 = 0.0;
  bool clamped = false;  // set when a negative fitted coefficient was clamped to 0

  double variance_at(double intensity) const { return k0 + k1 * intensity; }
};

struct NoiseSample {
  double mu_hat = 0.0;   // estimated clean intensity
  double var_hat = 0.0;  // estimated noise variance
  size_t n_pixels = 0;   // |D|
};

struct PixelRect {
  int x = 0, y = 0, width = 0, height = 0;
};

/// Sample mean/variance estimators over a uniform-illumination image pair:
/// mu = mean (I1+I2)/2, var = sum((I_delta - mean I_delta)^2) / (2(|D|-1)).
/// The domain is the set of pixels valid in both rasters (optionally
/// restricted to a rectangle). Throws DomainTooSmall below 2 pixels.
NoiseSample estimate_pixel_noise(const ChannelRaster& img1, const ChannelRaster& img2);
NoiseSample estimate_pixel_noise(const ChannelRaster& img1, const ChannelRaster& img2,
                                 const PixelRect& roi);
NoiseSample estimate_pixel_noise(const ImageRaster& img1, const ImageRaster& img2,
                                 const PixelRect& roi);

/// Weighted line fit of var_hat against mu_hat with weights
/// 1 / Var[var_hat], Var[var_hat] ~= 2 var_hat^2 / (|D|-1); the maximum
/// likelihood estimate under the Gaussian approximation. Negative fitted
/// coefficients are clamped to zero and flagged.
/// Throws DegenerateLevels when all mu_hat coincide.
NoiseParams fit_noise_model(const std::vector<NoiseSample>& samples);

/// sigma_phi^2 = 2 (k0 + k1 I_A) / (N I_B^2). Infinite at zero modulation,
/// which drops the pixel from fusion (weight -> 0).
double phase_variance(double i_a, double i_b, int steps, const NoiseParams& params);

/// Raster version; invalid or zero-modulation pixels get +inf.
ChannelRaster phase_variance(const ChannelRaster& i_a, const ChannelRaster& i_b, int steps,
                             const NoiseParams& params);

}  // namespace lcamv::noise
