#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "core/noise.hpp"
#include "core/pixel_field.hpp"
#include "core/raster.hpp"

namespace lcamv::fusion {

/// Empirical 99% confidence multiplier for the wrapped-phase distribution;
/// monte_carlo_ci re-derives it for a given noise level.
inline constexpr double kDefaultCiMultiplier = 2.72;

/// Per-pixel channel weights; w_R + w_G + w_B = 1 on valid pixels.
struct FusionWeights {
  std::array<double, 3> w{0.0, 0.0, 0.0};  // indexed by Channel
  double operator[](Channel c) const { return w[static_cast<int>(c)]; }
};

struct CircularStats {
  double mean = 0.0;           // circular mean (radians)
  double std = 0.0;            // sqrt(-2 ln |R|)
  double resultant_mag = 0.0;  // |R| in [0, 1]
};

/// sigma_up^2 = (lambda / 2 pi)^2 * sigma_phi^2.
double pixel_variance(double phase_var, double wavelength);

/// Inverse-variance weights w_i = (1/s_i) / sum_j (1/s_j); infinite variances
/// contribute zero. Throws AllChannelsInvalid when every variance is +inf.
FusionWeights mvu_weights(const std::array<double, 3>& variances);

/// Confidence-interval outlier gate: the channel with the smallest variance
/// anchors the test (ties resolved G, R, B); any other channel farther than
/// multiplier * sigma_anchor from the anchor estimate has its variance set to
/// +inf. The anchor itself is never masked.
std::array<double, 3> filter_outliers(const std::array<double, 3>& u_p,
                                      const std::array<double, 3>& variances,
                                      double multiplier = kDefaultCiMultiplier);

struct FusedPixel {
  double value = 0.0;
  double variance = 0.0;
};

/// Weighted combination u = sum w_i u_i with variance sum w_i^2 s_i
/// (= 1 / sum 1/s_i under the optimal weights).
FusedPixel fuse(const std::array<double, 3>& u_p, const FusionWeights& weights,
                const std::array<double, 3>& variances);

/// R = (1/N) sum exp(j phi); mean = arg R, std = sqrt(-2 ln |R|). A resultant
/// below 1e-12 leaves the statistics undefined (std = +inf).
CircularStats circular_stats(const std::vector<double>& wrapped_phases);

struct MonteCarloRow {
  double phase = 0.0;
  double analytic_sigma = 0.0;
  double empirical_sigma = 0.0;  // circular std of the wrapped error
  double ci_halfwidth = 0.0;     // empirical symmetric 99% interval
};

struct MonteCarloReport {
  std::vector<MonteCarloRow> rows;
  double mean_multiplier = 0.0;  // phase-domain mean of ci_halfwidth / analytic sigma
};

/// Synthesizes noisy N-step intensity tuples across a phase grid under the
/// Poisson-Gaussian model, decodes them, and reports per-phase circular std
/// and the empirical 99% CI of the wrapped error relative to the analytic
/// sigma. Deterministic for a fixed seed.
MonteCarloReport monte_carlo_ci(double k0, double k1, double i_a, double i_b, int steps,
                                int n_samples, int grid_points, uint64_t seed);

struct FuseChannelInput {
  const ProjectorPixelField* field = nullptr;  // aligned u_p estimates
  const ChannelRaster* i_a = nullptr;          // decode products of this channel
  const ChannelRaster* i_b = nullptr;
  noise::NoiseParams k;
};

/// Per-pixel pipeline: phase variance -> pixel variance -> outlier gate ->
/// MVU weights -> weighted fuse. Channels invalid at a pixel enter with
/// infinite variance; pixels with no finite channel are masked. Optionally
/// exports the per-channel weight rasters.
ProjectorPixelField fuse_fields(const std::array<FuseChannelInput, 3>& channels,
                                double wavelength, int steps,
                                double ci_multiplier = kDefaultCiMultiplier,
                                std::array<ChannelRaster, 3>* weights_out = nullptr);

}  // namespace lcamv::fusion
