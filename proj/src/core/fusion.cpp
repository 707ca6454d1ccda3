#include "core/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "core/errors.hpp"
#include "core/mathutil.hpp"
#include "core/phase.hpp"

namespace lcamv::fusion {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double pixel_variance(double phase_var, double wavelength) {
  const double s = wavelength / kTwoPi;
  return s * s * phase_var;
}

FusionWeights mvu_weights(const std::array<double, 3>& variances) {
  FusionWeights w;
  // Exactly-zero variances (noise-free channels) take the limit: equal split
  // over the zero-variance channels, nothing elsewhere.
  int zeros = 0;
  for (double v : variances) zeros += (v == 0.0);
  if (zeros > 0) {
    for (int i = 0; i < 3; ++i) w.w[i] = variances[i] == 0.0 ? 1.0 / zeros : 0.0;
    return w;
  }
  double inv[3];
  double total = 0.0;
  for (int i = 0; i < 3; ++i) {
    inv[i] = std::isinf(variances[i]) ? 0.0 : 1.0 / variances[i];
    total += inv[i];
  }
  if (total <= 0.0)
    raise(Errc::all_channels_invalid, "no channel with finite variance");
  for (int i = 0; i < 3; ++i) w.w[i] = inv[i] / total;
  return w;
}

std::array<double, 3> filter_outliers(const std::array<double, 3>& u_p,
                                      const std::array<double, 3>& variances,
                                      double multiplier) {
  // Anchor: smallest variance, ties resolved in reference order G, R, B.
  static constexpr int kOrder[3] = {1, 0, 2};
  int anchor = -1;
  for (int idx : kOrder)
    if (anchor < 0 || variances[idx] < variances[anchor]) anchor = idx;
  if (std::isinf(variances[anchor]))
    raise(Errc::all_channels_invalid, "no channel with finite variance");

  const double radius = multiplier * std::sqrt(variances[anchor]);
  std::array<double, 3> refined = variances;
  for (int i = 0; i < 3; ++i) {
    if (i == anchor || std::isinf(variances[i])) continue;
    if (std::abs(u_p[i] - u_p[anchor]) > radius) refined[i] = kInf;
  }
  return refined;
}

FusedPixel fuse(const std::array<double, 3>& u_p, const FusionWeights& weights,
                const std::array<double, 3>& variances) {
  FusedPixel out;
  for (int i = 0; i < 3; ++i) {
    if (weights.w[i] == 0.0) continue;
    out.value += weights.w[i] * u_p[i];
    out.variance += weights.w[i] * weights.w[i] * variances[i];
  }
  return out;
}

CircularStats circular_stats(const std::vector<double>& wrapped_phases) {
  if (wrapped_phases.empty())
    raise(Errc::invalid_argument, "circular statistics need at least one sample");
  double sc = 0.0, ss = 0.0;
  for (double p : wrapped_phases) {
    sc += std::cos(p);
    ss += std::sin(p);
  }
  const double n = static_cast<double>(wrapped_phases.size());
  CircularStats st;
  st.resultant_mag = std::hypot(sc, ss) / n;
  if (st.resultant_mag < 1e-12) {
    st.mean = 0.0;
    st.std = kInf;
    return st;
  }
  st.mean = std::atan2(ss, sc);
  st.std = st.resultant_mag >= 1.0 ? 0.0 : std::sqrt(-2.0 * std::log(st.resultant_mag));
  return st;
}

MonteCarloReport monte_carlo_ci(double k0, double k1, double i_a, double i_b, int steps,
                                int n_samples, int grid_points, uint64_t seed) {
  if (n_samples < 1000) raise(Errc::invalid_argument, "need at least 1e3 samples");
  if (grid_points < 1) raise(Errc::invalid_argument, "empty phase grid");

  const std::vector<double> deltas = phase::shift_offsets(steps);
  std::vector<double> cosd(steps), sind(steps);
  for (int i = 0; i < steps; ++i) {
    cosd[i] = std::cos(deltas[i]);
    sind[i] = std::sin(deltas[i]);
  }
  noise::NoiseParams k{k0, k1, false};
  const double sigma_an = std::sqrt(noise::phase_variance(i_a, i_b, steps, k));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  MonteCarloReport report;
  report.rows.reserve(grid_points);
  double multiplier_sum = 0.0;
  std::vector<double> errors(n_samples);
  std::vector<double> abs_errors(n_samples);

  for (int g = 0; g < grid_points; ++g) {
    const double phi = -kPi + kTwoPi * g / grid_points;
    for (int s = 0; s < n_samples; ++s) {
      double sum_sin = 0.0, sum_cos = 0.0;
      for (int i = 0; i < steps; ++i) {
        const double clean = i_a + i_b * std::cos(phi - deltas[i]);
        const double var = std::max(0.0, k0 + k1 * clean);
        const double value = clean + (var > 0.0 ? std::sqrt(var) * gauss(rng) : 0.0);
        sum_cos += value * cosd[i];
        sum_sin += value * sind[i];
      }
      const double est = std::atan2(sum_sin, sum_cos);
      errors[s] = wrap_pi(est - phi);
      abs_errors[s] = std::abs(errors[s]);
    }
    MonteCarloRow row;
    row.phase = phi;
    row.analytic_sigma = sigma_an;
    const CircularStats st = circular_stats(errors);
    row.empirical_sigma = st.std;
    std::nth_element(abs_errors.begin(),
                     abs_errors.begin() + static_cast<long>(0.99 * (n_samples - 1)),
                     abs_errors.end());
    row.ci_halfwidth = abs_errors[static_cast<size_t>(0.99 * (n_samples - 1))];
    report.rows.push_back(row);
    multiplier_sum += sigma_an > 0.0 ? row.ci_halfwidth / sigma_an : 0.0;
  }
  report.mean_multiplier = multiplier_sum / grid_points;
  return report;
}

ProjectorPixelField fuse_fields(const std::array<FuseChannelInput, 3>& channels,
                                double wavelength, int steps, double ci_multiplier,
                                std::array<ChannelRaster, 3>* weights_out) {
  const ProjectorPixelField* ref = channels[0].field;
  for (const auto& ch : channels) {
    if (!ch.field || !ch.i_a || !ch.i_b)
      raise(Errc::invalid_argument, "fuse_fields: missing channel input");
    if (!ch.field->u_p.same_size(ref->u_p))
      raise(Errc::size_mismatch, "fuse_fields: channel fields differ in size");
  }
  const int w = ref->u_p.width();
  const int h = ref->u_p.height();

  ProjectorPixelField fused;
  fused.u_p = ChannelRaster(w, h);
  fused.variance = ChannelRaster(w, h);
  fused.u_p.ensure_mask();
  if (weights_out)
    for (auto& wr : *weights_out) wr = ChannelRaster(w, h);

  const double px_scale = (wavelength / kTwoPi) * (wavelength / kTwoPi);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::array<double, 3> up{0, 0, 0};
      std::array<double, 3> var{kInf, kInf, kInf};
      // A channel whose CI spans a quarter fringe period cannot resolve the
      // column within its period; it enters as unusable rather than becoming
      // a single-channel fallback.
      const double ci_limit = wavelength / 4.0;
      bool any = false;
      for (int c = 0; c < 3; ++c) {
        const auto& ch = channels[c];
        if (!ch.field->u_p.valid(x, y)) continue;
        const double pv =
            noise::phase_variance(ch.i_a->at(x, y), ch.i_b->at(x, y), steps, ch.k);
        if (std::isinf(pv)) continue;
        const double v = px_scale * pv;
        if (ci_multiplier * std::sqrt(v) > ci_limit) continue;
        up[c] = ch.field->u_p.at(x, y);
        var[c] = v;
        any = true;
      }
      if (!any) {
        fused.u_p.set_valid(x, y, false);
        continue;
      }
      const auto refined = filter_outliers(up, var, ci_multiplier);
      const FusionWeights weights = mvu_weights(refined);
      const FusedPixel px = fuse(up, weights, refined);
      fused.u_p.at(x, y) = px.value;
      fused.variance.at(x, y) = px.variance;
      if (weights_out)
        for (int c = 0; c < 3; ++c) (*weights_out)[c].at(x, y) = weights.w[c];
    }
  }
  return fused;
}

}  // namespace lcamv::fusion
