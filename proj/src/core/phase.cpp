#include "core/phase.hpp"

#include <cmath>

#include "core/errors.hpp"
#include "core/mathutil.hpp"
#include "core/parallel.hpp"

namespace lcamv::phase {

namespace {

// atan2 yields (-pi, pi]; the wrapped-phase contract is [-pi, pi).
inline double to_wrapped_range(double a) { return a >= kPi ? a - kTwoPi : a; }

template <typename T>
void check_stack(const std::vector<RasterT<T>>& images, int steps) {
  if (static_cast<int>(images.size()) != steps)
    raise(Errc::wrong_image_count, "expected " + std::to_string(steps) + " images, got " +
                                       std::to_string(images.size()));
  if (steps < 3) raise(Errc::invalid_argument, "phase shifting needs at least 3 steps");
  for (const auto& img : images)
    if (!img.same_size(images.front()))
      raise(Errc::size_mismatch, "phase-shift images differ in size");
}

template <typename T>
PhaseField decode_impl(const std::vector<RasterT<T>>& images, int steps,
                       double modulation_threshold) {
  check_stack(images, steps);
  const int w = images.front().width();
  const int h = images.front().height();

  PhaseField out;
  out.phi = ChannelRaster(w, h);
  out.i_a = ChannelRaster(w, h);
  out.i_b = ChannelRaster(w, h);
  out.phi.ensure_mask();
  out.kind = PhaseKind::wrapped;

  const std::vector<double> deltas = shift_offsets(steps);
  std::vector<double> cosd(steps), sind(steps);
  for (int i = 0; i < steps; ++i) {
    cosd[i] = std::cos(deltas[i]);
    sind[i] = std::sin(deltas[i]);
  }

  parallel_rows(h, [&](int y0, int y1) {
    for (int y = y0; y < y1; ++y) {
      for (int x = 0; x < w; ++x) {
        bool ok = true;
        for (const auto& img : images)
          if (!img.valid(x, y)) { ok = false; break; }
        if (!ok) {
          out.phi.set_valid(x, y, false);
          continue;
        }
        double phi, ia, ib;
        if (steps == 3) {
          const double i1 = images[0].at(x, y);
          const double i2 = images[1].at(x, y);
          const double i3 = images[2].at(x, y);
          const double num = std::sqrt(3.0) * (i1 - i3);
          const double den = 2.0 * i2 - i1 - i3;
          phi = to_wrapped_range(std::atan2(num, den));
          ia = (i1 + i2 + i3) / 3.0;
          ib = std::sqrt(3.0 * (i1 - i3) * (i1 - i3) + den * den) / 3.0;
        } else {
          double sum = 0.0, sc = 0.0, ss = 0.0;
          for (int i = 0; i < steps; ++i) {
            const double v = images[i].at(x, y);
            sum += v;
            sc += v * cosd[i];
            ss += v * sind[i];
          }
          phi = to_wrapped_range(std::atan2(ss, sc));
          ia = sum / steps;
          ib = (2.0 / steps) * std::hypot(sc, ss);
        }
        out.phi.at(x, y) = phi;
        out.i_a.at(x, y) = ia;
        out.i_b.at(x, y) = ib;
        if (ib < modulation_threshold) out.phi.set_valid(x, y, false);
      }
    }
  });
  return out;
}

template <typename T>
RasterT<int32_t> graycode_decode_impl(const std::vector<RasterT<T>>& images,
                                      const ChannelRaster& i_a) {
  if (images.empty()) raise(Errc::wrong_image_count, "no gray-code images");
  const int w = images.front().width();
  const int h = images.front().height();
  for (const auto& img : images)
    if (!img.same_size(images.front()))
      raise(Errc::size_mismatch, "gray-code images differ in size");
  if (!i_a.same_size(w, h))
    raise(Errc::size_mismatch, "I_A raster does not match gray-code images");

  const int bits = static_cast<int>(images.size());
  RasterT<int32_t> order(w, h);
  parallel_rows(h, [&](int y0, int y1) {
    for (int y = y0; y < y1; ++y) {
      for (int x = 0; x < w; ++x) {
        uint32_t code = 0;
        const double thr = i_a.at(x, y);
        for (int b = 0; b < bits; ++b) {
          code <<= 1;  // MSB-first pattern order
          if (static_cast<double>(images[b].at(x, y)) > thr) code |= 1u;
        }
        order.at(x, y) = static_cast<int32_t>(gray_to_binary(code));
      }
    }
  });
  for (const auto& img : images) order.intersect_mask(img);
  order.intersect_mask(i_a);
  return order;
}

}  // namespace

void FringeConfig::validate() const {
  if (wavelength <= 0.0) raise(Errc::invalid_argument, "fringe wavelength must be positive");
  if (periods < 1) raise(Errc::invalid_argument, "need at least one phase period");
  if (steps < 3) raise(Errc::invalid_argument, "need at least 3 phase shifts");
  if (periods * wavelength < prj_width)
    raise(Errc::invalid_argument, "L * lambda must cover the projector width");
}

std::vector<double> shift_offsets(int steps) {
  if (steps < 3) raise(Errc::invalid_argument, "need at least 3 phase shifts");
  std::vector<double> d(steps);
  const int center = steps / 2;
  for (int i = 0; i < steps; ++i) d[i] = kTwoPi * (center - i) / steps;
  return d;
}

std::vector<ChannelRaster> generate_fringe_patterns(const FringeConfig& config) {
  config.validate();
  const std::vector<double> deltas = shift_offsets(config.steps);
  std::vector<ChannelRaster> patterns;
  patterns.reserve(config.steps);
  for (int i = 0; i < config.steps; ++i) {
    ChannelRaster p(config.prj_width, config.prj_height);
    for (int x = 0; x < config.prj_width; ++x) {
      const double v =
          kPatternMean + kPatternAmplitude * std::cos(kTwoPi * x / config.wavelength - deltas[i]);
      for (int y = 0; y < config.prj_height; ++y) p.at(x, y) = v;
    }
    patterns.push_back(std::move(p));
  }
  return patterns;
}

std::vector<ChannelRaster> generate_graycode_patterns(const FringeConfig& config) {
  config.validate();
  if (!is_power_of_two(static_cast<uint32_t>(config.periods)))
    raise(Errc::non_power_of_two_periods, "gray-code periods must be a power of two");
  const int bits = log2_exact(static_cast<uint32_t>(config.periods));
  std::vector<ChannelRaster> patterns;
  patterns.reserve(bits);
  for (int b = bits - 1; b >= 0; --b) {  // MSB first
    ChannelRaster p(config.prj_width, config.prj_height);
    for (int x = 0; x < config.prj_width; ++x) {
      const uint32_t period = static_cast<uint32_t>(x / config.wavelength);
      const double v = (binary_to_gray(period) >> b) & 1u ? 255.0 : 0.0;
      for (int y = 0; y < config.prj_height; ++y) p.at(x, y) = v;
    }
    patterns.push_back(std::move(p));
  }
  return patterns;
}

PhaseField phase_shift_decode(const std::vector<ChannelRaster>& images, int steps,
                              double modulation_threshold) {
  return decode_impl(images, steps, modulation_threshold);
}

PhaseField phase_shift_decode(const std::vector<ImageRaster>& images, int steps,
                              double modulation_threshold) {
  return decode_impl(images, steps, modulation_threshold);
}

RasterT<int32_t> graycode_decode(const std::vector<ChannelRaster>& images,
                                 const ChannelRaster& i_a) {
  return graycode_decode_impl(images, i_a);
}

RasterT<int32_t> graycode_decode(const std::vector<ImageRaster>& images,
                                 const ChannelRaster& i_a) {
  return graycode_decode_impl(images, i_a);
}

PhaseField unwrap(const PhaseField& wrapped, const RasterT<int32_t>& order, int periods) {
  if (wrapped.kind != PhaseKind::wrapped)
    raise(Errc::invalid_argument, "unwrap expects a wrapped phase field");
  if (!order.same_size(wrapped.phi))
    raise(Errc::size_mismatch, "fringe-order raster does not match the phase field");

  PhaseField out = wrapped;
  out.kind = PhaseKind::unwrapped;
  out.phi.intersect_mask(order);
  const int w = out.phi.width();
  const int h = out.phi.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!out.phi.valid(x, y)) continue;
      const int32_t l = order.at(x, y);
      if (l < 0 || l >= periods)
        raise(Errc::order_out_of_range,
              "fringe order " + std::to_string(l) + " outside [0, " + std::to_string(periods) + ")");
      out.phi.at(x, y) = wrapped.phi.at(x, y) + kTwoPi * l + kPi;
    }
  }
  return out;
}

PhaseField align_to_period_origin(const PhaseField& wrapped) {
  if (wrapped.kind != PhaseKind::wrapped)
    raise(Errc::invalid_argument, "expected a wrapped phase field");
  PhaseField out = wrapped;
  for (size_t i = 0; i < out.phi.size(); ++i)
    out.phi[i] = wrap_pi(wrapped.phi[i] - kPi);
  return out;
}

size_t apply_wrap_guard(PhaseField& wrapped, int steps, double k0, double k1,
                        double guard_sigmas) {
  if (wrapped.kind != PhaseKind::wrapped)
    raise(Errc::invalid_argument, "wrap guard expects a wrapped phase field");
  size_t masked = 0;
  for (int y = 0; y < wrapped.phi.height(); ++y) {
    for (int x = 0; x < wrapped.phi.width(); ++x) {
      if (!wrapped.phi.valid(x, y)) continue;
      const double ib = wrapped.i_b.at(x, y);
      if (ib <= 0.0) continue;
      const double var = 2.0 * std::max(0.0, k0 + k1 * wrapped.i_a.at(x, y)) / (steps * ib * ib);
      const double tau = guard_sigmas * std::sqrt(var);
      if (std::abs(wrapped.phi.at(x, y)) < tau) {
        wrapped.phi.set_valid(x, y, false);
        ++masked;
      }
    }
  }
  return masked;
}

ProjectorPixelField phase_to_pixel(const PhaseField& unwrapped, double wavelength,
                                   Channel channel) {
  if (unwrapped.kind != PhaseKind::unwrapped)
    raise(Errc::invalid_argument, "phase_to_pixel expects an unwrapped phase field");
  ProjectorPixelField f;
  f.channel = channel;
  f.u_p = ChannelRaster(unwrapped.phi.width(), unwrapped.phi.height());
  const double scale = wavelength / kTwoPi;
  for (size_t i = 0; i < unwrapped.phi.size(); ++i) f.u_p[i] = unwrapped.phi[i] * scale;
  if (unwrapped.phi.has_mask()) f.u_p.mask_storage() = unwrapped.phi.mask();
  return f;
}

}  // namespace lcamv::phase
