#pragma once

#include <cstdint>
#include <vector>

#include "core/pixel_field.hpp"
#include "core/raster.hpp"

namespace lcamv::phase {

/// Pixels with modulation I_B below this (8-bit intensity units) carry no
/// usable fringe signal and are masked.
inline constexpr double kDefaultModulationThreshold = 2.0;

/// Full 8-bit swing of the projected sinusoid.
inline constexpr double kPatternMean = 127.5;
inline constexpr double kPatternAmplitude = 127.5;

struct FringeConfig {
  double wavelength = 36.0;  // fringe period, projector pixels
  int periods = 32;          // L
  int steps = 3;             // N
  int prj_width = 912;
  int prj_height = 1140;

  /// Enforces N >= 3, lambda > 0, L >= 1 and L*lambda >= projector width.
  void validate() const;
};

enum class PhaseKind { wrapped, unwrapped };

struct PhaseField {
  ChannelRaster phi;  // radians; mask is authoritative for the field
  ChannelRaster i_a;  // mean intensity
  ChannelRaster i_b;  // modulation intensity
  PhaseKind kind = PhaseKind::wrapped;
};

/// Phase-shift offsets delta_i, i in [0, N). Patterns are
/// I_A + I_B cos(phi - delta_i); the sequence 2*pi*(floor(N/2) - i)/N makes
/// the three-step case carry the shifts (-2/3 pi, 0, +2/3 pi) in pattern
/// order, so the generalized least-squares decoder reduces to the three-step
/// arctangent formula on the same image order.
std::vector<double> shift_offsets(int steps);

/// N projector-space sinusoid rasters, value I_A0 + I_B0 cos(2 pi u_p / lambda - delta_i).
std::vector<ChannelRaster> generate_fringe_patterns(const FringeConfig& config);

/// ceil(log2 L) binary rasters encoding gray(floor(u_p / lambda)) per column,
/// MSB first, dark = 0, lit = 255. L must be a power of two.
std::vector<ChannelRaster> generate_graycode_patterns(const FringeConfig& config);

/// Wrapped-phase decode. The three-step case evaluates the arctangent
/// estimator directly; N != 3 uses the least-squares form
/// atan2(sum I sin d, sum I cos d). Pixels with I_B below the modulation
/// threshold (or invalid in any input) are masked.
PhaseField phase_shift_decode(const std::vector<ChannelRaster>& images,
                              int steps,
                              double modulation_threshold = kDefaultModulationThreshold);
PhaseField phase_shift_decode(const std::vector<ImageRaster>& images,
                              int steps,
                              double modulation_threshold = kDefaultModulationThreshold);

/// Fringe-order decode from gray-code captures: per pattern, bit = intensity
/// > I_A (the per-pixel mean recovered from the fringe set), then
/// gray-to-binary conversion.
RasterT<int32_t> graycode_decode(const std::vector<ChannelRaster>& images,
                                 const ChannelRaster& i_a);
RasterT<int32_t> graycode_decode(const std::vector<ImageRaster>& images,
                                 const ChannelRaster& i_a);

/// phi = phi_w + 2 pi l + pi, result in [0, 2 L pi). Orders must lie in
/// [0, periods) at valid pixels.
PhaseField unwrap(const PhaseField& wrapped, const RasterT<int32_t>& order, int periods);

/// The decoded phase is zero at the period boundaries (columns k*lambda),
/// while unwrap() expects the wrapped phase to run from -pi at the period
/// start. Re-wrapping by a half turn (phi -> wrap(phi - pi)) aligns the two,
/// making unwrap(align_to_period_origin(decode(...)), gray_order) exact for
/// every column.
PhaseField align_to_period_origin(const PhaseField& wrapped);

/// Masks pixels whose wrapped phase lies within tau of the period transition
/// (|phi_w| < tau), where noise can push the estimate across the transition
/// and cost a full period after unwrapping. tau = guard_sigmas * predicted
/// phase std (from the Poisson-Gaussian coefficients k0, k1 and the field's
/// own I_A, I_B). A channel noisy enough that tau reaches pi cannot place any
/// pixel in its period reliably and is masked entirely. Noise-free
/// coefficients mask nothing. Returns the number of pixels masked.
size_t apply_wrap_guard(PhaseField& wrapped, int steps, double k0, double k1,
                        double guard_sigmas = 6.0);

/// u_p = phi * lambda / (2 pi); mask propagated. Variance is attached by the
/// caller once a noise model is known.
ProjectorPixelField phase_to_pixel(const PhaseField& unwrapped, double wavelength,
                                   Channel channel = Channel::G);

}  // namespace lcamv::phase
