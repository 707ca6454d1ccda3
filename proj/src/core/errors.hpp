#pragma once

#include <stdexcept>
#include <string>

namespace lcamv {

enum class Errc {
  invalid_argument,
  io_failure,
  parse_failure,
  degenerate_baseline,
  singular_system,
  epipolar_degenerate,
  non_power_of_two_periods,
  size_mismatch,
  wrong_image_count,
  order_out_of_range,
  insufficient_points,
  no_convergence,
  domain_too_small,
  degenerate_levels,
  all_channels_invalid,
  scene_not_visible,
  degenerate_geometry,
  missing_calibration,
};

class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  Errc code() const { return code_; }

private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& msg) {
  throw Error(code, msg);
}

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::io_failure: return "IoFailure";
    case Errc::parse_failure: return "ParseFailure";
    case Errc::degenerate_baseline: return "DegenerateBaseline";
    case Errc::singular_system: return "SingularSystem";
    case Errc::epipolar_degenerate: return "EpipolarDegenerate";
    case Errc::non_power_of_two_periods: return "NonPowerOfTwoPeriods";
    case Errc::size_mismatch: return "SizeMismatch";
    case Errc::wrong_image_count: return "WrongImageCount";
    case Errc::order_out_of_range: return "OrderOutOfRange";
    case Errc::insufficient_points: return "InsufficientPoints";
    case Errc::no_convergence: return "NoConvergence";
    case Errc::domain_too_small: return "DomainTooSmall";
    case Errc::degenerate_levels: return "DegenerateLevels";
    case Errc::all_channels_invalid: return "AllChannelsInvalid";
    case Errc::scene_not_visible: return "SceneNotVisible";
    case Errc::degenerate_geometry: return "DegenerateGeometry";
    case Errc::missing_calibration: return "MissingCalibration";
  }
  return "UnknownError";
}

}  // namespace lcamv
