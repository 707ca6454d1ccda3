#pragma once

#include <array>
#include <vector>

#include "core/raster.hpp"

namespace lcamv::cam_lca {

/// Seven-parameter lateral-chromatic-aberration model of one correcting
/// channel (green is the reference and carries an implicit identity).
/// Image coordinates enter as (x, y) = (a*u + du, v + dv); the displacement
/// is the decentered distortion polynomial
///   dx = c1 x + c2 x r^2 + c3 (3x^2 + y^2) + 2 c4 x y
///   dy = c1 y + c2 y r^2 + 2 c3 x y + c4 (3y^2 + x^2).
struct CamLcaParams {
  double a = 1.0;
  double du = 0.0;
  double dv = 0.0;
  double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0;

  bool is_identity() const { return c1 == 0.0 && c2 == 0.0 && c3 == 0.0 && c4 == 0.0; }

  std::array<double, 7> to_array() const { return {a, du, dv, c1, c2, c3, c4}; }
  static CamLcaParams from_array(const std::array<double, 7>& v) {
    return {v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
  }
};

struct Delta {
  double dx = 0.0;
  double dy = 0.0;
};

/// Displacement of the channel at pixel (u, v); exactly linear in c1..c4.
Delta cam_lca_delta(double u, double v, const CamLcaParams& params);

struct CornerPoint {
  double u = 0.0;
  double v = 0.0;
};

struct CalibrationFit {
  CamLcaParams params;
  double rms = 0.0;  // sqrt(mean ||(obs - ref) - delta(ref)||^2), pixels
  int iterations = 0;
};

/// Least-squares fit of the seven parameters to matched corner displacements
/// (obs - ref) ~ delta(ref; theta). Starts from the identity with a linear
/// solve for c1..c4, then runs damped Gauss-Newton on all seven. Throws
/// InsufficientPoints below 7 pairs and NoConvergence when 100 iterations do
/// not reach a relative step of 1e-12.
CalibrationFit calibrate_cam_lca(const std::vector<CornerPoint>& ref_pts,
                                 const std::vector<CornerPoint>& obs_pts);

/// Inverse-warp resample: output(u, v) = bilinear(input)(u + dx, v + dy).
/// Samples landing outside the input are masked invalid.
ChannelRaster correct_image(const ChannelRaster& img, const CamLcaParams& params);
ImageRaster correct_image(const ImageRaster& img, const CamLcaParams& params);

}  // namespace lcamv::cam_lca
