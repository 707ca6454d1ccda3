#pragma once

#include <string>

#include "core/pipeline.hpp"

namespace lcamv::io {

/// Calibration bundle JSON: K_c, K_p, R, t (row-major arrays), cam_size,
/// prj_size; optional `theta_c.{R,B}` as [a, du, dv, c1..c4], `theta_p` as
/// relative paths to the alpha/beta F32R rasters, and `k.{R,G,B}` as
/// [k0, k1]. The fundamental matrix is always derived, never stored.
pipeline::CalibrationBundle load_calibration(const std::string& path);

/// Writes the bundle; projector-LCA rasters land next to the JSON as
/// theta_p_{R,B}_{alpha,beta}.f32r and are referenced relatively.
void save_calibration(const std::string& path, const pipeline::CalibrationBundle& bundle);

}  // namespace lcamv::io
