#pragma once

#include <array>
#include <string>

#include "core/geometry.hpp"
#include "core/raster.hpp"

namespace lcamv::io {

/// ASCII PLY point cloud: one vertex per valid depth pixel in raster order,
/// "x y z red green blue" with the color taken from the texture rasters
/// (I_A + I_B, clamped to 8 bits). Fixed number formatting keeps the output
/// byte-identical across runs and thread counts.
void write_ply(const std::string& path, const ChannelRaster& depth,
               const geometry::StereoCalibration& calib,
               const std::array<ChannelRaster, 3>& texture);

}  // namespace lcamv::io
