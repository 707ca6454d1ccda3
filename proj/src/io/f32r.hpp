#pragma once

#include <string>

#include "core/raster.hpp"

namespace lcamv::io {

/// F32R raster container: magic "F32R", little-endian u32 width, u32 height,
/// u8 mask-present flag, row-major float32 samples, then the u8 mask when the
/// flag is set.
void write_f32r(const std::string& path, const ChannelRaster& raster);
ChannelRaster read_f32r(const std::string& path);

}  // namespace lcamv::io
