#pragma once

#include <string>

#include "core/raster.hpp"

namespace lcamv::io {

/// 8-bit grayscale PNG; values rounded and clamped to [0, 255].
void write_png8(const std::string& path, const ImageRaster& img);
void write_png8(const std::string& path, const ChannelRaster& img);

/// 16-bit grayscale PNG; intensities stay in 8-bit units (scaled by 257).
void write_png16(const std::string& path, const ChannelRaster& img);

/// Reads an 8- or 16-bit grayscale PNG into 8-bit intensity units.
ImageRaster read_png(const std::string& path);

}  // namespace lcamv::io
