#pragma once

#include <string>
#include <vector>

#include "core/sim.hpp"

namespace lcamv::io {

/// Writes a capture dataset directory: manifest.json, the rig calibration
/// (calib.json), per-channel capture stacks (8-bit PNG when the render was
/// quantized, F32R otherwise), ground-truth F32R rasters and the scene
/// description (seeds and injected truth included).
void save_dataset(const std::string& dir, const sim::CaptureStack& stack,
                  const geometry::StereoCalibration& rig, const sim::Scene& scene);

/// Loads captures + fringe configuration (+ ground truth when present).
sim::CaptureStack load_dataset(const std::string& dir);

/// Matched checkerboard corners for camera-LCA calibration.
void save_corners(const std::string& path, const sim::CornerSet& corners);
sim::CornerSet load_corners(const std::string& path);

/// Flat-field pair stacks for noise calibration.
void save_flat_fields(const std::string& dir, const std::vector<sim::FlatFieldLevel>& levels,
                      bool quantized);
std::vector<sim::FlatFieldLevel> load_flat_fields(const std::string& dir);

/// Index of a flat-field directory, for loading one capture at a time (a
/// full-resolution 40-level set does not fit in memory comfortably).
struct FlatFieldIndex {
  bool quantized = true;
  struct Level {
    double value = 0.0;
    std::array<std::array<std::string, 2>, 3> files;  // [channel][pair member]
  };
  std::vector<Level> levels;
};
FlatFieldIndex read_flat_field_index(const std::string& dir);
ImageRaster load_flat_capture(const std::string& dir, const FlatFieldIndex& index,
                              size_t level, int channel, int member);

/// Projector pattern stacks for playback: fringe_{i:02}.png / gray_{i:02}.png.
void save_patterns(const std::string& dir, const phase::FringeConfig& fringe);

}  // namespace lcamv::io
