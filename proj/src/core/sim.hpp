#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "core/cam_lca.hpp"
#include "core/geometry.hpp"
#include "core/noise.hpp"
#include "core/phase.hpp"
#include "core/raster.hpp"

namespace lcamv::sim {

/// n . x = distance, camera coordinates, millimeters.
struct PlaneGeometry {
  Eigen::Vector3d normal{0.0, 0.0, 1.0};
  double distance = 320.0;
};

/// Per-camera-pixel depth raster (mm); sampled bilinearly for fractional ray
/// positions.
struct HeightMapGeometry {
  ChannelRaster depth;
};

/// Colored checker texture attached to the plane, indexed in plane-local
/// millimeters; rays beyond the board clamp to the edge patches.
struct PatchTexture {
  int cols = 8;
  int rows = 6;
  double board_width = 440.0;   // mm
  double board_height = 330.0;  // mm
  std::vector<std::array<double, 3>> colors;  // rows*cols RGB reflectance in [0,1]

  const std::array<double, 3>& color_at(int col, int row) const {
    return colors[static_cast<size_t>(row) * cols + col];
  }
};

/// Injected projector LCA of one channel: alpha/beta affine in normalized
/// projector coordinates, alpha(u,v) = c[0] + c[1]*(u/W - 1/2) + c[2]*(v/H - 1/2).
/// Zero coefficients mean no aberration; constant maps use c[1] = c[2] = 0.
struct PrjLcaTruth {
  std::array<double, 3> alpha{0.0, 0.0, 0.0};
  std::array<double, 3> beta{0.0, 0.0, 0.0};

  double alpha_at(double un, double vn) const {
    return alpha[0] + alpha[1] * (un - 0.5) + alpha[2] * (vn - 0.5);
  }
  double beta_at(double un, double vn) const {
    return beta[0] + beta[1] * (un - 0.5) + beta[2] * (vn - 0.5);
  }
};

struct Scene {
  std::variant<PlaneGeometry, HeightMapGeometry> geometry = PlaneGeometry{};
  std::array<double, 3> base_reflectance{1.0, 1.0, 1.0};
  std::optional<PatchTexture> patches;  // plane scenes only

  cam_lca::CamLcaParams true_cam_lca_r;  // identity by default
  cam_lca::CamLcaParams true_cam_lca_b;
  PrjLcaTruth true_prj_lca_r;
  PrjLcaTruth true_prj_lca_b;

  std::array<noise::NoiseParams, 3> noise{};  // per captured channel
  Eigen::Matrix3d crosstalk = Eigen::Matrix3d::Identity();  // captured = M * bands
  bool quantize = false;
  uint64_t seed = 0;
};

struct ChannelCaptures {
  std::vector<ImageRaster> fringe;  // N phase-shifted captures
  std::vector<ImageRaster> gray;    // log2(L) gray-code captures
};

/// Noiseless, pre-quantization reference fields on the unwarped (green) rays.
struct GroundTruth {
  ChannelRaster depth;     // s_c (mm); mask = visible and projector-lit
  ChannelRaster z_p;       // s_p (mm)
  ChannelRaster v_p;       // projector row
  ChannelRaster up_ideal;  // aberration-free projector column
  ChannelRaster delta_r;   // injected Delta_O per correcting channel
  ChannelRaster delta_b;
};

struct CaptureStack {
  std::array<ChannelCaptures, 3> channels;  // indexed by Channel
  GroundTruth truth;
  phase::FringeConfig fringe;
  uint64_t seed = 0;
};

/// Renders the full fringe + gray-code capture set of a scene. Per camera
/// pixel and channel: invert the injected camera-LCA warp, cast the ray,
/// project the hit into the projector, shift each projector band by its
/// injected Delta_O, evaluate the patterns, mix bands through the crosstalk
/// matrix, scale by reflectance, then add Poisson-Gaussian noise (counter-
/// seeded: thread count never changes the output) and optionally quantize.
/// Throws SceneNotVisible when no ray hits the geometry.
CaptureStack render(const Scene& scene, const geometry::StereoCalibration& calib,
                    const phase::FringeConfig& fringe);

struct FlatFieldLevel {
  double level = 0.0;  // commanded uniform projector intensity
  // [channel][pair member]
  std::array<std::array<ImageRaster, 2>, 3> captures;
};

/// Two independently-noised uniform captures per intensity level, identical
/// clean signal within each pair (the noise-calibration input).
std::vector<FlatFieldLevel> render_flat_pairs(const Scene& scene,
                                              const geometry::StereoCalibration& calib,
                                              const std::vector<double>& levels);

/// Planar scene carrying cols x rows random patch colors; deterministic for a
/// given seed.
Scene make_colorboard_scene(int cols, int rows, uint64_t seed);

/// The default desk-scale rig: 1920x1200 camera (f ~1600 px) and 912x1140
/// projector (f ~1400 px), 80 mm baseline, aimed at z ~320 mm. image_scale
/// shrinks both image planes (and focal lengths) for fast tests.
geometry::StereoCalibration make_default_rig(double image_scale = 1.0);

struct CornerSet {
  std::vector<cam_lca::CornerPoint> reference;  // green-channel corner positions
  std::vector<cam_lca::CornerPoint> observed_r;
  std::vector<cam_lca::CornerPoint> observed_b;
};

/// Synthetic checkerboard corners for camera-LCA calibration: a margin-inset
/// grid of reference corners plus their displaced positions in R and B
/// (obs = ref + delta(ref; theta), with optional Gaussian jitter).
CornerSet make_corner_set(std::array<int, 2> cam_size, int nx, int ny,
                          const cam_lca::CamLcaParams& theta_r,
                          const cam_lca::CamLcaParams& theta_b, double jitter_sigma,
                          uint64_t seed);

// Built-in injection presets for synthetic experiments (full-resolution rig).

/// Sub-half-pixel camera LCA of the R or B channel; G is the reference.
/// image_scale matches the rig scale; the displacement field keeps its pixel
/// magnitudes so calibration stays well conditioned on small rigs.
cam_lca::CamLcaParams demo_cam_lca(Channel ch, double image_scale = 1.0);

/// Depth-linear projector LCA, red about +0.3 px and blue about -0.25 px at
/// the default working distance, with mild spatial variation.
PrjLcaTruth demo_prj_lca(Channel ch);

/// Desk-scale RGB sensor coefficients (red noisiest, green cleanest).
std::array<noise::NoiseParams, 3> default_sensor_noise();

/// Overlapping-spectra channel mixing (rows sum to 1); identity models fully
/// separated wavelengths.
Eigen::Matrix3d overlap_crosstalk();

}  // namespace lcamv::sim
