#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "core/cam_lca.hpp"
#include "core/fusion.hpp"
#include "core/geometry.hpp"
#include "core/noise.hpp"
#include "core/phase.hpp"
#include "core/prj_lca.hpp"
#include "core/sim.hpp"

namespace lcamv::pipeline {

/// Everything CALIBRATION produces and RECONSTRUCTION consumes. The LCA and
/// noise blocks are optional: each reconstruction mode checks for the
/// artifacts it needs and names the missing stage otherwise.
struct CalibrationBundle {
  geometry::StereoCalibration stereo;
  std::optional<cam_lca::CamLcaParams> theta_c_r;
  std::optional<cam_lca::CamLcaParams> theta_c_b;
  std::optional<prj_lca::PrjLcaMaps> theta_p;
  std::optional<std::array<noise::NoiseParams, 3>> k;
};

enum class Mode { lcamv, lca_only, mv_only, mean, yuv, green };

Mode mode_from_name(const std::string& name);
const char* mode_name(Mode mode);

struct PipelineConfig {
  Mode mode = Mode::lcamv;
  double ci_multiplier = fusion::kDefaultCiMultiplier;
  double modulation_threshold = phase::kDefaultModulationThreshold;
  double guard_sigmas = 6.0;
  // Wrap-guard noise floor for modes that run without calibrated noise
  // coefficients (intensity^2).
  double assumed_noise_var = 2.0;
};

struct PipelineResult {
  ChannelRaster depth;     // s_c (mm)
  ChannelRaster up_fused;  // fused projector column
  ChannelRaster variance;  // fused u_p variance; empty for unweighted modes
  std::array<ChannelRaster, 3> texture;  // I_A + I_B per output color
};

/// Algorithm-1 reconstruction: ExtractRGB -> CorrectCamLCA ->
/// PhaseAcquisition -> ScaleToPixel -> CorrectPrjLCA -> ChannelFusion ->
/// Triangulate3D, with the ablation/baseline modes skipping stages:
/// lca_only fuses corrected channels by unweighted mean (no CI gate),
/// mv_only fuses uncorrected channels by MVU, and mean/yuv/green collapse
/// the channels before decoding.
PipelineResult run_pipeline(const sim::CaptureStack& stack, const CalibrationBundle& calib,
                            const PipelineConfig& config);

/// Decode of one capture set: wrapped phase (masked by modulation and the
/// wrap guard), gray order, and the scaled projector-column field.
struct DecodedChannel {
  phase::PhaseField wrapped;
  RasterT<int32_t> order;
  ProjectorPixelField field;
};

DecodedChannel decode_captures(const std::vector<ImageRaster>& fringe_images,
                               const std::vector<ImageRaster>& gray_images,
                               const phase::FringeConfig& fringe, const PipelineConfig& config,
                               double k0, double k1, Channel label);

// --- calibration drivers ----------------------------------------------------

/// Camera-LCA calibration of both correcting channels from matched corners.
struct CamLcaCalibration {
  cam_lca::CalibrationFit red;
  cam_lca::CalibrationFit blue;
};
CamLcaCalibration calibrate_cam_lca_channels(const sim::CornerSet& corners);

/// Projector-LCA calibration from white-plate poses: decodes G and the
/// correcting channel per pose (after camera-LCA correction when theta_c is
/// present), observes Delta_O, remaps to projector space, and fits the
/// pixel-wise linear model. Also reports the Pearson correlation diagnostics.
struct PrjLcaCalibration {
  prj_lca::PrjLcaMaps maps;
  ChannelRaster correlation_r;
  ChannelRaster correlation_b;
};

/// Pose-streaming form: feed poses one at a time (a full-resolution pose
/// stack is large; nothing but the per-pixel statistics is retained).
class PrjLcaCalibrator {
public:
  PrjLcaCalibrator(const CalibrationBundle& calib, const PipelineConfig& config);
  void add_pose(const sim::CaptureStack& pose);
  int poses() const { return poses_; }
  /// Throws InsufficientPoints below 2 poses.
  PrjLcaCalibration finish() const;

private:
  const CalibrationBundle& calib_;
  PipelineConfig config_;
  prj_lca::PlaneSampleSet samples_r_;
  prj_lca::PlaneSampleSet samples_b_;
  int poses_ = 0;
};

PrjLcaCalibration calibrate_prj_lca_poses(const std::vector<sim::CaptureStack>& poses,
                                          const CalibrationBundle& calib,
                                          const PipelineConfig& config);

/// Noise calibration from flat-field pairs over a pixel ROI (whole image when
/// the ROI is empty); one (k0, k1) per channel.
std::array<noise::NoiseParams, 3> calibrate_noise_levels(
    const std::vector<sim::FlatFieldLevel>& levels, const noise::PixelRect& roi);

}  // namespace lcamv::pipeline
