#pragma once

#include <cstdint>

#include "core/geometry.hpp"
#include "core/pixel_field.hpp"
#include "core/raster.hpp"

namespace lcamv::prj_lca {

/// Depth-linear projector LCA of one channel: Delta_O = alpha * z_p + beta,
/// stored as per-projector-pixel lookup tables (pixel/mm and pixel).
struct ChannelMaps {
  ChannelRaster alpha;
  ChannelRaster beta;
};

/// The four calibrated maps {alpha^R, beta^R, alpha^B, beta^B}.
struct PrjLcaMaps {
  ChannelMaps red;
  ChannelMaps blue;

  const ChannelMaps& for_channel(Channel c) const;
};

/// Delta_O[u_c, v_c] = u_p^G - u_p^ch; masks intersected.
ChannelRaster observe_delta(const ProjectorPixelField& up_ref,
                            const ProjectorPixelField& up_ch);

struct RemappedPose {
  ChannelRaster delta;  // projector-indexed Delta_O
  ChannelRaster z;      // projector-indexed z_p (mm)
};

/// Scatters camera-indexed (Delta_O, z_p) samples to the nearest projector
/// pixel (collisions averaged), then fills interior holes by interpolating
/// between the nearest filled neighbors along rows and columns. Pixels with
/// no bracketing data (outside the sampled hull) stay invalid.
RemappedPose remap_to_projector(const ChannelRaster& delta_cam, const ChannelRaster& u_p,
                                const ChannelRaster& v_p, const ChannelRaster& z_p,
                                int prj_width, int prj_height);

/// Per-pixel sufficient statistics of (Delta_O, z_p) pairs across plate
/// poses. Pose rasters merge associatively, so calibration never has to hold
/// every pose in memory.
class PlaneSampleSet {
public:
  PlaneSampleSet(int prj_width, int prj_height);

  void add_pose(const RemappedPose& pose);

  int poses() const { return poses_; }
  int width() const { return n_.width(); }
  int height() const { return n_.height(); }

  const RasterT<int32_t>& count() const { return n_; }
  const ChannelRaster& sum_z() const { return sum_z_; }
  const ChannelRaster& sum_zz() const { return sum_zz_; }
  const ChannelRaster& sum_d() const { return sum_d_; }
  const ChannelRaster& sum_dd() const { return sum_dd_; }
  const ChannelRaster& sum_zd() const { return sum_zd_; }

private:
  int poses_ = 0;
  RasterT<int32_t> n_;
  ChannelRaster sum_z_, sum_zz_, sum_d_, sum_dd_, sum_zd_;
};

/// Pixel-wise linear regression of Delta_O on z_p:
/// alpha = Cov[Delta, z] / Var[z], beta = E[Delta] - alpha E[z].
/// Pixels with fewer than 2 samples or Var[z] < 1e-6 mm^2 are invalid.
ChannelMaps fit_alpha_beta(const PlaneSampleSet& samples);

/// Pixel-wise Pearson correlation of Delta_O and z_p across poses; needs at
/// least 3 samples and nonzero variance in both variables.
ChannelRaster correlation_map(const PlaneSampleSet& samples);

/// Plug-in projector LCA correction, one pass: per camera pixel, triangulate
/// this channel's own u_p for (z_p, v_p), look up (alpha, beta) bilinearly at
/// (u_p, v_p), and shift u_p by alpha * z_p + beta. Pixels whose lookup falls
/// outside the valid map region are masked. Variance is carried unchanged.
ProjectorPixelField correct_up(const ProjectorPixelField& field, const ChannelMaps& maps,
                               const geometry::StereoCalibration& calib);

}  // namespace lcamv::prj_lca
