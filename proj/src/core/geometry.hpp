#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "core/raster.hpp"

namespace lcamv::geometry {

struct PixelCoord {
  double u = 0.0;
  double v = 0.0;
};

/// Camera/projector stereo rig. R, t map camera coordinates to projector
/// coordinates (x_p = R x_c + t); millimeters throughout. The fundamental
/// matrix is derived on construction and kept in sync because instances are
/// immutable after make().
class StereoCalibration {
public:
  /// Validates orthonormality of R (det +1, tol 1e-9) and the triangular
  /// structure of K_c, K_p; derives F when the baseline is nonzero.
  static StereoCalibration make(const Eigen::Matrix3d& K_c,
                                const Eigen::Matrix3d& K_p,
                                const Eigen::Matrix3d& R,
                                const Eigen::Vector3d& t,
                                std::array<int, 2> cam_size,
                                std::array<int, 2> prj_size);

  const Eigen::Matrix3d& K_c() const { return K_c_; }
  const Eigen::Matrix3d& K_p() const { return K_p_; }
  const Eigen::Matrix3d& R() const { return R_; }
  const Eigen::Vector3d& t() const { return t_; }
  const Eigen::Matrix3d& K_c_inv() const { return K_c_inv_; }
  const Eigen::Matrix3d& K_p_inv() const { return K_p_inv_; }
  /// Throws DegenerateBaseline when ||t|| = 0.
  const Eigen::Matrix3d& F() const;
  std::array<int, 2> cam_size() const { return cam_size_; }
  std::array<int, 2> prj_size() const { return prj_size_; }

  /// Projects a camera-frame 3D point into both image planes.
  /// Returns (u_c, v_c, u_p, v_p, s_c, s_p).
  struct Projection {
    PixelCoord cam;
    PixelCoord prj;
    double s_c = 0.0;
    double s_p = 0.0;
  };
  Projection project(const Eigen::Vector3d& point_cam) const;

private:
  Eigen::Matrix3d K_c_, K_p_, R_;
  Eigen::Vector3d t_;
  Eigen::Matrix3d K_c_inv_, K_p_inv_;
  Eigen::Matrix3d F_;
  bool has_F_ = false;
  std::array<int, 2> cam_size_{0, 0};
  std::array<int, 2> prj_size_{0, 0};
};

struct TriangulationResult {
  double s_c = 0.0;               // depth from camera (mm)
  double s_p = 0.0;               // depth from projector (mm)
  double v_p = 0.0;               // projector vertical pixel
  Eigen::Vector3d point_cam{0, 0, 0};
  bool valid = false;             // false when s_c <= 0 (behind the camera)
};

/// F = K_p^-T [t]x R K_c^-1; rank 2. Throws DegenerateBaseline at ||t|| = 0.
Eigen::Matrix3d fundamental_matrix(const StereoCalibration& calib);

/// Solves rows 1 and 3 of s_p*[u_p, v_p, 1]^T = s_c*K_p*R*K_c^-1*u_c + K_p*t
/// for (s_c, s_p) in closed form; v_p comes from the epipolar line.
/// Throws SingularSystem when the 2x2 determinant magnitude is < 1e-12.
TriangulationResult triangulate(const PixelCoord& u_c, double u_p,
                                const StereoCalibration& calib);

/// v_p such that [u_p, v_p, 1] F [u_c, v_c, 1]^T = 0.
/// Throws EpipolarDegenerate when the v_p coefficient vanishes.
double solve_vp(const PixelCoord& u_c, double u_p, const StereoCalibration& calib);

struct PointXYZ {
  double x, y, z;
};

/// One 3D point per valid depth pixel, via point = s_c * K_c^-1 [u, v, 1]^T.
std::vector<PointXYZ> depth_map_to_point_cloud(const ChannelRaster& depth,
                                               const StereoCalibration& calib);

}  // namespace lcamv::geometry
