#include "core/geometry.hpp"

#include <cmath>

#include "core/errors.hpp"
#include "core/parallel.hpp"

namespace lcamv::geometry {

namespace {

Eigen::Matrix3d cross_matrix(const Eigen::Vector3d& t) {
  Eigen::Matrix3d m;
  m << 0, -t.z(), t.y(),
       t.z(), 0, -t.x(),
       -t.y(), t.x(), 0;
  return m;
}

void check_intrinsics(const Eigen::Matrix3d& K, const char* name) {
  const double scale = K.cwiseAbs().maxCoeff();
  const double tol = 1e-9 * (scale > 0 ? scale : 1.0);
  if (std::abs(K(1, 0)) > tol || std::abs(K(2, 0)) > tol || std::abs(K(2, 1)) > tol)
    raise(Errc::invalid_argument, std::string(name) + " must be upper-triangular");
  if (K(0, 0) <= 0 || K(1, 1) <= 0 || K(2, 2) <= 0)
    raise(Errc::invalid_argument, std::string(name) + " must have a positive diagonal");
}

}  // namespace

StereoCalibration StereoCalibration::make(const Eigen::Matrix3d& K_c,
                                          const Eigen::Matrix3d& K_p,
                                          const Eigen::Matrix3d& R,
                                          const Eigen::Vector3d& t,
                                          std::array<int, 2> cam_size,
                                          std::array<int, 2> prj_size) {
  check_intrinsics(K_c, "K_c");
  check_intrinsics(K_p, "K_p");
  if ((R * R.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-9)
    raise(Errc::invalid_argument, "R is not orthonormal");
  if (std::abs(R.determinant() - 1.0) > 1e-9)
    raise(Errc::invalid_argument, "R must have determinant +1");

  StereoCalibration c;
  c.K_c_ = K_c;
  c.K_p_ = K_p;
  c.R_ = R;
  c.t_ = t;
  c.K_c_inv_ = K_c.inverse();
  c.K_p_inv_ = K_p.inverse();
  c.cam_size_ = cam_size;
  c.prj_size_ = prj_size;
  if (t.norm() >= 1e-12) {
    c.F_ = c.K_p_inv_.transpose() * cross_matrix(t) * R * c.K_c_inv_;
    c.has_F_ = true;
  }
  return c;
}

const Eigen::Matrix3d& StereoCalibration::F() const {
  if (!has_F_)
    raise(Errc::degenerate_baseline, "epipolar geometry undefined: ||t|| = 0");
  return F_;
}

StereoCalibration::Projection StereoCalibration::project(const Eigen::Vector3d& x_c) const {
  Projection p;
  p.s_c = x_c.z();
  Eigen::Vector3d uc = K_c_ * x_c;
  p.cam = {uc.x() / uc.z(), uc.y() / uc.z()};
  Eigen::Vector3d x_p = R_ * x_c + t_;
  p.s_p = x_p.z();
  Eigen::Vector3d up = K_p_ * x_p;
  p.prj = {up.x() / up.z(), up.y() / up.z()};
  return p;
}

Eigen::Matrix3d fundamental_matrix(const StereoCalibration& calib) {
  if (calib.t().norm() < 1e-12)
    raise(Errc::degenerate_baseline, "epipolar geometry undefined: ||t|| = 0");
  return calib.K_p_inv().transpose() * cross_matrix(calib.t()) * calib.R() * calib.K_c_inv();
}

TriangulationResult triangulate(const PixelCoord& u_c, double u_p,
                                const StereoCalibration& calib) {
  // s_p * [u_p, v_p, 1]^T = s_c * A + b, with A = K_p R K_c^-1 u_c, b = K_p t.
  const Eigen::Vector3d uc(u_c.u, u_c.v, 1.0);
  const Eigen::Vector3d A = calib.K_p() * calib.R() * (calib.K_c_inv() * uc);
  const Eigen::Vector3d b = calib.K_p() * calib.t();

  // Rows 1 and 3:  [u_p  -A1; 1  -A3] [s_p; s_c] = [b1; b3]  (Cramer).
  const double det = u_p * (-A.z()) - (-A.x()) * 1.0;
  if (std::abs(det) < 1e-12)
    raise(Errc::singular_system, "triangulation system is singular");
  TriangulationResult r;
  r.s_p = (b.x() * (-A.z()) - (-A.x()) * b.z()) / det;
  r.s_c = (u_p * b.z() - b.x() * 1.0) / det;
  r.v_p = solve_vp(u_c, u_p, calib);
  r.point_cam = r.s_c * (calib.K_c_inv() * uc);
  r.valid = r.s_c > 0.0;
  return r;
}

double solve_vp(const PixelCoord& u_c, double u_p, const StereoCalibration& calib) {
  const Eigen::Vector3d line = calib.F() * Eigen::Vector3d(u_c.u, u_c.v, 1.0);
  if (std::abs(line.y()) < 1e-12)
    raise(Errc::epipolar_degenerate, "epipolar line has no v_p component");
  return -(u_p * line.x() + line.z()) / line.y();
}

std::vector<PointXYZ> depth_map_to_point_cloud(const ChannelRaster& depth,
                                               const StereoCalibration& calib) {
  std::vector<PointXYZ> cloud;
  cloud.reserve(depth.count_valid());
  const Eigen::Matrix3d& Kinv = calib.K_c_inv();
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      if (!depth.valid(x, y)) continue;
      Eigen::Vector3d p = depth.at(x, y) * (Kinv * Eigen::Vector3d(x, y, 1.0));
      cloud.push_back({p.x(), p.y(), p.z()});
    }
  }
  return cloud;
}

}  // namespace lcamv::geometry
