#include "core/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "core/errors.hpp"

namespace lcamv::eval {

PlaneFitReport fit_plane(const std::vector<geometry::PointXYZ>& points, size_t subsample_n,
                         uint64_t seed) {
  if (points.size() < 3)
    raise(Errc::degenerate_geometry, "plane fitting needs at least 3 points");

  PlaneFitReport report;
  report.n_total = points.size();
  report.seed = seed;

  // Seeded subsample without replacement (partial Fisher-Yates).
  std::vector<size_t> idx(points.size());
  std::iota(idx.begin(), idx.end(), size_t{0});
  const size_t m = std::min(subsample_n, points.size());
  std::mt19937_64 rng(seed);
  for (size_t i = 0; i < m; ++i) {
    std::uniform_int_distribution<size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  report.n_subsampled = m;

  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (size_t i = 0; i < m; ++i) {
    const auto& p = points[idx[i]];
    centroid += Eigen::Vector3d(p.x, p.y, p.z);
  }
  centroid /= static_cast<double>(m);

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (size_t i = 0; i < m; ++i) {
    const auto& p = points[idx[i]];
    const Eigen::Vector3d d = Eigen::Vector3d(p.x, p.y, p.z) - centroid;
    cov += d * d.transpose();
  }

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  const Eigen::Vector3d evals = eig.eigenvalues();  // ascending
  if (evals[2] <= 0.0 || evals[1] <= 1e-12 * evals[2])
    raise(Errc::degenerate_geometry, "points are collinear or coincident");

  Eigen::Vector3d normal = eig.eigenvectors().col(0).normalized();
  double distance = normal.dot(centroid);
  if (distance < 0.0) {
    normal = -normal;
    distance = -distance;
  }
  report.normal = normal;
  report.distance = distance;

  double sq = 0.0;
  for (const auto& p : points) {
    const double e = normal.dot(Eigen::Vector3d(p.x, p.y, p.z)) - distance;
    sq += e * e;
  }
  report.mse = sq / static_cast<double>(points.size());
  report.rmse = std::sqrt(report.mse);
  return report;
}

ChannelRaster plane_error_map(const ChannelRaster& depth,
                              const geometry::StereoCalibration& calib,
                              const PlaneFitReport& plane) {
  ChannelRaster err(depth.width(), depth.height());
  err.invalidate_all();
  const Eigen::Matrix3d& Kinv = calib.K_c_inv();
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      if (!depth.valid(x, y)) continue;
      const Eigen::Vector3d p = depth.at(x, y) * (Kinv * Eigen::Vector3d(x, y, 1.0));
      err.at(x, y) = plane.normal.dot(p) - plane.distance;
      err.set_valid(x, y, true);
    }
  }
  return err;
}

std::vector<geometry::PointXYZ> roi_points(const ChannelRaster& depth,
                                           const geometry::StereoCalibration& calib,
                                           const PixelRoi& roi) {
  const int x0 = roi.empty() ? 0 : std::max(0, roi.x);
  const int y0 = roi.empty() ? 0 : std::max(0, roi.y);
  const int x1 = roi.empty() ? depth.width() : std::min(depth.width(), roi.x + roi.width);
  const int y1 = roi.empty() ? depth.height() : std::min(depth.height(), roi.y + roi.height);
  std::vector<geometry::PointXYZ> pts;
  const Eigen::Matrix3d& Kinv = calib.K_c_inv();
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      if (!depth.valid(x, y)) continue;
      const Eigen::Vector3d p = depth.at(x, y) * (Kinv * Eigen::Vector3d(x, y, 1.0));
      pts.push_back({p.x(), p.y(), p.z()});
    }
  }
  return pts;
}

}  // namespace lcamv::eval
