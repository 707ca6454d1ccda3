#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "core/geometry.hpp"
#include "core/raster.hpp"

namespace lcamv::eval {

struct PlaneFitReport {
  Eigen::Vector3d normal{0, 0, 1};  // unit
  double distance = 0.0;            // n . x = d, with d >= 0
  double mse = 0.0;                 // mean squared orthogonal distance, all points
  double rmse = 0.0;
  size_t n_total = 0;
  size_t n_subsampled = 0;
  uint64_t seed = 0;
};

/// Total-least-squares plane through a seeded random subsample (smallest
/// eigenvector of the subsample covariance); the error statistics use every
/// point. Throws DegenerateGeometry for collinear or coincident input.
PlaneFitReport fit_plane(const std::vector<geometry::PointXYZ>& points, size_t subsample_n,
                         uint64_t seed);

/// Signed orthogonal distance of each valid depth pixel to the plane.
ChannelRaster plane_error_map(const ChannelRaster& depth,
                              const geometry::StereoCalibration& calib,
                              const PlaneFitReport& plane);

struct PixelRoi {
  int x = 0, y = 0, width = 0, height = 0;
  bool empty() const { return width <= 0 || height <= 0; }
};

/// Collects the 3D points of valid depth pixels inside the ROI (whole image
/// when the ROI is empty).
std::vector<geometry::PointXYZ> roi_points(const ChannelRaster& depth,
                                           const geometry::StereoCalibration& calib,
                                           const PixelRoi& roi);

}  // namespace lcamv::eval
