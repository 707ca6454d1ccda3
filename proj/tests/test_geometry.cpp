#include <doctest.h>

#include <Eigen/Geometry>
#include <random>

#include "core/errors.hpp"
#include "core/geometry.hpp"

using namespace lcamv;
using geometry::StereoCalibration;

namespace {

StereoCalibration identity_rig(const Eigen::Vector3d& t) {
  return StereoCalibration::make(Eigen::Matrix3d::Identity(), Eigen::Matrix3d::Identity(),
                                 Eigen::Matrix3d::Identity(), t, {100, 100}, {100, 100});
}

StereoCalibration random_rig(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Eigen::Matrix3d K_c;
  K_c << 1600 + 50 * uni(rng), 0, 960 + 20 * uni(rng),
         0, 1600 + 50 * uni(rng), 600 + 20 * uni(rng),
         0, 0, 1;
  Eigen::Matrix3d K_p;
  K_p << 1400 + 50 * uni(rng), 0, 456 + 20 * uni(rng),
         0, 1400 + 50 * uni(rng), 570 + 20 * uni(rng),
         0, 0, 1;
  const Eigen::Vector3d axis =
      Eigen::Vector3d(uni(rng), uni(rng), uni(rng)).normalized();
  const Eigen::Matrix3d R = Eigen::AngleAxisd(0.2 * uni(rng), axis).toRotationMatrix();
  const Eigen::Vector3d t(80 + 10 * uni(rng), 5 * uni(rng), 5 * uni(rng));
  return StereoCalibration::make(K_c, K_p, R, t, {1920, 1200}, {912, 1140});
}

}  // namespace

TEST_CASE("fundamental matrix: identity rig with x baseline") {
  const auto calib = identity_rig({10, 0, 0});
  const Eigen::Matrix3d F = geometry::fundamental_matrix(calib);
  Eigen::Matrix3d expected;
  expected << 0, 0, 0, 0, 0, -10, 0, 10, 0;
  CHECK((F - expected).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("fundamental matrix: zero baseline is degenerate") {
  CHECK_THROWS_AS(identity_rig({0, 0, 0}).F(), Error);
  try {
    identity_rig({0, 0, 0}).F();
  } catch (const Error& e) {
    CHECK(e.code() == Errc::degenerate_baseline);
  }
}

TEST_CASE("fundamental matrix: epipolar constraint and rank 2 on random rigs") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto calib = random_rig(rng);
    const Eigen::Matrix3d F = geometry::fundamental_matrix(calib);
    CHECK(std::abs(F.determinant()) < 1e-9 * std::pow(F.norm(), 3.0));

    const Eigen::Vector3d x_c(60 * uni(rng), 40 * uni(rng), 320 + 30 * uni(rng));
    const auto proj = calib.project(x_c);
    const Eigen::Vector3d uc(proj.cam.u, proj.cam.v, 1.0);
    const Eigen::Vector3d up(proj.prj.u, proj.prj.v, 1.0);
    CHECK(std::abs(up.dot(F * uc)) < 1e-9);
  }
}

TEST_CASE("triangulate: identity rig worked example") {
  const auto calib = identity_rig({10, 0, 0});
  const auto r = geometry::triangulate({0.0, 0.0}, 0.1, calib);
  CHECK(r.s_c == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(r.s_p == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(r.point_cam.x() == doctest::Approx(0.0));
  CHECK(r.point_cam.y() == doctest::Approx(0.0));
  CHECK(r.point_cam.z() == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(r.valid);
}

TEST_CASE("triangulate: forward-projected points round-trip") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto calib = random_rig(rng);
    const Eigen::Vector3d x_c(60 * uni(rng), 40 * uni(rng), 320 + 40 * uni(rng));
    const auto proj = calib.project(x_c);
    const auto r = geometry::triangulate({proj.cam.u, proj.cam.v}, proj.prj.u, calib);
    CHECK(r.valid);
    CHECK((r.point_cam - x_c).norm() < 1e-9 * x_c.norm());
    CHECK(r.s_p == doctest::Approx(proj.s_p).epsilon(1e-9));
    // The epipolar solve must land on the projected row.
    CHECK(r.v_p == doctest::Approx(proj.prj.v).epsilon(1e-9));
  }
}

TEST_CASE("triangulate: no baseline degenerates the system") {
  const auto calib = identity_rig({0, 0, 0});
  // With t = 0 a corresponding u_p makes rows 1/3 linearly dependent.
  const Eigen::Vector3d x_c(0.3, -0.2, 50.0);
  const auto proj = calib.project(x_c);
  CHECK_THROWS_AS(geometry::triangulate({proj.cam.u, proj.cam.v}, proj.prj.u, calib), Error);
}

TEST_CASE("solve_vp: identity rig gives v_p = 0 for centered pixel") {
  const auto calib = identity_rig({10, 0, 0});
  for (double u_p : {0.0, 0.25, 3.0}) {
    CHECK(geometry::solve_vp({0.0, 0.0}, u_p, calib) == doctest::Approx(0.0));
  }
}

TEST_CASE("solve_vp: vertical baseline has no v_p solution") {
  const auto calib = identity_rig({0, 10, 0});
  CHECK_THROWS_AS(geometry::solve_vp({0.0, 0.0}, 0.1, calib), Error);
  try {
    geometry::solve_vp({0.0, 0.0}, 0.1, calib);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::epipolar_degenerate);
  }
}

TEST_CASE("stereo calibration validation") {
  Eigen::Matrix3d bad_R = Eigen::Matrix3d::Identity();
  bad_R(0, 1) = 1e-6;  // not orthonormal
  CHECK_THROWS_AS(StereoCalibration::make(Eigen::Matrix3d::Identity(),
                                          Eigen::Matrix3d::Identity(), bad_R, {10, 0, 0},
                                          {10, 10}, {10, 10}),
                  Error);

  Eigen::Matrix3d bad_K = Eigen::Matrix3d::Identity();
  bad_K(1, 0) = 2.0;  // lower-triangular junk
  CHECK_THROWS_AS(StereoCalibration::make(bad_K, Eigen::Matrix3d::Identity(),
                                          Eigen::Matrix3d::Identity(), {10, 0, 0}, {10, 10},
                                          {10, 10}),
                  Error);

  Eigen::Matrix3d reflected = Eigen::Matrix3d::Identity();
  reflected(2, 2) = -1.0;  // det -1
  CHECK_THROWS_AS(StereoCalibration::make(Eigen::Matrix3d::Identity(), bad_K, reflected,
                                          {10, 0, 0}, {10, 10}, {10, 10}),
                  Error);
}

TEST_CASE("depth map to point cloud") {
  const auto calib = identity_rig({10, 0, 0});

  ChannelRaster depth(4, 3);
  depth.invalidate_all();
  CHECK(geometry::depth_map_to_point_cloud(depth, calib).empty());

  depth.at(0, 0) = 100.0;
  depth.set_valid(0, 0, true);
  const auto cloud = geometry::depth_map_to_point_cloud(depth, calib);
  REQUIRE(cloud.size() == 1);
  CHECK(cloud[0].x == doctest::Approx(0.0));
  CHECK(cloud[0].y == doctest::Approx(0.0));
  CHECK(cloud[0].z == doctest::Approx(100.0));
}
