#include <doctest.h>

#include <cmath>

#include "core/errors.hpp"
#include "core/pipeline.hpp"
#include "core/sim.hpp"

using namespace lcamv;
using pipeline::CalibrationBundle;
using pipeline::Mode;
using pipeline::PipelineConfig;

namespace {

geometry::StereoCalibration test_rig() { return sim::make_default_rig(0.15); }

phase::FringeConfig test_fringe(const geometry::StereoCalibration& rig, int steps = 3) {
  phase::FringeConfig f;
  f.wavelength = 36.0;
  f.periods = 4;
  f.steps = steps;
  f.prj_width = rig.prj_size()[0];
  f.prj_height = rig.prj_size()[1];
  return f;
}

sim::Scene white_plane(double z = 320.0) {
  sim::Scene scene;
  scene.geometry = sim::PlaneGeometry{{0.0, 0.0, 1.0}, z};
  return scene;
}

prj_lca::PrjLcaMaps zero_maps(const geometry::StereoCalibration& rig) {
  prj_lca::PrjLcaMaps maps;
  const int w = rig.prj_size()[0], h = rig.prj_size()[1];
  maps.red.alpha = ChannelRaster(w, h, 0.0);
  maps.red.beta = ChannelRaster(w, h, 0.0);
  maps.blue.alpha = ChannelRaster(w, h, 0.0);
  maps.blue.beta = ChannelRaster(w, h, 0.0);
  return maps;
}

CalibrationBundle identity_bundle(const geometry::StereoCalibration& rig,
                                  std::array<noise::NoiseParams, 3> k) {
  CalibrationBundle b{rig, cam_lca::CamLcaParams{}, cam_lca::CamLcaParams{}, zero_maps(rig), k};
  return b;
}

double masked_mse(const ChannelRaster& a, const ChannelRaster& b) {
  double sum = 0.0;
  size_t n = 0;
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x)
      if (a.valid(x, y) && b.valid(x, y)) {
        const double d = a.at(x, y) - b.at(x, y);
        sum += d * d;
        ++n;
      }
  REQUIRE(n > 500);
  return sum / n;
}

}  // namespace

TEST_CASE("pipeline: noiseless LCA-free plane reconstructs exactly") {
  const auto rig = test_rig();
  const auto stack = sim::render(white_plane(), rig, test_fringe(rig));
  const auto bundle = identity_bundle(rig, {});  // zero-noise coefficients

  PipelineConfig config;
  config.mode = Mode::lcamv;
  const auto result = pipeline::run_pipeline(stack, bundle, config);
  CHECK(masked_mse(result.depth, stack.truth.depth) < 1e-10);

  // Every cloud point sits on the scene plane (z = 320 in camera coords).
  // The bound scales with this small rig's depth sensitivity (~6.7x the
  // default rig, where the acceptance suite checks 1e-6).
  const auto cloud = geometry::depth_map_to_point_cloud(result.depth, rig);
  REQUIRE(cloud.size() > 1000);
  double worst = 0.0;
  for (const auto& p : cloud) worst = std::max(worst, std::abs(p.z - 320.0));
  CHECK(worst < 7e-6);
}

TEST_CASE("pipeline: LCAMV with identity maps equals MV-only") {
  const auto rig = test_rig();
  sim::Scene scene = white_plane();
  scene.noise = sim::default_sensor_noise();
  scene.seed = 21;
  const auto stack = sim::render(scene, rig, test_fringe(rig));
  const auto bundle = identity_bundle(rig, sim::default_sensor_noise());

  PipelineConfig config;
  config.mode = Mode::lcamv;
  const auto lcamv_result = pipeline::run_pipeline(stack, bundle, config);
  config.mode = Mode::mv_only;
  const auto mv_result = pipeline::run_pipeline(stack, bundle, config);

  // Where a channel's LUT lookup falls in the half-open edge band of the
  // projector, LCAMV masks it and the fusion runs on fewer channels than
  // MV-only; equal fused variances certify identical channel sets.
  size_t compared = 0, exact = 0;
  for (int y = 0; y < lcamv_result.up_fused.height(); ++y) {
    for (int x = 0; x < lcamv_result.up_fused.width(); ++x) {
      if (!lcamv_result.up_fused.valid(x, y) || !mv_result.up_fused.valid(x, y)) continue;
      ++compared;
      if (lcamv_result.variance.at(x, y) != mv_result.variance.at(x, y)) continue;
      CHECK(std::abs(lcamv_result.up_fused.at(x, y) - mv_result.up_fused.at(x, y)) <= 1e-12);
      ++exact;
    }
  }
  CHECK(compared > 1000);
  CHECK(exact > 0.95 * compared);
}

TEST_CASE("pipeline: baseline modes run without LCA or noise artifacts") {
  const auto rig = test_rig();
  const auto stack = sim::render(white_plane(), rig, test_fringe(rig));
  CalibrationBundle bare{rig, {}, {}, {}, {}};

  PipelineConfig config;
  for (Mode mode : {Mode::green, Mode::mean, Mode::yuv}) {
    config.mode = mode;
    const auto result = pipeline::run_pipeline(stack, bare, config);
    CHECK(result.depth.count_valid() > 1000);
    CHECK(masked_mse(result.depth, stack.truth.depth) < 1e-6);
  }
}

TEST_CASE("pipeline: missing calibration names the stage") {
  const auto rig = test_rig();
  const auto stack = sim::render(white_plane(), rig, test_fringe(rig));
  PipelineConfig config;

  CalibrationBundle no_k{rig, cam_lca::CamLcaParams{}, cam_lca::CamLcaParams{}, zero_maps(rig),
                         {}};
  config.mode = Mode::lcamv;
  CHECK_THROWS_WITH_AS(pipeline::run_pipeline(stack, no_k, config),
                       doctest::Contains("ChannelFusion"), Error);

  CalibrationBundle no_theta{rig, {}, {}, {}, sim::default_sensor_noise()};
  CHECK_THROWS_WITH_AS(pipeline::run_pipeline(stack, no_theta, config),
                       doctest::Contains("CorrectCamLCA"), Error);

  config.mode = Mode::mv_only;
  CHECK_THROWS_AS(pipeline::run_pipeline(stack, no_k, config), Error);
}

TEST_CASE("projector LCA calibration: recovers injected maps and corrects a held-out pose") {
  const auto rig = test_rig();
  const auto fringe = test_fringe(rig, 18);

  sim::Scene base = white_plane();
  base.noise = sim::default_sensor_noise();
  base.true_prj_lca_r = sim::demo_prj_lca(Channel::R);
  base.true_prj_lca_b = sim::demo_prj_lca(Channel::B);

  std::vector<sim::CaptureStack> poses;
  const int n_poses = 18;
  for (int p = 0; p < n_poses; ++p) {
    sim::Scene scene = base;
    scene.geometry =
        sim::PlaneGeometry{{0.0, 0.0, 1.0}, 180.0 + 160.0 * p / (n_poses - 1.0)};
    scene.seed = 300 + p;
    poses.push_back(sim::render(scene, rig, fringe));
  }

  CalibrationBundle bundle{rig, cam_lca::CamLcaParams{}, cam_lca::CamLcaParams{}, {},
                           sim::default_sensor_noise()};
  PipelineConfig config;
  const auto calib = pipeline::calibrate_prj_lca_poses(poses, bundle, config);

  // Recovered alpha against the injected affine truth, over the calibrated
  // interior.
  const auto& truth = base.true_prj_lca_r;
  size_t checked = 0;
  double corr_strong = 0, corr_sign_ok = 0, corr_total = 0;
  for (int y = 0; y < calib.maps.red.alpha.height(); y += 5) {
    for (int x = 0; x < calib.maps.red.alpha.width(); x += 5) {
      if (!calib.maps.red.alpha.valid(x, y)) continue;
      const double un = static_cast<double>(x) / rig.prj_size()[0];
      const double vn = static_cast<double>(y) / rig.prj_size()[1];
      CHECK(std::abs(calib.maps.red.alpha.at(x, y) - truth.alpha_at(un, vn)) < 1e-3);
      ++checked;
      if (calib.correlation_r.valid(x, y)) {
        corr_total += 1;
        if (std::abs(calib.correlation_r.at(x, y)) > 0.9) corr_strong += 1;
        if (calib.correlation_r.at(x, y) * truth.alpha_at(un, vn) > 0) corr_sign_ok += 1;
      }
    }
  }
  CHECK(checked > 200);
  CHECK(corr_strong / corr_total > 0.5);   // strongly linear on most pixels
  CHECK(corr_sign_ok / corr_total > 0.95);  // sign follows the injected slope

  // Held-out pose: correcting the red channel must land on the ideal column.
  sim::Scene heldout = base;
  heldout.geometry = sim::PlaneGeometry{{0.0, 0.0, 1.0}, 262.0};
  heldout.seed = 999;
  const auto stack = sim::render(heldout, rig, fringe);
  const auto d = pipeline::decode_captures(stack.channels[0].fringe, stack.channels[0].gray,
                                           fringe, config, bundle.k->at(0).k0,
                                           bundle.k->at(0).k1, Channel::R);
  const auto corrected = prj_lca::correct_up(d.field, calib.maps.red, rig);
  double sum = 0.0;
  size_t n = 0;
  for (int y = 0; y < corrected.u_p.height(); ++y) {
    for (int x = 0; x < corrected.u_p.width(); ++x) {
      if (!corrected.u_p.valid(x, y) || !stack.truth.up_ideal.valid(x, y)) continue;
      const double e = corrected.u_p.at(x, y) - stack.truth.up_ideal.at(x, y);
      sum += e * e;
      ++n;
    }
  }
  REQUIRE(n > 1000);
  CHECK(std::sqrt(sum / n) < 0.05);  // px RMS
}

TEST_CASE("plug-in correction: a second iteration moves the estimate negligibly") {
  const auto rig = sim::make_default_rig(1.0);  // full-rig depth sensitivity
  const auto truth = sim::demo_prj_lca(Channel::R);

  prj_lca::ChannelMaps maps;
  maps.alpha = ChannelRaster(rig.prj_size()[0], rig.prj_size()[1]);
  maps.beta = ChannelRaster(rig.prj_size()[0], rig.prj_size()[1]);
  for (int y = 0; y < maps.alpha.height(); ++y)
    for (int x = 0; x < maps.alpha.width(); ++x) {
      const double un = static_cast<double>(x) / maps.alpha.width();
      const double vn = static_cast<double>(y) / maps.alpha.height();
      maps.alpha.at(x, y) = truth.alpha_at(un, vn);
      maps.beta.at(x, y) = truth.beta_at(un, vn);
    }

  // Sparse field: center-region camera pixels viewing a plane at 320 mm.
  ProjectorPixelField field;
  field.channel = Channel::R;
  field.u_p = ChannelRaster(rig.cam_size()[0], rig.cam_size()[1]);
  field.u_p.invalidate_all();
  const sim::PlaneGeometry plane{{0.0, 0.0, 1.0}, 320.0};
  std::vector<std::pair<int, int>> pixels;
  for (int y = 400; y <= 800; y += 50) {
    for (int x = 700; x <= 1200; x += 50) {
      const Eigen::Vector3d dir = rig.K_c_inv() * Eigen::Vector3d(x, y, 1.0);
      const Eigen::Vector3d point = (plane.distance / dir.z()) * dir;
      const auto proj = rig.project(point);
      if (proj.prj.u < 1 || proj.prj.u > rig.prj_size()[0] - 2) continue;
      const double un = proj.prj.u / rig.prj_size()[0];
      const double vn = proj.prj.v / rig.prj_size()[1];
      const double delta = truth.alpha_at(un, vn) * proj.s_p + truth.beta_at(un, vn);
      field.u_p.at(x, y) = proj.prj.u - delta;  // the aberrated observation
      field.u_p.set_valid(x, y, true);
      pixels.push_back({x, y});
    }
  }
  REQUIRE(pixels.size() > 20);

  const auto once = prj_lca::correct_up(field, maps, rig);
  for (const auto& [x, y] : pixels) {
    if (!once.u_p.valid(x, y)) continue;
    // Second plug-in pass: re-triangulate with the corrected column.
    const auto tri =
        geometry::triangulate({double(x), double(y)}, once.u_p.at(x, y), rig);
    const double un = once.u_p.at(x, y) / rig.prj_size()[0];
    const double vn = tri.v_p / rig.prj_size()[1];
    const double twice = field.u_p.at(x, y) +
                         (truth.alpha_at(un, vn) * tri.s_p + truth.beta_at(un, vn));
    CHECK(std::abs(twice - once.u_p.at(x, y)) < 1e-3);
  }
}

TEST_CASE("overlapping spectra: calibrated maps absorb crosstalk, green alone cannot") {
  // With a channel mixing matrix, every camera channel inherits a blend of
  // the band aberrations. White-plate calibration absorbs the blend into the
  // per-channel maps; the green-only baseline has no such defense on
  // saturated patches, where its signal comes mostly from the red band.
  const auto rig = test_rig();
  const auto fringe = test_fringe(rig, 12);

  sim::Scene base = white_plane();
  base.noise = sim::default_sensor_noise();
  base.true_prj_lca_r = sim::demo_prj_lca(Channel::R);
  base.true_prj_lca_b = sim::demo_prj_lca(Channel::B);
  base.crosstalk = sim::overlap_crosstalk();

  std::vector<sim::CaptureStack> poses;
  for (int p = 0; p < 10; ++p) {
    sim::Scene scene = base;
    scene.geometry = sim::PlaneGeometry{{0.0, 0.0, 1.0}, 180.0 + 160.0 * p / 9.0};
    scene.seed = 800 + p;
    poses.push_back(sim::render(scene, rig, fringe));
  }
  CalibrationBundle bundle{rig, cam_lca::CamLcaParams{}, cam_lca::CamLcaParams{}, {},
                           sim::default_sensor_noise()};
  PipelineConfig config;
  bundle.theta_p = pipeline::calibrate_prj_lca_poses(poses, bundle, config).maps;

  // Held-out white pose: the mixture-absorbed maps still align the channel.
  sim::Scene heldout = base;
  heldout.geometry = sim::PlaneGeometry{{0.0, 0.0, 1.0}, 250.0};
  heldout.seed = 4243;
  const auto white_stack = sim::render(heldout, rig, fringe);
  const auto d = pipeline::decode_captures(white_stack.channels[0].fringe,
                                           white_stack.channels[0].gray, fringe, config,
                                           bundle.k->at(0).k0, bundle.k->at(0).k1, Channel::R);
  const auto corrected = prj_lca::correct_up(d.field, bundle.theta_p->red, rig);
  const auto g = pipeline::decode_captures(white_stack.channels[1].fringe,
                                           white_stack.channels[1].gray, fringe, config,
                                           bundle.k->at(1).k0, bundle.k->at(1).k1, Channel::G);
  double sum = 0;
  size_t n = 0;
  for (int y = 0; y < corrected.u_p.height(); ++y)
    for (int x = 0; x < corrected.u_p.width(); ++x)
      if (corrected.u_p.valid(x, y) && g.field.u_p.valid(x, y)) {
        const double e = corrected.u_p.at(x, y) - g.field.u_p.at(x, y);
        sum += e * e;
        ++n;
      }
  REQUIRE(n > 1000);
  CHECK(std::sqrt(sum / n) < 0.05);

  // Colorboard: green-only carries the blended aberration, LCAMV does not.
  sim::Scene board = sim::make_colorboard_scene(8, 6, 99);
  board.geometry = sim::PlaneGeometry{{0.0, 0.0, 1.0}, 320.0};
  board.noise = base.noise;
  board.true_prj_lca_r = base.true_prj_lca_r;
  board.true_prj_lca_b = base.true_prj_lca_b;
  board.crosstalk = base.crosstalk;
  board.seed = 1234;
  const auto stack = sim::render(board, rig, fringe);

  auto mse_vs_truth = [&](Mode mode) {
    config.mode = mode;
    return masked_mse(pipeline::run_pipeline(stack, bundle, config).depth, stack.truth.depth);
  };
  const double mse_lcamv = mse_vs_truth(Mode::lcamv);
  const double mse_green = mse_vs_truth(Mode::green);
  CHECK(mse_lcamv < mse_green);
}

TEST_CASE("gray order matches the ideal fringe period everywhere in view") {
  const auto rig = test_rig();
  const auto fringe = test_fringe(rig);
  const auto stack = sim::render(white_plane(), rig, fringe);
  PipelineConfig config;
  const auto d = pipeline::decode_captures(stack.channels[1].fringe, stack.channels[1].gray,
                                           fringe, config, 0.0, 0.0, Channel::G);
  size_t checked = 0;
  for (int y = 0; y < d.order.height(); y += 3)
    for (int x = 0; x < d.order.width(); x += 3)
      if (d.field.u_p.valid(x, y) && stack.truth.up_ideal.valid(x, y)) {
        CHECK(d.order.at(x, y) ==
              static_cast<int32_t>(stack.truth.up_ideal.at(x, y) / fringe.wavelength));
        ++checked;
      }
  CHECK(checked > 1000);
}

TEST_CASE("remap: projector-space depth agrees with the projector-ray oracle") {
  const auto rig = test_rig();
  const auto fringe = test_fringe(rig);
  const sim::PlaneGeometry plane{{0.0, 0.0, 1.0}, 300.0};
  sim::Scene scene = white_plane();
  scene.geometry = plane;
  const auto stack = sim::render(scene, rig, fringe);

  PipelineConfig config;
  const auto d = pipeline::decode_captures(stack.channels[1].fringe, stack.channels[1].gray,
                                           fringe, config, 0.0, 0.0, Channel::G);
  const int w = d.field.u_p.width(), h = d.field.u_p.height();
  ChannelRaster delta(w, h), up(w, h), vp(w, h), zp(w, h);
  delta.invalidate_all();
  up.invalidate_all();
  vp.invalidate_all();
  zp.invalidate_all();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!d.field.u_p.valid(x, y)) continue;
      const auto tri = geometry::triangulate({double(x), double(y)}, d.field.u_p.at(x, y), rig);
      if (!tri.valid) continue;
      delta.at(x, y) = 0.0;
      up.at(x, y) = d.field.u_p.at(x, y);
      vp.at(x, y) = tri.v_p;
      zp.at(x, y) = tri.s_p;
      delta.set_valid(x, y, true);
      up.set_valid(x, y, true);
      vp.set_valid(x, y, true);
      zp.set_valid(x, y, true);
    }
  const auto pose =
      prj_lca::remap_to_projector(delta, up, vp, zp, rig.prj_size()[0], rig.prj_size()[1]);

  // Independent oracle: intersect the projector ray of pixel (u, v) with the
  // plane expressed in projector coordinates.
  const Eigen::Vector3d n_p = rig.R() * Eigen::Vector3d(0, 0, 1);
  const double d_p = plane.distance + n_p.dot(rig.t());
  double sum = 0.0;
  size_t count = 0;
  for (int v = 0; v < pose.z.height(); v += 4) {
    for (int u = 0; u < pose.z.width(); u += 4) {
      if (!pose.z.valid(u, v)) continue;
      const Eigen::Vector3d dir = rig.K_p_inv() * Eigen::Vector3d(u, v, 1.0);
      const double z_oracle = d_p / n_p.dot(dir);
      const double e = pose.z.at(u, v) - z_oracle;
      sum += e * e;
      ++count;
    }
  }
  REQUIRE(count > 500);
  CHECK(std::sqrt(sum / count) < 0.1);  // mm RMS
}

TEST_CASE("fusion weights follow the surface color") {
  // Left half strongly red, right half strongly blue: the red channel must
  // dominate on the left and the blue channel on the right.
  const auto rig = test_rig();
  const auto fringe = test_fringe(rig, 3);
  sim::Scene scene = white_plane();
  sim::PatchTexture tex;
  tex.cols = 2;
  tex.rows = 1;
  tex.colors = {{1.0, 0.15, 0.05}, {0.05, 0.15, 1.0}};
  scene.patches = tex;
  scene.noise = sim::default_sensor_noise();
  scene.seed = 77;
  const auto stack = sim::render(scene, rig, fringe);

  PipelineConfig config;
  std::array<pipeline::DecodedChannel, 3> decoded;
  const auto k = sim::default_sensor_noise();
  for (int c = 0; c < 3; ++c)
    decoded[c] = pipeline::decode_captures(stack.channels[c].fringe, stack.channels[c].gray,
                                           fringe, config, k[c].k0, k[c].k1,
                                           static_cast<Channel>(c));
  std::array<fusion::FuseChannelInput, 3> inputs;
  for (int c = 0; c < 3; ++c)
    inputs[c] = {&decoded[c].field, &decoded[c].wrapped.i_a, &decoded[c].wrapped.i_b, k[c]};
  std::array<ChannelRaster, 3> weights;
  const auto fused = fusion::fuse_fields(inputs, fringe.wavelength, fringe.steps, 2.72,
                                         &weights);

  double wr_left = 0, wb_left = 0, wr_right = 0, wb_right = 0;
  size_t n_left = 0, n_right = 0;
  const int w = fused.u_p.width();
  for (int y = 0; y < fused.u_p.height(); y += 2) {
    for (int x = 0; x < w; x += 2) {
      if (!fused.u_p.valid(x, y)) continue;
      if (x < w * 3 / 8) {
        wr_left += weights[0].at(x, y);
        wb_left += weights[2].at(x, y);
        ++n_left;
      } else if (x > w * 5 / 8) {
        wr_right += weights[0].at(x, y);
        wb_right += weights[2].at(x, y);
        ++n_right;
      }
    }
  }
  REQUIRE(n_left > 200);
  REQUIRE(n_right > 200);
  CHECK(wr_left / n_left > wb_left / n_left);
  CHECK(wb_right / n_right > wr_right / n_right);
}

TEST_CASE("noise calibration: flat-field chain recovers the injected coefficients") {
  const auto rig = sim::make_default_rig(0.08);  // 154x96 : |D| > 1e4
  sim::Scene scene = white_plane();
  scene.noise = sim::default_sensor_noise();
  scene.seed = 71;
  std::vector<double> levels;
  for (int i = 0; i < 12; ++i) levels.push_back(2.0 + 248.0 * i / 11.0);
  const auto flats = sim::render_flat_pairs(scene, rig, levels);
  const auto k = pipeline::calibrate_noise_levels(flats, {});
  for (int c = 0; c < 3; ++c) {
    CHECK(k[c].k0 == doctest::Approx(scene.noise[c].k0).epsilon(0.10));
    CHECK(k[c].k1 == doctest::Approx(scene.noise[c].k1).epsilon(0.10));
  }
}
