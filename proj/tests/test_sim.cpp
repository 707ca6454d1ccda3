#include <doctest.h>

#include <cmath>

#include "core/errors.hpp"
#include "core/parallel.hpp"
#include "core/pipeline.hpp"
#include "core/sim.hpp"

using namespace lcamv;

namespace {

// Small rig + short gray stack keeps render tests fast.
geometry::StereoCalibration test_rig() { return sim::make_default_rig(0.15); }

phase::FringeConfig test_fringe(const geometry::StereoCalibration& rig, int steps = 3) {
  phase::FringeConfig f;
  f.wavelength = 36.0;
  f.periods = 4;  // 4 * 36 = 144 >= 137-px projector
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

double masked_max_abs_diff(const ChannelRaster& a, const ChannelRaster& b) {
  double worst = 0.0;
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x)
      if (a.valid(x, y) && b.valid(x, y))
        worst = std::max(worst, std::abs(a.at(x, y) - b.at(x, y)));
  return worst;
}

}  // namespace

TEST_CASE("colorboard scenes: patch count, determinism, degenerate grid") {
  const auto a = sim::make_colorboard_scene(8, 6, 7);
  REQUIRE(a.patches.has_value());
  CHECK(a.patches->colors.size() == 48);
  const auto b = sim::make_colorboard_scene(8, 6, 7);
  for (size_t i = 0; i < 48; ++i)
    for (int c = 0; c < 3; ++c) CHECK(a.patches->colors[i][c] == b.patches->colors[i][c]);
  const auto c = sim::make_colorboard_scene(8, 6, 8);
  bool any_diff = false;
  for (size_t i = 0; i < 48; ++i)
    for (int k = 0; k < 3; ++k) any_diff |= a.patches->colors[i][k] != c.patches->colors[i][k];
  CHECK(any_diff);
  CHECK_THROWS_AS(sim::make_colorboard_scene(0, 6, 1), Error);
}

TEST_CASE("render: noiseless white plane ground truth") {
  const auto rig = test_rig();
  const auto stack = sim::render(white_plane(), rig, test_fringe(rig));
  CHECK(stack.truth.depth.count_valid() > 1000);
  for (int y = 0; y < stack.truth.depth.height(); y += 13) {
    for (int x = 0; x < stack.truth.depth.width(); x += 17) {
      if (!stack.truth.depth.valid(x, y)) continue;
      CHECK(stack.truth.depth.at(x, y) == doctest::Approx(320.0).epsilon(1e-12));
      CHECK(stack.truth.z_p.at(x, y) > 0.0);
    }
  }
  // Energy bound: noiseless intensities stay within the pattern swing.
  for (const auto& img : stack.channels[1].fringe)
    for (size_t i = 0; i < img.size(); ++i) {
      CHECK(img[i] >= 0.0f);
      CHECK(img[i] <= 255.0f);
    }
}

TEST_CASE("render: scene behind the camera is not visible") {
  const auto rig = test_rig();
  CHECK_THROWS_AS(sim::render(white_plane(-100.0), rig, test_fringe(rig)), Error);
}

TEST_CASE("render + decode: noiseless chain reproduces the ideal projector column") {
  const auto rig = test_rig();
  const auto fringe = test_fringe(rig);
  const auto stack = sim::render(white_plane(), rig, fringe);

  pipeline::PipelineConfig config;
  const auto d = pipeline::decode_captures(stack.channels[1].fringe, stack.channels[1].gray,
                                           fringe, config, 0.0, 0.0, Channel::G);
  CHECK(d.field.u_p.count_valid() > 1000);
  CHECK(masked_max_abs_diff(d.field.u_p, stack.truth.up_ideal) < 1e-6);
}

TEST_CASE("render: injected constant projector LCA is observable") {
  const auto rig = test_rig();
  const auto fringe = test_fringe(rig);
  sim::Scene scene = white_plane();
  scene.true_prj_lca_r.beta = {0.3, 0.0, 0.0};  // constant Delta_O^R = +0.3 px
  const auto stack = sim::render(scene, rig, fringe);

  for (int y = 0; y < stack.truth.delta_r.height(); y += 11)
    for (int x = 0; x < stack.truth.delta_r.width(); x += 11)
      if (stack.truth.delta_r.valid(x, y))
        CHECK(stack.truth.delta_r.at(x, y) == doctest::Approx(0.3));

  pipeline::PipelineConfig config;
  const auto g = pipeline::decode_captures(stack.channels[1].fringe, stack.channels[1].gray,
                                           fringe, config, 0.0, 0.0, Channel::G);
  const auto r = pipeline::decode_captures(stack.channels[0].fringe, stack.channels[0].gray,
                                           fringe, config, 0.0, 0.0, Channel::R);
  const auto delta = prj_lca::observe_delta(g.field, r.field);
  size_t checked = 0;
  for (int y = 0; y < delta.height(); y += 7) {
    for (int x = 0; x < delta.width(); x += 7) {
      if (!delta.valid(x, y)) continue;
      CHECK(delta.at(x, y) == doctest::Approx(0.3).epsilon(1e-6));
      ++checked;
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("render: camera-LCA injection is undone by correct_image") {
  const auto rig = test_rig();
  const auto fringe = test_fringe(rig);
  sim::Scene scene = white_plane();
  // Scaled-down rig: recenter the demo decentering to this image size.
  cam_lca::CamLcaParams theta = sim::demo_cam_lca(Channel::R);
  theta.du = -rig.cam_size()[0] / 2.0 * theta.a;
  theta.dv = -rig.cam_size()[1] / 2.0;
  theta.c1 *= 4.0;  // keep a visible displacement on the small image
  scene.true_cam_lca_r = theta;
  const auto stack = sim::render(scene, rig, fringe);

  // With a white scene and identity crosstalk, the G capture is the unwarped
  // reference for the R capture. Compare inside the lit region only: the
  // fringe is smooth there, while the projector-FoV edge carries a step that
  // bilinear resampling cannot reproduce.
  const auto corrected = cam_lca::correct_image(stack.channels[0].fringe[0], theta);
  const auto& lit = stack.truth.depth;
  auto interior = [&](int x, int y) {
    for (int dy = -3; dy <= 3; ++dy)
      for (int dx = -3; dx <= 3; ++dx) {
        const int nx = x + dx, ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= lit.width() || ny >= lit.height()) return false;
        if (!lit.valid(nx, ny)) return false;
      }
    return true;
  };
  double worst = 0.0;
  size_t compared = 0;
  const auto& ref = stack.channels[1].fringe[0];
  for (int y = 0; y < ref.height(); ++y)
    for (int x = 0; x < ref.width(); ++x)
      if (corrected.valid(x, y) && interior(x, y)) {
        worst = std::max(worst,
                         std::abs(static_cast<double>(corrected.at(x, y)) - ref.at(x, y)));
        ++compared;
      }
  CHECK(compared > 1000);
  CHECK(worst < 0.5);  // bilinear resampling error on a smooth fringe
}

TEST_CASE("flat pairs: noiseless members identical, read noise at black level") {
  const auto rig = sim::make_default_rig(0.08);
  sim::Scene clean = white_plane();
  const auto quiet = sim::render_flat_pairs(clean, rig, {0.0, 100.0});
  for (const auto& lvl : quiet)
    for (int c = 0; c < 3; ++c)
      for (size_t i = 0; i < lvl.captures[c][0].size(); ++i)
        CHECK(lvl.captures[c][0][i] == lvl.captures[c][1][i]);

  sim::Scene noisy = white_plane();
  noisy.noise = {noise::NoiseParams{0.25, 0.0, false}, noise::NoiseParams{0.25, 0.0, false},
                 noise::NoiseParams{0.25, 0.0, false}};
  noisy.seed = 5;
  const auto flats = sim::render_flat_pairs(noisy, rig, {0.0, 100.0});
  const auto sample = noise::estimate_pixel_noise(
      flats[0].captures[1][0], flats[0].captures[1][1],
      {0, 0, flats[0].captures[1][0].width(), flats[0].captures[1][0].height()});
  CHECK(sample.var_hat == doctest::Approx(0.25).epsilon(0.05));
  CHECK(sample.mu_hat == doctest::Approx(0.0).epsilon(0.05));
}

TEST_CASE("render: identical output for any worker count") {
  const auto rig = sim::make_default_rig(0.08);
  sim::Scene scene = white_plane();
  scene.noise = sim::default_sensor_noise();
  scene.seed = 99;
  scene.quantize = true;

  set_thread_count(1);
  const auto a = sim::render(scene, rig, test_fringe(rig));
  set_thread_count(2);
  const auto b = sim::render(scene, rig, test_fringe(rig));
  set_thread_count(0);

  for (int c = 0; c < 3; ++c) {
    REQUIRE(a.channels[c].fringe.size() == b.channels[c].fringe.size());
    for (size_t i = 0; i < a.channels[c].fringe.size(); ++i)
      for (size_t p = 0; p < a.channels[c].fringe[i].size(); ++p)
        CHECK(a.channels[c].fringe[i][p] == b.channels[c].fringe[i][p]);
  }
}
