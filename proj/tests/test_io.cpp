#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "core/errors.hpp"
#include "core/pipeline.hpp"
#include "core/sim.hpp"
#include "io/calib_json.hpp"
#include "io/dataset.hpp"
#include "io/f32r.hpp"
#include "io/ply.hpp"
#include "io/png_io.hpp"

using namespace lcamv;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("lcamv_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const char* name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("F32R: round trip with and without mask") {
  TempDir tmp;
  ChannelRaster r(13, 7);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> uni(-100.0, 100.0);
  for (size_t i = 0; i < r.size(); ++i) r[i] = uni(rng);

  io::write_f32r(tmp.file("plain.f32r"), r);
  const auto back = io::read_f32r(tmp.file("plain.f32r"));
  REQUIRE(back.same_size(r));
  CHECK_FALSE(back.has_mask());
  for (size_t i = 0; i < r.size(); ++i)
    CHECK(back[i] == static_cast<double>(static_cast<float>(r[i])));

  r.set_valid(3, 2, false);
  io::write_f32r(tmp.file("masked.f32r"), r);
  const auto masked = io::read_f32r(tmp.file("masked.f32r"));
  CHECK(masked.has_mask());
  CHECK_FALSE(masked.valid(3, 2));
  CHECK(masked.valid(0, 0));
}

TEST_CASE("F32R: rejects junk") {
  TempDir tmp;
  {
    std::ofstream os(tmp.file("junk.f32r"), std::ios::binary);
    os << "not a raster at all";
  }
  CHECK_THROWS_AS(io::read_f32r(tmp.file("junk.f32r")), Error);
  CHECK_THROWS_AS(io::read_f32r(tmp.file("missing.f32r")), Error);
}

TEST_CASE("PNG: 8-bit and 16-bit grayscale round trips") {
  TempDir tmp;
  ImageRaster img(9, 5);
  for (size_t i = 0; i < img.size(); ++i) img[i] = static_cast<float>((i * 7) % 256);

  io::write_png8(tmp.file("img8.png"), img);
  const auto back8 = io::read_png(tmp.file("img8.png"));
  REQUIRE(back8.same_size(img));
  for (size_t i = 0; i < img.size(); ++i) CHECK(back8[i] == img[i]);

  ChannelRaster fine(9, 5);
  for (size_t i = 0; i < fine.size(); ++i) fine[i] = (i * 255.0) / fine.size();
  io::write_png16(tmp.file("img16.png"), fine);
  const auto back16 = io::read_png(tmp.file("img16.png"));
  for (size_t i = 0; i < fine.size(); ++i)
    CHECK(std::abs(back16[i] - fine[i]) <= 0.5 / 257.0 + 1e-9);  // one 16-bit step
}

TEST_CASE("calibration bundle: JSON round trip with all optional blocks") {
  TempDir tmp;
  pipeline::CalibrationBundle bundle{sim::make_default_rig(0.25), {}, {}, {}, {}};
  bundle.theta_c_r = cam_lca::CamLcaParams{1.01, -5, 3, 1e-3, 2e-10, 3e-8, -4e-8};
  bundle.theta_c_b = cam_lca::CamLcaParams{0.99, 4, -2, -2e-3, 1e-10, -1e-8, 2e-8};
  prj_lca::PrjLcaMaps maps;
  const int w = bundle.stereo.prj_size()[0], h = bundle.stereo.prj_size()[1];
  maps.red.alpha = ChannelRaster(w, h, 0.001);
  maps.red.beta = ChannelRaster(w, h, -0.08);
  maps.blue.alpha = ChannelRaster(w, h, -0.0009);
  maps.blue.beta = ChannelRaster(w, h, 0.04);
  maps.blue.beta.set_valid(1, 1, false);
  bundle.theta_p = maps;
  bundle.k = sim::default_sensor_noise();

  io::save_calibration(tmp.file("calib.json"), bundle);
  const auto back = io::load_calibration(tmp.file("calib.json"));

  CHECK((back.stereo.K_c() - bundle.stereo.K_c()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((back.stereo.R() - bundle.stereo.R()).cwiseAbs().maxCoeff() < 1e-12);
  REQUIRE(back.theta_c_r.has_value());
  CHECK(back.theta_c_r->c1 == doctest::Approx(1e-3));
  REQUIRE(back.theta_p.has_value());
  CHECK(back.theta_p->red.alpha.at(2, 2) == doctest::Approx(0.001));
  CHECK_FALSE(back.theta_p->blue.beta.valid(1, 1));
  REQUIRE(back.k.has_value());
  CHECK((*back.k)[1].k0 == doctest::Approx(0.1184));

  CHECK_THROWS_AS(io::load_calibration(tmp.file("absent.json")), Error);
}

TEST_CASE("dataset: save and load a small capture stack") {
  TempDir tmp;
  const auto rig = sim::make_default_rig(0.08);
  phase::FringeConfig fringe;
  fringe.wavelength = 36.0;
  fringe.periods = 4;
  fringe.steps = 3;
  fringe.prj_width = rig.prj_size()[0];
  fringe.prj_height = rig.prj_size()[1];

  sim::Scene scene;
  scene.geometry = sim::PlaneGeometry{{0, 0, 1}, 320.0};
  scene.noise = sim::default_sensor_noise();
  scene.quantize = true;
  scene.seed = 4;
  const auto stack = sim::render(scene, rig, fringe);
  io::save_dataset(tmp.file("data"), stack, rig, scene);

  const auto back = io::load_dataset(tmp.file("data"));
  CHECK(back.fringe.steps == 3);
  CHECK(back.seed == 4);
  REQUIRE(back.channels[0].fringe.size() == 3);
  REQUIRE(back.channels[0].gray.size() == 2);
  // Quantized captures survive the PNG round trip exactly.
  for (size_t i = 0; i < stack.channels[1].fringe[0].size(); ++i)
    CHECK(back.channels[1].fringe[0][i] == stack.channels[1].fringe[0][i]);
  CHECK_FALSE(back.truth.depth.empty());
  CHECK(back.truth.depth.at(back.truth.depth.width() / 2, back.truth.depth.height() / 2) ==
        doctest::Approx(320.0));

  const auto bundle = io::load_calibration(tmp.file("data/calib.json"));
  CHECK(bundle.stereo.cam_size()[0] == rig.cam_size()[0]);
}

TEST_CASE("corners and flat fields round trip") {
  TempDir tmp;
  const auto corners = sim::make_corner_set({640, 480}, 5, 4, sim::demo_cam_lca(Channel::R),
                                            sim::demo_cam_lca(Channel::B), 0.0, 1);
  io::save_corners(tmp.file("corners.json"), corners);
  const auto back = io::load_corners(tmp.file("corners.json"));
  REQUIRE(back.reference.size() == corners.reference.size());
  CHECK(back.observed_r[3].u == doctest::Approx(corners.observed_r[3].u));

  const auto rig = sim::make_default_rig(0.05);
  sim::Scene scene;
  scene.geometry = sim::PlaneGeometry{{0, 0, 1}, 320.0};
  scene.noise = sim::default_sensor_noise();
  scene.seed = 2;
  const auto flats = sim::render_flat_pairs(scene, rig, {10.0, 120.0, 240.0});
  io::save_flat_fields(tmp.file("flat"), flats, false);
  const auto flats_back = io::load_flat_fields(tmp.file("flat"));
  REQUIRE(flats_back.size() == 3);
  CHECK(flats_back[1].level == doctest::Approx(120.0));
  for (size_t i = 0; i < flats[0].captures[0][0].size(); ++i)
    CHECK(flats_back[0].captures[0][0][i] == flats[0].captures[0][0][i]);
}

TEST_CASE("loaders: malformed documents fail naming the file") {
  TempDir tmp;
  {
    std::ofstream os(tmp.file("bad_corners.json"));
    os << R"({"reference": [[1,2],[3,4]], "observed": {"R": [[1,2]], "B": [[1,2],[3,4]]}})";
  }
  CHECK_THROWS_AS(io::load_corners(tmp.file("bad_corners.json")), Error);

  fs::create_directories(tmp.path / "ds");
  {
    std::ofstream os(tmp.file("ds/manifest.json"));
    os << R"({"kind": "lcamv-dataset"})";  // fringe block missing
  }
  try {
    io::load_dataset(tmp.file("ds"));
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::parse_failure);
    CHECK(std::string(e.what()).find("ds") != std::string::npos);
  }

  {
    std::ofstream os(tmp.file("bad_calib.json"));
    os << R"({"K_c": [1], "K_p": [], "R": [], "t": [], "cam_size": [], "prj_size": []})";
  }
  CHECK_THROWS_AS(io::load_calibration(tmp.file("bad_calib.json")), Error);
}

TEST_CASE("pattern stacks: playback file naming") {
  TempDir tmp;
  phase::FringeConfig fringe;
  fringe.wavelength = 36.0;
  fringe.periods = 32;
  fringe.steps = 3;
  fringe.prj_width = 912;
  fringe.prj_height = 16;
  io::save_patterns(tmp.file("patterns"), fringe);
  CHECK(fs::exists(tmp.path / "patterns" / "fringe_00.png"));
  CHECK(fs::exists(tmp.path / "patterns" / "fringe_02.png"));
  CHECK(fs::exists(tmp.path / "patterns" / "gray_04.png"));
  const auto img = io::read_png(tmp.file("patterns/fringe_01.png"));
  CHECK(img.width() == 912);
  // Zero-shift pattern peaks at the period start.
  CHECK(img.at(0, 0) == 255.0f);
}

TEST_CASE("PLY: header, vertex count, and deterministic bytes") {
  TempDir tmp;
  const auto calib = geometry::StereoCalibration::make(
      Eigen::Matrix3d::Identity(), Eigen::Matrix3d::Identity(), Eigen::Matrix3d::Identity(),
      {10, 0, 0}, {4, 4}, {4, 4});
  ChannelRaster depth(4, 4, 100.0);
  depth.set_valid(1, 1, false);
  std::array<ChannelRaster, 3> tex{ChannelRaster(4, 4, 10.0), ChannelRaster(4, 4, 120.0),
                                   ChannelRaster(4, 4, 260.0)};

  io::write_ply(tmp.file("a.ply"), depth, calib, tex);
  io::write_ply(tmp.file("b.ply"), depth, calib, tex);

  std::ifstream a(tmp.file("a.ply"), std::ios::binary), b(tmp.file("b.ply"), std::ios::binary);
  std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
  std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
  CHECK(sa == sb);
  CHECK(sa.find("element vertex 15") != std::string::npos);
  CHECK(sa.find("property uchar red") != std::string::npos);
  CHECK(sa.find(" 10 120 255\n") != std::string::npos);  // texture clamped to 8 bits
}
