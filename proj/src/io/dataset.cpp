#include "io/dataset.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "core/errors.hpp"
#include "io/calib_json.hpp"
#include "io/f32r.hpp"
#include "io/png_io.hpp"

namespace lcamv::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string index_name(const char* prefix, char ch, const char* kind, int i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%c_%s_%02d.%s", prefix, ch, kind, i, ext);
  return buf;
}

void write_capture(const fs::path& path, const ImageRaster& img, bool quantized) {
  if (quantized)
    write_png8(path.string(), img);
  else
    write_f32r(path.string(), to_channel_raster(img));
}

ImageRaster read_capture(const fs::path& path, bool quantized) {
  if (quantized) return read_png(path.string());
  const ChannelRaster r = read_f32r(path.string());
  ImageRaster img(r.width(), r.height());
  for (size_t i = 0; i < r.size(); ++i) img[i] = static_cast<float>(r[i]);
  if (r.has_mask()) img.mask_storage() = r.mask();
  return img;
}

json scene_to_json(const sim::Scene& scene) {
  json s;
  s["seed"] = scene.seed;
  s["quantize"] = scene.quantize;
  s["base_reflectance"] = scene.base_reflectance;
  if (const auto* plane = std::get_if<sim::PlaneGeometry>(&scene.geometry)) {
    s["geometry"] = {{"type", "plane"},
                     {"normal", {plane->normal.x(), plane->normal.y(), plane->normal.z()}},
                     {"distance", plane->distance}};
  } else {
    s["geometry"] = {{"type", "heightmap"}};
  }
  if (scene.patches) {
    json p;
    p["cols"] = scene.patches->cols;
    p["rows"] = scene.patches->rows;
    p["board_width"] = scene.patches->board_width;
    p["board_height"] = scene.patches->board_height;
    p["colors"] = scene.patches->colors;
    s["patches"] = p;
  }
  s["true_cam_lca"] = {{"R", scene.true_cam_lca_r.to_array()},
                       {"B", scene.true_cam_lca_b.to_array()}};
  s["true_prj_lca"] = {{"R", {{"alpha", scene.true_prj_lca_r.alpha},
                              {"beta", scene.true_prj_lca_r.beta}}},
                       {"B", {{"alpha", scene.true_prj_lca_b.alpha},
                              {"beta", scene.true_prj_lca_b.beta}}}};
  json k;
  const char* names[3] = {"R", "G", "B"};
  for (int c = 0; c < 3; ++c) k[names[c]] = {scene.noise[c].k0, scene.noise[c].k1};
  s["noise"] = k;
  json m = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m.push_back(scene.crosstalk(r, c));
  s["crosstalk"] = m;
  return s;
}

}  // namespace

void save_dataset(const std::string& dir, const sim::CaptureStack& stack,
                  const geometry::StereoCalibration& rig, const sim::Scene& scene) {
  fs::create_directories(dir);
  const fs::path base(dir);
  const bool quantized = scene.quantize;
  const char* ext = quantized ? "png" : "f32r";

  json manifest;
  manifest["kind"] = "lcamv-dataset";
  manifest["seed"] = stack.seed;
  manifest["format"] = quantized ? "png8" : "f32r";
  manifest["fringe"] = {{"wavelength", stack.fringe.wavelength},
                        {"periods", stack.fringe.periods},
                        {"steps", stack.fringe.steps}};
  manifest["calib"] = "calib.json";

  const char* channels = "RGB";
  json chan_meta;
  for (int c = 0; c < 3; ++c) {
    json fringe_files = json::array();
    json gray_files = json::array();
    for (size_t i = 0; i < stack.channels[c].fringe.size(); ++i) {
      const std::string name =
          index_name("cap", channels[c], "fringe", static_cast<int>(i), ext);
      write_capture(base / name, stack.channels[c].fringe[i], quantized);
      fringe_files.push_back(name);
    }
    for (size_t i = 0; i < stack.channels[c].gray.size(); ++i) {
      const std::string name = index_name("cap", channels[c], "gray", static_cast<int>(i), ext);
      write_capture(base / name, stack.channels[c].gray[i], quantized);
      gray_files.push_back(name);
    }
    chan_meta[std::string(1, channels[c])] = {{"fringe", fringe_files}, {"gray", gray_files}};
  }
  manifest["channels"] = chan_meta;

  if (!stack.truth.depth.empty()) {
    write_f32r((base / "gt_depth.f32r").string(), stack.truth.depth);
    write_f32r((base / "gt_zp.f32r").string(), stack.truth.z_p);
    write_f32r((base / "gt_vp.f32r").string(), stack.truth.v_p);
    write_f32r((base / "gt_up.f32r").string(), stack.truth.up_ideal);
    write_f32r((base / "gt_delta_R.f32r").string(), stack.truth.delta_r);
    write_f32r((base / "gt_delta_B.f32r").string(), stack.truth.delta_b);
    manifest["ground_truth"] = {{"depth", "gt_depth.f32r"}, {"z_p", "gt_zp.f32r"},
                                {"v_p", "gt_vp.f32r"},      {"up_ideal", "gt_up.f32r"},
                                {"delta_R", "gt_delta_R.f32r"}, {"delta_B", "gt_delta_B.f32r"}};
  }
  manifest["scene"] = scene_to_json(scene);

  pipeline::CalibrationBundle bundle{rig, {}, {}, {}, {}};
  save_calibration((base / "calib.json").string(), bundle);

  std::ofstream os(base / "manifest.json");
  if (!os) raise(Errc::io_failure, "cannot write dataset manifest in '" + dir + "'");
  os << manifest.dump(2) << "\n";
}

sim::CaptureStack load_dataset(const std::string& dir) {
  const fs::path base(dir);
  std::ifstream is(base / "manifest.json");
  if (!is) raise(Errc::io_failure, "no manifest.json in '" + dir + "'");
  json manifest;
  try {
    is >> manifest;
  } catch (const std::exception& e) {
    raise(Errc::parse_failure, std::string("dataset manifest: ") + e.what());
  }
  if (manifest.value("kind", "") != "lcamv-dataset")
    raise(Errc::parse_failure, "'" + dir + "' is not an lcamv dataset");

  sim::CaptureStack stack;
  try {
    stack.seed = manifest.value("seed", 0ull);
    stack.fringe.wavelength = manifest.at("fringe").at("wavelength").get<double>();
    stack.fringe.periods = manifest.at("fringe").at("periods").get<int>();
    stack.fringe.steps = manifest.at("fringe").at("steps").get<int>();
    const bool quantized = manifest.value("format", "png8") == std::string("png8");

    const char* channels = "RGB";
    for (int c = 0; c < 3; ++c) {
      const auto& meta = manifest.at("channels").at(std::string(1, channels[c]));
      for (const auto& name : meta.at("fringe"))
        stack.channels[c].fringe.push_back(
            read_capture(base / name.get<std::string>(), quantized));
      for (const auto& name : meta.at("gray"))
        stack.channels[c].gray.push_back(
            read_capture(base / name.get<std::string>(), quantized));
    }
    if (manifest.contains("ground_truth")) {
      const auto& gt = manifest["ground_truth"];
      stack.truth.depth = read_f32r((base / gt.at("depth").get<std::string>()).string());
      stack.truth.z_p = read_f32r((base / gt.at("z_p").get<std::string>()).string());
      stack.truth.v_p = read_f32r((base / gt.at("v_p").get<std::string>()).string());
      stack.truth.up_ideal = read_f32r((base / gt.at("up_ideal").get<std::string>()).string());
      stack.truth.delta_r = read_f32r((base / gt.at("delta_R").get<std::string>()).string());
      stack.truth.delta_b = read_f32r((base / gt.at("delta_B").get<std::string>()).string());
    }
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::parse_failure, "dataset manifest in '" + dir + "': " + e.what());
  }
  return stack;
}

void save_corners(const std::string& path, const sim::CornerSet& corners) {
  json doc;
  auto pts = [](const std::vector<cam_lca::CornerPoint>& v) {
    json a = json::array();
    for (const auto& p : v) a.push_back({p.u, p.v});
    return a;
  };
  doc["reference"] = pts(corners.reference);
  doc["observed"] = {{"R", pts(corners.observed_r)}, {"B", pts(corners.observed_b)}};
  std::ofstream os(path);
  if (!os) raise(Errc::io_failure, "cannot write '" + path + "'");
  os << doc.dump(2) << "\n";
}

sim::CornerSet load_corners(const std::string& path) {
  std::ifstream is(path);
  if (!is) raise(Errc::io_failure, "cannot open '" + path + "'");
  json doc;
  try {
    is >> doc;
  } catch (const std::exception& e) {
    raise(Errc::parse_failure, std::string("corners file: ") + e.what());
  }
  auto pts = [&](const json& a) {
    std::vector<cam_lca::CornerPoint> v;
    for (const auto& p : a) v.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    return v;
  };
  sim::CornerSet set;
  try {
    set.reference = pts(doc.at("reference"));
    set.observed_r = pts(doc.at("observed").at("R"));
    set.observed_b = pts(doc.at("observed").at("B"));
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::parse_failure, "corners file '" + path + "': " + e.what());
  }
  if (set.reference.size() != set.observed_r.size() ||
      set.reference.size() != set.observed_b.size())
    raise(Errc::parse_failure, "corners file '" + path + "': point lists differ in length");
  return set;
}

void save_flat_fields(const std::string& dir, const std::vector<sim::FlatFieldLevel>& levels,
                      bool quantized) {
  fs::create_directories(dir);
  const fs::path base(dir);
  const char* ext = quantized ? "png" : "f32r";
  const char* channels = "RGB";

  json manifest;
  manifest["kind"] = "lcamv-flatfield";
  manifest["format"] = quantized ? "png8" : "f32r";
  json lvls = json::array();
  for (size_t li = 0; li < levels.size(); ++li) {
    json entry;
    entry["value"] = levels[li].level;
    for (int c = 0; c < 3; ++c) {
      json files = json::array();
      for (int m = 0; m < 2; ++m) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "flat_%c_%02d_%c.%s", channels[c],
                      static_cast<int>(li), m == 0 ? 'a' : 'b', ext);
        write_capture(base / buf, levels[li].captures[c][m], quantized);
        files.push_back(buf);
      }
      entry["files"][std::string(1, channels[c])] = files;
    }
    lvls.push_back(entry);
  }
  manifest["levels"] = lvls;
  std::ofstream os(base / "manifest.json");
  if (!os) raise(Errc::io_failure, "cannot write flat-field manifest in '" + dir + "'");
  os << manifest.dump(2) << "\n";
}

FlatFieldIndex read_flat_field_index(const std::string& dir) {
  const fs::path base(dir);
  std::ifstream is(base / "manifest.json");
  if (!is) raise(Errc::io_failure, "no manifest.json in '" + dir + "'");
  json manifest;
  try {
    is >> manifest;
  } catch (const std::exception& e) {
    raise(Errc::parse_failure, std::string("flat-field manifest: ") + e.what());
  }
  if (manifest.value("kind", "") != "lcamv-flatfield")
    raise(Errc::parse_failure, "'" + dir + "' is not a flat-field set");

  FlatFieldIndex index;
  index.quantized = manifest.value("format", "png8") == std::string("png8");
  const char* channels = "RGB";
  try {
    for (const auto& entry : manifest.at("levels")) {
      FlatFieldIndex::Level lvl;
      lvl.value = entry.at("value").get<double>();
      for (int c = 0; c < 3; ++c) {
        const auto& files = entry.at("files").at(std::string(1, channels[c]));
        for (int m = 0; m < 2; ++m) lvl.files[c][m] = files.at(m).get<std::string>();
      }
      index.levels.push_back(std::move(lvl));
    }
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::parse_failure, "flat-field manifest in '" + dir + "': " + e.what());
  }
  return index;
}

ImageRaster load_flat_capture(const std::string& dir, const FlatFieldIndex& index,
                              size_t level, int channel, int member) {
  if (level >= index.levels.size() || channel < 0 || channel > 2 || member < 0 || member > 1)
    raise(Errc::invalid_argument, "flat-field capture index out of range");
  return read_capture(fs::path(dir) / index.levels[level].files[channel][member],
                      index.quantized);
}

std::vector<sim::FlatFieldLevel> load_flat_fields(const std::string& dir) {
  const FlatFieldIndex index = read_flat_field_index(dir);
  std::vector<sim::FlatFieldLevel> levels;
  for (size_t li = 0; li < index.levels.size(); ++li) {
    sim::FlatFieldLevel lvl;
    lvl.level = index.levels[li].value;
    for (int c = 0; c < 3; ++c)
      for (int m = 0; m < 2; ++m) lvl.captures[c][m] = load_flat_capture(dir, index, li, c, m);
    levels.push_back(std::move(lvl));
  }
  return levels;
}

void save_patterns(const std::string& dir, const phase::FringeConfig& fringe) {
  fs::create_directories(dir);
  const fs::path base(dir);
  const auto fringes = phase::generate_fringe_patterns(fringe);
  for (size_t i = 0; i < fringes.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fringe_%02d.png", static_cast<int>(i));
    write_png8((base / buf).string(), fringes[i]);
  }
  const auto grays = phase::generate_graycode_patterns(fringe);
  for (size_t i = 0; i < grays.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "gray_%02d.png", static_cast<int>(i));
    write_png8((base / buf).string(), grays[i]);
  }
}

}  // namespace lcamv::io
