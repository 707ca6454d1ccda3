#include "io/calib_json.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>

#include "core/errors.hpp"
#include "io/f32r.hpp"

namespace lcamv::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json matrix_to_json(const Eigen::Matrix3d& m) {
  json a = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) a.push_back(m(r, c));
  return a;
}

Eigen::Matrix3d matrix_from_json(const json& a, const char* name) {
  if (!a.is_array() || a.size() != 9)
    raise(Errc::parse_failure, std::string(name) + " must be a 9-element row-major array");
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = a[3 * r + c].get<double>();
  return m;
}

json params_to_json(const cam_lca::CamLcaParams& p) {
  return json{p.a, p.du, p.dv, p.c1, p.c2, p.c3, p.c4};
}

cam_lca::CamLcaParams params_from_json(const json& a) {
  if (!a.is_array() || a.size() != 7)
    raise(Errc::parse_failure, "theta_c entries must be 7-element arrays");
  std::array<double, 7> v;
  for (int i = 0; i < 7; ++i) v[i] = a[i].get<double>();
  return cam_lca::CamLcaParams::from_array(v);
}

}  // namespace

pipeline::CalibrationBundle load_calibration(const std::string& path) {
  std::ifstream is(path);
  if (!is) raise(Errc::io_failure, "cannot open calibration bundle '" + path + "'");
  json doc;
  try {
    is >> doc;
  } catch (const std::exception& e) {
    raise(Errc::parse_failure, "calibration bundle '" + path + "': " + e.what());
  }

  for (const char* key : {"K_c", "K_p", "R", "t", "cam_size", "prj_size"})
    if (!doc.contains(key))
      raise(Errc::parse_failure, "calibration bundle '" + path + "' lacks '" + key + "'");

  Eigen::Matrix3d K_c, K_p, R;
  Eigen::Vector3d t;
  std::array<int, 2> cam_size{}, prj_size{};
  try {
    K_c = matrix_from_json(doc["K_c"], "K_c");
    K_p = matrix_from_json(doc["K_p"], "K_p");
    R = matrix_from_json(doc["R"], "R");
    for (int i = 0; i < 3; ++i) t[i] = doc["t"].at(i).get<double>();
    cam_size = {doc["cam_size"].at(0).get<int>(), doc["cam_size"].at(1).get<int>()};
    prj_size = {doc["prj_size"].at(0).get<int>(), doc["prj_size"].at(1).get<int>()};
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::parse_failure, "calibration bundle '" + path + "': " + e.what());
  }

  pipeline::CalibrationBundle bundle{
      geometry::StereoCalibration::make(K_c, K_p, R, t, cam_size, prj_size), {}, {}, {}, {}};

  if (doc.contains("theta_c")) {
    const auto& tc = doc["theta_c"];
    if (tc.contains("R")) bundle.theta_c_r = params_from_json(tc["R"]);
    if (tc.contains("B")) bundle.theta_c_b = params_from_json(tc["B"]);
  }
  if (doc.contains("theta_p")) {
    const fs::path base = fs::path(path).parent_path();
    const auto& tp = doc["theta_p"];
    prj_lca::PrjLcaMaps maps;
    for (const char* ch : {"R", "B"}) {
      if (!tp.contains(ch))
        raise(Errc::parse_failure, "theta_p must carry both R and B map sets");
      auto& dst = ch[0] == 'R' ? maps.red : maps.blue;
      dst.alpha = read_f32r((base / tp[ch]["alpha"].get<std::string>()).string());
      dst.beta = read_f32r((base / tp[ch]["beta"].get<std::string>()).string());
    }
    bundle.theta_p = std::move(maps);
  }
  if (doc.contains("k")) {
    std::array<noise::NoiseParams, 3> k{};
    const char* names[3] = {"R", "G", "B"};
    try {
      for (int c = 0; c < 3; ++c) {
        const auto& arr = doc["k"].at(names[c]);
        k[c] = noise::NoiseParams{arr.at(0).get<double>(), arr.at(1).get<double>(), false};
      }
    } catch (const nlohmann::json::exception& e) {
      raise(Errc::parse_failure, "calibration bundle '" + path + "': " + e.what());
    }
    bundle.k = k;
  }
  return bundle;
}

void save_calibration(const std::string& path, const pipeline::CalibrationBundle& bundle) {
  json doc;
  doc["K_c"] = matrix_to_json(bundle.stereo.K_c());
  doc["K_p"] = matrix_to_json(bundle.stereo.K_p());
  doc["R"] = matrix_to_json(bundle.stereo.R());
  doc["t"] = {bundle.stereo.t().x(), bundle.stereo.t().y(), bundle.stereo.t().z()};
  doc["cam_size"] = {bundle.stereo.cam_size()[0], bundle.stereo.cam_size()[1]};
  doc["prj_size"] = {bundle.stereo.prj_size()[0], bundle.stereo.prj_size()[1]};

  if (bundle.theta_c_r || bundle.theta_c_b) {
    json tc;
    if (bundle.theta_c_r) tc["R"] = params_to_json(*bundle.theta_c_r);
    if (bundle.theta_c_b) tc["B"] = params_to_json(*bundle.theta_c_b);
    doc["theta_c"] = tc;
  }
  if (bundle.theta_p) {
    const fs::path base = fs::path(path).parent_path();
    json tp;
    for (const char* ch : {"R", "B"}) {
      const auto& maps = ch[0] == 'R' ? bundle.theta_p->red : bundle.theta_p->blue;
      const std::string alpha_name = std::string("theta_p_") + ch + "_alpha.f32r";
      const std::string beta_name = std::string("theta_p_") + ch + "_beta.f32r";
      write_f32r((base / alpha_name).string(), maps.alpha);
      write_f32r((base / beta_name).string(), maps.beta);
      tp[ch] = {{"alpha", alpha_name}, {"beta", beta_name}};
    }
    doc["theta_p"] = tp;
  }
  if (bundle.k) {
    const char* names[3] = {"R", "G", "B"};
    json k;
    for (int c = 0; c < 3; ++c) k[names[c]] = {(*bundle.k)[c].k0, (*bundle.k)[c].k1};
    doc["k"] = k;
  }

  std::ofstream os(path);
  if (!os) raise(Errc::io_failure, "cannot open '" + path + "' for writing");
  os << doc.dump(2) << "\n";
  if (!os) raise(Errc::io_failure, "short write to '" + path + "'");
}

}  // namespace lcamv::io
