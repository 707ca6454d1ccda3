// lcamv command-line tool. All functionality goes through the C API of the
// shared library (lcamv/lcamv.h); this file only parses arguments and wires
// paths.

#include <CLI11.hpp>
#include <lcamv/lcamv.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;

struct CalibrationHandle {
  lcamv_calibration* ptr = nullptr;
  ~CalibrationHandle() { lcamv_calibration_free(ptr); }
};

int fail(lcamv_status status, const char* what) {
  std::fprintf(stderr, "lcamv: %s failed (%s): %s\n", what, lcamv_status_name(status),
               lcamv_last_error());
  return 1;
}

bool parse_roi(const std::string& spec, int roi[4]) {
  if (spec.empty()) return true;
  return std::sscanf(spec.c_str(), "%d,%d,%d,%d", &roi[0], &roi[1], &roi[2], &roi[3]) == 4;
}

// Flat key = value configuration (TOML subset): '#' comments, optional
// quotes. Dashes and underscores in keys are interchangeable.
std::map<std::string, std::string> load_flat_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file '" + path + "'");
  std::map<std::string, std::string> values;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    std::replace(key.begin(), key.end(), '-', '_');
    if (value.size() >= 2 && ((value.front() == '"' && value.back() == '"') ||
                              (value.front() == '\'' && value.back() == '\'')))
      value = value.substr(1, value.size() - 2);
    values[key] = value;
  }
  return values;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LCAMV structured-light reconstruction toolkit"};
  app.require_subcommand(1);

  int threads = 0;
  app.add_option("--threads", threads,
                 "worker threads for raster processing (0 = auto; results are identical "
                 "for any value; LCAMV_THREADS sets the default)");

  // ---- simulate ----
  auto* sim = app.add_subcommand("simulate", "render a synthetic capture dataset");
  lcamv_sim_options sim_opt;
  lcamv_sim_options_init(&sim_opt);
  std::string sim_preset = "white-plane";
  std::string sim_out;
  bool no_quantize = false, no_noise = false;
  bool inject_cam = false, inject_prj = false, crosstalk = false;
  sim->add_option("--preset", sim_preset,
                  "white-plane | colorboard | plate-sweep | flat-levels | corners")
      ->capture_default_str();
  sim->add_option("-o,--out", sim_out, "output directory")->required();
  sim->add_option("--seed", sim_opt.seed, "render seed")->capture_default_str();
  sim->add_option("--steps", sim_opt.steps, "phase shifts N")->capture_default_str();
  sim->add_option("--wavelength", sim_opt.wavelength, "fringe period (projector px)")
      ->capture_default_str();
  sim->add_option("--periods", sim_opt.periods, "phase periods L (power of two)")
      ->capture_default_str();
  sim->add_option("--rig-scale", sim_opt.rig_scale, "image plane scale of the built-in rig")
      ->capture_default_str();
  sim->add_flag("--no-quantize", no_quantize, "keep float captures (F32R) instead of 8-bit PNG");
  sim->add_flag("--no-noise", no_noise, "disable sensor noise");
  sim->add_flag("--inject-cam-lca", inject_cam, "inject the built-in camera LCA truth");
  sim->add_flag("--inject-prj-lca", inject_prj, "inject the built-in projector LCA truth");
  sim->add_flag("--crosstalk", crosstalk, "enable overlapping-spectra channel mixing");
  sim->add_option("--blue-k0", sim_opt.blue_k0_override,
                  "override the blue channel read-noise coefficient (intensity^2)");
  sim->add_option("--plane-z", sim_opt.plane_z, "plane distance (mm)")->capture_default_str();
  sim->add_option("--poses", sim_opt.poses, "plate-sweep pose count")->capture_default_str();
  sim->add_option("--z-min", sim_opt.z_min, "plate-sweep nearest depth (mm)")
      ->capture_default_str();
  sim->add_option("--z-max", sim_opt.z_max, "plate-sweep farthest depth (mm)")
      ->capture_default_str();
  sim->add_option("--flat-levels", sim_opt.flat_levels, "flat-field level count")
      ->capture_default_str();
  sim->add_option("--board-cols", sim_opt.board_cols, "colorboard patch columns")
      ->capture_default_str();
  sim->add_option("--board-rows", sim_opt.board_rows, "colorboard patch rows")
      ->capture_default_str();
  sim->add_option("--corner-nx", sim_opt.corner_nx, "corner grid columns")
      ->capture_default_str();
  sim->add_option("--corner-ny", sim_opt.corner_ny, "corner grid rows")->capture_default_str();
  sim->add_option("--corner-jitter", sim_opt.corner_jitter, "corner jitter sigma (px)")
      ->capture_default_str();

  // ---- patterns ----
  auto* patterns = app.add_subcommand("patterns", "write projector pattern stacks (PNG)");
  std::string pat_out;
  double pat_wavelength = 36.0;
  int pat_periods = 32, pat_steps = 3, pat_w = 912, pat_h = 1140;
  patterns->add_option("-o,--out", pat_out, "output directory")->required();
  patterns->add_option("--wavelength", pat_wavelength)->capture_default_str();
  patterns->add_option("--periods", pat_periods)->capture_default_str();
  patterns->add_option("--steps", pat_steps)->capture_default_str();
  patterns->add_option("--prj-width", pat_w)->capture_default_str();
  patterns->add_option("--prj-height", pat_h)->capture_default_str();

  // ---- calib-cam-lca ----
  auto* ccl = app.add_subcommand("calib-cam-lca",
                                 "fit the 7-parameter camera LCA model from matched corners");
  std::string ccl_corners, ccl_calib, ccl_out;
  ccl->add_option("--corners", ccl_corners, "corners.json with reference/observed points")
      ->required();
  ccl->add_option("--calib", ccl_calib, "calibration bundle to update")->required();
  ccl->add_option("-o,--out", ccl_out, "output bundle path (default: in place)");

  // ---- calib-prj-lca ----
  auto* cpl = app.add_subcommand(
      "calib-prj-lca", "fit the per-pixel projector LCA maps from white-plate poses");
  std::string cpl_calib, cpl_out, cpl_sweep, cpl_diag;
  std::vector<std::string> cpl_poses;
  cpl->add_option("--calib", cpl_calib, "calibration bundle to update")->required();
  cpl->add_option("--pose", cpl_poses, "pose dataset directory (repeatable)");
  cpl->add_option("--sweep", cpl_sweep, "directory containing pose_XX subdirectories");
  cpl->add_option("--diagnostics", cpl_diag, "directory for Pearson correlation maps");
  cpl->add_option("-o,--out", cpl_out, "output bundle path (default: in place)");

  // ---- calib-noise ----
  auto* cn = app.add_subcommand("calib-noise",
                                "fit Poisson-Gaussian noise coefficients from flat fields");
  std::string cn_calib, cn_flat, cn_roi, cn_out;
  cn->add_option("--calib", cn_calib, "calibration bundle to update")->required();
  cn->add_option("--flat", cn_flat, "flat-field dataset directory")->required();
  cn->add_option("--roi", cn_roi, "pixel domain as x,y,w,h (default: whole image)");
  cn->add_option("-o,--out", cn_out, "output bundle path (default: in place)");

  // ---- reconstruct ----
  auto* rec = app.add_subcommand("reconstruct", "run the reconstruction pipeline");
  lcamv_reconstruct_options rec_opt;
  lcamv_reconstruct_options_init(&rec_opt);
  std::string rec_in, rec_calib, rec_mode = "lcamv", rec_ply, rec_depth, rec_var, rec_config;
  rec->add_option("--config", rec_config,
                  "flat key = value configuration file; every flag overrides it");
  auto* opt_in = rec->add_option("--in", rec_in, "capture dataset directory");
  auto* opt_calib = rec->add_option("--calib", rec_calib, "calibration bundle");
  auto* opt_mode = rec->add_option("--mode", rec_mode, "lcamv | lca | mv | mean | yuv | green")
                       ->capture_default_str();
  auto* opt_ply = rec->add_option("-o,--ply", rec_ply, "output ASCII PLY point cloud");
  auto* opt_depth = rec->add_option("--depth", rec_depth, "output depth raster (F32R)");
  auto* opt_var =
      rec->add_option("--variance", rec_var, "output fused-variance raster (F32R)");
  auto* opt_ci = rec->add_option("--ci-multiplier", rec_opt.ci_multiplier,
                                 "confidence-interval multiplier for outlier gating")
                     ->capture_default_str();
  auto* opt_modthr = rec->add_option("--modulation-threshold", rec_opt.modulation_threshold,
                                     "minimum I_B for a valid pixel")
                         ->capture_default_str();
  auto* opt_guard = rec->add_option("--guard-sigmas", rec_opt.guard_sigmas,
                                    "period-transition guard width in predicted stds")
                        ->capture_default_str();
  auto* opt_anv = rec->add_option("--assumed-noise-var", rec_opt.assumed_noise_var,
                                  "guard noise floor when the bundle has no noise coefficients")
                      ->capture_default_str();
  auto* opt_wl =
      rec->add_option("--wavelength", rec_opt.wavelength, "fringe period override (0 = manifest)");
  auto* opt_per =
      rec->add_option("--periods", rec_opt.periods, "phase period override (0 = manifest)");
  auto* opt_steps =
      rec->add_option("--steps", rec_opt.steps, "phase step override (0 = manifest)");

  // ---- eval-plane ----
  auto* ev = app.add_subcommand("eval-plane", "plane-fit error report for a depth raster");
  std::string ev_depth, ev_calib, ev_roi, ev_json, ev_errmap;
  uint64_t ev_subsample = 10000, ev_seed = 0;
  ev->add_option("--depth", ev_depth, "depth raster (F32R)")->required();
  ev->add_option("--calib", ev_calib, "calibration bundle")->required();
  ev->add_option("--roi", ev_roi, "region of interest as x,y,w,h");
  ev->add_option("--subsample", ev_subsample, "points used to define the plane")
      ->capture_default_str();
  ev->add_option("--seed", ev_seed, "subsample seed (required for reproducible reports)")
      ->required();
  ev->add_option("-o,--report", ev_json, "output JSON report");
  ev->add_option("--errors", ev_errmap, "output signed error map (F32R)");

  // ---- mc-ci ----
  auto* mc = app.add_subcommand(
      "mc-ci", "Monte-Carlo confidence interval of the wrapped-phase distribution");
  lcamv_mc_options mc_opt;
  lcamv_mc_options_init(&mc_opt);
  std::string mc_csv;
  mc->add_option("--k0", mc_opt.k0, "read-noise coefficient")->capture_default_str();
  mc->add_option("--k1", mc_opt.k1, "shot-noise slope")->capture_default_str();
  mc->add_option("--ia", mc_opt.i_a, "mean intensity")->capture_default_str();
  mc->add_option("--ib", mc_opt.i_b, "modulation intensity")->capture_default_str();
  mc->add_option("--steps", mc_opt.steps, "phase shifts")->capture_default_str();
  mc->add_option("--samples", mc_opt.samples, "samples per phase grid point")
      ->capture_default_str();
  mc->add_option("--grid", mc_opt.grid, "phase grid resolution")->capture_default_str();
  mc->add_option("--seed", mc_opt.seed, "generator seed")->capture_default_str();
  mc->add_option("-o,--csv", mc_csv, "per-phase CSV output");

  // Global flags remain usable after a subcommand name.
  for (auto* sub : {sim, patterns, ccl, cpl, cn, rec, ev, mc}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  if (threads > 0) lcamv_set_threads(threads);

  if (sim->parsed()) {
    if (sim_preset == "white-plane") sim_opt.preset = LCAMV_PRESET_WHITE_PLANE;
    else if (sim_preset == "colorboard") sim_opt.preset = LCAMV_PRESET_COLORBOARD;
    else if (sim_preset == "plate-sweep") sim_opt.preset = LCAMV_PRESET_PLATE_SWEEP;
    else if (sim_preset == "flat-levels") sim_opt.preset = LCAMV_PRESET_FLAT_LEVELS;
    else if (sim_preset == "corners") sim_opt.preset = LCAMV_PRESET_CORNERS;
    else {
      std::fprintf(stderr, "lcamv: unknown preset '%s'\n", sim_preset.c_str());
      return 1;
    }
    sim_opt.quantize = no_quantize ? 0 : 1;
    sim_opt.noise = no_noise ? 0 : 1;
    sim_opt.inject_cam_lca = inject_cam ? 1 : 0;
    sim_opt.inject_prj_lca = inject_prj ? 1 : 0;
    sim_opt.crosstalk = crosstalk ? 1 : 0;
    if (const auto st = lcamv_simulate(&sim_opt, sim_out.c_str()); st != LCAMV_OK)
      return fail(st, "simulate");
    std::printf("wrote dataset: %s\n", sim_out.c_str());
    return 0;
  }

  if (patterns->parsed()) {
    if (const auto st = lcamv_write_patterns(pat_out.c_str(), pat_wavelength, pat_periods,
                                             pat_steps, pat_w, pat_h);
        st != LCAMV_OK)
      return fail(st, "patterns");
    std::printf("wrote patterns: %s\n", pat_out.c_str());
    return 0;
  }

  if (ccl->parsed()) {
    CalibrationHandle calib;
    if (const auto st = lcamv_calibration_load(ccl_calib.c_str(), &calib.ptr); st != LCAMV_OK)
      return fail(st, "calibration load");
    double rms_r = 0, rms_b = 0;
    if (const auto st = lcamv_calibrate_cam_lca(calib.ptr, ccl_corners.c_str(), &rms_r, &rms_b);
        st != LCAMV_OK)
      return fail(st, "calib-cam-lca");
    const std::string out = ccl_out.empty() ? ccl_calib : ccl_out;
    if (const auto st = lcamv_calibration_save(calib.ptr, out.c_str()); st != LCAMV_OK)
      return fail(st, "calibration save");
    std::printf("camera LCA fitted: rms_R=%.6f px, rms_B=%.6f px -> %s\n", rms_r, rms_b,
                out.c_str());
    return 0;
  }

  if (cpl->parsed()) {
    std::vector<std::string> poses = cpl_poses;
    if (!cpl_sweep.empty()) {
      std::vector<std::string> found;
      for (const auto& entry : fs::directory_iterator(cpl_sweep))
        if (entry.is_directory() && entry.path().filename().string().rfind("pose_", 0) == 0)
          found.push_back(entry.path().string());
      std::sort(found.begin(), found.end());
      poses.insert(poses.end(), found.begin(), found.end());
    }
    if (poses.size() < 2) {
      std::fprintf(stderr, "lcamv: calib-prj-lca needs at least 2 pose datasets\n");
      return 1;
    }
    std::vector<const char*> pose_ptrs;
    for (const auto& p : poses) pose_ptrs.push_back(p.c_str());

    CalibrationHandle calib;
    if (const auto st = lcamv_calibration_load(cpl_calib.c_str(), &calib.ptr); st != LCAMV_OK)
      return fail(st, "calibration load");
    if (const auto st =
            lcamv_calibrate_prj_lca(calib.ptr, pose_ptrs.data(), pose_ptrs.size(),
                                    cpl_diag.empty() ? nullptr : cpl_diag.c_str());
        st != LCAMV_OK)
      return fail(st, "calib-prj-lca");
    const std::string out = cpl_out.empty() ? cpl_calib : cpl_out;
    if (const auto st = lcamv_calibration_save(calib.ptr, out.c_str()); st != LCAMV_OK)
      return fail(st, "calibration save");
    std::printf("projector LCA maps fitted from %zu poses -> %s\n", poses.size(), out.c_str());
    return 0;
  }

  if (cn->parsed()) {
    int roi[4] = {0, 0, 0, 0};
    if (!parse_roi(cn_roi, roi)) {
      std::fprintf(stderr, "lcamv: --roi expects x,y,w,h\n");
      return 1;
    }
    CalibrationHandle calib;
    if (const auto st = lcamv_calibration_load(cn_calib.c_str(), &calib.ptr); st != LCAMV_OK)
      return fail(st, "calibration load");
    if (const auto st =
            lcamv_calibrate_noise(calib.ptr, cn_flat.c_str(), roi[0], roi[1], roi[2], roi[3]);
        st != LCAMV_OK)
      return fail(st, "calib-noise");
    const std::string out = cn_out.empty() ? cn_calib : cn_out;
    if (const auto st = lcamv_calibration_save(calib.ptr, out.c_str()); st != LCAMV_OK)
      return fail(st, "calibration save");
    std::printf("noise coefficients fitted -> %s\n", out.c_str());
    return 0;
  }

  if (rec->parsed()) {
    if (!rec_config.empty()) {
      // Config supplies any option the command line did not.
      std::map<std::string, std::string> cfg;
      try {
        cfg = load_flat_config(rec_config);
      } catch (const std::exception& e) {
        std::fprintf(stderr, "lcamv: %s\n", e.what());
        return 1;
      }
      auto use = [&](const char* key, const CLI::Option* opt) -> const std::string* {
        const auto it = cfg.find(key);
        return it != cfg.end() && opt->count() == 0 ? &it->second : nullptr;
      };
      try {
        if (const auto* v = use("input", opt_in)) rec_in = *v;
        if (const auto* v = use("calib", opt_calib)) rec_calib = *v;
        if (const auto* v = use("mode", opt_mode)) rec_mode = *v;
        if (const auto* v = use("ply", opt_ply)) rec_ply = *v;
        if (const auto* v = use("depth", opt_depth)) rec_depth = *v;
        if (const auto* v = use("variance", opt_var)) rec_var = *v;
        if (const auto* v = use("ci_multiplier", opt_ci)) rec_opt.ci_multiplier = std::stod(*v);
        if (const auto* v = use("modulation_threshold", opt_modthr))
          rec_opt.modulation_threshold = std::stod(*v);
        if (const auto* v = use("guard_sigmas", opt_guard)) rec_opt.guard_sigmas = std::stod(*v);
        if (const auto* v = use("assumed_noise_var", opt_anv))
          rec_opt.assumed_noise_var = std::stod(*v);
        if (const auto* v = use("wavelength", opt_wl)) rec_opt.wavelength = std::stod(*v);
        if (const auto* v = use("periods", opt_per)) rec_opt.periods = std::stoi(*v);
        if (const auto* v = use("steps", opt_steps)) rec_opt.steps = std::stoi(*v);
        if (cfg.count("threads") && threads == 0) lcamv_set_threads(std::stoi(cfg["threads"]));
      } catch (const std::exception&) {
        std::fprintf(stderr, "lcamv: config file '%s' has a malformed value\n",
                     rec_config.c_str());
        return 1;
      }
    }
    if (rec_in.empty() || rec_calib.empty()) {
      std::fprintf(stderr,
                   "lcamv: reconstruct needs --in and --calib (flags or config file)\n");
      return 1;
    }
    CalibrationHandle calib;
    if (const auto st = lcamv_calibration_load(rec_calib.c_str(), &calib.ptr); st != LCAMV_OK)
      return fail(st, "calibration load");
    rec_opt.mode = rec_mode.c_str();
    if (const auto st = lcamv_reconstruct(rec_in.c_str(), calib.ptr, &rec_opt,
                                          rec_ply.empty() ? nullptr : rec_ply.c_str(),
                                          rec_depth.empty() ? nullptr : rec_depth.c_str(),
                                          rec_var.empty() ? nullptr : rec_var.c_str());
        st != LCAMV_OK)
      return fail(st, "reconstruct");
    if (!rec_ply.empty()) std::printf("wrote %s\n", rec_ply.c_str());
    if (!rec_depth.empty()) std::printf("wrote %s\n", rec_depth.c_str());
    return 0;
  }

  if (ev->parsed()) {
    int roi[4] = {0, 0, 0, 0};
    if (!parse_roi(ev_roi, roi)) {
      std::fprintf(stderr, "lcamv: --roi expects x,y,w,h\n");
      return 1;
    }
    CalibrationHandle calib;
    if (const auto st = lcamv_calibration_load(ev_calib.c_str(), &calib.ptr); st != LCAMV_OK)
      return fail(st, "calibration load");
    lcamv_plane_report report;
    if (const auto st = lcamv_eval_plane(ev_depth.c_str(), calib.ptr, roi[0], roi[1], roi[2],
                                         roi[3], ev_subsample, ev_seed, &report,
                                         ev_json.empty() ? nullptr : ev_json.c_str(),
                                         ev_errmap.empty() ? nullptr : ev_errmap.c_str());
        st != LCAMV_OK)
      return fail(st, "eval-plane");
    std::printf("plane fit: mse=%.9g mm^2 rmse=%.6g mm over %llu points (%llu subsampled)\n",
                report.mse, report.rmse, static_cast<unsigned long long>(report.n_total),
                static_cast<unsigned long long>(report.n_subsampled));
    return 0;
  }

  if (mc->parsed()) {
    double multiplier = 0.0;
    if (const auto st = lcamv_monte_carlo_ci(&mc_opt, mc_csv.empty() ? nullptr : mc_csv.c_str(),
                                             &multiplier);
        st != LCAMV_OK)
      return fail(st, "mc-ci");
    std::printf("mean 99%% CI half-width: %.4f sigma_phi\n", multiplier);
    return 0;
  }

  return 0;
}
