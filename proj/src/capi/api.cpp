#include "lcamv/lcamv.h"

#include <json.hpp>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "core/errors.hpp"
#include "core/eval.hpp"
#include "core/fusion.hpp"
#include "core/parallel.hpp"
#include "core/pipeline.hpp"
#include "core/sim.hpp"
#include "io/calib_json.hpp"
#include "io/dataset.hpp"
#include "io/f32r.hpp"
#include "io/ply.hpp"

namespace fs = std::filesystem;

struct lcamv_calibration {
  lcamv::pipeline::CalibrationBundle bundle;
};

namespace {

thread_local std::string g_last_error;

lcamv_status map_errc(lcamv::Errc c) {
  using lcamv::Errc;
  switch (c) {
    case Errc::invalid_argument:
    case Errc::size_mismatch:
    case Errc::wrong_image_count:
    case Errc::order_out_of_range:
    case Errc::insufficient_points:
    case Errc::domain_too_small:
    case Errc::non_power_of_two_periods:
      return LCAMV_E_INVALID_ARGUMENT;
    case Errc::io_failure:
      return LCAMV_E_IO;
    case Errc::parse_failure:
      return LCAMV_E_PARSE;
    case Errc::degenerate_baseline:
    case Errc::singular_system:
    case Errc::epipolar_degenerate:
    case Errc::degenerate_levels:
    case Errc::degenerate_geometry:
    case Errc::all_channels_invalid:
    case Errc::scene_not_visible:
      return LCAMV_E_DEGENERATE;
    case Errc::missing_calibration:
      return LCAMV_E_MISSING_CALIBRATION;
    case Errc::no_convergence:
      return LCAMV_E_NO_CONVERGENCE;
  }
  return LCAMV_E_INTERNAL;
}

template <typename Fn>
lcamv_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return LCAMV_OK;
  } catch (const lcamv::Error& e) {
    g_last_error = std::string(lcamv::errc_name(e.code())) + ": " + e.what();
    return map_errc(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return LCAMV_E_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return LCAMV_E_INTERNAL;
  }
}

void require_arg(bool ok, const char* what) {
  if (!ok) lcamv::raise(lcamv::Errc::invalid_argument, std::string(what) + " must not be NULL");
}

lcamv::sim::Scene scene_from_options(const lcamv_sim_options& o) {
  lcamv::sim::Scene scene;
  scene.seed = o.seed;
  scene.quantize = o.quantize != 0;
  scene.geometry = lcamv::sim::PlaneGeometry{{0.0, 0.0, 1.0}, o.plane_z};
  if (o.preset == LCAMV_PRESET_COLORBOARD) {
    lcamv::sim::Scene board =
        lcamv::sim::make_colorboard_scene(o.board_cols, o.board_rows, o.seed);
    scene.patches = board.patches;
  }
  if (o.noise) scene.noise = lcamv::sim::default_sensor_noise();
  if (o.blue_k0_override >= 0.0) scene.noise[2].k0 = o.blue_k0_override;
  if (o.inject_cam_lca) {
    scene.true_cam_lca_r = lcamv::sim::demo_cam_lca(lcamv::Channel::R, o.rig_scale);
    scene.true_cam_lca_b = lcamv::sim::demo_cam_lca(lcamv::Channel::B, o.rig_scale);
  }
  if (o.inject_prj_lca) {
    scene.true_prj_lca_r = lcamv::sim::demo_prj_lca(lcamv::Channel::R);
    scene.true_prj_lca_b = lcamv::sim::demo_prj_lca(lcamv::Channel::B);
  }
  if (o.crosstalk) scene.crosstalk = lcamv::sim::overlap_crosstalk();
  return scene;
}

}  // namespace

extern "C" {

const char* lcamv_status_name(lcamv_status status) {
  switch (status) {
    case LCAMV_OK: return "ok";
    case LCAMV_E_INVALID_ARGUMENT: return "invalid argument";
    case LCAMV_E_IO: return "I/O failure";
    case LCAMV_E_PARSE: return "parse failure";
    case LCAMV_E_DEGENERATE: return "degenerate input";
    case LCAMV_E_MISSING_CALIBRATION: return "missing calibration artifact";
    case LCAMV_E_NO_CONVERGENCE: return "no convergence";
    case LCAMV_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* lcamv_last_error(void) { return g_last_error.c_str(); }

const char* lcamv_version(void) { return "0.1.0"; }

void lcamv_set_threads(int n) { lcamv::set_thread_count(n); }

lcamv_status lcamv_calibration_load(const char* json_path, lcamv_calibration** out) {
  return guarded([&] {
    require_arg(json_path, "json_path");
    require_arg(out, "out");
    *out = new lcamv_calibration{lcamv::io::load_calibration(json_path)};
  });
}

lcamv_status lcamv_calibration_save(const lcamv_calibration* calib, const char* json_path) {
  return guarded([&] {
    require_arg(calib, "calib");
    require_arg(json_path, "json_path");
    lcamv::io::save_calibration(json_path, calib->bundle);
  });
}

lcamv_status lcamv_calibration_default_rig(double image_scale, lcamv_calibration** out) {
  return guarded([&] {
    require_arg(out, "out");
    *out = new lcamv_calibration{
        {lcamv::sim::make_default_rig(image_scale), {}, {}, {}, {}}};
  });
}

void lcamv_calibration_free(lcamv_calibration* calib) { delete calib; }

void lcamv_sim_options_init(lcamv_sim_options* o) {
  if (!o) return;
  std::memset(o, 0, sizeof(*o));
  o->preset = LCAMV_PRESET_WHITE_PLANE;
  o->seed = 1;
  o->rig_scale = 1.0;
  o->steps = 18;
  o->wavelength = 36.0;
  o->periods = 32;
  o->quantize = 1;
  o->noise = 1;
  o->blue_k0_override = -1.0;
  o->plane_z = 320.0;
  o->poses = 18;
  o->z_min = 180.0;
  o->z_max = 340.0;
  o->flat_levels = 40;
  o->board_cols = 8;
  o->board_rows = 6;
  o->corner_nx = 20;
  o->corner_ny = 12;
  o->corner_jitter = 0.0;
}

lcamv_status lcamv_simulate(const lcamv_sim_options* options, const char* out_dir) {
  return guarded([&] {
    require_arg(options, "options");
    require_arg(out_dir, "out_dir");
    const lcamv_sim_options& o = *options;
    const auto rig = lcamv::sim::make_default_rig(o.rig_scale);

    lcamv::phase::FringeConfig fringe;
    fringe.wavelength = o.wavelength;
    fringe.periods = o.periods;
    fringe.steps = o.steps;
    fringe.prj_width = rig.prj_size()[0];
    fringe.prj_height = rig.prj_size()[1];

    switch (o.preset) {
      case LCAMV_PRESET_WHITE_PLANE:
      case LCAMV_PRESET_COLORBOARD: {
        const lcamv::sim::Scene scene = scene_from_options(o);
        const auto stack = lcamv::sim::render(scene, rig, fringe);
        lcamv::io::save_dataset(out_dir, stack, rig, scene);
        break;
      }
      case LCAMV_PRESET_PLATE_SWEEP: {
        if (o.poses < 2)
          lcamv::raise(lcamv::Errc::invalid_argument, "plate sweep needs at least 2 poses");
        fs::create_directories(out_dir);
        for (int p = 0; p < o.poses; ++p) {
          lcamv::sim::Scene scene = scene_from_options(o);
          const double z =
              o.z_min + (o.z_max - o.z_min) * (o.poses == 1 ? 0.0 : double(p) / (o.poses - 1));
          scene.geometry = lcamv::sim::PlaneGeometry{{0.0, 0.0, 1.0}, z};
          scene.seed = o.seed + static_cast<uint64_t>(p) * 1000003ull;
          char name[32];
          std::snprintf(name, sizeof(name), "pose_%02d", p);
          const auto stack = lcamv::sim::render(scene, rig, fringe);
          lcamv::io::save_dataset((fs::path(out_dir) / name).string(), stack, rig, scene);
        }
        lcamv::pipeline::CalibrationBundle bundle{rig, {}, {}, {}, {}};
        lcamv::io::save_calibration((fs::path(out_dir) / "calib.json").string(), bundle);
        break;
      }
      case LCAMV_PRESET_FLAT_LEVELS: {
        if (o.flat_levels < 2)
          lcamv::raise(lcamv::Errc::invalid_argument, "need at least 2 flat levels");
        const lcamv::sim::Scene scene = scene_from_options(o);
        std::vector<double> levels(o.flat_levels);
        for (int i = 0; i < o.flat_levels; ++i)
          levels[i] = 2.0 + (250.0 - 2.0) * i / (o.flat_levels - 1.0);
        const auto flats = lcamv::sim::render_flat_pairs(scene, rig, levels);
        lcamv::io::save_flat_fields(out_dir, flats, scene.quantize);
        break;
      }
      case LCAMV_PRESET_CORNERS: {
        const auto theta_r = o.inject_cam_lca
                                 ? lcamv::sim::demo_cam_lca(lcamv::Channel::R, o.rig_scale)
                                 : lcamv::cam_lca::CamLcaParams{};
        const auto theta_b = o.inject_cam_lca
                                 ? lcamv::sim::demo_cam_lca(lcamv::Channel::B, o.rig_scale)
                                 : lcamv::cam_lca::CamLcaParams{};
        const auto corners = lcamv::sim::make_corner_set(
            rig.cam_size(), o.corner_nx, o.corner_ny, theta_r, theta_b, o.corner_jitter,
            o.seed);
        fs::create_directories(out_dir);
        lcamv::io::save_corners((fs::path(out_dir) / "corners.json").string(), corners);
        lcamv::pipeline::CalibrationBundle bundle{rig, {}, {}, {}, {}};
        lcamv::io::save_calibration((fs::path(out_dir) / "calib.json").string(), bundle);
        break;
      }
      default:
        lcamv::raise(lcamv::Errc::invalid_argument, "unknown simulate preset");
    }
  });
}

lcamv_status lcamv_write_patterns(const char* out_dir, double wavelength, int periods,
                                  int steps, int prj_width, int prj_height) {
  return guarded([&] {
    require_arg(out_dir, "out_dir");
    lcamv::phase::FringeConfig fringe{wavelength, periods, steps, prj_width, prj_height};
    lcamv::io::save_patterns(out_dir, fringe);
  });
}

lcamv_status lcamv_calibrate_cam_lca(lcamv_calibration* calib, const char* corners_json,
                                     double* rms_r, double* rms_b) {
  return guarded([&] {
    require_arg(calib, "calib");
    require_arg(corners_json, "corners_json");
    const auto corners = lcamv::io::load_corners(corners_json);
    const auto fit = lcamv::pipeline::calibrate_cam_lca_channels(corners);
    calib->bundle.theta_c_r = fit.red.params;
    calib->bundle.theta_c_b = fit.blue.params;
    if (rms_r) *rms_r = fit.red.rms;
    if (rms_b) *rms_b = fit.blue.rms;
  });
}

lcamv_status lcamv_calibrate_prj_lca(lcamv_calibration* calib, const char* const* pose_dirs,
                                     size_t n_poses, const char* diagnostics_dir) {
  return guarded([&] {
    require_arg(calib, "calib");
    require_arg(pose_dirs, "pose_dirs");
    lcamv::pipeline::PipelineConfig config;
    // Stream poses: one full-resolution capture stack in memory at a time.
    lcamv::pipeline::PrjLcaCalibrator calibrator(calib->bundle, config);
    for (size_t i = 0; i < n_poses; ++i)
      calibrator.add_pose(lcamv::io::load_dataset(pose_dirs[i]));
    const auto result = calibrator.finish();
    calib->bundle.theta_p = result.maps;
    if (diagnostics_dir) {
      fs::create_directories(diagnostics_dir);
      lcamv::io::write_f32r((fs::path(diagnostics_dir) / "correlation_R.f32r").string(),
                            result.correlation_r);
      lcamv::io::write_f32r((fs::path(diagnostics_dir) / "correlation_B.f32r").string(),
                            result.correlation_b);
    }
  });
}

lcamv_status lcamv_calibrate_noise(lcamv_calibration* calib, const char* flat_dir, int roi_x,
                                   int roi_y, int roi_width, int roi_height) {
  return guarded([&] {
    require_arg(calib, "calib");
    require_arg(flat_dir, "flat_dir");
    // Stream level by level; only the running (mu, var) samples are kept.
    const auto index = lcamv::io::read_flat_field_index(flat_dir);
    if (index.levels.size() < 2)
      lcamv::raise(lcamv::Errc::degenerate_levels,
                   "noise calibration needs at least 2 intensity levels");
    std::array<lcamv::noise::NoiseParams, 3> k;
    for (int c = 0; c < 3; ++c) {
      std::vector<lcamv::noise::NoiseSample> samples;
      samples.reserve(index.levels.size());
      for (size_t li = 0; li < index.levels.size(); ++li) {
        const auto a = lcamv::io::load_flat_capture(flat_dir, index, li, c, 0);
        const auto b = lcamv::io::load_flat_capture(flat_dir, index, li, c, 1);
        lcamv::noise::PixelRect roi{roi_x, roi_y, roi_width, roi_height};
        if (roi.width <= 0 || roi.height <= 0) roi = {0, 0, a.width(), a.height()};
        samples.push_back(lcamv::noise::estimate_pixel_noise(a, b, roi));
      }
      k[c] = lcamv::noise::fit_noise_model(samples);
    }
    calib->bundle.k = k;
  });
}

void lcamv_reconstruct_options_init(lcamv_reconstruct_options* o) {
  if (!o) return;
  o->mode = "lcamv";
  o->ci_multiplier = lcamv::fusion::kDefaultCiMultiplier;
  o->modulation_threshold = lcamv::phase::kDefaultModulationThreshold;
  o->guard_sigmas = 6.0;
  o->assumed_noise_var = 2.0;
  o->wavelength = 0.0;
  o->periods = 0;
  o->steps = 0;
}

lcamv_status lcamv_reconstruct(const char* dataset_dir, const lcamv_calibration* calib,
                               const lcamv_reconstruct_options* options, const char* ply_path,
                               const char* depth_f32r, const char* variance_f32r) {
  return guarded([&] {
    require_arg(dataset_dir, "dataset_dir");
    require_arg(calib, "calib");
    require_arg(options, "options");
    require_arg(options->mode, "options->mode");

    lcamv::pipeline::PipelineConfig config;
    config.mode = lcamv::pipeline::mode_from_name(options->mode);
    config.ci_multiplier = options->ci_multiplier;
    config.modulation_threshold = options->modulation_threshold;
    config.guard_sigmas = options->guard_sigmas;
    config.assumed_noise_var = options->assumed_noise_var;

    auto stack = lcamv::io::load_dataset(dataset_dir);
    if (options->wavelength > 0.0) stack.fringe.wavelength = options->wavelength;
    if (options->periods > 0) stack.fringe.periods = options->periods;
    if (options->steps > 0) stack.fringe.steps = options->steps;
    const auto result = lcamv::pipeline::run_pipeline(stack, calib->bundle, config);
    if (ply_path)
      lcamv::io::write_ply(ply_path, result.depth, calib->bundle.stereo, result.texture);
    if (depth_f32r) lcamv::io::write_f32r(depth_f32r, result.depth);
    if (variance_f32r && !result.variance.empty())
      lcamv::io::write_f32r(variance_f32r, result.variance);
  });
}

lcamv_status lcamv_eval_plane(const char* depth_f32r, const lcamv_calibration* calib,
                              int roi_x, int roi_y, int roi_width, int roi_height,
                              uint64_t subsample, uint64_t seed, lcamv_plane_report* report,
                              const char* report_json, const char* error_map_f32r) {
  return guarded([&] {
    require_arg(depth_f32r, "depth_f32r");
    require_arg(calib, "calib");
    const auto depth = lcamv::io::read_f32r(depth_f32r);
    const lcamv::eval::PixelRoi roi{roi_x, roi_y, roi_width, roi_height};
    const auto points = lcamv::eval::roi_points(depth, calib->bundle.stereo, roi);
    const auto fit = lcamv::eval::fit_plane(points, subsample, seed);

    if (report) {
      for (int i = 0; i < 3; ++i) report->normal[i] = fit.normal[i];
      report->distance = fit.distance;
      report->mse = fit.mse;
      report->rmse = fit.rmse;
      report->n_total = fit.n_total;
      report->n_subsampled = fit.n_subsampled;
    }
    if (report_json) {
      nlohmann::json doc;
      doc["normal"] = {fit.normal.x(), fit.normal.y(), fit.normal.z()};
      doc["distance"] = fit.distance;
      doc["mse"] = fit.mse;
      doc["rmse"] = fit.rmse;
      doc["n_total"] = fit.n_total;
      doc["n_subsampled"] = fit.n_subsampled;
      doc["seed"] = seed;
      doc["roi"] = {roi_x, roi_y, roi_width, roi_height};
      std::ofstream os(report_json);
      if (!os) lcamv::raise(lcamv::Errc::io_failure,
                            std::string("cannot write '") + report_json + "'");
      os << doc.dump(2) << "\n";
    }
    if (error_map_f32r)
      lcamv::io::write_f32r(error_map_f32r,
                            lcamv::eval::plane_error_map(depth, calib->bundle.stereo, fit));
  });
}

void lcamv_mc_options_init(lcamv_mc_options* o) {
  if (!o) return;
  o->k0 = 0.0133;
  o->k1 = 0.1212;
  o->i_a = 8.0;
  o->i_b = 4.0;
  o->steps = 3;
  o->samples = 10000;
  o->grid = 90;
  o->seed = 1;
}

lcamv_status lcamv_monte_carlo_ci(const lcamv_mc_options* options, const char* csv_path,
                                  double* mean_multiplier) {
  return guarded([&] {
    require_arg(options, "options");
    const auto report = lcamv::fusion::monte_carlo_ci(
        options->k0, options->k1, options->i_a, options->i_b, options->steps,
        options->samples, options->grid, options->seed);
    if (csv_path) {
      std::FILE* fp = std::fopen(csv_path, "wb");
      if (!fp)
        lcamv::raise(lcamv::Errc::io_failure, std::string("cannot write '") + csv_path + "'");
      std::fprintf(fp, "phase,analytic_sigma,empirical_sigma,ci_halfwidth\n");
      for (const auto& row : report.rows)
        std::fprintf(fp, "%.9g,%.9g,%.9g,%.9g\n", row.phase, row.analytic_sigma,
                     row.empirical_sigma, row.ci_halfwidth);
      std::fclose(fp);
    }
    if (mean_multiplier) *mean_multiplier = report.mean_multiplier;
  });
}

}  // extern "C"
