#include "core/pipeline.hpp"

#include <cmath>
#include <limits>

#include "core/errors.hpp"
#include "core/parallel.hpp"

namespace lcamv::pipeline {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool present, const char* stage, const char* artifact) {
  if (!present)
    raise(Errc::missing_calibration,
          std::string(stage) + " needs the " + artifact + " calibration artifact");
}

phase::FringeConfig fringe_for(const sim::CaptureStack& stack,
                               const geometry::StereoCalibration& stereo) {
  phase::FringeConfig f = stack.fringe;
  f.prj_width = stereo.prj_size()[0];
  f.prj_height = stereo.prj_size()[1];
  f.validate();
  return f;
}

/// Per-pixel triangulation of a fused/single u_p field into a depth raster.
ChannelRaster triangulate_field(const ChannelRaster& u_p,
                                const geometry::StereoCalibration& stereo) {
  ChannelRaster depth(u_p.width(), u_p.height());
  depth.invalidate_all();
  parallel_rows(u_p.height(), [&](int y0, int y1) {
    for (int y = y0; y < y1; ++y) {
      for (int x = 0; x < u_p.width(); ++x) {
        if (!u_p.valid(x, y)) continue;
        try {
          const auto tri = geometry::triangulate({double(x), double(y)}, u_p.at(x, y), stereo);
          if (!tri.valid) continue;
          depth.at(x, y) = tri.s_c;
          depth.set_valid(x, y, true);
        } catch (const Error&) {
          // singular ray: leave the pixel masked
        }
      }
    }
  });
  return depth;
}

ChannelRaster texture_from(const phase::PhaseField& f) {
  ChannelRaster t(f.i_a.width(), f.i_a.height());
  for (size_t i = 0; i < t.size(); ++i) t[i] = f.i_a[i] + f.i_b[i];
  return t;
}

std::vector<ImageRaster> combine_channels(const sim::CaptureStack& stack, bool gray,
                                          const std::array<double, 3>& w) {
  const auto& r = gray ? stack.channels[0].gray : stack.channels[0].fringe;
  const auto& g = gray ? stack.channels[1].gray : stack.channels[1].fringe;
  const auto& b = gray ? stack.channels[2].gray : stack.channels[2].fringe;
  if (r.size() != g.size() || g.size() != b.size())
    raise(Errc::wrong_image_count, "channel stacks differ in pattern count");
  std::vector<ImageRaster> out;
  out.reserve(r.size());
  for (size_t i = 0; i < r.size(); ++i) {
    ImageRaster m(r[i].width(), r[i].height());
    for (size_t p = 0; p < m.size(); ++p)
      m[p] = static_cast<float>(w[0] * r[i][p] + w[1] * g[i][p] + w[2] * b[i][p]);
    m.intersect_mask(r[i]);
    m.intersect_mask(g[i]);
    m.intersect_mask(b[i]);
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace

Mode mode_from_name(const std::string& name) {
  if (name == "lcamv") return Mode::lcamv;
  if (name == "lca" || name == "lca-only") return Mode::lca_only;
  if (name == "mv" || name == "mv-only") return Mode::mv_only;
  if (name == "mean") return Mode::mean;
  if (name == "yuv") return Mode::yuv;
  if (name == "green") return Mode::green;
  raise(Errc::invalid_argument, "unknown mode '" + name + "'");
}

const char* mode_name(Mode mode) {
  switch (mode) {
    case Mode::lcamv: return "lcamv";
    case Mode::lca_only: return "lca";
    case Mode::mv_only: return "mv";
    case Mode::mean: return "mean";
    case Mode::yuv: return "yuv";
    case Mode::green: return "green";
  }
  return "?";
}

DecodedChannel decode_captures(const std::vector<ImageRaster>& fringe_images,
                               const std::vector<ImageRaster>& gray_images,
                               const phase::FringeConfig& fringe, const PipelineConfig& config,
                               double k0, double k1, Channel label) {
  DecodedChannel d;
  d.wrapped = phase::phase_shift_decode(fringe_images, fringe.steps,
                                        config.modulation_threshold);
  phase::apply_wrap_guard(d.wrapped, fringe.steps, k0, k1, config.guard_sigmas);
  d.order = phase::graycode_decode(gray_images, d.wrapped.i_a);
  const phase::PhaseField unwrapped =
      phase::unwrap(phase::align_to_period_origin(d.wrapped), d.order, fringe.periods);
  d.field = phase::phase_to_pixel(unwrapped, fringe.wavelength, label);
  return d;
}

PipelineResult run_pipeline(const sim::CaptureStack& stack, const CalibrationBundle& calib,
                            const PipelineConfig& config) {
  const phase::FringeConfig fringe = fringe_for(stack, calib.stereo);
  PipelineResult result;

  const bool combined =
      config.mode == Mode::mean || config.mode == Mode::yuv || config.mode == Mode::green;
  if (combined) {
    std::array<double, 3> w{0, 0, 0};
    switch (config.mode) {
      case Mode::mean: w = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}; break;
      case Mode::yuv: w = {0.299, 0.587, 0.114}; break;  // BT.601 luma
      default: w = {0.0, 1.0, 0.0}; break;               // green
    }
    const auto fringe_imgs = combine_channels(stack, false, w);
    const auto gray_imgs = combine_channels(stack, true, w);
    const DecodedChannel d =
        decode_captures(fringe_imgs, gray_imgs, fringe, config, config.assumed_noise_var, 0.0,
                        Channel::G);
    result.up_fused = d.field.u_p;
    result.depth = triangulate_field(result.up_fused, calib.stereo);
    const ChannelRaster tex = texture_from(d.wrapped);
    result.texture = {tex, tex, tex};
    return result;
  }

  const bool correct_lca = config.mode == Mode::lcamv || config.mode == Mode::lca_only;
  const bool weighted = config.mode == Mode::lcamv || config.mode == Mode::mv_only;
  if (correct_lca) {
    require(calib.theta_c_r.has_value() && calib.theta_c_b.has_value(), "CorrectCamLCA",
            "theta_c");
    require(calib.theta_p.has_value(), "CorrectPrjLCA", "theta_p");
  }
  if (weighted) require(calib.k.has_value(), "ChannelFusion", "k");

  std::array<DecodedChannel, 3> decoded;
  for (int c = 0; c < 3; ++c) {
    const Channel ch = static_cast<Channel>(c);
    const auto& caps = stack.channels[c];
    double k0 = config.assumed_noise_var, k1 = 0.0;
    if (weighted) {
      k0 = (*calib.k)[c].k0;
      k1 = (*calib.k)[c].k1;
    }
    if (correct_lca && ch != Channel::G) {
      const auto& theta =
          ch == Channel::R ? *calib.theta_c_r : *calib.theta_c_b;
      std::vector<ImageRaster> fr, gr;
      fr.reserve(caps.fringe.size());
      gr.reserve(caps.gray.size());
      for (const auto& img : caps.fringe) fr.push_back(cam_lca::correct_image(img, theta));
      for (const auto& img : caps.gray) gr.push_back(cam_lca::correct_image(img, theta));
      decoded[c] = decode_captures(fr, gr, fringe, config, k0, k1, ch);
    } else {
      decoded[c] = decode_captures(caps.fringe, caps.gray, fringe, config, k0, k1, ch);
    }
    if (correct_lca && ch != Channel::G)
      decoded[c].field =
          prj_lca::correct_up(decoded[c].field, calib.theta_p->for_channel(ch), calib.stereo);
  }

  const int w = decoded[0].field.u_p.width();
  const int h = decoded[0].field.u_p.height();
  if (weighted) {
    std::array<fusion::FuseChannelInput, 3> inputs;
    for (int c = 0; c < 3; ++c) {
      inputs[c].field = &decoded[c].field;
      inputs[c].i_a = &decoded[c].wrapped.i_a;
      inputs[c].i_b = &decoded[c].wrapped.i_b;
      inputs[c].k = (*calib.k)[c];
    }
    ProjectorPixelField fused =
        fusion::fuse_fields(inputs, fringe.wavelength, fringe.steps, config.ci_multiplier);
    result.up_fused = std::move(fused.u_p);
    result.variance = std::move(fused.variance);
    result.variance.mask_storage() = result.up_fused.mask();
  } else {
    // LCA-only ablation: unweighted mean of the valid corrected channels.
    result.up_fused = ChannelRaster(w, h);
    result.up_fused.invalidate_all();
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double sum = 0.0;
        int n = 0;
        for (int c = 0; c < 3; ++c) {
          if (!decoded[c].field.u_p.valid(x, y)) continue;
          sum += decoded[c].field.u_p.at(x, y);
          ++n;
        }
        if (n == 0) continue;
        result.up_fused.at(x, y) = sum / n;
        result.up_fused.set_valid(x, y, true);
      }
    }
  }

  result.depth = triangulate_field(result.up_fused, calib.stereo);
  for (int c = 0; c < 3; ++c) result.texture[c] = texture_from(decoded[c].wrapped);
  return result;
}

CamLcaCalibration calibrate_cam_lca_channels(const sim::CornerSet& corners) {
  CamLcaCalibration out;
  out.red = cam_lca::calibrate_cam_lca(corners.reference, corners.observed_r);
  out.blue = cam_lca::calibrate_cam_lca(corners.reference, corners.observed_b);
  return out;
}

PrjLcaCalibrator::PrjLcaCalibrator(const CalibrationBundle& calib,
                                   const PipelineConfig& config)
    : calib_(calib),
      config_(config),
      samples_r_(calib.stereo.prj_size()[0], calib.stereo.prj_size()[1]),
      samples_b_(calib.stereo.prj_size()[0], calib.stereo.prj_size()[1]) {}

void PrjLcaCalibrator::add_pose(const sim::CaptureStack& pose) {
  const phase::FringeConfig fringe = fringe_for(pose, calib_.stereo);
  std::array<DecodedChannel, 3> decoded;
  for (int c = 0; c < 3; ++c) {
    const Channel ch = static_cast<Channel>(c);
    double k0 = config_.assumed_noise_var, k1 = 0.0;
    if (calib_.k) {
      k0 = (*calib_.k)[c].k0;
      k1 = (*calib_.k)[c].k1;
    }
    const auto& caps = pose.channels[c];
    const cam_lca::CamLcaParams* theta = nullptr;
    if (ch == Channel::R && calib_.theta_c_r) theta = &*calib_.theta_c_r;
    if (ch == Channel::B && calib_.theta_c_b) theta = &*calib_.theta_c_b;
    if (theta) {
      std::vector<ImageRaster> fr, gr;
      for (const auto& img : caps.fringe) fr.push_back(cam_lca::correct_image(img, *theta));
      for (const auto& img : caps.gray) gr.push_back(cam_lca::correct_image(img, *theta));
      decoded[c] = decode_captures(fr, gr, fringe, config_, k0, k1, ch);
    } else {
      decoded[c] = decode_captures(caps.fringe, caps.gray, fringe, config_, k0, k1, ch);
    }
  }

  for (const Channel ch : {Channel::R, Channel::B}) {
    const auto& d = decoded[static_cast<int>(ch)];
    const ChannelRaster delta = prj_lca::observe_delta(decoded[1].field, d.field);

    // Triangulate this channel's own u_p for (z_p, v_p) at every sample.
    const int w = delta.width();
    const int h = delta.height();
    ChannelRaster up(w, h), vp(w, h), zp(w, h);
    up.invalidate_all();
    vp.invalidate_all();
    zp.invalidate_all();
    parallel_rows(h, [&](int y0, int y1) {
      for (int y = y0; y < y1; ++y) {
        for (int x = 0; x < w; ++x) {
          if (!delta.valid(x, y) || !d.field.u_p.valid(x, y)) continue;
          try {
            const auto tri = geometry::triangulate({double(x), double(y)},
                                                   d.field.u_p.at(x, y), calib_.stereo);
            if (!tri.valid || tri.s_p <= 0.0) continue;
            up.at(x, y) = d.field.u_p.at(x, y);
            vp.at(x, y) = tri.v_p;
            zp.at(x, y) = tri.s_p;
            up.set_valid(x, y, true);
            vp.set_valid(x, y, true);
            zp.set_valid(x, y, true);
          } catch (const Error&) {
          }
        }
      }
    });
    const prj_lca::RemappedPose remapped = prj_lca::remap_to_projector(
        delta, up, vp, zp, samples_r_.width(), samples_r_.height());
    (ch == Channel::R ? samples_r_ : samples_b_).add_pose(remapped);
  }
  ++poses_;
}

PrjLcaCalibration PrjLcaCalibrator::finish() const {
  if (poses_ < 2)
    raise(Errc::insufficient_points, "projector LCA calibration needs at least 2 poses");
  PrjLcaCalibration out;
  out.maps.red = prj_lca::fit_alpha_beta(samples_r_);
  out.maps.blue = prj_lca::fit_alpha_beta(samples_b_);
  out.correlation_r = prj_lca::correlation_map(samples_r_);
  out.correlation_b = prj_lca::correlation_map(samples_b_);
  return out;
}

PrjLcaCalibration calibrate_prj_lca_poses(const std::vector<sim::CaptureStack>& poses,
                                          const CalibrationBundle& calib,
                                          const PipelineConfig& config) {
  PrjLcaCalibrator calibrator(calib, config);
  for (const auto& pose : poses) calibrator.add_pose(pose);
  return calibrator.finish();
}

std::array<noise::NoiseParams, 3> calibrate_noise_levels(
    const std::vector<sim::FlatFieldLevel>& levels, const noise::PixelRect& roi) {
  if (levels.size() < 2)
    raise(Errc::degenerate_levels, "noise calibration needs at least 2 intensity levels");
  std::array<noise::NoiseParams, 3> out;
  for (int c = 0; c < 3; ++c) {
    std::vector<noise::NoiseSample> samples;
    samples.reserve(levels.size());
    for (const auto& lvl : levels) {
      noise::PixelRect r = roi;
      if (r.width <= 0 || r.height <= 0)
        r = {0, 0, lvl.captures[c][0].width(), lvl.captures[c][0].height()};
      samples.push_back(noise::estimate_pixel_noise(lvl.captures[c][0], lvl.captures[c][1], r));
    }
    out[c] = noise::fit_noise_model(samples);
  }
  return out;
}

}  // namespace lcamv::pipeline
