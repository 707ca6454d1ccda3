#include "core/prj_lca.hpp"

#include <cmath>
#include <vector>

#include "core/errors.hpp"
#include "core/interp.hpp"
#include "core/parallel.hpp"

namespace lcamv::prj_lca {

const ChannelMaps& PrjLcaMaps::for_channel(Channel c) const {
  switch (c) {
    case Channel::R: return red;
    case Channel::B: return blue;
    case Channel::G: break;
  }
  raise(Errc::invalid_argument, "the green reference channel has no LCA maps");
}

ChannelRaster observe_delta(const ProjectorPixelField& up_ref,
                            const ProjectorPixelField& up_ch) {
  if (!up_ref.u_p.same_size(up_ch.u_p))
    raise(Errc::size_mismatch, "projector-pixel fields differ in size");
  ChannelRaster delta(up_ref.u_p.width(), up_ref.u_p.height());
  for (size_t i = 0; i < delta.size(); ++i) delta[i] = up_ref.u_p[i] - up_ch.u_p[i];
  delta.intersect_mask(up_ref.u_p);
  delta.intersect_mask(up_ch.u_p);
  return delta;
}

namespace {

// Interior-hole fill: interpolate linearly between the nearest filled pixels
// along the row and the column, averaging the two estimates when both exist.
// No extrapolation, so the filled region stays inside the sampled hull.
void fill_holes(ChannelRaster* r) {
  const int w = r->width();
  const int h = r->height();
  const ChannelRaster src = *r;

  auto row_estimate = [&](int x, int y, double* out) {
    int xl = x - 1;
    while (xl >= 0 && !src.valid(xl, y)) --xl;
    if (xl < 0) return false;
    int xr = x + 1;
    while (xr < w && !src.valid(xr, y)) ++xr;
    if (xr >= w) return false;
    const double f = static_cast<double>(x - xl) / (xr - xl);
    *out = src.at(xl, y) * (1.0 - f) + src.at(xr, y) * f;
    return true;
  };
  auto col_estimate = [&](int x, int y, double* out) {
    int yt = y - 1;
    while (yt >= 0 && !src.valid(x, yt)) --yt;
    if (yt < 0) return false;
    int yb = y + 1;
    while (yb < h && !src.valid(x, yb)) ++yb;
    if (yb >= h) return false;
    const double f = static_cast<double>(y - yt) / (yb - yt);
    *out = src.at(x, yt) * (1.0 - f) + src.at(x, yb) * f;
    return true;
  };

  parallel_rows(h, [&](int y0, int y1) {
    for (int y = y0; y < y1; ++y) {
      for (int x = 0; x < w; ++x) {
        if (src.valid(x, y)) continue;
        double re = 0.0, ce = 0.0;
        const bool has_r = row_estimate(x, y, &re);
        const bool has_c = col_estimate(x, y, &ce);
        if (!has_r && !has_c) continue;
        const double v = has_r && has_c ? 0.5 * (re + ce) : (has_r ? re : ce);
        r->at(x, y) = v;
        r->set_valid(x, y, true);
      }
    }
  });
}

}  // namespace

RemappedPose remap_to_projector(const ChannelRaster& delta_cam, const ChannelRaster& u_p,
                                const ChannelRaster& v_p, const ChannelRaster& z_p,
                                int prj_width, int prj_height) {
  if (!delta_cam.same_size(u_p) || !delta_cam.same_size(v_p) || !delta_cam.same_size(z_p))
    raise(Errc::size_mismatch, "camera-indexed rasters differ in size");

  ChannelRaster delta_sum(prj_width, prj_height);
  ChannelRaster z_sum(prj_width, prj_height);
  RasterT<int32_t> hits(prj_width, prj_height);

  for (int y = 0; y < delta_cam.height(); ++y) {
    for (int x = 0; x < delta_cam.width(); ++x) {
      if (!delta_cam.valid(x, y) || !u_p.valid(x, y) || !v_p.valid(x, y) || !z_p.valid(x, y))
        continue;
      const long px = std::lround(u_p.at(x, y));
      const long py = std::lround(v_p.at(x, y));
      if (px < 0 || px >= prj_width || py < 0 || py >= prj_height) continue;
      delta_sum.at(static_cast<int>(px), static_cast<int>(py)) += delta_cam.at(x, y);
      z_sum.at(static_cast<int>(px), static_cast<int>(py)) += z_p.at(x, y);
      ++hits.at(static_cast<int>(px), static_cast<int>(py));
    }
  }

  RemappedPose pose;
  pose.delta = ChannelRaster(prj_width, prj_height);
  pose.z = ChannelRaster(prj_width, prj_height);
  pose.delta.invalidate_all();
  pose.z.invalidate_all();
  for (int y = 0; y < prj_height; ++y) {
    for (int x = 0; x < prj_width; ++x) {
      const int32_t n = hits.at(x, y);
      if (n == 0) continue;
      pose.delta.at(x, y) = delta_sum.at(x, y) / n;
      pose.z.at(x, y) = z_sum.at(x, y) / n;
      pose.delta.set_valid(x, y, true);
      pose.z.set_valid(x, y, true);
    }
  }
  fill_holes(&pose.delta);
  fill_holes(&pose.z);
  // A pixel is usable only when both quantities got a value.
  pose.delta.intersect_mask(pose.z);
  pose.z.intersect_mask(pose.delta);
  return pose;
}

PlaneSampleSet::PlaneSampleSet(int prj_width, int prj_height)
    : n_(prj_width, prj_height),
      sum_z_(prj_width, prj_height),
      sum_zz_(prj_width, prj_height),
      sum_d_(prj_width, prj_height),
      sum_dd_(prj_width, prj_height),
      sum_zd_(prj_width, prj_height) {}

void PlaneSampleSet::add_pose(const RemappedPose& pose) {
  if (!pose.delta.same_size(n_) || !pose.z.same_size(n_))
    raise(Errc::size_mismatch, "pose rasters do not match the projector size");
  for (int y = 0; y < n_.height(); ++y) {
    for (int x = 0; x < n_.width(); ++x) {
      if (!pose.delta.valid(x, y) || !pose.z.valid(x, y)) continue;
      const double d = pose.delta.at(x, y);
      const double z = pose.z.at(x, y);
      ++n_.at(x, y);
      sum_z_.at(x, y) += z;
      sum_zz_.at(x, y) += z * z;
      sum_d_.at(x, y) += d;
      sum_dd_.at(x, y) += d * d;
      sum_zd_.at(x, y) += z * d;
    }
  }
  ++poses_;
}

ChannelMaps fit_alpha_beta(const PlaneSampleSet& s) {
  const int w = s.width();
  const int h = s.height();
  ChannelMaps maps;
  maps.alpha = ChannelRaster(w, h);
  maps.beta = ChannelRaster(w, h);
  maps.alpha.invalidate_all();
  maps.beta.invalidate_all();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int32_t n = s.count().at(x, y);
      if (n < 2) continue;
      const double mean_z = s.sum_z().at(x, y) / n;
      const double mean_d = s.sum_d().at(x, y) / n;
      const double szz = s.sum_zz().at(x, y) - n * mean_z * mean_z;
      if (szz / (n - 1) < 1e-6) continue;  // needs distinct depths
      const double szd = s.sum_zd().at(x, y) - n * mean_z * mean_d;
      const double alpha = szd / szz;
      maps.alpha.at(x, y) = alpha;
      maps.beta.at(x, y) = mean_d - alpha * mean_z;
      maps.alpha.set_valid(x, y, true);
      maps.beta.set_valid(x, y, true);
    }
  }
  return maps;
}

ChannelRaster correlation_map(const PlaneSampleSet& s) {
  const int w = s.width();
  const int h = s.height();
  ChannelRaster rho(w, h);
  rho.invalidate_all();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int32_t n = s.count().at(x, y);
      if (n < 3) continue;
      const double mean_z = s.sum_z().at(x, y) / n;
      const double mean_d = s.sum_d().at(x, y) / n;
      const double szz = s.sum_zz().at(x, y) - n * mean_z * mean_z;
      const double sdd = s.sum_dd().at(x, y) - n * mean_d * mean_d;
      if (szz <= 0.0 || sdd <= 0.0) continue;
      const double szd = s.sum_zd().at(x, y) - n * mean_z * mean_d;
      double r = szd / std::sqrt(szz * sdd);
      if (r > 1.0) r = 1.0;
      if (r < -1.0) r = -1.0;
      rho.at(x, y) = r;
      rho.set_valid(x, y, true);
    }
  }
  return rho;
}

ProjectorPixelField correct_up(const ProjectorPixelField& field, const ChannelMaps& maps,
                               const geometry::StereoCalibration& calib) {
  ProjectorPixelField out = field;
  out.u_p.ensure_mask();
  const int w = field.u_p.width();
  const int h = field.u_p.height();
  parallel_rows(h, [&](int y0, int y1) {
    for (int y = y0; y < y1; ++y) {
      for (int x = 0; x < w; ++x) {
        if (!out.u_p.valid(x, y)) continue;
        const double u_p = field.u_p.at(x, y);
        double z_p, v_p;
        try {
          const auto tri = geometry::triangulate({double(x), double(y)}, u_p, calib);
          if (!tri.valid) {
            out.u_p.set_valid(x, y, false);
            continue;
          }
          z_p = tri.s_p;
          v_p = tri.v_p;
        } catch (const Error&) {
          out.u_p.set_valid(x, y, false);
          continue;
        }
        const BilinearSample a = bilinear(maps.alpha, u_p, v_p);
        const BilinearSample b = bilinear(maps.beta, u_p, v_p);
        if (!a.valid || !b.valid) {  // outside the calibrated LUT
          out.u_p.set_valid(x, y, false);
          continue;
        }
        out.u_p.at(x, y) = u_p + (a.value * z_p + b.value);
      }
    }
  });
  return out;
}

}  // namespace lcamv::prj_lca
