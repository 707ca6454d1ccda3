#include "core/sim.hpp"

#include <atomic>
#include <cmath>
#include <random>

#include "core/errors.hpp"
#include "core/interp.hpp"
#include "core/mathutil.hpp"
#include "core/parallel.hpp"

namespace lcamv::sim {

namespace {

constexpr uint64_t kStreamFringe = 1;
constexpr uint64_t kStreamGray = 2;
constexpr uint64_t kStreamFlat = 3;

uint64_t stream_id(uint64_t kind, int channel, int index) {
  return (kind << 32) | (static_cast<uint64_t>(channel) << 16) |
         static_cast<uint64_t>(index);
}

// Inverse of the camera-LCA correction map f(p) = p + delta(p): the injected
// observation warp. Fixed-point iteration; ||delta|| << 1 px so a few rounds
// reach double precision.
void invert_cam_lca(double x, double y, const cam_lca::CamLcaParams& p, double* u, double* v) {
  *u = x;
  *v = y;
  if (p.is_identity()) return;
  for (int i = 0; i < 8; ++i) {
    const cam_lca::Delta d = cam_lca_delta(*u, *v, p);
    const double nu = x - d.dx;
    const double nv = y - d.dy;
    const double move = std::abs(nu - *u) + std::abs(nv - *v);
    *u = nu;
    *v = nv;
    if (move < 1e-14) break;
  }
}

struct SurfaceHit {
  bool hit = false;
  double s_c = 0.0;
  Eigen::Vector3d point{0, 0, 0};
};

SurfaceHit intersect(const Scene& scene, const geometry::StereoCalibration& calib, double u,
                     double v) {
  const Eigen::Vector3d dir = calib.K_c_inv() * Eigen::Vector3d(u, v, 1.0);
  SurfaceHit hit;
  if (const auto* plane = std::get_if<PlaneGeometry>(&scene.geometry)) {
    const double denom = plane->normal.dot(dir);
    if (std::abs(denom) < 1e-12) return hit;
    const double s = plane->distance / denom;
    if (s <= 0.0) return hit;
    hit.hit = true;
    hit.s_c = s;
    hit.point = s * dir;
  } else {
    const auto& hm = std::get<HeightMapGeometry>(scene.geometry);
    const BilinearSample s = bilinear(hm.depth, u, v);
    if (!s.valid || s.value <= 0.0) return hit;
    hit.hit = true;
    hit.s_c = s.value;
    hit.point = s.value * dir;
  }
  return hit;
}

struct PlaneFrame {
  Eigen::Vector3d origin;
  Eigen::Vector3d e1, e2;
};

PlaneFrame plane_frame(const PlaneGeometry& plane) {
  PlaneFrame f;
  const Eigen::Vector3d n = plane.normal.normalized();
  f.origin = plane.distance * n;
  Eigen::Vector3d up(0.0, 1.0, 0.0);
  if (std::abs(n.dot(up)) > 0.99) up = Eigen::Vector3d(1.0, 0.0, 0.0);
  f.e1 = up.cross(n).normalized();
  f.e2 = n.cross(f.e1);
  return f;
}

std::array<double, 3> reflectance_at(const Scene& scene, const PlaneFrame& frame,
                                     const Eigen::Vector3d& point) {
  std::array<double, 3> rho = scene.base_reflectance;
  if (!scene.patches) return rho;
  const PatchTexture& tex = *scene.patches;
  const Eigen::Vector3d rel = point - frame.origin;
  const double a = rel.dot(frame.e1) + 0.5 * tex.board_width;
  const double b = rel.dot(frame.e2) + 0.5 * tex.board_height;
  int col = static_cast<int>(std::floor(a / tex.board_width * tex.cols));
  int row = static_cast<int>(std::floor(b / tex.board_height * tex.rows));
  col = std::clamp(col, 0, tex.cols - 1);
  row = std::clamp(row, 0, tex.rows - 1);
  const auto& c = tex.color_at(col, row);
  for (int i = 0; i < 3; ++i) rho[i] *= c[i];
  return rho;
}

}  // namespace

CaptureStack render(const Scene& scene, const geometry::StereoCalibration& calib,
                    const phase::FringeConfig& fringe) {
  fringe.validate();
  if (!is_power_of_two(static_cast<uint32_t>(fringe.periods)))
    raise(Errc::non_power_of_two_periods, "gray-code periods must be a power of two");
  if (scene.patches && !std::holds_alternative<PlaneGeometry>(scene.geometry))
    raise(Errc::invalid_argument, "patch textures attach to plane scenes only");

  const int w = calib.cam_size()[0];
  const int h = calib.cam_size()[1];
  const int prj_w = calib.prj_size()[0];
  const int prj_h = calib.prj_size()[1];
  const int steps = fringe.steps;
  const int bits = log2_exact(static_cast<uint32_t>(fringe.periods));
  const std::vector<double> deltas = phase::shift_offsets(steps);
  std::vector<double> cosd(steps), sind(steps);
  for (int i = 0; i < steps; ++i) {
    cosd[i] = std::cos(deltas[i]);
    sind[i] = std::sin(deltas[i]);
  }

  CaptureStack out;
  out.fringe = fringe;
  out.seed = scene.seed;
  for (int c = 0; c < 3; ++c) {
    out.channels[c].fringe.assign(steps, ImageRaster(w, h));
    out.channels[c].gray.assign(bits, ImageRaster(w, h));
  }
  out.truth.depth = ChannelRaster(w, h);
  out.truth.z_p = ChannelRaster(w, h);
  out.truth.v_p = ChannelRaster(w, h);
  out.truth.up_ideal = ChannelRaster(w, h);
  out.truth.delta_r = ChannelRaster(w, h);
  out.truth.delta_b = ChannelRaster(w, h);
  out.truth.depth.invalidate_all();
  out.truth.z_p.invalidate_all();
  out.truth.v_p.invalidate_all();
  out.truth.up_ideal.invalidate_all();
  out.truth.delta_r.invalidate_all();
  out.truth.delta_b.invalidate_all();

  const PlaneFrame frame = std::holds_alternative<PlaneGeometry>(scene.geometry)
                               ? plane_frame(std::get<PlaneGeometry>(scene.geometry))
                               : PlaneFrame{};
  const std::array<const cam_lca::CamLcaParams*, 3> warp = {
      &scene.true_cam_lca_r, nullptr, &scene.true_cam_lca_b};
  const std::array<const PrjLcaTruth*, 3> prj_truth = {&scene.true_prj_lca_r, nullptr,
                                                       &scene.true_prj_lca_b};

  std::atomic<long long> visible{0};

  parallel_rows(h, [&](int y0, int y1) {
    for (int y = y0; y < y1; ++y) {
      for (int x = 0; x < w; ++x) {
        const uint64_t pix = static_cast<uint64_t>(y) * w + x;

        // Ground truth along the unwarped ray.
        const SurfaceHit gt_hit = intersect(scene, calib, x, y);
        if (gt_hit.hit) {
          visible.fetch_add(1, std::memory_order_relaxed);
          const auto proj = calib.project(gt_hit.point);
          out.truth.depth.at(x, y) = gt_hit.s_c;
          out.truth.z_p.at(x, y) = proj.s_p;
          out.truth.v_p.at(x, y) = proj.prj.v;
          out.truth.up_ideal.at(x, y) = proj.prj.u;
          const bool lit = proj.prj.u >= 0.0 && proj.prj.u < prj_w && proj.prj.v >= 0.0 &&
                           proj.prj.v < prj_h && proj.s_p > 0.0;
          if (lit) {
            const double un = proj.prj.u / prj_w;
            const double vn = proj.prj.v / prj_h;
            out.truth.depth.set_valid(x, y, true);
            out.truth.z_p.set_valid(x, y, true);
            out.truth.v_p.set_valid(x, y, true);
            out.truth.up_ideal.set_valid(x, y, true);
            out.truth.delta_r.at(x, y) = scene.true_prj_lca_r.alpha_at(un, vn) * proj.s_p +
                                         scene.true_prj_lca_r.beta_at(un, vn);
            out.truth.delta_b.at(x, y) = scene.true_prj_lca_b.alpha_at(un, vn) * proj.s_p +
                                         scene.true_prj_lca_b.beta_at(un, vn);
            out.truth.delta_r.set_valid(x, y, true);
            out.truth.delta_b.set_valid(x, y, true);
          }
        }

        // Captured intensities per camera channel.
        for (int ch = 0; ch < 3; ++ch) {
          double su = x, sv = y;
          if (warp[ch]) invert_cam_lca(x, y, *warp[ch], &su, &sv);
          const SurfaceHit hit = intersect(scene, calib, su, sv);

          // Per projector band: clean fringe phase and gray period at the
          // band's aberrated column; zero light if the band misses the panel.
          double band_cos[3] = {0, 0, 0};
          double band_sin[3] = {0, 0, 0};
          int band_period[3] = {0, 0, 0};
          double band_gain[3] = {0, 0, 0};  // crosstalk * reflectance
          if (hit.hit) {
            const auto proj = calib.project(hit.point);
            const std::array<double, 3> rho = reflectance_at(scene, frame, hit.point);
            const double un = proj.prj.u / prj_w;
            const double vn = proj.prj.v / prj_h;
            const bool v_ok = proj.prj.v >= 0.0 && proj.prj.v < prj_h && proj.s_p > 0.0;
            for (int band = 0; band < 3; ++band) {
              double col = proj.prj.u;
              if (prj_truth[band])
                col -= prj_truth[band]->alpha_at(un, vn) * proj.s_p +
                       prj_truth[band]->beta_at(un, vn);
              if (!v_ok || col < 0.0 || col >= prj_w) continue;
              const double psi = kTwoPi * col / fringe.wavelength;
              band_cos[band] = std::cos(psi);
              band_sin[band] = std::sin(psi);
              band_period[band] = static_cast<int>(col / fringe.wavelength);
              band_gain[band] = rho[band] * scene.crosstalk(ch, band);
              band_gain[band] = band_gain[band] < 0.0 ? 0.0 : band_gain[band];
            }
          }

          const auto& k = scene.noise[ch];
          auto emit = [&](ImageRaster& img, double clean, uint64_t stream) {
            double value = clean;
            const double var = k.variance_at(clean);
            if (var > 0.0) value += std::sqrt(var) * counter_normal(scene.seed, stream, pix);
            if (scene.quantize) value = std::clamp(std::round(value), 0.0, 255.0);
            img.at(x, y) = static_cast<float>(value);
          };

          for (int i = 0; i < steps; ++i) {
            double clean = 0.0;
            for (int band = 0; band < 3; ++band) {
              if (band_gain[band] == 0.0) continue;
              // cos(psi - delta_i) expanded around the precomputed band phase
              const double cosv = band_cos[band] * cosd[i] + band_sin[band] * sind[i];
              clean += band_gain[band] *
                       (phase::kPatternMean + phase::kPatternAmplitude * cosv);
            }
            emit(out.channels[ch].fringe[i], clean, stream_id(kStreamFringe, ch, i));
          }
          for (int b = 0; b < bits; ++b) {
            double clean = 0.0;
            for (int band = 0; band < 3; ++band) {
              if (band_gain[band] == 0.0) continue;
              const uint32_t code = binary_to_gray(static_cast<uint32_t>(band_period[band]));
              const bool lit_bit = (code >> (bits - 1 - b)) & 1u;  // MSB-first order
              if (lit_bit) clean += band_gain[band] * 255.0;
            }
            emit(out.channels[ch].gray[b], clean, stream_id(kStreamGray, ch, b));
          }
        }
      }
    }
  });

  if (visible.load() == 0)
    raise(Errc::scene_not_visible, "no camera ray intersects the scene geometry");
  return out;
}

std::vector<FlatFieldLevel> render_flat_pairs(const Scene& scene,
                                              const geometry::StereoCalibration& calib,
                                              const std::vector<double>& levels) {
  if (levels.size() < 2)
    raise(Errc::invalid_argument, "flat-field calibration needs at least 2 levels");
  const int w = calib.cam_size()[0];
  const int h = calib.cam_size()[1];

  std::vector<FlatFieldLevel> out(levels.size());
  for (size_t li = 0; li < levels.size(); ++li) {
    out[li].level = levels[li];
    for (int ch = 0; ch < 3; ++ch) {
      double clean = 0.0;
      for (int band = 0; band < 3; ++band)
        clean += scene.crosstalk(ch, band) * scene.base_reflectance[band] * levels[li];
      const auto& k = scene.noise[ch];
      for (int member = 0; member < 2; ++member) {
        ImageRaster img(w, h);
        const uint64_t stream =
            stream_id(kStreamFlat, ch, static_cast<int>(li) * 2 + member);
        const double var = k.variance_at(clean);
        parallel_rows(h, [&](int y0, int y1) {
          for (int y = y0; y < y1; ++y) {
            for (int x = 0; x < w; ++x) {
              double value = clean;
              if (var > 0.0)
                value += std::sqrt(var) *
                         counter_normal(scene.seed, stream, static_cast<uint64_t>(y) * w + x);
              if (scene.quantize) value = std::clamp(std::round(value), 0.0, 255.0);
              img.at(x, y) = static_cast<float>(value);
            }
          }
        });
        out[li].captures[ch][member] = std::move(img);
      }
    }
  }
  return out;
}

Scene make_colorboard_scene(int cols, int rows, uint64_t seed) {
  if (cols < 1 || rows < 1) raise(Errc::invalid_argument, "patch grid must be at least 1x1");
  Scene scene;
  scene.seed = seed;
  PatchTexture tex;
  tex.cols = cols;
  tex.rows = rows;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.05, 1.0);
  tex.colors.resize(static_cast<size_t>(cols) * rows);
  for (auto& c : tex.colors)
    c = {uni(rng), uni(rng), uni(rng)};
  scene.patches = tex;
  return scene;
}

geometry::StereoCalibration make_default_rig(double image_scale) {
  const double s = image_scale;
  const int cam_w = std::max(8, static_cast<int>(std::lround(1920 * s)));
  const int cam_h = std::max(8, static_cast<int>(std::lround(1200 * s)));
  const int prj_w = std::max(8, static_cast<int>(std::lround(912 * s)));
  const int prj_h = std::max(8, static_cast<int>(std::lround(1140 * s)));

  Eigen::Matrix3d K_c;
  K_c << 1600 * s, 0, cam_w / 2.0, 0, 1600 * s, cam_h / 2.0, 0, 0, 1;
  Eigen::Matrix3d K_p;
  K_p << 1400 * s, 0, prj_w / 2.0, 0, 1400 * s, prj_h / 2.0, 0, 0, 1;

  // Projector 80 mm to the right of the camera, aimed at [0, 0, 320].
  const Eigen::Vector3d center(80.0, 0.0, 0.0);
  const Eigen::Vector3d aim(0.0, 0.0, 320.0);
  const Eigen::Vector3d zp = (aim - center).normalized();
  const Eigen::Vector3d yp(0.0, 1.0, 0.0);
  const Eigen::Vector3d xp = yp.cross(zp).normalized();
  Eigen::Matrix3d R;
  R.row(0) = xp;
  R.row(1) = zp.cross(xp);
  R.row(2) = zp;
  const Eigen::Vector3d t = -R * center;
  return geometry::StereoCalibration::make(K_c, K_p, R, t, {cam_w, cam_h}, {prj_w, prj_h});
}

cam_lca::CamLcaParams demo_cam_lca(Channel ch, double image_scale) {
  cam_lca::CamLcaParams p;
  if (ch == Channel::R) {
    p = {1.0004, -959.2, -600.5, 1.0e-4, 2.2e-10, 8.0e-8, -6.0e-8};
  } else if (ch == Channel::B) {
    p = {0.9997, -960.8, -599.4, -0.8e-4, -1.9e-10, 6.0e-8, 5.0e-8};
  }
  // Keep the displacement magnitudes (in pixels) at any image scale, so the
  // calibration problem stays equally well conditioned on small test rigs.
  const double s = image_scale;
  p.du *= s;
  p.dv *= s;
  p.c1 /= s;
  p.c2 /= s * s * s;
  p.c3 /= s * s;
  p.c4 /= s * s;
  return p;  // G: identity
}

PrjLcaTruth demo_prj_lca(Channel ch) {
  PrjLcaTruth t;
  if (ch == Channel::R) {
    t.alpha = {1.2e-3, 4.0e-4, 2.0e-4};
    t.beta = {-0.084, -0.05, 0.02};
  } else if (ch == Channel::B) {
    t.alpha = {-0.9e-3, -3.0e-4, 4.0e-4};
    t.beta = {0.038, 0.04, -0.03};
  }
  return t;  // G: zero
}

std::array<noise::NoiseParams, 3> default_sensor_noise() {
  return {noise::NoiseParams{0.1333, 0.0215, false}, noise::NoiseParams{0.1184, 0.0134, false},
          noise::NoiseParams{0.1500, 0.0170, false}};
}

Eigen::Matrix3d overlap_crosstalk() {
  Eigen::Matrix3d m;
  m << 0.80, 0.15, 0.05,
       0.125, 0.75, 0.125,
       0.05, 0.15, 0.80;
  return m;
}

CornerSet make_corner_set(std::array<int, 2> cam_size, int nx, int ny,
                          const cam_lca::CamLcaParams& theta_r,
                          const cam_lca::CamLcaParams& theta_b, double jitter_sigma,
                          uint64_t seed) {
  if (nx < 2 || ny < 2) raise(Errc::invalid_argument, "corner grid must be at least 2x2");
  CornerSet set;
  const double margin_x = cam_size[0] * 0.06;
  const double margin_y = cam_size[1] * 0.06;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const double u = margin_x + (cam_size[0] - 2 * margin_x) * ix / (nx - 1.0);
      const double v = margin_y + (cam_size[1] - 2 * margin_y) * iy / (ny - 1.0);
      set.reference.push_back({u, v});
      const cam_lca::Delta dr = cam_lca_delta(u, v, theta_r);
      const cam_lca::Delta db = cam_lca_delta(u, v, theta_b);
      double jr[4] = {0, 0, 0, 0};
      if (jitter_sigma > 0.0)
        for (double& j : jr) j = jitter_sigma * gauss(rng);
      set.observed_r.push_back({u + dr.dx + jr[0], v + dr.dy + jr[1]});
      set.observed_b.push_back({u + db.dx + jr[2], v + db.dy + jr[3]});
    }
  }
  return set;
}

}  // namespace lcamv::sim
