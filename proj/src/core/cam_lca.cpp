#include "core/cam_lca.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "core/errors.hpp"
#include "core/interp.hpp"
#include "core/parallel.hpp"

namespace lcamv::cam_lca {

Delta cam_lca_delta(double u, double v, const CamLcaParams& p) {
  const double x = p.a * u + p.du;
  const double y = v + p.dv;
  const double r2 = x * x + y * y;
  Delta d;
  d.dx = p.c1 * x + p.c2 * x * r2 + p.c3 * (3.0 * x * x + y * y) + 2.0 * p.c4 * x * y;
  d.dy = p.c1 * y + p.c2 * y * r2 + 2.0 * p.c3 * x * y + p.c4 * (3.0 * y * y + x * x);
  return d;
}

namespace {

using Vec7 = Eigen::Matrix<double, 7, 1>;
using Mat7 = Eigen::Matrix<double, 7, 7>;

Vec7 to_vec(const CamLcaParams& p) {
  Vec7 v;
  v << p.a, p.du, p.dv, p.c1, p.c2, p.c3, p.c4;
  return v;
}

CamLcaParams from_vec(const Vec7& v) {
  return {v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
}

double cost_and_derivs(const std::vector<CornerPoint>& ref,
                       const std::vector<CornerPoint>& obs, const CamLcaParams& p,
                       Mat7* jtj, Vec7* jtr) {
  if (jtj) jtj->setZero();
  if (jtr) jtr->setZero();
  double cost = 0.0;
  for (size_t k = 0; k < ref.size(); ++k) {
    const double u = ref[k].u, v = ref[k].v;
    const double x = p.a * u + p.du;
    const double y = v + p.dv;
    const double r2 = x * x + y * y;
    const double dx = p.c1 * x + p.c2 * x * r2 + p.c3 * (3 * x * x + y * y) + 2 * p.c4 * x * y;
    const double dy = p.c1 * y + p.c2 * y * r2 + 2 * p.c3 * x * y + p.c4 * (3 * y * y + x * x);
    const double rx = (obs[k].u - u) - dx;
    const double ry = (obs[k].v - v) - dy;
    cost += rx * rx + ry * ry;
    if (!jtj) continue;

    // d(delta)/d(x, y), shared by the a/du/dv columns.
    const double ddx_dx = p.c1 + p.c2 * (3 * x * x + y * y) + 6 * p.c3 * x + 2 * p.c4 * y;
    const double ddx_dy = 2 * p.c2 * x * y + 2 * p.c3 * y + 2 * p.c4 * x;
    const double ddy_dx = ddx_dy;
    const double ddy_dy = p.c1 + p.c2 * (x * x + 3 * y * y) + 2 * p.c3 * x + 6 * p.c4 * y;

    Eigen::Matrix<double, 2, 7> jd;  // d(delta)/d(theta); residual Jacobian is -jd
    jd(0, 0) = ddx_dx * u;
    jd(1, 0) = ddy_dx * u;
    jd(0, 1) = ddx_dx;
    jd(1, 1) = ddy_dx;
    jd(0, 2) = ddx_dy;
    jd(1, 2) = ddy_dy;
    jd(0, 3) = x;
    jd(1, 3) = y;
    jd(0, 4) = x * r2;
    jd(1, 4) = y * r2;
    jd(0, 5) = 3 * x * x + y * y;
    jd(1, 5) = 2 * x * y;
    jd(0, 6) = 2 * x * y;
    jd(1, 6) = 3 * y * y + x * x;

    *jtj += jd.transpose() * jd;
    *jtr += jd.transpose() * Eigen::Vector2d(rx, ry);  // = -J^T r
  }
  return cost;
}

// Linear least squares for c1..c4 at the identity geometry; gives the damped
// Gauss-Newton a start where the full Jacobian is nonsingular.
void solve_linear_coefficients(const std::vector<CornerPoint>& ref,
                               const std::vector<CornerPoint>& obs, CamLcaParams* p) {
  Eigen::Matrix4d ata = Eigen::Matrix4d::Zero();
  Eigen::Vector4d atb = Eigen::Vector4d::Zero();
  for (size_t k = 0; k < ref.size(); ++k) {
    const double x = ref[k].u, y = ref[k].v;
    const double r2 = x * x + y * y;
    const Eigen::Vector4d gx(x, x * r2, 3 * x * x + y * y, 2 * x * y);
    const Eigen::Vector4d gy(y, y * r2, 2 * x * y, 3 * y * y + x * x);
    ata += gx * gx.transpose() + gy * gy.transpose();
    atb += gx * (obs[k].u - x) + gy * (obs[k].v - y);
  }
  const Eigen::Vector4d c = ata.ldlt().solve(atb);
  p->c1 = c[0];
  p->c2 = c[1];
  p->c3 = c[2];
  p->c4 = c[3];
}

}  // namespace

CalibrationFit calibrate_cam_lca(const std::vector<CornerPoint>& ref_pts,
                                 const std::vector<CornerPoint>& obs_pts) {
  if (ref_pts.size() != obs_pts.size())
    raise(Errc::size_mismatch, "corner lists differ in length");
  if (ref_pts.size() < 7)
    raise(Errc::insufficient_points, "camera LCA calibration needs at least 7 corner pairs");

  CamLcaParams params;  // identity start: a = 1, everything else 0
  solve_linear_coefficients(ref_pts, obs_pts, &params);

  Mat7 jtj;
  Vec7 jtr;
  double cost = cost_and_derivs(ref_pts, obs_pts, params, &jtj, &jtr);
  double mu = 1e-6;
  bool converged = false;
  int iter = 0;
  const auto step_converged = [&](const Vec7& step) {
    return step.norm() <= 1e-12 * (to_vec(params).norm() + 1e-12);
  };
  for (; iter < 100 && !converged; ++iter) {
    bool accepted = false;
    for (int attempt = 0; attempt < 25 && !accepted && !converged; ++attempt) {
      Mat7 damped = jtj;
      damped.diagonal() += mu * (jtj.diagonal().array() + 1e-12).matrix();
      const Vec7 step = damped.ldlt().solve(jtr);
      // A step below the tolerance means the minimum is resolved, whether or
      // not it still improves the cost within rounding.
      if (step_converged(step)) {
        converged = true;
        break;
      }
      const CamLcaParams trial = from_vec(to_vec(params) + step);
      const double trial_cost = cost_and_derivs(ref_pts, obs_pts, trial, nullptr, nullptr);
      // Strict improvement only: flat-valley steps get rejected, the damping
      // grows, and the shrinking step triggers the convergence test above.
      if (trial_cost < cost) {
        params = trial;
        cost = trial_cost;
        mu = std::max(mu * 0.33, 1e-12);
        accepted = true;
        if (step_converged(step)) converged = true;
      } else {
        mu *= 3.0;
      }
    }
    if (!accepted) break;
    if (!converged) cost = cost_and_derivs(ref_pts, obs_pts, params, &jtj, &jtr);
  }
  if (!converged)
    raise(Errc::no_convergence, "camera LCA fit did not reach the 1e-12 step tolerance");

  CalibrationFit fit;
  fit.params = params;
  fit.rms = std::sqrt(cost / static_cast<double>(ref_pts.size()));
  fit.iterations = iter + 1;
  return fit;
}

namespace {

template <typename T>
RasterT<T> correct_impl(const RasterT<T>& img, const CamLcaParams& params) {
  RasterT<T> out(img.width(), img.height());
  out.ensure_mask();
  parallel_rows(img.height(), [&](int y0, int y1) {
    for (int y = y0; y < y1; ++y) {
      for (int x = 0; x < img.width(); ++x) {
        const Delta d = cam_lca_delta(x, y, params);
        const BilinearSample s = bilinear(img, x + d.dx, y + d.dy);
        if (s.valid) {
          out.at(x, y) = static_cast<T>(s.value);
        } else {
          out.set_valid(x, y, false);
        }
      }
    }
  });
  return out;
}

}  // namespace

ChannelRaster correct_image(const ChannelRaster& img, const CamLcaParams& params) {
  return correct_impl(img, params);
}

ImageRaster correct_image(const ImageRaster& img, const CamLcaParams& params) {
  return correct_impl(img, params);
}

}  // namespace lcamv::cam_lca
