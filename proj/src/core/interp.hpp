#pragma once

#include <cmath>

#include "core/raster.hpp"

namespace lcamv {

struct BilinearSample {
  double value = 0.0;
  bool valid = false;
};

/// Bilinear sample at (x, y) in pixel coordinates. Valid only when the
/// position is inside the raster and every contributing neighbor is valid —
/// invalid samples are never read.
template <typename T>
inline BilinearSample bilinear(const RasterT<T>& r, double x, double y) {
  if (!(x >= 0.0) || !(y >= 0.0) || x > r.width() - 1.0 || y > r.height() - 1.0) return {};
  int x0 = static_cast<int>(x);
  int y0 = static_cast<int>(y);
  if (x0 > r.width() - 2) x0 = r.width() - 2;
  if (y0 > r.height() - 2) y0 = r.height() - 2;
  if (x0 < 0) x0 = 0;  // single-column / single-row rasters
  if (y0 < 0) y0 = 0;
  const int x1 = x0 + 1 < r.width() ? x0 + 1 : x0;
  const int y1 = y0 + 1 < r.height() ? y0 + 1 : y0;
  const double fx = x - x0;
  const double fy = y - y0;
  if (!r.valid(x0, y0) || !r.valid(x1, y0) || !r.valid(x0, y1) || !r.valid(x1, y1)) return {};
  const double v00 = r.at(x0, y0), v10 = r.at(x1, y0);
  const double v01 = r.at(x0, y1), v11 = r.at(x1, y1);
  const double top = v00 * (1.0 - fx) + v10 * fx;
  const double bot = v01 * (1.0 - fx) + v11 * fx;
  return {top * (1.0 - fy) + bot * fy, true};
}

}  // namespace lcamv
