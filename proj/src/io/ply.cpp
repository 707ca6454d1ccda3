#include "io/ply.hpp"

#include <cmath>
#include <cstdio>
#include <memory>

#include "core/errors.hpp"

namespace lcamv::io {

namespace {

int to_byte(double v) {
  const double r = std::round(v);
  return r < 0 ? 0 : (r > 255 ? 255 : static_cast<int>(r));
}

}  // namespace

void write_ply(const std::string& path, const ChannelRaster& depth,
               const geometry::StereoCalibration& calib,
               const std::array<ChannelRaster, 3>& texture) {
  for (const auto& t : texture)
    if (!t.empty() && !t.same_size(depth))
      raise(Errc::size_mismatch, "texture rasters do not match the depth map");

  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!fp) raise(Errc::io_failure, "cannot open '" + path + "' for writing");

  const size_t n = depth.count_valid();
  std::fprintf(fp.get(),
               "ply\nformat ascii 1.0\ncomment lcamv reconstruction\n"
               "element vertex %zu\n"
               "property float x\nproperty float y\nproperty float z\n"
               "property uchar red\nproperty uchar green\nproperty uchar blue\n"
               "end_header\n",
               n);

  const Eigen::Matrix3d& Kinv = calib.K_c_inv();
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      if (!depth.valid(x, y)) continue;
      const Eigen::Vector3d p = depth.at(x, y) * (Kinv * Eigen::Vector3d(x, y, 1.0));
      int rgb[3] = {255, 255, 255};
      for (int c = 0; c < 3; ++c)
        if (!texture[c].empty()) rgb[c] = to_byte(texture[c].at(x, y));
      std::fprintf(fp.get(), "%.6f %.6f %.6f %d %d %d\n", p.x(), p.y(), p.z(), rgb[0], rgb[1],
                   rgb[2]);
    }
  }
}

}  // namespace lcamv::io
