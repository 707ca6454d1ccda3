#include "io/f32r.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "core/errors.hpp"

namespace lcamv::io {

namespace {

void put_u32(std::ostream& os, uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                              static_cast<unsigned char>((v >> 8) & 0xff),
                              static_cast<unsigned char>((v >> 16) & 0xff),
                              static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

}  // namespace

void write_f32r(const std::string& path, const ChannelRaster& raster) {
  std::ofstream os(path, std::ios::binary);
  if (!os) raise(Errc::io_failure, "cannot open '" + path + "' for writing");
  os.write("F32R", 4);
  put_u32(os, static_cast<uint32_t>(raster.width()));
  put_u32(os, static_cast<uint32_t>(raster.height()));
  const unsigned char mask_flag = raster.has_mask() ? 1 : 0;
  os.write(reinterpret_cast<const char*>(&mask_flag), 1);

  std::vector<float> row(raster.width());
  for (int y = 0; y < raster.height(); ++y) {
    for (int x = 0; x < raster.width(); ++x) row[x] = static_cast<float>(raster.at(x, y));
    os.write(reinterpret_cast<const char*>(row.data()),
             static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (mask_flag)
    os.write(reinterpret_cast<const char*>(raster.mask().data()),
             static_cast<std::streamsize>(raster.mask().size()));
  if (!os) raise(Errc::io_failure, "short write to '" + path + "'");
}

ChannelRaster read_f32r(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) raise(Errc::io_failure, "cannot open '" + path + "'");
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "F32R", 4) != 0)
    raise(Errc::parse_failure, "'" + path + "' is not an F32R raster");
  const uint32_t w = get_u32(is);
  const uint32_t h = get_u32(is);
  unsigned char mask_flag = 0;
  is.read(reinterpret_cast<char*>(&mask_flag), 1);
  if (!is || w > 1u << 20 || h > 1u << 20)
    raise(Errc::parse_failure, "'" + path + "' has an implausible header");

  ChannelRaster raster(static_cast<int>(w), static_cast<int>(h));
  std::vector<float> row(w);
  for (uint32_t y = 0; y < h; ++y) {
    is.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(float)));
    for (uint32_t x = 0; x < w; ++x) raster.at(static_cast<int>(x), static_cast<int>(y)) = row[x];
  }
  if (mask_flag) {
    raster.ensure_mask();
    is.read(reinterpret_cast<char*>(raster.mask_storage().data()),
            static_cast<std::streamsize>(raster.mask_storage().size()));
  }
  if (!is) raise(Errc::parse_failure, "'" + path + "' truncated");
  return raster;
}

}  // namespace lcamv::io
