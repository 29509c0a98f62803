#pragma once

// SCVX container: little-endian binary for voxel grids and SDFs.
//
//   bytes 0..3   magic "SCVX"
//   u32          version (1)
//   u32          payload kind: 0 = bit-packed occupancy, 1 = f32 values
//   3 x f64      origin (metres)
//   f64          voxel_size
//   3 x u32      dims
//   payload      kind 0: ceil(n/8) bytes, LSB-first, x-fastest
//                kind 1: n little-endian f32, x-fastest (occupancy derived
//                        from the value sign on load)
//
// Write/read round-trips are bit-exact.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "scope/common.hpp"
#include "scope/sdf.hpp"
#include "scope/voxelize.hpp"

namespace scope {

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f32(std::string& out, float v) {
  put_u32(out, std::bit_cast<std::uint32_t>(v));
}

inline void put_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i)
    out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

class ByteReader {
 public:
  ByteReader(const std::string& data, const std::string& path)
      : data_(data), path_(path) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + static_cast<std::size_t>(i)]))
           << (8 * i);
    pos_ += 4;
    return v;
  }

  float f32() { return std::bit_cast<float>(u32()); }

  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + static_cast<std::size_t>(i)]))
           << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(v);
  }

  void bytes(void* dst, std::size_t n) {
    need(n);
    std::memcpy(dst, data_.data() + pos_, n);
    pos_ += n;
  }

  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void need(std::size_t n) {
    if (pos_ + n > data_.size())
      throw Error("SCVX file truncated: " + path_);
  }
  const std::string& data_;
  std::string path_;
  std::size_t pos_ = 0;
};

inline std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open: " + path);
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return data;
}

inline void write_file_bytes(const std::string& path,
                             const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error("write failed: " + path);
}

inline std::string scvx_header(std::uint32_t kind, const Vec3& origin,
                               double voxel_size, const Index3& dims) {
  std::string out;
  out += "SCVX";
  put_u32(out, 1);  // version
  put_u32(out, kind);
  put_f64(out, origin.x());
  put_f64(out, origin.y());
  put_f64(out, origin.z());
  put_f64(out, voxel_size);
  put_u32(out, static_cast<std::uint32_t>(dims.x()));
  put_u32(out, static_cast<std::uint32_t>(dims.y()));
  put_u32(out, static_cast<std::uint32_t>(dims.z()));
  return out;
}

// Shared header fields after the magic/version/kind.
struct ScvxHead {
  std::uint32_t version = 0;
  std::uint32_t kind = 0;
  Vec3 origin = Vec3::Zero();
  double voxel_size = 0.0;
  Index3 dims = Index3::Zero();
  std::size_t count = 0;
};

inline ScvxHead read_scvx_head(ByteReader& r, const std::string& path) {
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, "SCVX", 4) != 0)
    throw Error("not an SCVX file (bad magic): " + path);
  ScvxHead h;
  h.version = r.u32();
  if (h.version != 1)
    throw Error("unsupported SCVX version " + std::to_string(h.version) +
                ": " + path);
  h.kind = r.u32();
  // sequence the reads; constructor arguments evaluate in unspecified order
  for (int i = 0; i < 3; ++i) h.origin[i] = r.f64();
  h.voxel_size = r.f64();
  for (int i = 0; i < 3; ++i) h.dims[i] = static_cast<int>(r.u32());
  if ((h.dims.array() < 1).any() || h.voxel_size <= 0.0)
    throw Error("SCVX header has invalid grid shape: " + path);
  h.count = static_cast<std::size_t>(h.dims.x()) * h.dims.y() * h.dims.z();
  return h;
}

}  // namespace detail

inline void save_scvx(const VoxelGrid& grid, const std::string& path) {
  grid.check_consistent();
  std::string out =
      detail::scvx_header(0, grid.origin, grid.voxel_size, grid.dims);
  const std::size_t n = grid.occupancy.size();
  std::string packed((n + 7) / 8, '\0');
  for (std::size_t i = 0; i < n; ++i)
    if (grid.occupancy[i]) packed[i / 8] |= static_cast<char>(1 << (i % 8));
  out += packed;
  detail::write_file_bytes(path, out);
}

inline VoxelGrid load_scvx_grid(const std::string& path) {
  const std::string data = detail::read_file_bytes(path);
  detail::ByteReader r(data, path);
  const auto h = detail::read_scvx_head(r, path);
  if (h.kind != 0)
    throw Error("SCVX payload is not occupancy (kind " +
                std::to_string(h.kind) + "): " + path);
  VoxelGrid grid;
  grid.origin = h.origin;
  grid.voxel_size = h.voxel_size;
  grid.dims = h.dims;
  std::vector<std::uint8_t> packed((h.count + 7) / 8);
  r.bytes(packed.data(), packed.size());
  grid.occupancy.resize(h.count);
  for (std::size_t i = 0; i < h.count; ++i)
    grid.occupancy[i] = (packed[i / 8] >> (i % 8)) & 1;
  return grid;
}

inline void save_scvx(const SignedDistanceField& sdf,
                      const std::string& path) {
  std::string out = detail::scvx_header(1, sdf.origin, sdf.voxel_size, sdf.dims);
  out.reserve(out.size() + 4 * sdf.values.size());
  for (double v : sdf.values)
    detail::put_f32(out, static_cast<float>(v));
  detail::write_file_bytes(path, out);
}

// Occupancy is reconstructed from the value sign (boundary voxels carry
// -0.0, so signbit keeps them occupied).
inline SignedDistanceField load_scvx_sdf(const std::string& path) {
  const std::string data = detail::read_file_bytes(path);
  detail::ByteReader r(data, path);
  const auto h = detail::read_scvx_head(r, path);
  if (h.kind != 1)
    throw Error("SCVX payload is not f32 values (kind " +
                std::to_string(h.kind) + "): " + path);
  SignedDistanceField sdf;
  sdf.origin = h.origin;
  sdf.voxel_size = h.voxel_size;
  sdf.dims = h.dims;
  sdf.values.resize(h.count);
  sdf.occupancy.resize(h.count);
  for (std::size_t i = 0; i < h.count; ++i) {
    const float v = r.f32();
    sdf.values[i] = static_cast<double>(v);
    sdf.occupancy[i] = std::signbit(v) ? 1 : 0;
  }
  return sdf;
}

}  // namespace scope
