#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace fmricnn::nifti {

// NIfTI-1 single-file layout: 348-byte header, 4-byte extension flag,
// voxel data starting at vox_offset. Both byte orders are accepted;
// the order is detected from dim[0], which must land in [1,7].

enum class ByteOrder : uint8_t { little, big };

// Scalar datatype codes from the NIfTI-1 standard.
enum Datatype : int16_t {
  kUint8 = 2,
  kInt16 = 4,
  kInt32 = 8,
  kFloat32 = 16,
  kFloat64 = 64,
};

// Bytes per voxel for a supported datatype code; throws UnsupportedDatatype.
int datatype_size(int16_t code);

constexpr size_t kHeaderSize = 348;
constexpr int64_t kMinVoxOffset = 352;

struct NiftiHeader {
  int32_t sizeof_hdr = 348;
  std::array<int16_t, 8> dim{};  // dim[0] = rank, dim[1..7] = extents
  int16_t datatype_code = 0;
  int16_t bitpix = 0;
  int64_t vox_offset = kMinVoxOffset;  // stored as float in the file
  float scl_slope = 0.0f;
  float scl_inter = 0.0f;
  std::array<char, 4> magic{};
  ByteOrder order = ByteOrder::little;

  int rank() const { return dim[0]; }
  int64_t extent(int axis) const {  // 1-based axis, 1 beyond rank
    return (axis <= rank() && dim[axis] > 0) ? dim[axis] : 1;
  }
  bool single_file() const { return magic[0] == 'n' && magic[1] == '+'; }
};

struct Volume4D {
  int64_t nx = 0, ny = 0, nz = 0, nt = 0;
  std::vector<double> voxels;  // x-fastest order

  size_t voxel_count() const { return size_t(nx) * ny * nz * nt; }
  double at(int64_t x, int64_t y, int64_t z, int64_t t) const {
    return voxels[size_t(((t * nz + z) * ny + y) * nx + x)];
  }
};

NiftiHeader parse_header(std::span<const uint8_t> bytes);

// Decodes voxels at hdr.vox_offset from the same byte buffer the header was
// parsed from (or the separate .img buffer for two-file datasets). Values
// are scaled by (scl_slope, scl_inter) when scl_slope != 0.
Volume4D read_volume(const NiftiHeader& hdr, std::span<const uint8_t> bytes);

Volume4D read_file(const std::filesystem::path& path);

// Serializes as a single-file ".nii" (magic "n+1\0") with scl_slope = 0, so
// values round-trip unscaled. Integer datatypes store llround(value).
std::vector<uint8_t> write_volume(const Volume4D& vol, int16_t datatype_code,
                                  ByteOrder order = ByteOrder::little);
void write_file(const std::filesystem::path& path, const Volume4D& vol,
                int16_t datatype_code = kFloat64);

}  // namespace fmricnn::nifti
