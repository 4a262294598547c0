#include "fmricnn/nifti.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "fmricnn/bytes.hpp"
#include "fmricnn/error.hpp"

namespace fmricnn::nifti {

namespace {

// field offsets within the 348-byte header
constexpr size_t kOffDim = 40;
constexpr size_t kOffDatatype = 70;
constexpr size_t kOffBitpix = 72;
constexpr size_t kOffVoxOffset = 108;
constexpr size_t kOffSclSlope = 112;
constexpr size_t kOffSclInter = 116;
constexpr size_t kOffMagic = 344;

bool dim0_in_range(int16_t d) { return d >= 1 && d <= 7; }

}  // namespace

int datatype_size(int16_t code) {
  switch (code) {
    case kUint8: return 1;
    case kInt16: return 2;
    case kInt32: return 4;
    case kFloat32: return 4;
    case kFloat64: return 8;
    default:
      fail(Errc::UnsupportedDatatype, "datatype code " + std::to_string(code));
  }
}

NiftiHeader parse_header(std::span<const uint8_t> bytes) {
  require(bytes.size() >= kHeaderSize, Errc::TooShort,
          "need 348 header bytes, have " + std::to_string(bytes.size()));
  const uint8_t* p = bytes.data();

  // Byte order: dim[0] must fall in [1,7]; try little-endian first, then the
  // swapped interpretation.
  bool big = false;
  if (!dim0_in_range(bytes::load_i16(p + kOffDim, false))) {
    big = true;
    if (!dim0_in_range(bytes::load_i16(p + kOffDim, true)))
      fail(Errc::BadDims, "dim[0] outside [1,7] under both byte orders");
  }

  NiftiHeader hdr;
  hdr.order = big ? ByteOrder::big : ByteOrder::little;
  hdr.sizeof_hdr = bytes::load_i32(p, big);
  require(hdr.sizeof_hdr == 348, Errc::BadMagic,
          "sizeof_hdr = " + std::to_string(hdr.sizeof_hdr) + ", expected 348");

  std::memcpy(hdr.magic.data(), p + kOffMagic, 4);
  const bool n_plus_1 = std::memcmp(hdr.magic.data(), "n+1\0", 4) == 0;
  const bool ni1 = std::memcmp(hdr.magic.data(), "ni1\0", 4) == 0;
  require(n_plus_1 || ni1, Errc::BadMagic, "magic is neither \"n+1\" nor \"ni1\"");

  for (int i = 0; i < 8; ++i) hdr.dim[i] = bytes::load_i16(p + kOffDim + 2 * size_t(i), big);
  for (int axis = 1; axis <= hdr.rank(); ++axis)
    require(hdr.dim[axis] >= 1, Errc::BadDims,
            "dim[" + std::to_string(axis) + "] = " + std::to_string(hdr.dim[axis]));
  for (int axis = 5; axis <= hdr.rank(); ++axis)
    require(hdr.dim[axis] == 1, Errc::BadDims, "extents beyond the 4th axis are unsupported");

  hdr.datatype_code = bytes::load_i16(p + kOffDatatype, big);
  hdr.bitpix = bytes::load_i16(p + kOffBitpix, big);
  const int expect_bits = 8 * datatype_size(hdr.datatype_code);
  require(hdr.bitpix == expect_bits, Errc::UnsupportedDatatype,
          "bitpix " + std::to_string(hdr.bitpix) + " inconsistent with datatype " +
              std::to_string(hdr.datatype_code));

  const float off = bytes::load_f32(p + kOffVoxOffset, big);
  hdr.vox_offset = static_cast<int64_t>(std::llround(off));
  require(hdr.vox_offset >= 0, Errc::FormatError, "negative vox_offset");
  if (n_plus_1)
    require(hdr.vox_offset >= kMinVoxOffset, Errc::FormatError,
            "vox_offset " + std::to_string(hdr.vox_offset) + " < 352 in a single-file image");

  hdr.scl_slope = bytes::load_f32(p + kOffSclSlope, big);
  hdr.scl_inter = bytes::load_f32(p + kOffSclInter, big);
  return hdr;
}

Volume4D read_volume(const NiftiHeader& hdr, std::span<const uint8_t> bytes) {
  Volume4D vol;
  vol.nx = hdr.extent(1);
  vol.ny = hdr.extent(2);
  vol.nz = hdr.extent(3);
  vol.nt = hdr.extent(4);

  const size_t count = vol.voxel_count();
  const size_t elem = size_t(datatype_size(hdr.datatype_code));
  const size_t need = size_t(hdr.vox_offset) + count * elem;
  require(bytes.size() >= need, Errc::TruncatedData,
          "need " + std::to_string(need) + " bytes, have " + std::to_string(bytes.size()));

  const uint8_t* p = bytes.data() + hdr.vox_offset;
  const bool big = hdr.order == ByteOrder::big;
  const bool scaled = hdr.scl_slope != 0.0f;
  const double slope = double(hdr.scl_slope);
  const double inter = double(hdr.scl_inter);

  vol.voxels.resize(count);
  for (size_t i = 0; i < count; ++i, p += elem) {
    double raw;
    switch (hdr.datatype_code) {
      case kUint8: raw = double(*p); break;
      case kInt16: raw = double(bytes::load_i16(p, big)); break;
      case kInt32: raw = double(bytes::load_i32(p, big)); break;
      case kFloat32: raw = double(bytes::load_f32(p, big)); break;
      default: raw = bytes::load_f64(p, big); break;
    }
    const double v = scaled ? raw * slope + inter : raw;
    if (!std::isfinite(v)) fail(Errc::NonFiniteVoxel, "voxel " + std::to_string(i));
    vol.voxels[i] = v;
  }
  return vol;
}

Volume4D read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), Errc::IoError, "cannot open " + path.string());
  std::vector<uint8_t> buf{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  const NiftiHeader hdr = parse_header(buf);
  return read_volume(hdr, buf);
}

std::vector<uint8_t> write_volume(const Volume4D& vol, int16_t datatype_code, ByteOrder order) {
  const size_t elem = size_t(datatype_size(datatype_code));
  const bool big = order == ByteOrder::big;

  std::vector<uint8_t> buf(kMinVoxOffset, 0);
  auto put_i16 = [&](size_t off, int16_t v) {
    std::vector<uint8_t> tmp;
    bytes::store_i16(tmp, v, big);
    std::memcpy(buf.data() + off, tmp.data(), 2);
  };
  auto put_i32 = [&](size_t off, int32_t v) {
    std::vector<uint8_t> tmp;
    bytes::store_i32(tmp, v, big);
    std::memcpy(buf.data() + off, tmp.data(), 4);
  };
  auto put_f32 = [&](size_t off, float v) {
    std::vector<uint8_t> tmp;
    bytes::store_f32(tmp, v, big);
    std::memcpy(buf.data() + off, tmp.data(), 4);
  };

  put_i32(0, 348);
  const int16_t rank = vol.nt > 1 ? 4 : 3;
  put_i16(kOffDim, rank);
  put_i16(kOffDim + 2, int16_t(vol.nx));
  put_i16(kOffDim + 4, int16_t(vol.ny));
  put_i16(kOffDim + 6, int16_t(vol.nz));
  put_i16(kOffDim + 8, rank == 4 ? int16_t(vol.nt) : int16_t(1));
  for (int axis = rank + 1; axis <= 7; ++axis) put_i16(kOffDim + 2 * size_t(axis), 1);
  put_i16(kOffDatatype, datatype_code);
  put_i16(kOffBitpix, int16_t(8 * elem));
  // pixdim left at 0 except the mandatory qfac slot
  put_f32(76, 1.0f);
  put_f32(kOffVoxOffset, float(kMinVoxOffset));
  put_f32(kOffSclSlope, 0.0f);
  put_f32(kOffSclInter, 0.0f);
  std::memcpy(buf.data() + kOffMagic, "n+1\0", 4);
  // bytes 348..351 stay zero: no header extensions

  buf.reserve(buf.size() + vol.voxels.size() * elem);
  for (const double v : vol.voxels) {
    switch (datatype_code) {
      case kUint8: buf.push_back(uint8_t(std::llround(v))); break;
      case kInt16: bytes::store_i16(buf, int16_t(std::llround(v)), big); break;
      case kInt32: bytes::store_i32(buf, int32_t(std::llround(v)), big); break;
      case kFloat32: bytes::store_f32(buf, float(v), big); break;
      default: bytes::store_f64(buf, v, big); break;
    }
  }
  return buf;
}

void write_file(const std::filesystem::path& path, const Volume4D& vol, int16_t datatype_code) {
  const std::vector<uint8_t> buf = write_volume(vol, datatype_code);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), Errc::IoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
  require(out.good(), Errc::IoError, "short write to " + path.string());
}

}  // namespace fmricnn::nifti
