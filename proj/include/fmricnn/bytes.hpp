#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

namespace fmricnn::bytes {

// Explicit byte-by-byte codecs: file layouts stay fixed regardless of the
// host's byte order.

inline uint16_t load_u16le(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | (uint16_t(p[1]) << 8));
}
inline uint32_t load_u32le(const uint8_t* p) {
  return uint32_t(p[0]) | (uint32_t(p[1]) << 8) | (uint32_t(p[2]) << 16) | (uint32_t(p[3]) << 24);
}
inline uint64_t load_u64le(const uint8_t* p) {
  return uint64_t(load_u32le(p)) | (uint64_t(load_u32le(p + 4)) << 32);
}
inline uint16_t load_u16be(const uint8_t* p) {
  return static_cast<uint16_t>((uint16_t(p[0]) << 8) | p[1]);
}
inline uint32_t load_u32be(const uint8_t* p) {
  return (uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) | (uint32_t(p[2]) << 8) | uint32_t(p[3]);
}
inline uint64_t load_u64be(const uint8_t* p) {
  return (uint64_t(load_u32be(p)) << 32) | uint64_t(load_u32be(p + 4));
}

inline uint16_t load_u16(const uint8_t* p, bool big) { return big ? load_u16be(p) : load_u16le(p); }
inline uint32_t load_u32(const uint8_t* p, bool big) { return big ? load_u32be(p) : load_u32le(p); }
inline uint64_t load_u64(const uint8_t* p, bool big) { return big ? load_u64be(p) : load_u64le(p); }

inline int16_t load_i16(const uint8_t* p, bool big) { return std::bit_cast<int16_t>(load_u16(p, big)); }
inline int32_t load_i32(const uint8_t* p, bool big) { return std::bit_cast<int32_t>(load_u32(p, big)); }
inline float load_f32(const uint8_t* p, bool big) { return std::bit_cast<float>(load_u32(p, big)); }
inline double load_f64(const uint8_t* p, bool big) { return std::bit_cast<double>(load_u64(p, big)); }

inline void store_u16(std::vector<uint8_t>& out, uint16_t v, bool big = false) {
  if (big) {
    out.push_back(uint8_t(v >> 8));
    out.push_back(uint8_t(v));
  } else {
    out.push_back(uint8_t(v));
    out.push_back(uint8_t(v >> 8));
  }
}
inline void store_u32(std::vector<uint8_t>& out, uint32_t v, bool big = false) {
  if (big) {
    out.push_back(uint8_t(v >> 24));
    out.push_back(uint8_t(v >> 16));
    out.push_back(uint8_t(v >> 8));
    out.push_back(uint8_t(v));
  } else {
    out.push_back(uint8_t(v));
    out.push_back(uint8_t(v >> 8));
    out.push_back(uint8_t(v >> 16));
    out.push_back(uint8_t(v >> 24));
  }
}
inline void store_u64(std::vector<uint8_t>& out, uint64_t v, bool big = false) {
  if (big) {
    store_u32(out, uint32_t(v >> 32), true);
    store_u32(out, uint32_t(v), true);
  } else {
    store_u32(out, uint32_t(v), false);
    store_u32(out, uint32_t(v >> 32), false);
  }
}
inline void store_i16(std::vector<uint8_t>& out, int16_t v, bool big = false) {
  store_u16(out, std::bit_cast<uint16_t>(v), big);
}
inline void store_i32(std::vector<uint8_t>& out, int32_t v, bool big = false) {
  store_u32(out, std::bit_cast<uint32_t>(v), big);
}
inline void store_f32(std::vector<uint8_t>& out, float v, bool big = false) {
  store_u32(out, std::bit_cast<uint32_t>(v), big);
}
inline void store_f64(std::vector<uint8_t>& out, double v, bool big = false) {
  store_u64(out, std::bit_cast<uint64_t>(v), big);
}

}  // namespace fmricnn::bytes
