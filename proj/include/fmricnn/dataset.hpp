#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fmricnn/nifti.hpp"

namespace fmricnn::dataset {

// A labeled 2D grayscale slice. Pixels are 64-bit reals in [0,1];
// label 0 = normal control, 1 = patient.
struct SliceImage {
  uint16_t height = 0, width = 0;
  std::vector<double> pixels;
  uint8_t label = 0;
  std::string subject_id;
  uint16_t z_index = 0, t_index = 0;
};

enum class PixelFormat : uint8_t { u8 = 0, f32 = 1 };

struct SliceRecord {
  uint8_t label = 0;
  uint32_t subject_hash = 0;
  uint16_t z_index = 0, t_index = 0;
  std::vector<double> pixels;  // quantized to the store's pixel format on insert
};

uint32_t subject_hash(std::string_view subject_id);  // FNV-1a 32

// Quantizing on insert keeps the in-memory store identical to what the file
// round-trips, so write -> read is bit-exact.
double quantize(double v, PixelFormat f);

struct SliceStore {
  uint16_t height = 0, width = 0;
  PixelFormat format = PixelFormat::u8;
  uint64_t creation_seed = 0;
  std::vector<SliceRecord> records;
  std::vector<std::string> subject_names;  // manifest sidecar only; empty after load

  void add(const SliceImage& img);
  size_t count() const { return records.size(); }
  std::array<size_t, 2> class_counts() const;
};

// Record store file, little-endian: magic "FMRC", u16 version = 1, u32 count,
// u16 height, u16 width, u8 pixel_format (0 = u8, 1 = f32); per record:
// u8 label, u32 subject_id_hash, u16 z_index, u16 t_index, height*width
// pixel values. A "<path>.manifest" sidecar holds key=value metadata.
std::vector<uint8_t> encode_store(const SliceStore& store);
SliceStore decode_store(std::span<const uint8_t> bytes);
void write_store(const SliceStore& store, const std::filesystem::path& path);
SliceStore read_store(const std::filesystem::path& path);
std::string store_manifest_text(const SliceStore& store);

enum class Granularity : uint8_t { slice, subject };

struct SplitSpec {
  std::array<double, 3> fractions{0.6, 0.2, 0.2};  // train, val, test
  uint64_t seed = 0;
  Granularity granularity = Granularity::slice;
};

struct SplitIndices {
  std::vector<uint32_t> train, val, test;
};

// round(f*N) for train and val; the test set absorbs the rounding remainder.
std::array<size_t, 3> split_sizes(size_t n, const std::array<double, 3>& fractions);

SplitIndices split_slices(size_t n, const SplitSpec& spec);
SplitIndices split_store(const SliceStore& store, const SplitSpec& spec);

struct MeanImage {
  uint16_t height = 0, width = 0;
  std::vector<double> pixels;
};

MeanImage compute_mean_image(const SliceStore& store, std::span<const uint32_t> indices);
MeanImage zero_mean_image(uint16_t height, uint16_t width);
void write_mean_image(const MeanImage& mean, const std::filesystem::path& path);
MeanImage read_mean_image(const std::filesystem::path& path);

// One xy-plane per (z, t) pair, z outermost, skipping the lowest drop_low_z
// planes. Each slice is min-max normalized to [0,1] (constant slices become
// all zeros), then optionally resized with bilinear interpolation.
std::vector<SliceImage> extract_slices(const nifti::Volume4D& vol, int drop_low_z,
                                       std::optional<std::pair<uint16_t, uint16_t>> resize_to,
                                       uint8_t label, const std::string& subject_id);

std::vector<double> resize_bilinear(std::span<const double> src, int src_h, int src_w,
                                    int dst_h, int dst_w);

// Balanced two-class store: subjects alternate classes, class-1 slices have
// the intensity inside a fixed centered ellipse attenuated by
// pattern_amplitude. Amplitude 0 makes the classes indistinguishable.
SliceStore generate_synthetic(int n_subjects, int slices_per_subject, uint16_t height,
                              uint16_t width, uint64_t seed, double pattern_amplitude = 0.35,
                              PixelFormat format = PixelFormat::u8);

// IDX ingestion (magic 0x00000803 for u8 images, 0x00000801 for labels).
// keep_labels maps source digits to binary classes; unmapped digits are
// dropped.
SliceStore import_idx(std::span<const uint8_t> images_bytes, std::span<const uint8_t> labels_bytes,
                      const std::map<int, int>& keep_labels,
                      PixelFormat format = PixelFormat::u8);

}  // namespace fmricnn::dataset
