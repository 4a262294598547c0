#include "fmricnn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "fmricnn/bytes.hpp"
#include "fmricnn/error.hpp"
#include "fmricnn/rng.hpp"

namespace fmricnn::dataset {

namespace {

constexpr char kStoreMagic[4] = {'F', 'M', 'R', 'C'};
constexpr uint16_t kStoreVersion = 1;

std::vector<uint8_t> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), Errc::IoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_all(const std::filesystem::path& path, std::span<const uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), Errc::IoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  require(out.good(), Errc::IoError, "short write to " + path.string());
}

}  // namespace

uint32_t subject_hash(std::string_view subject_id) {
  uint32_t h = 0x811c9dc5u;
  for (const char c : subject_id) {
    h ^= uint8_t(c);
    h *= 0x01000193u;
  }
  return h;
}

double quantize(double v, PixelFormat f) {
  if (f == PixelFormat::u8) return std::round(v * 255.0) / 255.0;
  return double(float(v));
}

void SliceStore::add(const SliceImage& img) {
  if (records.empty() && height == 0 && width == 0) {
    height = img.height;
    width = img.width;
  }
  require(img.height == height && img.width == width, Errc::ShapeMismatch,
          "slice dimensions differ from the store's");
  require(img.label <= 1, Errc::BadLabel, "label " + std::to_string(img.label));
  require(img.pixels.size() == size_t(img.height) * img.width, Errc::ShapeMismatch,
          "pixel count does not match height*width");

  SliceRecord rec;
  rec.label = img.label;
  rec.subject_hash = subject_hash(img.subject_id);
  rec.z_index = img.z_index;
  rec.t_index = img.t_index;
  rec.pixels.resize(img.pixels.size());
  for (size_t i = 0; i < img.pixels.size(); ++i) rec.pixels[i] = quantize(img.pixels[i], format);
  records.push_back(std::move(rec));

  if (std::find(subject_names.begin(), subject_names.end(), img.subject_id) ==
      subject_names.end())
    subject_names.push_back(img.subject_id);
}

std::array<size_t, 2> SliceStore::class_counts() const {
  std::array<size_t, 2> counts{0, 0};
  for (const auto& r : records) ++counts[r.label];
  return counts;
}

std::vector<uint8_t> encode_store(const SliceStore& store) {
  std::vector<uint8_t> out;
  const size_t pixels_per_record = size_t(store.height) * store.width;
  out.reserve(13 + store.records.size() *
                       (9 + pixels_per_record * (store.format == PixelFormat::u8 ? 1 : 4)));

  out.insert(out.end(), kStoreMagic, kStoreMagic + 4);
  bytes::store_u16(out, kStoreVersion);
  bytes::store_u32(out, uint32_t(store.records.size()));
  bytes::store_u16(out, store.height);
  bytes::store_u16(out, store.width);
  out.push_back(uint8_t(store.format));

  for (const auto& rec : store.records) {
    require(rec.pixels.size() == pixels_per_record, Errc::ShapeMismatch,
            "record pixel count differs from the store dimensions");
    out.push_back(rec.label);
    bytes::store_u32(out, rec.subject_hash);
    bytes::store_u16(out, rec.z_index);
    bytes::store_u16(out, rec.t_index);
    if (store.format == PixelFormat::u8) {
      for (const double v : rec.pixels) out.push_back(uint8_t(std::lround(v * 255.0)));
    } else {
      for (const double v : rec.pixels) bytes::store_f32(out, float(v));
    }
  }
  return out;
}

SliceStore decode_store(std::span<const uint8_t> bytes_in) {
  require(bytes_in.size() >= 15, Errc::TooShort, "store header needs 15 bytes");
  const uint8_t* p = bytes_in.data();
  require(std::memcmp(p, kStoreMagic, 4) == 0, Errc::BadMagic, "store magic is not \"FMRC\"");
  const uint16_t version = bytes::load_u16le(p + 4);
  require(version == kStoreVersion, Errc::FormatError,
          "store version " + std::to_string(version));

  SliceStore store;
  const uint32_t count = bytes::load_u32le(p + 6);
  store.height = bytes::load_u16le(p + 10);
  store.width = bytes::load_u16le(p + 12);
  const uint8_t fmt = p[14];
  require(fmt <= 1, Errc::FormatError, "pixel_format " + std::to_string(fmt));
  store.format = PixelFormat(fmt);

  const size_t pixels_per_record = size_t(store.height) * store.width;
  const size_t pixel_bytes = store.format == PixelFormat::u8 ? 1 : 4;
  const size_t record_bytes = 9 + pixels_per_record * pixel_bytes;
  require(bytes_in.size() >= 15 + size_t(count) * record_bytes, Errc::TruncatedData,
          "store holds fewer records than its header claims");

  const uint8_t* q = p + 15;
  store.records.resize(count);
  for (uint32_t i = 0; i < count; ++i) {
    SliceRecord& rec = store.records[i];
    rec.label = q[0];
    require(rec.label <= 1, Errc::BadLabel, "record " + std::to_string(i));
    rec.subject_hash = bytes::load_u32le(q + 1);
    rec.z_index = bytes::load_u16le(q + 5);
    rec.t_index = bytes::load_u16le(q + 7);
    q += 9;
    rec.pixels.resize(pixels_per_record);
    if (store.format == PixelFormat::u8) {
      for (size_t k = 0; k < pixels_per_record; ++k) rec.pixels[k] = double(q[k]) / 255.0;
    } else {
      for (size_t k = 0; k < pixels_per_record; ++k)
        rec.pixels[k] = double(bytes::load_f32(q + 4 * k, false));
    }
    q += pixels_per_record * pixel_bytes;
  }
  return store;
}

std::string store_manifest_text(const SliceStore& store) {
  const auto counts = store.class_counts();
  std::ostringstream os;
  os << "count=" << store.records.size() << "\n";
  os << "height=" << store.height << "\n";
  os << "width=" << store.width << "\n";
  os << "pixel_format=" << (store.format == PixelFormat::u8 ? "u8" : "f32") << "\n";
  os << "class0=" << counts[0] << "\n";
  os << "class1=" << counts[1] << "\n";
  os << "seed=" << store.creation_seed << "\n";
  os << "subjects=";
  if (!store.subject_names.empty()) {
    for (size_t i = 0; i < store.subject_names.size(); ++i)
      os << (i ? "," : "") << store.subject_names[i];
  } else {
    std::vector<uint32_t> seen;
    for (const auto& r : store.records)
      if (std::find(seen.begin(), seen.end(), r.subject_hash) == seen.end())
        seen.push_back(r.subject_hash);
    for (size_t i = 0; i < seen.size(); ++i) os << (i ? "," : "") << seen[i];
  }
  os << "\n";
  return os.str();
}

void write_store(const SliceStore& store, const std::filesystem::path& path) {
  write_all(path, encode_store(store));
  const std::string manifest = store_manifest_text(store);
  std::ofstream out(path.string() + ".manifest", std::ios::trunc);
  require(out.good(), Errc::IoError, "cannot write store manifest");
  out << manifest;
}

SliceStore read_store(const std::filesystem::path& path) {
  SliceStore store = decode_store(read_all(path));

  // The sidecar is informational, but when present its count must agree.
  const std::filesystem::path manifest = path.string() + ".manifest";
  if (std::filesystem::exists(manifest)) {
    std::ifstream in(manifest);
    std::string line;
    while (std::getline(in, line)) {
      if (line.rfind("count=", 0) == 0) {
        const size_t declared = std::stoull(line.substr(6));
        require(declared == store.records.size(), Errc::CountMismatch,
                "manifest declares " + std::to_string(declared) + " records, store holds " +
                    std::to_string(store.records.size()));
      }
      if (line.rfind("seed=", 0) == 0) store.creation_seed = std::stoull(line.substr(5));
    }
  }
  return store;
}

std::array<size_t, 3> split_sizes(size_t n, const std::array<double, 3>& fractions) {
  double sum = 0.0;
  for (const double f : fractions) {
    require(f >= 0.0, Errc::BadFractions, "negative fraction");
    sum += f;
  }
  require(std::abs(sum - 1.0) <= 1e-12, Errc::BadFractions,
          "fractions sum to " + std::to_string(sum));
  const size_t n_train = size_t(std::llround(fractions[0] * double(n)));
  const size_t n_val = size_t(std::llround(fractions[1] * double(n)));
  require(n_train + n_val <= n, Errc::BadFractions, "rounded sizes exceed the record count");
  return {n_train, n_val, n - n_train - n_val};
}

SplitIndices split_slices(size_t n, const SplitSpec& spec) {
  require(n > 0, Errc::EmptyIndexSet, "cannot split an empty store");
  const auto sizes = split_sizes(n, spec.fractions);

  std::vector<uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  Rng rng(spec.seed);
  rng.shuffle(order);

  SplitIndices out;
  out.train.assign(order.begin(), order.begin() + ptrdiff_t(sizes[0]));
  out.val.assign(order.begin() + ptrdiff_t(sizes[0]),
                 order.begin() + ptrdiff_t(sizes[0] + sizes[1]));
  out.test.assign(order.begin() + ptrdiff_t(sizes[0] + sizes[1]), order.end());
  return out;
}

SplitIndices split_store(const SliceStore& store, const SplitSpec& spec) {
  require(store.count() > 0, Errc::EmptyIndexSet, "cannot split an empty store");
  if (spec.granularity == Granularity::slice) return split_slices(store.count(), spec);

  // Whole subjects go to one side. Subjects are shuffled, then assigned
  // greedily until each side reaches its target slice count.
  std::vector<uint32_t> subjects;
  std::vector<std::vector<uint32_t>> members;
  for (uint32_t i = 0; i < store.count(); ++i) {
    const uint32_t h = store.records[i].subject_hash;
    auto it = std::find(subjects.begin(), subjects.end(), h);
    if (it == subjects.end()) {
      subjects.push_back(h);
      members.emplace_back();
      it = subjects.end() - 1;
    }
    members[size_t(it - subjects.begin())].push_back(i);
  }

  std::vector<uint32_t> order(subjects.size());
  std::iota(order.begin(), order.end(), 0u);
  Rng rng(spec.seed);
  rng.shuffle(order);

  const auto sizes = split_sizes(store.count(), spec.fractions);
  SplitIndices out;
  size_t assigned = 0;
  for (const uint32_t s : order) {
    std::vector<uint32_t>* side = &out.test;
    if (assigned < sizes[0])
      side = &out.train;
    else if (assigned < sizes[0] + sizes[1])
      side = &out.val;
    side->insert(side->end(), members[s].begin(), members[s].end());
    assigned += members[s].size();
  }
  return out;
}

MeanImage compute_mean_image(const SliceStore& store, std::span<const uint32_t> indices) {
  require(!indices.empty(), Errc::EmptyIndexSet, "mean image over an empty index set");
  MeanImage mean;
  mean.height = store.height;
  mean.width = store.width;
  mean.pixels.assign(size_t(store.height) * store.width, 0.0);
  for (const uint32_t idx : indices) {
    const auto& pix = store.records.at(idx).pixels;
    for (size_t k = 0; k < mean.pixels.size(); ++k) mean.pixels[k] += pix[k];
  }
  const double inv = 1.0 / double(indices.size());
  for (double& v : mean.pixels) v *= inv;
  return mean;
}

MeanImage zero_mean_image(uint16_t height, uint16_t width) {
  return MeanImage{height, width, std::vector<double>(size_t(height) * width, 0.0)};
}

void write_mean_image(const MeanImage& mean, const std::filesystem::path& path) {
  std::vector<uint8_t> out;
  out.reserve(4 + mean.pixels.size() * 8);
  bytes::store_u16(out, mean.height);
  bytes::store_u16(out, mean.width);
  for (const double v : mean.pixels) bytes::store_f64(out, v);
  write_all(path, out);
}

MeanImage read_mean_image(const std::filesystem::path& path) {
  const std::vector<uint8_t> buf = read_all(path);
  require(buf.size() >= 4, Errc::TooShort, "mean image header");
  MeanImage mean;
  mean.height = bytes::load_u16le(buf.data());
  mean.width = bytes::load_u16le(buf.data() + 2);
  const size_t count = size_t(mean.height) * mean.width;
  require(buf.size() == 4 + count * 8, Errc::TruncatedData, "mean image payload");
  mean.pixels.resize(count);
  for (size_t k = 0; k < count; ++k)
    mean.pixels[k] = bytes::load_f64(buf.data() + 4 + 8 * k, false);
  return mean;
}

std::vector<double> resize_bilinear(std::span<const double> src, int src_h, int src_w,
                                    int dst_h, int dst_w) {
  std::vector<double> dst(size_t(dst_h) * dst_w);
  const double sy = double(src_h) / double(dst_h);
  const double sx = double(src_w) / double(dst_w);
  for (int y = 0; y < dst_h; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, double(src_h - 1));
    const int y0 = int(fy);
    const int y1 = std::min(y0 + 1, src_h - 1);
    const double wy = fy - y0;
    for (int x = 0; x < dst_w; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, double(src_w - 1));
      const int x0 = int(fx);
      const int x1 = std::min(x0 + 1, src_w - 1);
      const double wx = fx - x0;
      const double top = src[size_t(y0) * src_w + x0] * (1.0 - wx) + src[size_t(y0) * src_w + x1] * wx;
      const double bot = src[size_t(y1) * src_w + x0] * (1.0 - wx) + src[size_t(y1) * src_w + x1] * wx;
      dst[size_t(y) * dst_w + x] = top * (1.0 - wy) + bot * wy;
    }
  }
  return dst;
}

std::vector<SliceImage> extract_slices(const nifti::Volume4D& vol, int drop_low_z,
                                       std::optional<std::pair<uint16_t, uint16_t>> resize_to,
                                       uint8_t label, const std::string& subject_id) {
  require(vol.voxel_count() > 0 && !vol.voxels.empty(), Errc::EmptyVolume, "volume has no voxels");
  require(drop_low_z >= 0 && int64_t(drop_low_z) < vol.nz, Errc::DropTooLarge,
          "drop " + std::to_string(drop_low_z) + " of " + std::to_string(vol.nz) + " z planes");
  require(label <= 1, Errc::BadLabel, "label " + std::to_string(label));

  // A slice is the xy-plane at (z, t); the slice's height axis is y.
  const int sh = int(vol.ny), sw = int(vol.nx);
  std::vector<SliceImage> out;
  out.reserve(size_t(vol.nz - drop_low_z) * size_t(vol.nt));
  std::vector<double> plane(size_t(sh) * sw);

  for (int64_t z = drop_low_z; z < vol.nz; ++z) {
    for (int64_t t = 0; t < vol.nt; ++t) {
      double lo = vol.at(0, 0, z, t), hi = lo;
      for (int y = 0; y < sh; ++y)
        for (int x = 0; x < sw; ++x) {
          const double v = vol.at(x, y, z, t);
          plane[size_t(y) * sw + x] = v;
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      if (hi > lo) {
        const double inv = 1.0 / (hi - lo);
        for (double& v : plane) v = (v - lo) * inv;
      } else {
        std::fill(plane.begin(), plane.end(), 0.0);
      }

      SliceImage img;
      img.label = label;
      img.subject_id = subject_id;
      img.z_index = uint16_t(z);
      img.t_index = uint16_t(t);
      if (resize_to) {
        img.height = resize_to->first;
        img.width = resize_to->second;
        img.pixels = resize_bilinear(plane, sh, sw, img.height, img.width);
      } else {
        img.height = uint16_t(sh);
        img.width = uint16_t(sw);
        img.pixels = plane;
      }
      out.push_back(std::move(img));
    }
  }
  return out;
}

SliceStore generate_synthetic(int n_subjects, int slices_per_subject, uint16_t height,
                              uint16_t width, uint64_t seed, double pattern_amplitude,
                              PixelFormat format) {
  require(n_subjects >= 1 && slices_per_subject >= 1 && height >= 1 && width >= 1,
          Errc::BadArgument, "all synthetic-store counts must be >= 1");

  SliceStore store;
  store.format = format;
  store.creation_seed = seed;
  store.height = height;
  store.width = width;

  const double cy = (height - 1) / 2.0, cx = (width - 1) / 2.0;
  const double ry = height / 4.0, rx = width / 4.0;

  Rng rng(mix_seed(seed, 0x5e17));
  SliceImage img;
  img.height = height;
  img.width = width;
  img.pixels.resize(size_t(height) * width);

  for (int s = 0; s < n_subjects; ++s) {
    const uint8_t label = uint8_t(s % 2);
    const double subj_bias = rng.uniform(-0.05, 0.05);
    char name[16];
    std::snprintf(name, sizeof name, "subj%04d", s);

    for (int k = 0; k < slices_per_subject; ++k) {
      const double gain = rng.uniform(0.9, 1.1);
      for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
          double v = 0.5 + subj_bias + 0.12 * rng.gaussian();
          const double dy = (y - cy) / ry, dx = (x - cx) / rx;
          if (label == 1 && dy * dy + dx * dx <= 1.0) v *= 1.0 - pattern_amplitude;
          img.pixels[size_t(y) * width + x] = std::clamp(v * gain, 0.0, 1.0);
        }
      }
      img.label = label;
      img.subject_id = name;
      img.z_index = uint16_t(k);
      img.t_index = 0;
      store.add(img);
    }
  }
  return store;
}

SliceStore import_idx(std::span<const uint8_t> images_bytes, std::span<const uint8_t> labels_bytes,
                      const std::map<int, int>& keep_labels, PixelFormat format) {
  require(images_bytes.size() >= 16, Errc::TooShort, "IDX image header needs 16 bytes");
  require(labels_bytes.size() >= 8, Errc::TooShort, "IDX label header needs 8 bytes");
  require(bytes::load_u32be(images_bytes.data()) == 0x00000803u, Errc::BadMagic,
          "IDX image magic is not 0x00000803");
  require(bytes::load_u32be(labels_bytes.data()) == 0x00000801u, Errc::BadMagic,
          "IDX label magic is not 0x00000801");

  const uint32_t n_images = bytes::load_u32be(images_bytes.data() + 4);
  const uint32_t rows = bytes::load_u32be(images_bytes.data() + 8);
  const uint32_t cols = bytes::load_u32be(images_bytes.data() + 12);
  const uint32_t n_labels = bytes::load_u32be(labels_bytes.data() + 4);
  require(n_images == n_labels, Errc::CountMismatch,
          std::to_string(n_images) + " images vs " + std::to_string(n_labels) + " labels");
  require(rows >= 1 && cols >= 1 && rows <= UINT16_MAX && cols <= UINT16_MAX, Errc::BadDims,
          "IDX image extents");

  const size_t pixel_count = size_t(rows) * cols;
  require(images_bytes.size() >= 16 + size_t(n_images) * pixel_count, Errc::TruncatedData,
          "IDX image payload");
  require(labels_bytes.size() >= 8 + size_t(n_labels), Errc::TruncatedData, "IDX label payload");

  for (const auto& [digit, cls] : keep_labels) {
    require(digit >= 0 && digit <= 255, Errc::BadArgument, "source digit out of range");
    require(cls == 0 || cls == 1, Errc::BadLabel, "mapped class must be 0 or 1");
  }

  SliceStore store;
  store.format = format;
  store.height = uint16_t(rows);
  store.width = uint16_t(cols);

  SliceImage img;
  img.height = store.height;
  img.width = store.width;
  img.pixels.resize(pixel_count);
  for (uint32_t i = 0; i < n_images; ++i) {
    const auto it = keep_labels.find(labels_bytes[8 + i]);
    if (it == keep_labels.end()) continue;
    const uint8_t* p = images_bytes.data() + 16 + size_t(i) * pixel_count;
    for (size_t k = 0; k < pixel_count; ++k) img.pixels[k] = double(p[k]) / 255.0;
    img.label = uint8_t(it->second);
    img.subject_id = "idx" + std::to_string(i);
    img.z_index = 0;
    img.t_index = 0;
    store.add(img);
  }
  return store;
}

}  // namespace fmricnn::dataset
