#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "jshield/binio.hpp"
#include "jshield/image.hpp"

namespace jshield {

enum class Split { kTrain, kValidation, kTest };

enum class DatasetFormat { kMnistIdx, kCifar10Bin, kPpmDir };

inline const char* split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "validation";
    default: return "test";
  }
}

inline DatasetFormat parse_dataset_format(const std::string& s) {
  if (s == "mnist-idx") return DatasetFormat::kMnistIdx;
  if (s == "cifar10-bin") return DatasetFormat::kCifar10Bin;
  if (s == "ppm-dir") return DatasetFormat::kPpmDir;
  throw std::invalid_argument("unknown dataset format '" + s +
                              "' (want mnist-idx, cifar10-bin or ppm-dir)");
}

// Labeled image set. ids are stable per-image identifiers assigned at
// load time; they survive reordering, which keeps per-image random
// streams (e.g. the noise permutation) independent of dataset order.
struct Dataset {
  std::vector<Image> images;
  std::vector<int> labels;
  std::vector<std::uint64_t> ids;
  Split split = Split::kTest;
  int class_count = 0;

  std::size_t size() const { return images.size(); }
};

namespace detail {

inline std::uint32_t read_u32_be(const std::vector<std::uint8_t>& b, std::size_t pos,
                                 const std::string& file) {
  if (pos + 4 > b.size())
    throw std::runtime_error(file + ": truncated header at offset " + std::to_string(pos));
  return (static_cast<std::uint32_t>(b[pos]) << 24) | (static_cast<std::uint32_t>(b[pos + 1]) << 16) |
         (static_cast<std::uint32_t>(b[pos + 2]) << 8) | static_cast<std::uint32_t>(b[pos + 3]);
}

// IDX image file: BE magic 0x00000803, count, rows, cols, raw bytes.
inline std::vector<Image> load_idx_images(const std::string& path) {
  auto bytes = read_file_bytes(path);
  const std::uint32_t magic = read_u32_be(bytes, 0, path);
  if (magic != 0x00000803u) {
    std::ostringstream os;
    os << path << ": bad IDX image magic 0x" << std::hex << magic << " at offset 0 (want 0x803)";
    throw std::runtime_error(os.str());
  }
  const std::uint32_t count = read_u32_be(bytes, 4, path);
  const std::uint32_t rows = read_u32_be(bytes, 8, path);
  const std::uint32_t cols = read_u32_be(bytes, 12, path);
  const std::size_t expected = 16 + static_cast<std::size_t>(count) * rows * cols;
  if (bytes.size() != expected) {
    throw std::runtime_error(path + ": expected " + std::to_string(expected) + " bytes, got " +
                             std::to_string(bytes.size()));
  }
  std::vector<Image> images;
  images.reserve(count);
  std::size_t pos = 16;
  for (std::uint32_t i = 0; i < count; ++i) {
    Image img(static_cast<int>(cols), static_cast<int>(rows), 1);
    std::copy(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
              bytes.begin() + static_cast<std::ptrdiff_t>(pos + rows * cols), img.pixels.begin());
    pos += static_cast<std::size_t>(rows) * cols;
    images.push_back(std::move(img));
  }
  return images;
}

inline std::vector<int> load_idx_labels(const std::string& path) {
  auto bytes = read_file_bytes(path);
  const std::uint32_t magic = read_u32_be(bytes, 0, path);
  if (magic != 0x00000801u) {
    std::ostringstream os;
    os << path << ": bad IDX label magic 0x" << std::hex << magic << " at offset 0 (want 0x801)";
    throw std::runtime_error(os.str());
  }
  const std::uint32_t count = read_u32_be(bytes, 4, path);
  const std::size_t expected = 8 + count;
  if (bytes.size() != expected) {
    throw std::runtime_error(path + ": expected " + std::to_string(expected) + " bytes, got " +
                             std::to_string(bytes.size()));
  }
  std::vector<int> labels(count);
  for (std::uint32_t i = 0; i < count; ++i) labels[i] = bytes[8 + i];
  return labels;
}

inline Dataset load_mnist_idx(const std::string& dir, Split split) {
  namespace fs = std::filesystem;
  const bool train = split == Split::kTrain;
  const fs::path images_path =
      fs::path(dir) / (train ? "train-images-idx3-ubyte" : "t10k-images-idx3-ubyte");
  const fs::path labels_path =
      fs::path(dir) / (train ? "train-labels-idx1-ubyte" : "t10k-labels-idx1-ubyte");
  Dataset ds;
  ds.split = split;
  ds.class_count = 10;
  ds.images = load_idx_images(images_path.string());
  ds.labels = load_idx_labels(labels_path.string());
  if (ds.images.size() != ds.labels.size()) {
    throw std::runtime_error(dir + ": image count " + std::to_string(ds.images.size()) +
                             " != label count " + std::to_string(ds.labels.size()));
  }
  return ds;
}

// CIFAR-10 binary batches: 3073-byte records, 1 label byte + 3*1024
// planar RGB samples of a 32x32 image.
inline void load_cifar_batch(const std::string& path, Dataset& ds) {
  auto bytes = read_file_bytes(path);
  constexpr std::size_t kRecord = 3073;
  if (bytes.empty() || bytes.size() % kRecord != 0) {
    throw std::runtime_error(path + ": size " + std::to_string(bytes.size()) +
                             " is not a multiple of the 3073-byte record");
  }
  const std::size_t n = bytes.size() / kRecord;
  for (std::size_t r = 0; r < n; ++r) {
    const std::uint8_t* rec = bytes.data() + r * kRecord;
    const int label = rec[0];
    if (label > 9)
      throw std::runtime_error(path + ": label " + std::to_string(label) + " out of range in record " +
                               std::to_string(r));
    Image img(32, 32, 3);
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) img.at(x, y, c) = rec[1 + (c * 32 + y) * 32 + x];
    ds.images.push_back(std::move(img));
    ds.labels.push_back(label);
  }
}

inline Dataset load_cifar10_bin(const std::string& dir, Split split) {
  namespace fs = std::filesystem;
  Dataset ds;
  ds.split = split;
  ds.class_count = 10;
  if (split == Split::kTrain) {
    for (int i = 1; i <= 5; ++i)
      load_cifar_batch((fs::path(dir) / ("data_batch_" + std::to_string(i) + ".bin")).string(), ds);
  } else {
    load_cifar_batch((fs::path(dir) / "test_batch.bin").string(), ds);
  }
  return ds;
}

// Directory of PGM/PPM files listed in labels.txt ("<filename> <label>"
// per line, '#' comments). A split subdirectory is used when present.
inline Dataset load_ppm_dir(const std::string& dir, Split split) {
  namespace fs = std::filesystem;
  fs::path base(dir);
  if (fs::exists(base / split_name(split) / "labels.txt")) base /= split_name(split);
  const fs::path list_path = base / "labels.txt";
  std::ifstream list(list_path);
  if (!list) throw std::runtime_error("cannot open label list: " + list_path.string());

  Dataset ds;
  ds.split = split;
  std::string line;
  int line_no = 0;
  int max_label = -1;
  while (std::getline(list, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string fname;
    int label;
    if (!(ls >> fname)) continue;  // blank line
    if (!(ls >> label) || label < 0) {
      throw std::runtime_error(list_path.string() + ":" + std::to_string(line_no) +
                               ": expected '<filename> <label>'");
    }
    ds.images.push_back(read_pnm((base / fname).string()));
    ds.labels.push_back(label);
    max_label = std::max(max_label, label);
  }
  if (ds.images.empty()) throw std::runtime_error(list_path.string() + ": no images listed");
  ds.class_count = max_label + 1;
  return ds;
}

}  // namespace detail

inline Dataset load_dataset(const std::string& path, DatasetFormat format, Split split) {
  Dataset ds;
  switch (format) {
    case DatasetFormat::kMnistIdx: ds = detail::load_mnist_idx(path, split); break;
    case DatasetFormat::kCifar10Bin: ds = detail::load_cifar10_bin(path, split); break;
    case DatasetFormat::kPpmDir: ds = detail::load_ppm_dir(path, split); break;
  }
  ds.ids.resize(ds.size());
  for (std::size_t i = 0; i < ds.ids.size(); ++i) ds.ids[i] = i;
  for (int l : ds.labels) {
    if (l >= ds.class_count)
      throw std::runtime_error("dataset label " + std::to_string(l) + " outside class count " +
                               std::to_string(ds.class_count));
  }
  return ds;
}

// First n examples (dataset order) as a new dataset; ids carried over.
inline Dataset dataset_head(const Dataset& ds, std::size_t n) {
  Dataset out;
  out.split = ds.split;
  out.class_count = ds.class_count;
  const std::size_t m = std::min(n, ds.size());
  out.images.assign(ds.images.begin(), ds.images.begin() + static_cast<std::ptrdiff_t>(m));
  out.labels.assign(ds.labels.begin(), ds.labels.begin() + static_cast<std::ptrdiff_t>(m));
  out.ids.assign(ds.ids.begin(), ds.ids.begin() + static_cast<std::ptrdiff_t>(m));
  return out;
}

}  // namespace jshield
