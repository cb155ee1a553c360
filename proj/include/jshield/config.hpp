#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "jshield/binio.hpp"
#include "jshield/dataset.hpp"
#include "jshield/pipeline.hpp"

namespace jshield {

// Flat experiment configuration. Every field maps to one "key = value"
// line; flags override file values and defaults fill the rest, so a
// rendered snapshot of this struct reproduces a run bit-for-bit.
struct RunConfig {
  std::string dataset_path;                                  // dataset
  DatasetFormat dataset_format = DatasetFormat::kMnistIdx;   // dataset_format
  Split split = Split::kTest;                                // split
  std::string model_path;                                    // model
  std::vector<int> epsilons = {1, 5, 10};                    // epsilons
  int quality = 75;                                          // quality
  std::vector<std::string> chains;                           // chains ("" = default grid)
  std::uint64_t seed = 0;                                    // seed
  std::string output_dir;                                    // output_dir ("" = env or "out")
  int workers = 1;                                           // workers (0 = auto)
  std::uint64_t limit = 0;                                   // limit (0 = whole split)
  int epochs = 12;                                           // epochs
  int batch_size = 32;                                       // batch_size
  double learning_rate = 0.02;                               // learning_rate
  double momentum = 0.9;                                     // momentum
  std::string arch = "mnist";                                // arch (mnist | cifar10)
  int resize_min_dim = 0;                                    // resize_min_dim (0 = off)
  int crop_size = 0;                                         // crop_size (0 = off)
};

namespace detail {

inline std::string dataset_format_name(DatasetFormat f) {
  switch (f) {
    case DatasetFormat::kMnistIdx: return "mnist-idx";
    case DatasetFormat::kCifar10Bin: return "cifar10-bin";
    default: return "ppm-dir";
  }
}

inline Split parse_split_name(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "validation") return Split::kValidation;
  if (s == "test") return Split::kTest;
  throw std::invalid_argument("unknown split '" + s + "' (want train, validation or test)");
}

inline long long config_int(const std::string& key, const std::string& value) {
  long long out = 0;
  const char* begin = value.data();
  const char* end = begin + value.size();
  const auto res = std::from_chars(begin, end, out);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw std::invalid_argument("key '" + key + "': expected an integer, got '" + value + "'");
  }
  return out;
}

inline std::uint64_t config_u64(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const char* begin = value.data();
  const char* end = begin + value.size();
  const auto res = std::from_chars(begin, end, out);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw std::invalid_argument("key '" + key + "': expected a non-negative integer, got '" +
                                value + "'");
  }
  return out;
}

inline double config_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double out = std::stod(value, &used);
    if (used != value.size() || !std::isfinite(out)) throw std::invalid_argument("");
    return out;
  } catch (const std::exception&) {
    throw std::invalid_argument("key '" + key + "': expected a finite number, got '" + value +
                                "'");
  }
}

inline int config_int_in(const std::string& key, const std::string& value, long long lo,
                         long long hi) {
  const long long v = config_int(key, value);
  if (v < lo || v > hi) {
    throw std::invalid_argument("key '" + key + "': value " + std::to_string(v) + " outside " +
                                std::to_string(lo) + ".." + std::to_string(hi));
  }
  return static_cast<int>(v);
}

inline std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= value.size()) {
    const std::size_t comma = value.find(',', start);
    const std::size_t end = comma == std::string::npos ? value.size() : comma;
    parts.push_back(trim_copy(value.substr(start, end - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (parts.size() == 1 && parts[0].empty()) parts.clear();
  return parts;
}

}  // namespace detail

// Set a single key. Throws std::invalid_argument naming the key on
// unknown keys, type errors and out-of-range values.
inline void apply_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  using detail::config_double;
  using detail::config_int;
  using detail::config_int_in;
  using detail::config_u64;
  if (key == "dataset") {
    cfg.dataset_path = value;
  } else if (key == "dataset_format") {
    cfg.dataset_format = parse_dataset_format(value);
  } else if (key == "split") {
    cfg.split = detail::parse_split_name(value);
  } else if (key == "model") {
    cfg.model_path = value;
  } else if (key == "epsilons") {
    std::vector<int> eps;
    for (const std::string& part : detail::split_list(value))
      eps.push_back(config_int_in(key, part, 0, 255));
    if (eps.empty())
      throw std::invalid_argument("key 'epsilons': expected a comma-separated list, got '" +
                                  value + "'");
    cfg.epsilons = std::move(eps);
  } else if (key == "quality") {
    cfg.quality = config_int_in(key, value, 1, 100);
  } else if (key == "chains") {
    cfg.chains = detail::split_list(value);
    for (const std::string& spec : cfg.chains) TransformChain::parse(spec);
  } else if (key == "seed") {
    cfg.seed = config_u64(key, value);
  } else if (key == "output_dir") {
    cfg.output_dir = value;
  } else if (key == "workers") {
    cfg.workers = config_int_in(key, value, 0, 4096);
  } else if (key == "limit") {
    cfg.limit = config_u64(key, value);
  } else if (key == "epochs") {
    cfg.epochs = config_int_in(key, value, 1, 1000000);
  } else if (key == "batch_size") {
    cfg.batch_size = config_int_in(key, value, 1, 1000000);
  } else if (key == "learning_rate") {
    const double lr = config_double(key, value);
    if (lr < 0) throw std::invalid_argument("key 'learning_rate': must be >= 0");
    cfg.learning_rate = lr;
  } else if (key == "momentum") {
    const double m = config_double(key, value);
    if (m < 0 || m >= 1) throw std::invalid_argument("key 'momentum': must be in [0, 1)");
    cfg.momentum = m;
  } else if (key == "arch") {
    if (value != "mnist" && value != "cifar10")
      throw std::invalid_argument("key 'arch': unknown architecture '" + value +
                                  "' (want mnist or cifar10)");
    cfg.arch = value;
  } else if (key == "resize_min_dim") {
    cfg.resize_min_dim = config_int_in(key, value, 0, 65535);
  } else if (key == "crop_size") {
    cfg.crop_size = config_int_in(key, value, 0, 65535);
  } else {
    throw std::invalid_argument("unknown key '" + key + "'");
  }
}

// Cross-field checks that individual setters cannot do alone.
inline void validate_config(const RunConfig& cfg) {
  if (cfg.resize_min_dim > 0 && cfg.crop_size > cfg.resize_min_dim) {
    throw std::invalid_argument("config: crop_size " + std::to_string(cfg.crop_size) +
                                " exceeds resize_min_dim " + std::to_string(cfg.resize_min_dim));
  }
  for (const std::string& spec : cfg.chains) TransformChain::parse(spec);
}

// Parse "key = value" lines ('#' starts a comment, blank lines are
// skipped) on top of the given defaults. `name` prefixes errors, which
// always carry the 1-based line number.
inline RunConfig parse_config_text(const std::string& text, const std::string& name,
                                   RunConfig base = {}) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string stripped = detail::trim_copy(line);
    if (stripped.empty()) continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(name + ":" + std::to_string(line_no) +
                                  ": expected 'key = value', got '" + stripped + "'");
    }
    const std::string key = detail::trim_copy(stripped.substr(0, eq));
    const std::string value = detail::trim_copy(stripped.substr(eq + 1));
    if (key.empty()) {
      throw std::invalid_argument(name + ":" + std::to_string(line_no) + ": empty key");
    }
    try {
      apply_config_value(base, key, value);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(name + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

inline RunConfig parse_config_file(const std::string& path, RunConfig base = {}) {
  const auto bytes = read_file_bytes(path);
  return parse_config_text(std::string(bytes.begin(), bytes.end()), path, std::move(base));
}

// Defaults, then the optional file, then "key=value" overrides in order.
inline RunConfig parse_config(const std::string& file_path,
                              const std::vector<std::string>& overrides) {
  RunConfig cfg;
  if (!file_path.empty()) cfg = parse_config_file(file_path, std::move(cfg));
  for (const std::string& ov : overrides) {
    const std::size_t eq = ov.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("override '" + ov + "': expected key=value");
    }
    const std::string key = detail::trim_copy(ov.substr(0, eq));
    const std::string value = detail::trim_copy(ov.substr(eq + 1));
    try {
      apply_config_value(cfg, key, value);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("override '" + ov + "': " + e.what());
    }
  }
  validate_config(cfg);
  return cfg;
}

namespace detail {

inline std::string double_text(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <class T, class F>
std::string join_list(const std::vector<T>& parts, F&& to_text) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ',';
    out += to_text(parts[i]);
  }
  return out;
}

}  // namespace detail

// Fully-resolved snapshot; parse_config_text() of this text reproduces
// the struct exactly.
inline std::string render_config(const RunConfig& cfg) {
  std::string out = "# resolved run configuration\n";
  auto line = [&](const char* key, const std::string& value) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  };
  line("dataset", cfg.dataset_path);
  line("dataset_format", detail::dataset_format_name(cfg.dataset_format));
  line("split", split_name(cfg.split));
  line("model", cfg.model_path);
  line("epsilons",
       detail::join_list(cfg.epsilons, [](int e) { return std::to_string(e); }));
  line("quality", std::to_string(cfg.quality));
  line("chains", detail::join_list(cfg.chains, [](const std::string& s) { return s; }));
  line("seed", std::to_string(cfg.seed));
  line("output_dir", cfg.output_dir);
  line("workers", std::to_string(cfg.workers));
  line("limit", std::to_string(cfg.limit));
  line("epochs", std::to_string(cfg.epochs));
  line("batch_size", std::to_string(cfg.batch_size));
  line("learning_rate", detail::double_text(cfg.learning_rate));
  line("momentum", detail::double_text(cfg.momentum));
  line("arch", cfg.arch);
  line("resize_min_dim", std::to_string(cfg.resize_min_dim));
  line("crop_size", std::to_string(cfg.crop_size));
  return out;
}

// The evaluation grid. An explicit `chains` list wins; otherwise the
// default grid mirrors the report tables: the clean column, the plain
// compression control, the attack at every epsilon, the compressed
// attack at every epsilon, and the permuted-delta control at the
// smallest epsilon.
inline std::vector<TransformChain> resolve_chains(const RunConfig& cfg) {
  std::vector<TransformChain> chains;
  if (!cfg.chains.empty()) {
    for (const std::string& spec : cfg.chains) chains.push_back(TransformChain::parse(spec));
    return chains;
  }
  std::vector<int> eps = cfg.epsilons;
  std::sort(eps.begin(), eps.end());
  eps.erase(std::unique(eps.begin(), eps.end()), eps.end());
  if (eps.empty()) throw std::invalid_argument("config: empty epsilon list");
  const std::string q = std::to_string(cfg.quality);
  chains.push_back(TransformChain::parse("id"));
  chains.push_back(TransformChain::parse("jpg:" + q));
  for (int e : eps) chains.push_back(TransformChain::parse("adv:" + std::to_string(e)));
  for (int e : eps)
    chains.push_back(TransformChain::parse("adv:" + std::to_string(e) + ">jpg:" + q));
  chains.push_back(TransformChain::parse("adv:" + std::to_string(eps.front()) + ">noise:" + q));
  return chains;
}

}  // namespace jshield
