#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "jshield/adversarial.hpp"
#include "jshield/binio.hpp"
#include "jshield/dataset.hpp"
#include "jshield/jpeg_codec.hpp"
#include "jshield/model.hpp"
#include "jshield/preprocess.hpp"

namespace jshield {

// --- transform chains -------------------------------------------------------

enum class TransformKind { kIdentity, kFgsm, kJpgProject, kJpgNoise };

struct TransformStep {
  TransformKind kind = TransformKind::kIdentity;
  int epsilon = 0;   // kFgsm: perturbation magnitude in 0..255 pixel units
  int quality = 75;  // kJpgProject / kJpgNoise
};

// An ordered list of per-image transforms. The attack step, when present,
// must come first: it is defined against the clean image's top label.
struct TransformChain {
  std::vector<TransformStep> steps;

  void validate() const {
    for (std::size_t i = 0; i < steps.size(); ++i) {
      const TransformStep& st = steps[i];
      switch (st.kind) {
        case TransformKind::kIdentity: break;
        case TransformKind::kFgsm:
          if (st.epsilon < 0) {
            throw std::invalid_argument("transform chain '" + config_string() +
                                        "': epsilon must be >= 0");
          }
          // Position 0 also enforces "at most once": any repeat is non-first.
          if (i != 0) {
            throw std::invalid_argument("transform chain '" + config_string() +
                                        "': adv must be the first step");
          }
          break;
        case TransformKind::kJpgProject:
        case TransformKind::kJpgNoise:
          if (st.quality < 1 || st.quality > 100) {
            throw std::invalid_argument("transform chain '" + config_string() + "': quality " +
                                        std::to_string(st.quality) + " outside 1..100");
          }
          break;
      }
    }
  }

  // Display label in the nested notation used by the report tables,
  // e.g. "x", "ADV_1(x)", "JPG[ADV_1(x)]", "NOISE[ADV_1(x)]".
  std::string label() const {
    std::string cur = "x";
    for (const TransformStep& st : steps) {
      switch (st.kind) {
        case TransformKind::kIdentity: break;
        case TransformKind::kFgsm: cur = "ADV_" + std::to_string(st.epsilon) + "(" + cur + ")"; break;
        case TransformKind::kJpgProject: cur = "JPG[" + cur + "]"; break;
        case TransformKind::kJpgNoise: cur = "NOISE[" + cur + "]"; break;
      }
    }
    return cur;
  }

  // Machine-readable form, the inverse of parse():
  // steps joined by '>', each one of id | adv:<eps> | jpg:<quality> | noise:<quality>.
  std::string config_string() const {
    if (steps.empty()) return "id";
    std::string out;
    for (std::size_t i = 0; i < steps.size(); ++i) {
      if (i) out += '>';
      const TransformStep& st = steps[i];
      switch (st.kind) {
        case TransformKind::kIdentity: out += "id"; break;
        case TransformKind::kFgsm: out += "adv:" + std::to_string(st.epsilon); break;
        case TransformKind::kJpgProject: out += "jpg:" + std::to_string(st.quality); break;
        case TransformKind::kJpgNoise: out += "noise:" + std::to_string(st.quality); break;
      }
    }
    return out;
  }

  static TransformChain parse(const std::string& text);
};

namespace detail {

inline std::string trim_copy(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

inline int parse_step_param(const std::string& token, const std::string& value,
                            const char* what) {
  if (value.empty() || value.find_first_not_of("0123456789") != std::string::npos) {
    throw std::invalid_argument("transform chain: step '" + token + "': " + what +
                                " must be a non-negative integer");
  }
  try {
    return std::stoi(value);
  } catch (const std::out_of_range&) {
    throw std::invalid_argument("transform chain: step '" + token + "': " + what +
                                " out of range");
  }
}

inline TransformStep parse_step(const std::string& raw) {
  const std::string token = trim_copy(raw);
  if (token.empty()) throw std::invalid_argument("transform chain: empty step");
  const std::size_t colon = token.find(':');
  const std::string name = token.substr(0, colon);
  const bool has_param = colon != std::string::npos;
  const std::string param = has_param ? token.substr(colon + 1) : "";

  TransformStep st;
  if (name == "id") {
    if (has_param)
      throw std::invalid_argument("transform chain: step 'id' takes no parameter, got '" +
                                  token + "'");
    st.kind = TransformKind::kIdentity;
  } else if (name == "adv") {
    if (!has_param)
      throw std::invalid_argument("transform chain: step 'adv' needs ':<epsilon>', got '" +
                                  token + "'");
    st.kind = TransformKind::kFgsm;
    st.epsilon = parse_step_param(token, param, "epsilon");
  } else if (name == "jpg" || name == "noise") {
    if (!has_param)
      throw std::invalid_argument("transform chain: step '" + name + "' needs ':<quality>', got '" +
                                  token + "'");
    st.kind = name == "jpg" ? TransformKind::kJpgProject : TransformKind::kJpgNoise;
    st.quality = parse_step_param(token, param, "quality");
  } else {
    throw std::invalid_argument("transform chain: unknown step '" + token +
                                "' (want id, adv:<eps>, jpg:<q> or noise:<q>)");
  }
  return st;
}

}  // namespace detail

inline TransformChain TransformChain::parse(const std::string& text) {
  if (detail::trim_copy(text).empty())
    throw std::invalid_argument("transform chain: empty specification (use 'id' for the identity)");
  TransformChain chain;
  std::size_t start = 0;
  while (true) {
    const std::size_t sep = text.find('>', start);
    chain.steps.push_back(detail::parse_step(
        text.substr(start, sep == std::string::npos ? std::string::npos : sep - start)));
    if (sep == std::string::npos) break;
    start = sep + 1;
  }
  chain.validate();
  return chain;
}

// --- box-plot statistics ----------------------------------------------------

// Five-number summary in the Tukey convention: quartiles by linear
// interpolation (type 7), whiskers at the furthest data points within
// 1.5 IQR of the quartiles, everything beyond counted as outliers.
struct BoxStats {
  double mean = 0.0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double whisker_low = 0.0;
  double whisker_high = 0.0;
  std::uint64_t outlier_count = 0;
};

namespace detail {

inline double quantile_type7(const std::vector<double>& sorted, double p) {
  const std::size_t n = sorted.size();
  const double h = p * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  const std::size_t hi = std::min(lo + 1, n - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace detail

inline BoxStats boxplot_stats(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("boxplot_stats: empty value list");
  std::sort(values.begin(), values.end());
  BoxStats out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  out.median = detail::quantile_type7(values, 0.50);
  out.q1 = detail::quantile_type7(values, 0.25);
  out.q3 = detail::quantile_type7(values, 0.75);
  const double iqr = out.q3 - out.q1;
  const double low_fence = out.q1 - 1.5 * iqr;
  const double high_fence = out.q3 + 1.5 * iqr;
  const auto first_in = std::lower_bound(values.begin(), values.end(), low_fence);
  const auto first_out = std::upper_bound(values.begin(), values.end(), high_fence);
  if (first_in >= first_out) throw std::logic_error("boxplot_stats: no data inside the fences");
  out.whisker_low = *first_in;
  out.whisker_high = *(first_out - 1);
  out.outlier_count = static_cast<std::uint64_t>((first_in - values.begin()) +
                                                 (values.end() - first_out));
  if (!(out.whisker_low <= out.q1 && out.q1 <= out.median && out.median <= out.q3 &&
        out.q3 <= out.whisker_high)) {
    throw std::logic_error("boxplot_stats: ordering invariant violated");
  }
  return out;
}

// --- evaluation -------------------------------------------------------------

struct EvalConfig {
  PreprocessConfig preprocess;
  ChromaSubsampling chroma_subsampling = ChromaSubsampling::k420;
  std::uint64_t seed = 0;  // keys the per-image jpg_noise permutations
  int workers = 1;         // 0 selects one worker per hardware thread
  double max_skip_fraction = 0.01;
};

// Per-chain results, aligned index-for-index with EvalReport::image_ids.
struct ChainResult {
  std::string label;
  std::string config;
  std::vector<double> top_label_probs;  // p of the clean image's top label
  std::vector<std::int32_t> predicted;
  std::vector<std::uint8_t> correct;  // predicted == ground truth
  double accuracy = 0.0;
  double mean_top_label_prob = 0.0;
  BoxStats prob_stats;
};

struct SkipRecord {
  std::uint64_t image_id = 0;
  std::string reason;
};

struct EvalReport {
  std::uint64_t seed = 0;
  std::uint64_t dataset_size = 0;  // images attempted (evaluated + skipped)
  std::vector<std::uint64_t> image_ids;  // evaluated images, ascending id
  std::vector<std::int32_t> ground_truth;
  std::vector<std::int32_t> clean_top_labels;
  std::uint64_t tie_count = 0;  // images whose clean top label was not unique
  std::vector<ChainResult> chains;
  std::vector<SkipRecord> skips;
};

namespace detail {

// Recompute a chain's aggregates from its per-image entries. evaluate()
// compares the recount against its independently accumulated tally, and
// deserialize_report() against the stored values.
inline void finalize_chain(ChainResult& cr, std::size_t image_count) {
  if (cr.top_label_probs.size() != image_count || cr.predicted.size() != image_count ||
      cr.correct.size() != image_count) {
    throw std::logic_error("chain '" + cr.label + "': per-image arrays disagree on length");
  }
  if (image_count == 0) throw std::logic_error("chain '" + cr.label + "': no evaluated images");
  const auto hits = static_cast<std::size_t>(
      std::count(cr.correct.begin(), cr.correct.end(), static_cast<std::uint8_t>(1)));
  cr.accuracy = static_cast<double>(hits) / static_cast<double>(image_count);
  double sum = 0.0;
  for (double p : cr.top_label_probs) sum += p;
  cr.mean_top_label_prob = sum / static_cast<double>(image_count);
  if (!(cr.mean_top_label_prob >= 0.0 && cr.mean_top_label_prob <= 1.0)) {
    throw std::logic_error("chain '" + cr.label + "': mean top-label probability " +
                           std::to_string(cr.mean_top_label_prob) + " outside [0,1]");
  }
  cr.prob_stats = boxplot_stats(cr.top_label_probs);
}

}  // namespace detail

// Run every chain over every image: per image, compute the clean top
// label l_w(x), then for each chain f record p_w(l_w(x) | f(x)) together
// with f(x)'s predicted class and its correctness against the ground
// truth. Images are processed in parallel; results are reduced in
// ascending image-id order, so the report is identical for any worker
// count and any dataset ordering.
template <class T = float>
EvalReport evaluate(const ModelWeightsT<T>& weights, const Dataset& data,
                    const std::vector<TransformChain>& chains, const EvalConfig& cfg = {}) {
  if (data.size() == 0) throw std::invalid_argument("evaluate: dataset is empty");
  if (data.ids.size() != data.size() || data.labels.size() != data.size())
    throw std::invalid_argument("evaluate: dataset ids/labels/images lengths disagree");
  validate_preprocess_config(cfg.preprocess);
  for (const TransformChain& chain : chains) chain.validate();
  if (cfg.workers < 0) throw std::invalid_argument("evaluate: negative worker count");
  if (!(cfg.max_skip_fraction >= 0.0 && cfg.max_skip_fraction <= 1.0))
    throw std::invalid_argument("evaluate: max_skip_fraction outside [0,1]");

  const std::size_t n = data.size();
  const std::size_t chain_count = chains.size();

  struct PerImage {
    bool ok = false;
    std::string error;
    std::int32_t clean_label = 0;
    bool tie = false;
    std::vector<double> probs;
    std::vector<std::int32_t> predicted;
  };
  std::vector<PerImage> slots(n);

  auto run_one = [&](std::size_t i) {
    PerImage& slot = slots[i];
    try {
      const Image geom = preprocess_geometry(data.images[i], cfg.preprocess);
      const Prediction clean =
          predict(weights, standardize<T>(geom, weights.std_mean, weights.std_scale));
      slot.clean_label = clean.top_class;
      slot.tie = clean.tie_flag;
      slot.probs.resize(chain_count);
      slot.predicted.resize(chain_count);
      std::map<int, Image> adv_cache;  // FGSM output per epsilon; adv is always step 0
      for (std::size_t c = 0; c < chain_count; ++c) {
        Image cur = geom;
        for (const TransformStep& st : chains[c].steps) {
          switch (st.kind) {
            case TransformKind::kIdentity: break;
            case TransformKind::kFgsm: {
              auto it = adv_cache.find(st.epsilon);
              if (it == adv_cache.end()) {
                AttackSpec spec;
                spec.epsilon = st.epsilon;
                it = adv_cache.emplace(st.epsilon, fgsm(weights, geom, spec)).first;
              }
              cur = it->second;
              break;
            }
            case TransformKind::kJpgProject: {
              CodecConfig cc;
              cc.quality = st.quality;
              cc.chroma_subsampling = cfg.chroma_subsampling;
              cur = jpg_project(cur, cc);
              break;
            }
            case TransformKind::kJpgNoise: {
              CodecConfig cc;
              cc.quality = st.quality;
              cc.chroma_subsampling = cfg.chroma_subsampling;
              cur = jpg_noise(cur, cc, PermSeed{cfg.seed, data.ids[i]});
              break;
            }
          }
        }
        const Prediction after =
            predict(weights, standardize<T>(cur, weights.std_mean, weights.std_scale));
        slot.probs[c] = after.probs[static_cast<std::size_t>(slot.clean_label)];
        slot.predicted[c] = after.top_class;
      }
      slot.ok = true;
    } catch (const std::exception& e) {
      slot.ok = false;
      slot.error = e.what();
    } catch (...) {
      slot.ok = false;
      slot.error = "unknown error";
    }
  };

  std::size_t worker_count =
      cfg.workers == 0 ? std::max(1u, std::thread::hardware_concurrency())
                       : static_cast<std::size_t>(cfg.workers);
  worker_count = std::min(worker_count, n);
  if (worker_count <= 1) {
    for (std::size_t i = 0; i < n; ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(worker_count);
    for (std::size_t w = 0; w < worker_count; ++w) {
      pool.emplace_back([&] {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= n) break;
          run_one(i);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }

  // Deterministic ordered reduction: ascending stable image id.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return data.ids[a] < data.ids[b]; });

  EvalReport report;
  report.seed = cfg.seed;
  report.dataset_size = n;
  report.chains.resize(chain_count);
  for (std::size_t c = 0; c < chain_count; ++c) {
    report.chains[c].label = chains[c].label();
    report.chains[c].config = chains[c].config_string();
  }
  std::vector<std::size_t> tally(chain_count, 0);  // first entry of the double-entry count
  for (std::size_t idx : order) {
    const PerImage& slot = slots[idx];
    if (!slot.ok) {
      report.skips.push_back({data.ids[idx], slot.error});
      continue;
    }
    report.image_ids.push_back(data.ids[idx]);
    report.ground_truth.push_back(data.labels[idx]);
    report.clean_top_labels.push_back(slot.clean_label);
    if (slot.tie) ++report.tie_count;
    for (std::size_t c = 0; c < chain_count; ++c) {
      ChainResult& cr = report.chains[c];
      cr.top_label_probs.push_back(slot.probs[c]);
      cr.predicted.push_back(slot.predicted[c]);
      const bool hit = slot.predicted[c] == data.labels[idx];
      cr.correct.push_back(hit ? 1 : 0);
      if (hit) ++tally[c];
    }
  }

  const double skipped = static_cast<double>(report.skips.size());
  if (skipped > cfg.max_skip_fraction * static_cast<double>(n)) {
    std::string msg = "evaluate: " + std::to_string(report.skips.size()) + " of " +
                      std::to_string(n) + " images skipped, over the " +
                      std::to_string(cfg.max_skip_fraction * 100.0) + "% budget";
    if (!report.skips.empty()) {
      msg += "; first skip: image " + std::to_string(report.skips.front().image_id) + ": " +
             report.skips.front().reason;
    }
    throw std::runtime_error(msg);
  }

  for (std::size_t c = 0; c < chain_count; ++c) {
    ChainResult& cr = report.chains[c];
    detail::finalize_chain(cr, report.image_ids.size());
    const std::size_t recount =
        std::accumulate(cr.correct.begin(), cr.correct.end(), std::size_t{0});
    if (recount != tally[c]) {
      throw std::logic_error("evaluate: accuracy double-entry mismatch for chain '" + cr.label +
                             "'");
    }
  }
  return report;
}

// --- report emission --------------------------------------------------------

enum class ReportFormat { kTextTable, kCsv };

namespace detail {

inline std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

inline std::string emit_text_table(const EvalReport& report) {
  std::size_t width = 9;  // "Transform"
  for (const ChainResult& cr : report.chains) width = std::max(width, cr.label.size());
  auto pad = [&](const std::string& s) { return s + std::string(width - s.size(), ' '); };
  std::string out = pad("Transform") + "  Top-1 Accuracy  Mean Top-Label Prob\n";
  for (const ChainResult& cr : report.chains) {
    out += pad(cr.label) + "  " + fixed2(cr.accuracy) + "  " + fixed2(cr.mean_top_label_prob) +
           "\n";
  }
  return out;
}

// RFC-4180 (CRLF) table with one schema covering both record kinds:
// "summary" rows carry per-chain aggregates, "scatter" rows carry the
// per-image probability pairs for every chain pair (a, b), a < b.
inline std::string emit_csv(const EvalReport& report) {
  std::string out = "record,chain_a,chain_b,image_id,accuracy,mean_top_label_prob,p1,p2\r\n";
  for (const ChainResult& cr : report.chains) {
    out += "summary," + csv_field(cr.label) + ",,," + fixed2(cr.accuracy) + "," +
           fixed2(cr.mean_top_label_prob) + ",,\r\n";
  }
  for (std::size_t a = 0; a < report.chains.size(); ++a) {
    for (std::size_t b = a + 1; b < report.chains.size(); ++b) {
      const ChainResult& ca = report.chains[a];
      const ChainResult& cb = report.chains[b];
      for (std::size_t i = 0; i < report.image_ids.size(); ++i) {
        out += "scatter," + csv_field(ca.label) + "," + csv_field(cb.label) + "," +
               std::to_string(report.image_ids[i]) + ",,," + fixed6(ca.top_label_probs[i]) +
               "," + fixed6(cb.top_label_probs[i]) + "\r\n";
      }
    }
  }
  return out;
}

}  // namespace detail

inline std::string emit_report(const EvalReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::kTextTable: return detail::emit_text_table(report);
    case ReportFormat::kCsv: return detail::emit_csv(report);
  }
  throw std::invalid_argument("emit_report: unknown format");
}

// --- report (de)serialization -----------------------------------------------
//
// Layout (little endian), "JSRP" container version 1:
//   magic   4 bytes "JSRP"
//   version u32
//   seed, dataset_size, tie_count           u64 each
//   image count                             u64
//   image_ids u64[], ground_truth i32[], clean_top_labels i32[]
//   skip count u64, then per skip: image_id u64, reason string
//   chain count u32, then per chain:
//     label str, config str,
//     top_label_probs f64[], predicted i32[], correct u8[],
//     accuracy f64, mean f64, BoxStats (6 f64 + outlier u64)
//   crc32   u32 over everything before it
// Strings are u32 length + bytes.

inline std::vector<std::uint8_t> serialize_report(const EvalReport& report) {
  ByteWriter w;
  w.raw("JSRP", 4);
  w.u32(1);
  w.u64(report.seed);
  w.u64(report.dataset_size);
  w.u64(report.tie_count);
  const std::size_t n = report.image_ids.size();
  if (report.ground_truth.size() != n || report.clean_top_labels.size() != n)
    throw std::logic_error("serialize_report: per-image arrays disagree on length");
  w.u64(n);
  for (std::uint64_t id : report.image_ids) w.u64(id);
  for (std::int32_t v : report.ground_truth) w.u32(static_cast<std::uint32_t>(v));
  for (std::int32_t v : report.clean_top_labels) w.u32(static_cast<std::uint32_t>(v));
  w.u64(report.skips.size());
  for (const SkipRecord& s : report.skips) {
    w.u64(s.image_id);
    w.str(s.reason);
  }
  w.u32(static_cast<std::uint32_t>(report.chains.size()));
  for (const ChainResult& cr : report.chains) {
    if (cr.top_label_probs.size() != n || cr.predicted.size() != n || cr.correct.size() != n)
      throw std::logic_error("serialize_report: chain '" + cr.label + "' arrays disagree");
    w.str(cr.label);
    w.str(cr.config);
    for (double p : cr.top_label_probs) w.f64(p);
    for (std::int32_t v : cr.predicted) w.u32(static_cast<std::uint32_t>(v));
    for (std::uint8_t v : cr.correct) w.u8(v);
    w.f64(cr.accuracy);
    w.f64(cr.mean_top_label_prob);
    w.f64(cr.prob_stats.mean);
    w.f64(cr.prob_stats.median);
    w.f64(cr.prob_stats.q1);
    w.f64(cr.prob_stats.q3);
    w.f64(cr.prob_stats.whisker_low);
    w.f64(cr.prob_stats.whisker_high);
    w.u64(cr.prob_stats.outlier_count);
  }
  const std::uint32_t crc = crc32(w.bytes);
  w.u32(crc);
  return w.bytes;
}

inline EvalReport deserialize_report(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 12) {
    throw std::runtime_error("report: file too small (" + std::to_string(bytes.size()) +
                             " bytes)");
  }
  if (std::string(bytes.begin(), bytes.begin() + 4) != "JSRP")
    throw std::runtime_error("report: bad magic at offset 0 (want \"JSRP\")");
  const std::size_t body = bytes.size() - 4;
  const std::uint32_t stored = static_cast<std::uint32_t>(bytes[body]) |
                               (static_cast<std::uint32_t>(bytes[body + 1]) << 8) |
                               (static_cast<std::uint32_t>(bytes[body + 2]) << 16) |
                               (static_cast<std::uint32_t>(bytes[body + 3]) << 24);
  const std::uint32_t actual = crc32(bytes.data(), body);
  if (stored != actual)
    throw std::runtime_error("report: CRC mismatch at offset " + std::to_string(body));

  ByteReader r(bytes.data(), body);
  char magic[4];
  r.raw(magic, 4);
  const std::uint32_t version = r.u32();
  if (version != 1)
    throw std::runtime_error("report: unsupported version " + std::to_string(version));
  EvalReport report;
  report.seed = r.u64();
  report.dataset_size = r.u64();
  report.tie_count = r.u64();
  const std::uint64_t n = r.u64();
  report.image_ids.resize(n);
  for (auto& v : report.image_ids) v = r.u64();
  report.ground_truth.resize(n);
  for (auto& v : report.ground_truth) v = static_cast<std::int32_t>(r.u32());
  report.clean_top_labels.resize(n);
  for (auto& v : report.clean_top_labels) v = static_cast<std::int32_t>(r.u32());
  const std::uint64_t skip_count = r.u64();
  report.skips.resize(skip_count);
  for (auto& s : report.skips) {
    s.image_id = r.u64();
    s.reason = r.str();
  }
  const std::uint32_t chain_count = r.u32();
  report.chains.resize(chain_count);
  for (ChainResult& cr : report.chains) {
    cr.label = r.str();
    cr.config = r.str();
    cr.top_label_probs.resize(n);
    for (auto& v : cr.top_label_probs) v = r.f64();
    cr.predicted.resize(n);
    for (auto& v : cr.predicted) v = static_cast<std::int32_t>(r.u32());
    cr.correct.resize(n);
    for (auto& v : cr.correct) v = r.u8();
    const double accuracy = r.f64();
    const double mean = r.f64();
    BoxStats box;
    box.mean = r.f64();
    box.median = r.f64();
    box.q1 = r.f64();
    box.q3 = r.f64();
    box.whisker_low = r.f64();
    box.whisker_high = r.f64();
    box.outlier_count = r.u64();
    detail::finalize_chain(cr, static_cast<std::size_t>(n));
    if (cr.accuracy != accuracy || cr.mean_top_label_prob != mean ||
        cr.prob_stats.mean != box.mean || cr.prob_stats.median != box.median ||
        cr.prob_stats.q1 != box.q1 || cr.prob_stats.q3 != box.q3 ||
        cr.prob_stats.whisker_low != box.whisker_low ||
        cr.prob_stats.whisker_high != box.whisker_high ||
        cr.prob_stats.outlier_count != box.outlier_count) {
      throw std::runtime_error("report: stored aggregates for chain '" + cr.label +
                               "' do not match a recount from the per-image data");
    }
  }
  if (r.remaining() != 0)
    throw std::runtime_error("report: " + std::to_string(r.remaining()) +
                             " trailing bytes after the last chain");
  return report;
}

inline void save_report(const std::string& path, const EvalReport& report) {
  write_file_bytes(path, serialize_report(report));
}

inline EvalReport load_report(const std::string& path) {
  return deserialize_report(read_file_bytes(path));
}

}  // namespace jshield
