// jshield command-line tool: train a small CNN, craft FGSM adversarial
// images, measure what JPEG compression does to them, and render reports.
//
// Exit codes: 0 success, 1 runtime failure (missing input, skip budget
// exceeded, failed check), 2 usage or configuration error.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "jshield/adversarial.hpp"
#include "jshield/config.hpp"
#include "jshield/dataset.hpp"
#include "jshield/model.hpp"
#include "jshield/pipeline.hpp"
#include "jshield/selftest.hpp"

namespace fs = std::filesystem;
using namespace jshield;

namespace {

const char kUsage[] =
    "usage: jshield <command> [--config FILE] [key=value ...]\n"
    "\n"
    "commands:\n"
    "  train           train a model on the train split and save its weights\n"
    "  attack          write FGSM adversarial images for a trained model\n"
    "  eval            run transform chains over a dataset and write reports\n"
    "  report          re-render reports from a saved evaluation\n"
    "  codec-selftest  run the JPEG codec invariant checks\n"
    "\n"
    "options:\n"
    "  --config FILE   read 'key = value' lines ('#' comments) before overrides\n"
    "  key=value       override one config key (repeatable, later wins)\n"
    "  -h, --help      show this message\n"
    "\n"
    "keys: dataset, dataset_format (mnist-idx|cifar10-bin|ppm-dir), split\n"
    "      (train|validation|test), model, epsilons, quality, chains, seed,\n"
    "      output_dir, workers, limit, epochs, batch_size, learning_rate,\n"
    "      momentum, arch (mnist|cifar10), resize_min_dim, crop_size\n"
    "\n"
    "The output directory is output_dir if set, else $JSHIELD_OUT, else 'out'.\n"
    "Every command writes its fully-resolved configuration to\n"
    "<output_dir>/resolved_<command>.cfg so a run can be reproduced exactly.\n";

std::string resolve_output_dir(const RunConfig& cfg) {
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  if (const char* env = std::getenv("JSHIELD_OUT"); env != nullptr && *env != '\0') return env;
  return "out";
}

Dataset load_configured_dataset(const RunConfig& cfg, const char* command) {
  if (cfg.dataset_path.empty()) {
    throw std::invalid_argument(std::string(command) +
                                ": no dataset configured (set dataset=PATH)");
  }
  Dataset data = load_dataset(cfg.dataset_path, cfg.dataset_format, cfg.split);
  if (cfg.limit > 0) data = dataset_head(data, cfg.limit);
  std::printf("loaded %zu %s images from %s\n", data.size(), split_name(cfg.split),
              cfg.dataset_path.c_str());
  return data;
}

ModelWeights load_configured_model(const RunConfig& cfg, const char* command) {
  if (cfg.model_path.empty()) {
    throw std::invalid_argument(std::string(command) +
                                ": no model configured (set model=PATH)");
  }
  return load_weights(cfg.model_path);
}

ArchitectureSpec configured_arch(const RunConfig& cfg) {
  return cfg.arch == "cifar10" ? cifar10_arch() : mnist_arch();
}

PreprocessConfig configured_preprocess(const RunConfig& cfg) {
  PreprocessConfig pp;
  pp.resize_min_dim = cfg.resize_min_dim;
  pp.crop_size = cfg.crop_size;
  return pp;
}

int cmd_train(const RunConfig& cfg, const fs::path& out_dir) {
  const Dataset data = load_configured_dataset(cfg, "train");

  TrainConfig tc;
  tc.epochs = cfg.epochs;
  tc.batch_size = cfg.batch_size;
  tc.learning_rate = cfg.learning_rate;
  tc.momentum = cfg.momentum;
  tc.seed = cfg.seed;

  const TrainResult result = train(configured_arch(cfg), data, tc);
  for (std::size_t e = 0; e < result.epoch_losses.size(); ++e) {
    std::printf("epoch %zu/%d  mean loss %.6f\n", e + 1, cfg.epochs, result.epoch_losses[e]);
  }

  save_weights(result.weights, cfg.model_path);
  std::printf("saved weights to %s\n", cfg.model_path.c_str());
  (void)out_dir;
  return 0;
}

int cmd_attack(const RunConfig& cfg, const fs::path& out_dir) {
  const Dataset data = load_configured_dataset(cfg, "attack");
  const ModelWeights weights = load_configured_model(cfg, "attack");
  const PreprocessConfig pp = configured_preprocess(cfg);
  validate_preprocess_config(pp);

  std::vector<int> eps = cfg.epsilons;
  std::sort(eps.begin(), eps.end());
  eps.erase(std::unique(eps.begin(), eps.end()), eps.end());

  const fs::path adv_dir = out_dir / "adv";
  fs::create_directories(adv_dir);

  std::size_t written = 0;
  std::vector<SkipRecord> skips;
  for (std::size_t i = 0; i < data.size(); ++i) {
    try {
      const Image geom = preprocess_geometry(data.images[i], pp);
      for (int e : eps) {
        AttackSpec spec;
        spec.epsilon = e;
        const Image adv = fgsm(weights, geom, spec);
        const char* ext = adv.channels == 3 ? ".ppm" : ".pgm";
        const fs::path path = adv_dir / ("adv_" + std::to_string(data.ids[i]) + "_eps" +
                                         std::to_string(e) + ext);
        write_pnm(path.string(), adv);
        ++written;
      }
    } catch (const std::exception& ex) {
      skips.push_back({data.ids[i], ex.what()});
      std::fprintf(stderr, "skipped image %llu: %s\n",
                   static_cast<unsigned long long>(data.ids[i]), ex.what());
    }
  }
  std::printf("wrote %zu adversarial images (%zu inputs x %zu epsilons) to %s\n", written,
              data.size() - skips.size(), eps.size(), adv_dir.string().c_str());

  const double budget = 0.01 * static_cast<double>(data.size());
  if (static_cast<double>(skips.size()) > budget) {
    throw std::runtime_error("attack: " + std::to_string(skips.size()) + " of " +
                             std::to_string(data.size()) +
                             " images skipped, over the 1% budget; first skip: image " +
                             std::to_string(skips.front().image_id) + ": " +
                             skips.front().reason);
  }
  return 0;
}

int cmd_eval(const RunConfig& cfg, const fs::path& out_dir) {
  const Dataset data = load_configured_dataset(cfg, "eval");
  const ModelWeights weights = load_configured_model(cfg, "eval");
  const std::vector<TransformChain> chains = resolve_chains(cfg);

  EvalConfig ec;
  ec.preprocess = configured_preprocess(cfg);
  ec.seed = cfg.seed;
  ec.workers = cfg.workers;

  const EvalReport report = evaluate(weights, data, chains, ec);
  for (const SkipRecord& s : report.skips) {
    std::fprintf(stderr, "skipped image %llu: %s\n",
                 static_cast<unsigned long long>(s.image_id), s.reason.c_str());
  }

  save_report((out_dir / "report.jsrp").string(), report);
  write_file_text((out_dir / "report.txt").string(),
                  emit_report(report, ReportFormat::kTextTable));
  write_file_text((out_dir / "report.csv").string(), emit_report(report, ReportFormat::kCsv));

  std::fputs(emit_report(report, ReportFormat::kTextTable).c_str(), stdout);
  std::printf("wrote report.jsrp, report.txt, report.csv to %s\n", out_dir.string().c_str());
  return 0;
}

int cmd_report(const RunConfig& cfg, const fs::path& out_dir) {
  (void)cfg;
  const EvalReport report = load_report((out_dir / "report.jsrp").string());
  write_file_text((out_dir / "report.txt").string(),
                  emit_report(report, ReportFormat::kTextTable));
  write_file_text((out_dir / "report.csv").string(), emit_report(report, ReportFormat::kCsv));
  std::fputs(emit_report(report, ReportFormat::kTextTable).c_str(), stdout);
  std::printf("re-rendered report.txt and report.csv in %s\n", out_dir.string().c_str());
  return 0;
}

int cmd_codec_selftest(const RunConfig& cfg, const fs::path& out_dir) {
  (void)out_dir;
  const std::string images_dir =
      cfg.dataset_path.empty() ? std::string("fixtures/images") : cfg.dataset_path;
  bool all_passed = true;
  for (const SelfTestResult& r : run_codec_selftests(images_dir)) {
    std::printf("[%s] %s: %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                r.detail.c_str());
    all_passed = all_passed && r.passed;
  }
  if (!all_passed) throw std::runtime_error("codec-selftest: at least one check failed");
  std::printf("all codec self-tests passed\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fputs(kUsage, stderr);
    return 2;
  }
  const std::string command = argv[1];
  if (command == "-h" || command == "--help") {
    std::fputs(kUsage, stdout);
    return 0;
  }
  const bool known = command == "train" || command == "attack" || command == "eval" ||
                     command == "report" || command == "codec-selftest";
  if (!known) {
    std::fprintf(stderr, "error: unknown command '%s'\n\n", command.c_str());
    std::fputs(kUsage, stderr);
    return 2;
  }

  std::string config_path;
  std::vector<std::string> overrides;
  for (int i = 2; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "-h" || arg == "--help") {
      std::fputs(kUsage, stdout);
      return 0;
    }
    if (arg == "--config") {
      if (i + 1 >= argc) {
        std::fprintf(stderr, "error: --config needs a file path\n");
        return 2;
      }
      config_path = argv[++i];
    } else if (arg.rfind("--config=", 0) == 0) {
      config_path = arg.substr(9);
    } else if (!arg.empty() && arg[0] == '-') {
      std::fprintf(stderr, "error: unknown option '%s'\n\n", arg.c_str());
      std::fputs(kUsage, stderr);
      return 2;
    } else if (arg.find('=') != std::string::npos) {
      overrides.push_back(arg);
    } else {
      std::fprintf(stderr, "error: unexpected argument '%s' (want key=value)\n", arg.c_str());
      return 2;
    }
  }

  RunConfig cfg;
  try {
    cfg = parse_config(config_path, overrides);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }

  try {
    // Resolve everything the command will rely on into the config itself,
    // so the snapshot alone reproduces the run.
    cfg.output_dir = resolve_output_dir(cfg);
    const fs::path out_dir = cfg.output_dir;
    if (command == "train") {
      cfg.split = Split::kTrain;  // training always reads the train split
      if (cfg.model_path.empty()) cfg.model_path = (out_dir / "model.jshd").string();
    }
    fs::create_directories(out_dir);
    write_file_text((out_dir / ("resolved_" + command + ".cfg")).string(),
                    render_config(cfg));

    if (command == "train") return cmd_train(cfg, out_dir);
    if (command == "attack") return cmd_attack(cfg, out_dir);
    if (command == "eval") return cmd_eval(cfg, out_dir);
    if (command == "report") return cmd_report(cfg, out_dir);
    return cmd_codec_selftest(cfg, out_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
