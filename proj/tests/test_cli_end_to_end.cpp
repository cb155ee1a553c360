// End-to-end tests that drive the installed CLI binary as a subprocess:
// train -> eval -> report on the bundled digits data, determinism across
// worker counts, and the failure modes (unknown command, missing model).

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "jshield/binio.hpp"
#include "jshield/config.hpp"
#include "jshield/image.hpp"

namespace fs = std::filesystem;

namespace {

std::string cli_path() { return JSHIELD_CLI_PATH; }
std::string digits_dir() { return std::string(JSHIELD_DATA_DIR) + "/digits"; }

fs::path make_temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("jshield_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& path) {
  const auto bytes = jshield::read_file_bytes(path.string());
  return std::string(bytes.begin(), bytes.end());
}

struct CliRun {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs `jshield <args>` through the shell, capturing both streams.
// `env_prefix` may hold variable assignments (e.g. "JSHIELD_OUT=/x").
CliRun run_cli(const std::string& args, const fs::path& scratch,
               const std::string& env_prefix = "") {
  const fs::path out_file = scratch / "stdout.txt";
  const fs::path err_file = scratch / "stderr.txt";
  std::string cmd = env_prefix.empty() ? "" : env_prefix + " ";
  cmd += "'" + cli_path() + "' " + args + " >'" + out_file.string() + "' 2>'" +
         err_file.string() + "'";
  const int status = std::system(cmd.c_str());
  CliRun r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_file(out_file);
  r.err = read_file(err_file);
  return r;
}

}  // namespace

TEST_CASE("train, eval and report round-trip through the real binary") {
  const fs::path dir = make_temp_dir("roundtrip");
  const std::string out = (dir / "run").string();

  const CliRun train = run_cli("train dataset='" + digits_dir() +
                                   "' limit=96 epochs=2 batch_size=16 seed=3 output_dir='" +
                                   out + "'",
                               dir);
  INFO(train.err);
  REQUIRE(train.exit_code == 0);
  CHECK(train.out.find("epoch 2/2") != std::string::npos);
  CHECK(fs::exists(fs::path(out) / "model.jshd"));
  CHECK(fs::exists(fs::path(out) / "resolved_train.cfg"));

  const CliRun eval = run_cli("eval dataset='" + digits_dir() + "' model='" + out +
                                  "/model.jshd' limit=24 epsilons=2,8 workers=2 output_dir='" +
                                  out + "'",
                              dir);
  INFO(eval.err);
  REQUIRE(eval.exit_code == 0);
  CHECK(eval.out.find("Transform") != std::string::npos);
  CHECK(eval.out.find("Top-1 Accuracy") != std::string::npos);
  REQUIRE(fs::exists(fs::path(out) / "report.jsrp"));
  REQUIRE(fs::exists(fs::path(out) / "report.txt"));
  REQUIRE(fs::exists(fs::path(out) / "report.csv"));

  const std::string txt_after_eval = read_file(fs::path(out) / "report.txt");
  const std::string csv_after_eval = read_file(fs::path(out) / "report.csv");
  CHECK(eval.out.find(txt_after_eval) != std::string::npos);  // table echoed to stdout

  SECTION("report re-renders the eval artifacts byte-for-byte") {
    const CliRun report = run_cli("report output_dir='" + out + "'", dir);
    INFO(report.err);
    REQUIRE(report.exit_code == 0);
    CHECK(read_file(fs::path(out) / "report.txt") == txt_after_eval);
    CHECK(read_file(fs::path(out) / "report.csv") == csv_after_eval);
    CHECK(report.out.find(txt_after_eval) != std::string::npos);
  }

  SECTION("the resolved eval snapshot reproduces the run's configuration") {
    const fs::path snap = fs::path(out) / "resolved_eval.cfg";
    REQUIRE(fs::exists(snap));
    const jshield::RunConfig cfg = jshield::parse_config_file(snap.string());
    CHECK(cfg.dataset_path == digits_dir());
    CHECK(cfg.model_path == out + "/model.jshd");
    CHECK(cfg.limit == 24);
    CHECK(cfg.epsilons == std::vector<int>{2, 8});
    CHECK(cfg.workers == 2);
    CHECK(cfg.output_dir == out);
    // The snapshot is a fixed point: rendering what it parses to gives
    // the identical file back.
    CHECK(jshield::render_config(cfg) == read_file(snap));
  }
}

TEST_CASE("identical config and seed give byte-identical outputs at any worker count") {
  const fs::path dir = make_temp_dir("determinism");
  const std::string train_out = (dir / "model").string();
  REQUIRE(run_cli("train dataset='" + digits_dir() +
                      "' limit=96 epochs=2 batch_size=16 seed=3 output_dir='" + train_out + "'",
                  dir)
              .exit_code == 0);
  const std::string model = train_out + "/model.jshd";

  const std::string base_args = "eval dataset='" + digits_dir() + "' model='" + model +
                                "' limit=24 epsilons=2,8 seed=7 output_dir=";
  std::vector<std::string> runs;
  for (const char* workers : {"1", "3", "0"}) {
    const std::string out = (dir / ("run_w" + std::string(workers))).string();
    const CliRun r = run_cli(base_args + "'" + out + "' workers=" + workers, dir);
    INFO(r.err);
    REQUIRE(r.exit_code == 0);
    runs.push_back(out);
  }
  const std::string csv = read_file(fs::path(runs[0]) / "report.csv");
  const std::string jsrp = read_file(fs::path(runs[0]) / "report.jsrp");
  CHECK(csv.find("\r\n") != std::string::npos);
  for (std::size_t i = 1; i < runs.size(); ++i) {
    CHECK(read_file(fs::path(runs[i]) / "report.csv") == csv);
    CHECK(read_file(fs::path(runs[i]) / "report.jsrp") == jsrp);
  }
}

TEST_CASE("attack writes one adversarial image per input and epsilon") {
  const fs::path dir = make_temp_dir("attack");
  const std::string out = (dir / "run").string();
  REQUIRE(run_cli("train dataset='" + digits_dir() +
                      "' limit=64 epochs=1 batch_size=16 seed=1 output_dir='" + out + "'",
                  dir)
              .exit_code == 0);

  const CliRun attack = run_cli("attack dataset='" + digits_dir() + "' model='" + out +
                                    "/model.jshd' limit=3 epsilons=4,9 output_dir='" + out + "'",
                                dir);
  INFO(attack.err);
  REQUIRE(attack.exit_code == 0);
  for (int id = 0; id < 3; ++id) {
    for (int eps : {4, 9}) {
      const fs::path img_path = fs::path(out) / "adv" /
                                ("adv_" + std::to_string(id) + "_eps" + std::to_string(eps) +
                                 ".pgm");
      REQUIRE(fs::exists(img_path));
      const jshield::Image img = jshield::read_pnm(img_path.string());
      CHECK(img.width == 28);
      CHECK(img.height == 28);
      CHECK(img.channels == 1);
    }
  }
}

TEST_CASE("codec-selftest passes against the pinned fixtures") {
  const fs::path dir = make_temp_dir("selftest");
  const std::string fixtures = std::string(JSHIELD_FIXTURES_DIR) + "/images";
  const CliRun r = run_cli("codec-selftest dataset='" + fixtures + "' output_dir='" +
                               (dir / "out").string() + "'",
                           dir);
  INFO(r.out);
  INFO(r.err);
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("[FAIL]") == std::string::npos);
  // One [PASS] line per invariant.
  std::size_t passes = 0;
  for (std::size_t pos = r.out.find("[PASS]"); pos != std::string::npos;
       pos = r.out.find("[PASS]", pos + 1)) {
    ++passes;
  }
  CHECK(passes == 5);
}

TEST_CASE("config file plus flag overrides reach the command") {
  const fs::path dir = make_temp_dir("config_file");
  const std::string out = (dir / "run").string();
  jshield::write_file_text((dir / "exp.cfg").string(),
                           "# experiment\n"
                           "dataset = " + digits_dir() + "\n"
                           "quality = 40\n"
                           "seed = 11\n");
  const CliRun train = run_cli("train --config '" + (dir / "exp.cfg").string() +
                                   "' quality=90 limit=32 epochs=1 output_dir='" + out + "'",
                               dir);
  INFO(train.err);
  REQUIRE(train.exit_code == 0);
  const jshield::RunConfig cfg =
      jshield::parse_config_file((fs::path(out) / "resolved_train.cfg").string());
  CHECK(cfg.quality == 90);  // flag beats file
  CHECK(cfg.seed == 11);     // file beats default
  CHECK(cfg.limit == 32);
}

TEST_CASE("the output directory falls back to the environment variable") {
  const fs::path dir = make_temp_dir("env_out");
  const std::string out = (dir / "from_env").string();
  const CliRun r = run_cli("train dataset='" + digits_dir() + "' limit=32 epochs=1", dir,
                           "JSHIELD_OUT='" + out + "'");
  INFO(r.err);
  REQUIRE(r.exit_code == 0);
  CHECK(fs::exists(fs::path(out) / "model.jshd"));
  CHECK(fs::exists(fs::path(out) / "resolved_train.cfg"));
}

TEST_CASE("failure modes exit nonzero with a one-line cause") {
  const fs::path dir = make_temp_dir("failures");

  SECTION("unknown command prints usage") {
    const CliRun r = run_cli("frobnicate", dir);
    CHECK(r.exit_code != 0);
    CHECK(r.err.find("unknown command 'frobnicate'") != std::string::npos);
    CHECK(r.err.find("usage: jshield") != std::string::npos);
  }

  SECTION("missing model path is named in the error") {
    const std::string missing = (dir / "nope" / "model.jshd").string();
    const CliRun r = run_cli("eval dataset='" + digits_dir() + "' limit=4 model='" + missing +
                                 "' output_dir='" + (dir / "out").string() + "'",
                             dir);
    CHECK(r.exit_code != 0);
    CHECK(r.err.find(missing) != std::string::npos);
  }

  SECTION("eval without a model is rejected") {
    const CliRun r = run_cli("eval dataset='" + digits_dir() + "' limit=4 output_dir='" +
                                 (dir / "out2").string() + "'",
                             dir);
    CHECK(r.exit_code != 0);
    CHECK(r.err.find("no model configured") != std::string::npos);
  }

  SECTION("bad config key is rejected before any work happens") {
    const CliRun r = run_cli("eval qualty=75", dir);
    CHECK(r.exit_code != 0);
    CHECK(r.err.find("unknown key 'qualty'") != std::string::npos);
  }

  SECTION("help exits zero and prints usage") {
    const CliRun r = run_cli("--help", dir);
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("usage: jshield") != std::string::npos);
  }
}
