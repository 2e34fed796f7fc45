#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "pbd/cli/cli.hpp"
#include "pbd/error.hpp"
#include "pbd/surrogate/surrogate.hpp"

using namespace pbd;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

// Runs the pbd executable inside `dir`, capturing stdout.
Result pbd_run(const fs::path& dir, const std::string& args) {
  const std::string cmd = "cd '" + dir.string() + "' && '" PBD_CLI_PATH "' " + args + " 2>/dev/null";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf;
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path fresh_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / "pbd_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t lines(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

}  // namespace

TEST_CASE("config: defaults and strict parsing") {
  const auto c = cli::config_from_json({{"domain", "brouwer"}});
  CHECK(c.n == 10000);
  CHECK(c.k == 10);
  CHECK(c.training.fm.epochs == 1000);
  CHECK(c.training.rm_var.seed == 0);
  CHECK(c.alphas == std::vector<double>{0.5, 0.0001, 0.0});
  CHECK(c.instances_per_fold == 10);

  const auto d = cli::config_from_json(
      {{"domain", "fk_a"}, {"training", {{"epochs", 5}, {"rm", {{"epochs", 7}}}}}, {"dataset", {{"n", 50}}}});
  CHECK(d.training.fm.epochs == 5);
  CHECK(d.training.rm.epochs == 7);
  CHECK(d.n == 50);
  const auto back = cli::config_from_json(cli::to_json(d));
  CHECK(cli::to_json(back) == cli::to_json(d));

  CHECK_THROWS_AS(cli::config_from_json({{"domian", "brouwer"}}), ConfigError);
  CHECK_THROWS_AS(cli::config_from_json({{"training", {{"epoch", 3}}}}), ConfigError);

  auto e = c;
  cli::Overrides flags;
  flags.epochs = 3;
  flags.seed = 9;
  flags.alphas = {0.0};
  cli::apply(e, flags);
  CHECK(e.training.rm_fm.epochs == 3);
  CHECK(e.training.rm.seed == 9);
  CHECK(e.data_seed == 9);
  CHECK(e.alphas == std::vector<double>{0.0});
}

TEST_CASE("model file names") {
  CHECK(cli::model_file("fm") == "fm.json");
  CHECK(cli::trace_file("rm_fm") == "rm_fm.loss.csv");
  CHECK(cli::model_file("rm_fm_var(1e-04)") == "rm_var_1e-04.json");
  CHECK(cli::fold_dir("out", 3) == fs::path("out") / "fold_03");
}

TEST_CASE("generate: rows, determinism, errors") {
  const auto dir = fresh_dir("generate");
  auto r = pbd_run(dir, "generate --domain brouwer --n 100 --seed 0 --out d.csv");
  CHECK(r.code == 0);
  const auto first = slurp(dir / "d.csv");
  CHECK(lines(first) == 101);
  CHECK(fs::exists(dir / "d.csv.meta.json"));
  CHECK(pbd_run(dir, "generate --domain brouwer --n 100 --seed 0 --out d.csv").code == 0);
  CHECK(slurp(dir / "d.csv") == first);

  CHECK(pbd_run(dir, "generate --domain turbulence --n 5").code == 2);
  CHECK(pbd_run(dir, "generate --domain brouwer --n 5 --out /proc/none/d.csv").code == 5);
  CHECK(pbd_run(dir, "frobnicate").code == 2);
}

TEST_CASE("train, evaluate, suggest") {
  const auto dir = fresh_dir("pipeline");
  const std::string common = "--domain brouwer --n 100 --epochs 3 --alpha 0.0 --out run";
  REQUIRE(pbd_run(dir, "train " + common).code == 0);
  for (std::size_t f = 0; f < 10; ++f) {
    const auto fd = cli::fold_dir(dir / "run", f);
    for (const char* label : {"fm", "rm", "rm_fm", "rm_fm_var(0)"}) {
      CHECK(fs::exists(fd / cli::model_file(label)));
      CHECK(fs::exists(fd / cli::trace_file(label)));
    }
    for (const auto& rec : surrogate::read_trace_csv(fd / cli::trace_file("rm_fm_var(0)"))) {
      CHECK(rec.total == rec.reconstruction);
    }
  }
  CHECK(fs::exists(dir / "run" / "config.json"));
  CHECK_FALSE(fs::exists(dir / "run" / ".pbd.lock"));

  const auto again = pbd_run(dir, "train " + common);
  CHECK(again.code == 0);
  CHECK(again.out.find("up to date") != std::string::npos);

  REQUIRE(pbd_run(dir, "evaluate " + common).code == 0);
  const auto report = slurp(dir / "run" / "report" / "report.json");
  CHECK(pbd_run(dir, "evaluate " + common).code == 0);
  CHECK(slurp(dir / "run" / "report" / "report.json") == report);
  const auto doc = nlohmann::json::parse(report);
  CHECK(doc["reference"]["civil_violence_median_log_od"]["amf_plus"] == -4.6212);

  const std::string rm = (cli::fold_dir("run", 0) / "rm_fm.json").string();
  const std::string var = (cli::fold_dir("run", 0) / cli::model_file("rm_fm_var(0)")).string();
  auto one = pbd_run(dir, "suggest --model " + rm + " --slp 0.4");
  CHECK(one.code == 0);
  CHECK(lines(one.out) == 1);
  CHECK(pbd_run(dir, "suggest --model " + rm + " --slp 0.4 --k 3").code == 2);
  CHECK(pbd_run(dir, "suggest --model " + rm + " --slp 0.4,0.2").code == 2);
  auto many = pbd_run(dir, "suggest --model " + var + " --slp 0.4 --k 100 --seed 4");
  CHECK(many.code == 0);
  CHECK(lines(many.out) == 100);
  CHECK(pbd_run(dir, "suggest --model " + var + " --slp 0.4 --k 100 --seed 4").out == many.out);
  CHECK(pbd_run(dir, "suggest --model missing.json --slp 0.4").code == 4);
}

TEST_CASE("train: zero epochs keep the initialization") {
  const auto dir = fresh_dir("zero");
  REQUIRE(pbd_run(dir, "train --domain fk_a --n 50 --epochs 0 --alpha 0.5 --out run").code == 0);
  const auto fm = surrogate::fm_from_json(surrogate::load_json(cli::fold_dir(dir / "run", 0) / "fm.json"));
  auto init = nn::init_parameters(surrogate::build_fm(1, 2), 0);
  init.frozen = true;
  CHECK(fm.net.params == init);
  const auto rm = surrogate::rm_from_json(surrogate::load_json(cli::fold_dir(dir / "run", 0) / "rm.json"));
  CHECK(rm.net.params == nn::init_parameters(surrogate::build_rm(1, 2, false), 0));
}

TEST_CASE("evaluate: missing models and locks") {
  const auto dir = fresh_dir("missing");
  CHECK(pbd_run(dir, "evaluate --domain brouwer --n 100 --out empty").code == 4);

  fs::create_directories(dir / "locked");
  std::ofstream(dir / "locked" / ".pbd.lock") << "held";
  CHECK(pbd_run(dir, "train --domain brouwer --n 100 --epochs 1 --out locked").code == 5);
}

TEST_CASE("config files: flags win, unknown keys are usage errors") {
  const auto dir = fresh_dir("config");
  std::ofstream(dir / "c.json") << R"({"domain": "brouwer", "dataset": {"n": 30}})";
  CHECK(pbd_run(dir, "generate --config c.json --n 12 --out d.csv").code == 0);
  CHECK(lines(slurp(dir / "d.csv")) == 13);
  std::ofstream(dir / "bad.json") << R"({"domain": "brouwer", "colour": 1})";
  CHECK(pbd_run(dir, "generate --config bad.json").code == 2);
  std::ofstream(dir / "broken.json") << "{";
  CHECK(pbd_run(dir, "generate --config broken.json").code == 2);
}

TEST_CASE("gradcheck command") {
  const auto r = pbd_run(fs::temp_directory_path(), "gradcheck");
  CHECK(r.code == 0);
  CHECK(lines(r.out) >= 16);
}
