#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pbd/eval/eval.hpp"

namespace pbd::cli {

/// Exit codes shared by every command.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kTrainingFailure = 3,
  kMissingArtifact = 4,
  kIo = 5,
};

/// Parses an experiment config document. Unknown keys raise ConfigError.
///
///   {"domain": "...", "overrides": {...},
///    "dataset": {"n", "seed"}, "folds": {"k", "seed", "run": [...]},
///    "training": {"epochs", "batch_size", "learning_rate", "beta1", "beta2",
///                 "epsilon", "seed", "fm": {...}, "rm": {...}, "rm_fm": {...}, "rm_var": {...}},
///    "alphas": [...], "evaluation": {"instances_per_fold", "sim_seed", "sweep_sizes"},
///    "output_dir": "...", "threads": 0}
///
/// Per-kind training blocks override the shared training keys.
eval::ExperimentConfig config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const eval::ExperimentConfig& config);
eval::ExperimentConfig load_config(const std::filesystem::path& path);

/// Flags that override config keys; unset fields leave the config alone.
struct Overrides {
  std::optional<std::string> domain;
  std::optional<std::size_t> n;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> k;
  std::optional<std::size_t> epochs;
  std::vector<double> alphas;
  std::optional<std::string> out;
  std::vector<std::size_t> sizes;
  std::optional<std::size_t> threads;
};
void apply(eval::ExperimentConfig& config, const Overrides& flags);

/// Exclusive ownership of an output directory for the lifetime of the object.
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& dir);
  ~DirectoryLock();
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  std::filesystem::path path_;
};

/// Model file layout under the output directory.
std::filesystem::path fold_dir(const std::filesystem::path& out, std::size_t fold);
std::string model_file(const std::string& label);
std::string trace_file(const std::string& label);

struct TrainSummary {
  std::size_t trained = 0;
  std::size_t skipped = 0;
  std::vector<std::string> failures;
};

std::size_t cmd_generate(const eval::ExperimentConfig& config, const std::filesystem::path& csv, std::ostream& log);
TrainSummary cmd_train(const eval::ExperimentConfig& config, bool force, std::ostream& log);
eval::EvalReport cmd_evaluate(const eval::ExperimentConfig& config, std::ostream& log);
std::vector<eval::SweepPoint> cmd_sweep(const eval::ExperimentConfig& config, std::ostream& log);
void cmd_suggest(const std::filesystem::path& model, const std::vector<double>& slp_raw, std::optional<std::size_t> k,
                 std::uint64_t seed, std::ostream& out);
/// Returns true when every case is below the tolerance.
bool cmd_gradcheck(double tolerance, std::ostream& out);

/// Maps library errors to exit codes.
int exit_code_for(const std::exception& e);

/// Entry point behind the `pbd` executable.
int run(int argc, char** argv);

}  // namespace pbd::cli
