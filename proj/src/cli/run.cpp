#include <iostream>

#include <CLI11.hpp>

#include "pbd/cli/cli.hpp"
#include "pbd/error.hpp"

namespace pbd::cli {

namespace {

struct CommonFlags {
  std::string config;
  Overrides overrides;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "JSON experiment config");
  cmd->add_option_function<std::string>("--domain", [&f](const std::string& v) { f.overrides.domain = v; }, "Domain name");
  cmd->add_option_function<std::size_t>("--n", [&f](std::size_t v) { f.overrides.n = v; }, "Dataset size");
  cmd->add_option_function<std::uint64_t>("--seed", [&f](std::uint64_t v) { f.overrides.seed = v; },
                                          "Seed for data, folds and initialization");
  cmd->add_option_function<std::size_t>("--threads", [&f](std::size_t v) { f.overrides.threads = v; },
                                        "Worker threads");
}

void add_experiment(CLI::App* cmd, CommonFlags& f) {
  add_common(cmd, f);
  cmd->add_option_function<std::size_t>("--k", [&f](std::size_t v) { f.overrides.k = v; }, "Number of folds");
  cmd->add_option_function<std::size_t>("--epochs", [&f](std::size_t v) { f.overrides.epochs = v; }, "Training epochs");
  cmd->add_option("--alpha", f.overrides.alphas, "Variational KL weights (replaces the configured list)");
  cmd->add_option_function<std::string>("--out", [&f](const std::string& v) { f.overrides.out = v; },
                                        "Output directory");
}

eval::ExperimentConfig resolve(const CommonFlags& f) {
  eval::ExperimentConfig c = f.config.empty() ? eval::ExperimentConfig{} : load_config(f.config);
  apply(c, f.overrides);
  return c;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Reverse-mapping surrogates for agent-based models"};
  app.require_subcommand(1);

  CommonFlags gen_flags;
  std::string gen_out = "dataset.csv";
  auto* gen = app.add_subcommand("generate", "Simulate a dataset and write it as CSV");
  add_common(gen, gen_flags);
  gen->add_option("--out", gen_out, "CSV path");

  CommonFlags train_flags;
  bool force = false;
  auto* train = app.add_subcommand("train", "Train every network of every fold");
  add_experiment(train, train_flags);
  train->add_flag("--force", force, "Retrain folds that already have models");

  CommonFlags eval_flags;
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate trained models and write the report");
  add_experiment(evaluate, eval_flags);

  CommonFlags sweep_flags;
  auto* sweep = app.add_subcommand("sweep", "Dataset-size sweep");
  add_experiment(sweep, sweep_flags);
  sweep->add_option("--sizes", sweep_flags.overrides.sizes, "Dataset sizes, ascending");

  std::string model;
  std::vector<double> slp;
  std::optional<std::size_t> k;
  std::uint64_t suggest_seed = 0;
  auto* sug = app.add_subcommand("suggest", "Suggest ALPs for an SLP query");
  sug->add_option("--model", model, "Reverse model JSON")->required();
  sug->add_option("--slp", slp, "SLP values in raw units")->required()->delimiter(',');
  sug->add_option_function<std::size_t>("--k", [&k](std::size_t v) { k = v; }, "Number of sampled suggestions");
  sug->add_option("--seed", suggest_seed, "Sampling seed");

  double tolerance = 1e-4;
  auto* grad = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  grad->add_option("--tolerance", tolerance, "Maximum relative error");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen) {
      const auto c = resolve(gen_flags);
      cmd_generate(c, gen_out, std::cout);
    } else if (*train) {
      const auto summary = cmd_train(resolve(train_flags), force, std::cout);
      if (!summary.failures.empty()) {
        for (const auto& f : summary.failures) std::cerr << "error: " << f << "\n";
        return kTrainingFailure;
      }
    } else if (*evaluate) {
      cmd_evaluate(resolve(eval_flags), std::cout);
    } else if (*sweep) {
      cmd_sweep(resolve(sweep_flags), std::cout);
    } else if (*sug) {
      cmd_suggest(model, slp, k, suggest_seed, std::cout);
    } else if (*grad) {
      return cmd_gradcheck(tolerance, std::cout) ? kOk : kFailure;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kOk;
}

}  // namespace pbd::cli
