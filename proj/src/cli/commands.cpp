#include <cstdio>
#include <ostream>

#include "pbd/cli/cli.hpp"
#include "pbd/error.hpp"
#include "pbd/util.hpp"

namespace pbd::cli {

namespace fs = std::filesystem;

DirectoryLock::DirectoryLock(const fs::path& dir) : path_(dir / ".pbd.lock") {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::FILE* f = std::fopen(path_.c_str(), "wx");
  if (!f) throw IoError(dir.string() + " is in use by another command (remove " + path_.string() + " if stale)");
  std::fclose(f);
}

DirectoryLock::~DirectoryLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

fs::path fold_dir(const fs::path& out, std::size_t fold) {
  char name[32];
  std::snprintf(name, sizeof name, "fold_%02zu", fold);
  return out / name;
}

namespace {

std::string file_stem(const std::string& label) {
  const std::string prefix = "rm_fm_var(";
  if (label.rfind(prefix, 0) == 0 && label.back() == ')') {
    return "rm_var_" + label.substr(prefix.size(), label.size() - prefix.size() - 1);
  }
  return label;
}

std::vector<std::string> network_labels(const eval::ExperimentConfig& config) {
  std::vector<std::string> labels{"fm", "rm", "rm_fm"};
  for (double a : config.alphas) labels.push_back(eval::variational_label(a));
  return labels;
}

bool fold_complete(const fs::path& dir, const eval::ExperimentConfig& config) {
  for (const auto& label : network_labels(config)) {
    if (!fs::exists(dir / model_file(label)) || !fs::exists(dir / trace_file(label))) return false;
  }
  return true;
}

void save_fold(const fs::path& dir, const eval::FoldModels& m, const eval::ExperimentConfig& config) {
  fs::create_directories(dir);
  surrogate::save_json(surrogate::to_json(m.fm), dir / model_file("fm"));
  surrogate::save_json(surrogate::to_json(m.rm), dir / model_file("rm"));
  surrogate::save_json(surrogate::to_json(m.rm_fm), dir / model_file("rm_fm"));
  for (std::size_t a = 0; a < config.alphas.size(); ++a) {
    surrogate::save_json(surrogate::to_json(m.rm_var[a]), dir / model_file(eval::variational_label(config.alphas[a])));
  }
  for (const auto& [label, trace] : m.traces) surrogate::write_trace_csv(trace, dir / trace_file(label));
}

eval::FoldModels load_fold(const fs::path& dir, const eval::ExperimentConfig& config) {
  eval::FoldModels m;
  m.fm = surrogate::fm_from_json(surrogate::load_json(dir / model_file("fm")));
  m.rm = surrogate::rm_from_json(surrogate::load_json(dir / model_file("rm")));
  m.rm_fm = surrogate::rm_from_json(surrogate::load_json(dir / model_file("rm_fm")));
  for (double a : config.alphas) {
    m.rm_var.push_back(surrogate::rm_from_json(surrogate::load_json(dir / model_file(eval::variational_label(a)))));
  }
  for (const auto& label : network_labels(config)) m.traces[label] = surrogate::read_trace_csv(dir / trace_file(label));
  m.fm_hash_trained = m.rm_fm.fm_hash.value_or(0);
  return m;
}

std::unique_ptr<domains::Domain> domain_for(const eval::ExperimentConfig& config) {
  if (config.domain.empty()) throw UsageError("no domain given (set \"domain\" or pass --domain)");
  return domains::make_domain(config.domain, config.overrides);
}

}  // namespace

std::string model_file(const std::string& label) { return file_stem(label) + ".json"; }
std::string trace_file(const std::string& label) { return file_stem(label) + ".loss.csv"; }

std::size_t cmd_generate(const eval::ExperimentConfig& config, const fs::path& csv, std::ostream& log) {
  const auto domain = domain_for(config);
  const std::size_t threads = config.threads > 0 ? config.threads : default_thread_count();
  const data::Dataset ds = data::generate(*domain, config.n, config.data_seed, threads);
  if (csv.has_parent_path()) fs::create_directories(csv.parent_path());
  data::write_csv(ds, csv);
  surrogate::save_json(data::metadata(ds, {{"overrides", config.overrides}}), fs::path(csv.string() + ".meta.json"));
  log << "wrote " << csv.string() << " (" << ds.size() << " rows)\n";
  return ds.size();
}

TrainSummary cmd_train(const eval::ExperimentConfig& config, bool force, std::ostream& log) {
  const auto domain = domain_for(config);
  DirectoryLock lock(config.output_dir);
  surrogate::save_json(to_json(config), config.output_dir / "config.json");
  const auto folds = eval::prepare_folds(*domain, config);
  TrainSummary summary;
  for (const auto& fold : folds) {
    const fs::path dir = fold_dir(config.output_dir, fold.index);
    if (!force && fold_complete(dir, config)) {
      log << "fold " << fold.index << ": up to date\n";
      ++summary.skipped;
      continue;
    }
    try {
      const eval::FoldModels models = eval::train_fold(domain->spec(), fold, config);
      save_fold(dir, models, config);
      log << "fold " << fold.index << ": trained\n";
      ++summary.trained;
    } catch (const TrainingError& e) {
      log << "fold " << fold.index << ": failed: " << e.what() << "\n";
      summary.failures.push_back("fold " + std::to_string(fold.index) + ": " + e.what());
    }
  }
  return summary;
}

eval::EvalReport cmd_evaluate(const eval::ExperimentConfig& config, std::ostream& log) {
  const auto domain = domain_for(config);
  DirectoryLock lock(config.output_dir);
  const auto folds = eval::prepare_folds(*domain, config);
  std::vector<eval::FoldResult> results;
  for (const auto& fold : folds) {
    const eval::FoldModels models = load_fold(fold_dir(config.output_dir, fold.index), config);
    results.push_back(eval::evaluate_fold(*domain, fold, models, config));
  }
  eval::EvalReport report = eval::assemble(domain->spec().name, std::move(results), config);
  const fs::path dir = config.output_dir / "report";
  eval::write_report(report, dir);
  log << "wrote " << (dir / "report.json").string() << "\n";
  for (const auto& [method, median] : report.median_log_od) {
    log << "  median ln(OD) " << method << ": " << (median ? eval::format_double(*median) : "n/a") << "\n";
  }
  return report;
}

std::vector<eval::SweepPoint> cmd_sweep(const eval::ExperimentConfig& config, std::ostream& log) {
  const auto domain = domain_for(config);
  DirectoryLock lock(config.output_dir);
  auto sweep = eval::dataset_size_sweep(*domain, config.sweep_sizes, config);
  const fs::path dir = config.output_dir / "sweep";
  eval::write_sweep(sweep, dir);
  log << "wrote " << (dir / "sweep.json").string() << "\n";
  for (const auto& p : sweep) {
    auto it = p.od.find("rm_fm");
    if (it != p.od.end()) {
      log << "  n = " << p.size << ": OD mean " << eval::format_double(it->second.mean) << " std "
          << eval::format_double(it->second.std) << "\n";
    }
  }
  return sweep;
}

void cmd_suggest(const fs::path& model, const std::vector<double>& slp_raw, std::optional<std::size_t> k,
                 std::uint64_t seed, std::ostream& out) {
  const surrogate::RmModel rm = surrogate::rm_from_json(surrogate::load_json(model));
  if (slp_raw.size() != rm.scaler.slp_dim()) {
    throw ShapeError("model expects " + std::to_string(rm.scaler.slp_dim()) + " SLP values, got " +
                     std::to_string(slp_raw.size()));
  }
  const auto query = rm.scaler.transform_slp(slp_raw);
  std::vector<std::vector<double>> rows;
  if (k) {
    rows = surrogate::suggest_many(rm, query, *k, seed);
  } else {
    rows.push_back(surrogate::suggest(rm, query));
  }
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << eval::format_double(row[i]);
    out << "\n";
  }
}

bool cmd_gradcheck(double tolerance, std::ostream& out) {
  bool ok = true;
  for (const auto& c : surrogate::gradcheck_suite()) {
    const bool pass = c.max_relative_error < tolerance;
    ok = ok && pass;
    out << c.network << " (nA=" << c.n_alp << ", nS=" << c.n_slp << "): max rel error "
        << eval::format_double(c.max_relative_error) << (pass ? " ok" : " FAIL") << "\n";
  }
  return ok;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const MissingArtifactError*>(&e)) return kMissingArtifact;
  if (dynamic_cast<const IoError*>(&e)) return kIo;
  if (dynamic_cast<const TrainingError*>(&e)) return kTrainingFailure;
  if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const ConfigError*>(&e) ||
      dynamic_cast<const ShapeError*>(&e) || dynamic_cast<const DomainError*>(&e) ||
      dynamic_cast<const ParseError*>(&e) || dynamic_cast<const SpecError*>(&e)) {
    return kUsage;
  }
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return kIo;
  return kFailure;
}

}  // namespace pbd::cli
