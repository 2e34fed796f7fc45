#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "pbd/data/dataset.hpp"
#include "pbd/data/scaler.hpp"
#include "pbd/domains/domain.hpp"
#include "pbd/nn/gradient.hpp"
#include "pbd/surrogate/surrogate.hpp"

namespace pbd::eval {

/// Training settings per network kind.
struct TrainingConfigs {
  surrogate::TrainConfig fm;
  surrogate::TrainConfig rm;
  surrogate::TrainConfig rm_fm;
  surrogate::TrainConfig rm_var;
};

struct ExperimentConfig {
  std::string domain;
  nlohmann::json overrides = nlohmann::json::object();
  /// Dataset size (training-set size for single-split domains).
  std::size_t n = 10000;
  std::uint64_t data_seed = 0;
  std::size_t k = 10;
  std::uint64_t fold_seed = 0;
  /// Folds actually run; empty runs all k.
  std::vector<std::size_t> folds;
  TrainingConfigs training;
  std::vector<double> alphas{0.5, 0.0001, 0.0};
  std::size_t instances_per_fold = 10;
  std::uint64_t sim_seed = 1;
  std::vector<std::size_t> sweep_sizes;
  std::filesystem::path output_dir = "out";
  std::size_t threads = 0;  // 0: PBD_THREADS or hardware concurrency
};

/// Per-fold aggregate: mean and population standard deviation.
struct MseStat {
  double mean = 0.0;
  double std = 0.0;
};
MseStat aggregate(std::span<const double> values);

/// Mean squared error averaged over samples and output dimensions.
double network_mse(const std::vector<nn::Stage>& stages, const nn::Matrix& inputs, const nn::Matrix& targets,
                   const nn::Matrix& noise = {});

double fm_mse(const surrogate::FmModel& fm, const data::ModelSpaceData& data);
/// Direct RM on (SLP -> ALP).
double rm_mse(const surrogate::RmModel& rm, const data::ModelSpaceData& data);
/// SLP reconstruction through RM and FM. Variational models draw eps from
/// `noise_seed`. Throws UsageError when the RM was not trained against `fm`.
double composite_mse(const surrogate::RmModel& rm, const surrogate::FmModel& fm, const data::ModelSpaceData& data,
                     std::uint64_t noise_seed);

/// Simulates `alp_raw` and returns the Euclidean distance between its SLPs
/// and `slp_query_raw`, both normalized with `scaler`.
double output_difference(const domains::Domain& domain, const data::Scaler& scaler,
                         std::span<const double> slp_query_raw, std::span<const double> alp_raw,
                         std::uint64_t sim_seed);

/// Output difference of one ALP drawn uniformly over the domain's ranges.
double random_baseline(const domains::Domain& domain, const data::Scaler& scaler,
                       std::span<const double> slp_query_raw, std::uint64_t seed);

/// Median of ln(v); zeros are replaced by `zero_substitute` first.
double median_log(std::span<const double> values, double zero_substitute);

/// Published values, used only to annotate reports.
struct ReferenceConstants {
  struct MseRow {
    std::string domain;
    double train_mu[3];  // rm, fm, rm_fm
    double train_sigma[3];
    double test_mu[3];
    double test_sigma[3];
  };
  struct VariationalRow {
    double alpha;
    double train_mu, train_sigma, test_mu, test_sigma;
  };
  static const std::vector<MseRow>& network_mse();
  static const std::vector<VariationalRow>& variational_mse();
  // Civil violence median ln(OD).
  static constexpr double random_median = -2.3567;
  static constexpr double amf_plus_median = -4.6212;
  static constexpr double nn_median = -3.7008;
  static constexpr double variational_median[3] = {-1.3586, -2.9714, -3.6011};  // alpha 0.5, 1e-4, 0
  static constexpr std::size_t amf_plus_min_size = 430;
  static constexpr std::size_t amf_plus_max_size = 2700;

  static nlohmann::json to_json();
};

/// One fold's data in raw and model coordinates.
struct FoldData {
  std::size_t index = 0;
  data::Scaler scaler;
  data::ModelSpaceData train;
  data::ModelSpaceData test;
  /// Demonstration queries: the first test samples in order.
  std::vector<data::Sample> queries;
};

/// Generates the dataset and builds the folds selected by the config.
/// Single-split domains yield one fold with an independently seeded test set.
std::vector<FoldData> prepare_folds(const domains::Domain& domain, const ExperimentConfig& config);
std::vector<FoldData> prepare_folds(const data::Dataset& dataset, const ExperimentConfig& config);
std::vector<FoldData> prepare_split(const data::Dataset& train, const data::Dataset& test,
                                    const ExperimentConfig& config);

std::string variational_label(double alpha);

struct FoldModels {
  surrogate::FmModel fm;
  surrogate::RmModel rm;
  surrogate::RmModel rm_fm;
  std::vector<surrogate::RmModel> rm_var;  // one per configured alpha
  /// Traces keyed by network label: fm, rm, rm_fm, rm_fm_var(<alpha>).
  std::map<std::string, surrogate::LossTrace> traces;
  std::uint64_t fm_hash_trained = 0;
};

/// Trains FM, direct RM, RM+FM and one variational RM+FM per alpha.
FoldModels train_fold(const domains::DomainSpec& domain, const FoldData& fold, const ExperimentConfig& config);

struct OdSample {
  std::size_t fold = 0;
  std::size_t instance = 0;
  std::string method;
  double value = 0.0;
};

struct FinalLoss {
  double reconstruction = 0.0;
  double kl = 0.0;
  double total = 0.0;
};

struct FoldResult {
  std::size_t fold = 0;
  std::optional<std::string> error;
  std::map<std::string, double> train_mse;
  std::map<std::string, double> test_mse;
  std::map<std::string, FinalLoss> final_loss;
  std::uint64_t fm_hash_trained = 0;
  std::uint64_t fm_hash_final = 0;
  std::vector<OdSample> od;
};

/// MSEs on the full train and test sets and OD for every query.
FoldResult evaluate_fold(const domains::Domain& domain, const FoldData& fold, const FoldModels& models,
                         const ExperimentConfig& config);

struct EvalReport {
  std::string domain;
  std::vector<FoldResult> folds;
  std::vector<std::string> methods;  // OD methods in report order
  std::map<std::string, MseStat> train_mse;
  std::map<std::string, MseStat> test_mse;
  std::map<std::string, std::optional<double>> median_log_od;
  double zero_substitute = 0.0;
};

/// Folds the per-fold results into the report summary.
EvalReport assemble(const std::string& domain, std::vector<FoldResult> folds, const ExperimentConfig& config);

/// Full pipeline: generate, split, train and evaluate every fold. Fold
/// failures are recorded and the report covers the remaining folds.
EvalReport run_experiment(const domains::Domain& domain, const ExperimentConfig& config);
EvalReport run_experiment(const domains::Domain& domain, const std::vector<FoldData>& folds,
                          const ExperimentConfig& config);

std::vector<std::string> od_methods(const ExperimentConfig& config);

struct SweepPoint {
  std::size_t size = 0;
  std::map<std::string, MseStat> od;  // per method, over all OD samples
  EvalReport report;
};

/// run_experiment per size with generation seed data_seed + i. Throws
/// UsageError for an empty or unsorted size list.
std::vector<SweepPoint> dataset_size_sweep(const domains::Domain& domain, std::span<const std::size_t> sizes,
                                           const ExperimentConfig& config);

struct SampleCloud {
  std::vector<std::vector<double>> alp_points;            // raw
  std::vector<std::vector<double>> slp_points;            // FM prediction, normalized
  std::vector<std::vector<double>> simulated_slp_points;  // normalized
  double spread_alp = 0.0;
  double spread_slp = 0.0;  // FM predictions
  double spread_slp_simulated = 0.0;
  std::vector<double> od_values;
};

/// k suggestions from a variational model for one raw SLP query. Spreads are
/// mean distances to the centroid in min-max normalized coordinates.
SampleCloud sample_cloud_analysis(const surrogate::RmModel& rm_var, const surrogate::FmModel& fm,
                                  const domains::Domain& domain, std::span<const double> slp_query_raw, std::size_t k,
                                  std::uint64_t seed, std::uint64_t sim_seed);

nlohmann::json to_json(const EvalReport& report);
nlohmann::json to_json(const std::vector<SweepPoint>& sweep);
nlohmann::json to_json(const SampleCloud& cloud);

/// report.json plus mse.csv, od.csv and loss.csv in `dir`.
void write_report(const EvalReport& report, const std::filesystem::path& dir);
void write_sweep(const std::vector<SweepPoint>& sweep, const std::filesystem::path& dir);

/// Shortest round-trip decimal text of a double.
std::string format_double(double v);

}  // namespace pbd::eval
