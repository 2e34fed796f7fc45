#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pbd/data/scaler.hpp"
#include "pbd/domains/domain.hpp"
#include "pbd/nn/adam.hpp"
#include "pbd/nn/network.hpp"

namespace pbd::surrogate {

// Architecture rule for nA ALPs and nS SLPs:
//   RM widths [nS, 2 nS, nS^2, 2 nA, nA], ReLU hidden, linear output.
//   FM widths [nA, 2 nA, nS^2, 2 nS, nS] (the RM reversed), sigmoid hidden, linear output.
//   Variational RM: encoder nS -> 2 nS (ReLU), mu/logvar heads of width nS^2,
//   generator nS^2 -> 2 nA (ReLU) -> nA (linear).
nn::NetworkSpec build_fm(std::size_t n_alp, std::size_t n_slp);
nn::NetworkSpec build_rm(std::size_t n_alp, std::size_t n_slp, bool variational);

struct TrainConfig {
  std::size_t epochs = 1000;
  std::uint64_t seed = 0;
  std::size_t batch_size = 32;
  nn::AdamConfig adam;
  /// KL weight; only read by variational training.
  double alpha = 0.0;
};

/// Full-training-set loss after each epoch.
struct LossRecord {
  std::size_t epoch = 0;
  double reconstruction = 0.0;
  double kl = 0.0;
  double total = 0.0;
};
using LossTrace = std::vector<LossRecord>;

void write_trace_csv(const LossTrace& trace, const std::filesystem::path& path);
LossTrace read_trace_csv(const std::filesystem::path& path);

enum class ModelKind { fm, rm, rm_fm, rm_var };
std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view name);

/// Forward surrogate. Parameters are frozen once training completes.
struct FmModel {
  nn::Network net;
  data::Scaler scaler;
  std::string domain_name;

  std::uint64_t hash() const { return nn::content_hash(net); }
};

/// Reverse model: direct (rm), trained through a frozen FM (rm_fm), or the
/// variational variant of the latter (rm_var).
struct RmModel {
  ModelKind kind = ModelKind::rm;
  nn::Network net;
  data::Scaler scaler;
  std::string domain_name;
  std::vector<domains::Range> alp_ranges;
  /// Content hash of the FM the model was trained against (rm_fm, rm_var).
  std::optional<std::uint64_t> fm_hash;
  double alpha = 0.0;
};

/// FM on (ALP -> SLP) pairs in model space.
std::pair<FmModel, LossTrace> train_fm(const data::ModelSpaceData& train, const data::Scaler& scaler,
                                       const std::string& domain_name, const TrainConfig& config);

/// Direct RM baseline on (SLP -> ALP) pairs with MSE in standardized ALP space.
std::pair<RmModel, LossTrace> train_rm_direct(const data::ModelSpaceData& train, const data::Scaler& scaler,
                                              const domains::DomainSpec& domain, const TrainConfig& config);

/// RM trained through the frozen FM with SLP reconstruction loss. Throws
/// UsageError when the FM was fitted under another scaler or domain.
std::pair<RmModel, LossTrace> train_rm_concat(const data::ModelSpaceData& train, const FmModel& fm,
                                              const domains::DomainSpec& domain, const TrainConfig& config);

/// Variational RM through the frozen FM; loss (1 - alpha) recon + alpha KL.
/// Throws DomainError for alpha outside [0, 1].
std::pair<RmModel, LossTrace> train_rm_variational(const data::ModelSpaceData& train, const FmModel& fm,
                                                   const domains::DomainSpec& domain, const TrainConfig& config);

/// Deterministic ALP suggestion in raw units for a model-space SLP query,
/// clamped to the ALP ranges. Variational models use the mean path.
std::vector<double> suggest(const RmModel& rm, std::span<const double> slp_model);

/// k reparameterized samples (eps ~ N(0, I)) for a variational model.
std::vector<std::vector<double>> suggest_many(const RmModel& rm, std::span<const double> slp_model, std::size_t k,
                                              std::uint64_t seed);

/// Fills an n x latent matrix with standard normal draws.
nn::Matrix standard_normal(std::size_t rows, std::size_t cols, std::uint64_t seed);

struct GradcheckCase {
  std::string network;  // fm, rm, rm_fm, rm_fm_var
  std::size_t n_alp = 1;
  std::size_t n_slp = 1;
  double max_relative_error = 0.0;
};

/// Finite-difference checks of every network shape built by this module for
/// (nA, nS) in {(1,1), (1,2), (2,2), (3,3)}.
std::vector<GradcheckCase> gradcheck_suite(std::uint64_t seed = 0);

nlohmann::json to_json(const FmModel& fm);
nlohmann::json to_json(const RmModel& rm);
FmModel fm_from_json(const nlohmann::json& doc);
RmModel rm_from_json(const nlohmann::json& doc);

void save_json(const nlohmann::json& doc, const std::filesystem::path& path);
nlohmann::json load_json(const std::filesystem::path& path);

}  // namespace pbd::surrogate
