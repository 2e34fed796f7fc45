#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "pbd/error.hpp"
#include "pbd/nn/gradient.hpp"
#include "pbd/surrogate/surrogate.hpp"
#include "pbd/util.hpp"

namespace pbd::surrogate {

namespace {

// Random streams derived from the training seed.
constexpr std::uint64_t kShuffleStream = 1;
constexpr std::uint64_t kNoiseStream = 2;
constexpr std::uint64_t kEvalNoiseStream = 3;

struct FitProblem {
  std::vector<nn::Stage> stages;
  nn::ParameterSet* trainable = nullptr;
  std::size_t trainable_stage = 0;
  const nn::Matrix* inputs = nullptr;
  const nn::Matrix* targets = nullptr;
  std::size_t noise_width = 0;  // 0 when the chain has no variational stage
  nn::LossSpec loss;
};

void copy_rows(const nn::Matrix& src, std::span<const std::size_t> rows, nn::Matrix& dst) {
  dst.rows = rows.size();
  dst.cols = src.cols;
  dst.data.resize(dst.rows * dst.cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto s = src.row(rows[i]);
    std::copy(s.begin(), s.end(), dst.row(i).begin());
  }
}

LossTrace fit(const FitProblem& p, const TrainConfig& config) {
  const std::size_t n = p.inputs->rows;
  if (n == 0) throw DomainError("training set is empty");
  if (p.targets->rows != n) throw ShapeError("inputs and targets differ in length");
  if (config.batch_size == 0) throw UsageError("batch size must be positive");

  nn::ChainGradient engine(p.stages);
  nn::OptimizerState state = nn::OptimizerState::for_parameters(*p.trainable);
  std::mt19937_64 shuffle_rng(derive_seed(config.seed, {kShuffleStream}));
  std::mt19937_64 noise_rng(derive_seed(config.seed, {kNoiseStream}));
  std::normal_distribution<double> normal(0.0, 1.0);

  // Full-set evaluation batch; its noise is drawn once so that epoch losses
  // are comparable.
  nn::Batch full{*p.inputs, *p.targets, {}};
  if (p.noise_width > 0) full.noise = standard_normal(n, p.noise_width, derive_seed(config.seed, {kEvalNoiseStream}));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  nn::Batch batch;
  LossTrace trace;
  trace.reserve(config.epochs);
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::span<const std::size_t> rows(order.data() + start, std::min(config.batch_size, n - start));
      copy_rows(*p.inputs, rows, batch.inputs);
      copy_rows(*p.targets, rows, batch.targets);
      if (p.noise_width > 0) {
        batch.noise.rows = rows.size();
        batch.noise.cols = p.noise_width;
        batch.noise.data.resize(rows.size() * p.noise_width);
        for (double& v : batch.noise.data) v = normal(noise_rng);
      }
      engine.compute(batch, p.loss);
      nn::adam_step(*p.trainable, *engine.gradient(p.trainable_stage), state, config.adam);
    }
    const nn::LossBreakdown l = engine.evaluate(full, p.loss);
    if (!std::isfinite(l.total) || !std::isfinite(l.reconstruction) || !std::isfinite(l.kl)) {
      throw TrainingError("non-finite loss at epoch " + std::to_string(epoch));
    }
    trace.push_back({epoch, l.reconstruction, l.kl, l.total});
  }
  return trace;
}

void check_data(const data::ModelSpaceData& train, std::size_t alp_dim, std::size_t slp_dim) {
  if (train.alp.rows != train.slp.rows) throw ShapeError("ALP and SLP matrices differ in length");
  if (train.alp.cols != alp_dim || train.slp.cols != slp_dim) {
    throw ShapeError("training data width does not match the domain");
  }
}

void check_fm(const FmModel& fm, const domains::DomainSpec& domain) {
  if (fm.domain_name != domain.name) {
    throw UsageError("FM was trained on '" + fm.domain_name + "', not '" + domain.name + "'");
  }
  if (!fm.net.params.frozen) throw UsageError("FM parameters must be frozen");
}

RmModel through_fm(const data::ModelSpaceData& train, const FmModel& fm, const domains::DomainSpec& domain,
                   const TrainConfig& config, bool variational, LossTrace& trace) {
  check_fm(fm, domain);
  check_data(train, domain.alp_dim, domain.slp_dim);
  if (fm.scaler.alp_dim() != domain.alp_dim || fm.scaler.slp_dim() != domain.slp_dim) {
    throw UsageError("FM scaler does not match the domain");
  }
  const std::uint64_t before = fm.hash();

  RmModel rm;
  rm.kind = variational ? ModelKind::rm_var : ModelKind::rm_fm;
  rm.net.spec = build_rm(domain.alp_dim, domain.slp_dim, variational);
  rm.net.params = init_parameters(rm.net.spec, config.seed);
  rm.scaler = fm.scaler;
  rm.domain_name = domain.name;
  rm.alp_ranges = domain.alp_ranges;
  rm.fm_hash = before;
  rm.alpha = variational ? config.alpha : 0.0;

  FitProblem p;
  p.stages = {{&rm.net.spec, &rm.net.params}, {&fm.net.spec, &fm.net.params}};
  p.trainable = &rm.net.params;
  p.trainable_stage = 0;
  // SLP -> RM -> FM -> SLP reconstruction.
  p.inputs = &train.slp;
  p.targets = &train.slp;
  p.noise_width = variational ? rm.net.spec.latent_size : 0;
  p.loss = variational ? nn::LossSpec{1.0 - config.alpha, config.alpha} : nn::LossSpec{1.0, 0.0};
  trace = fit(p, config);

  if (fm.hash() != before) throw TrainingError("FM parameters changed during RM training");
  return rm;
}

}  // namespace

nn::Matrix standard_normal(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  nn::Matrix m(rows, cols);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : m.data) v = normal(rng);
  return m;
}

std::pair<FmModel, LossTrace> train_fm(const data::ModelSpaceData& train, const data::Scaler& scaler,
                                       const std::string& domain_name, const TrainConfig& config) {
  check_data(train, scaler.alp_dim(), scaler.slp_dim());
  FmModel fm;
  fm.net.spec = build_fm(scaler.alp_dim(), scaler.slp_dim());
  fm.net.params = init_parameters(fm.net.spec, config.seed);
  fm.scaler = scaler;
  fm.domain_name = domain_name;

  FitProblem p;
  p.stages = {{&fm.net.spec, &fm.net.params}};
  p.trainable = &fm.net.params;
  p.inputs = &train.alp;
  p.targets = &train.slp;
  LossTrace trace = fit(p, config);
  fm.net.params.frozen = true;
  return {std::move(fm), std::move(trace)};
}

std::pair<RmModel, LossTrace> train_rm_direct(const data::ModelSpaceData& train, const data::Scaler& scaler,
                                              const domains::DomainSpec& domain, const TrainConfig& config) {
  check_data(train, domain.alp_dim, domain.slp_dim);
  RmModel rm;
  rm.kind = ModelKind::rm;
  rm.net.spec = build_rm(domain.alp_dim, domain.slp_dim, false);
  rm.net.params = init_parameters(rm.net.spec, config.seed);
  rm.scaler = scaler;
  rm.domain_name = domain.name;
  rm.alp_ranges = domain.alp_ranges;

  FitProblem p;
  p.stages = {{&rm.net.spec, &rm.net.params}};
  p.trainable = &rm.net.params;
  p.inputs = &train.slp;
  p.targets = &train.alp;
  LossTrace trace = fit(p, config);
  return {std::move(rm), std::move(trace)};
}

std::pair<RmModel, LossTrace> train_rm_concat(const data::ModelSpaceData& train, const FmModel& fm,
                                              const domains::DomainSpec& domain, const TrainConfig& config) {
  LossTrace trace;
  RmModel rm = through_fm(train, fm, domain, config, false, trace);
  return {std::move(rm), std::move(trace)};
}

std::pair<RmModel, LossTrace> train_rm_variational(const data::ModelSpaceData& train, const FmModel& fm,
                                                   const domains::DomainSpec& domain, const TrainConfig& config) {
  if (!(config.alpha >= 0.0 && config.alpha <= 1.0)) throw DomainError("alpha must lie in [0, 1]");
  LossTrace trace;
  RmModel rm = through_fm(train, fm, domain, config, true, trace);
  return {std::move(rm), std::move(trace)};
}

void write_trace_csv(const LossTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "epoch,reconstruction,kl,total\n";
  char buf[64];
  auto put = [&](double v) {
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, r.ptr - buf);
  };
  for (const auto& r : trace) {
    out << r.epoch << ',';
    put(r.reconstruction);
    out << ',';
    put(r.kl);
    out << ',';
    put(r.total);
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

LossTrace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifactError("missing loss trace " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "epoch,reconstruction,kl,total") {
    throw ParseError(path.string() + ": unexpected header");
  }
  LossTrace trace;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    LossRecord r;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    auto fail = [&] { return ParseError(path.string() + ": malformed line " + std::to_string(line_no)); };
    auto e = std::from_chars(p, end, r.epoch);
    if (e.ec != std::errc{} || e.ptr == end || *e.ptr != ',') throw fail();
    p = e.ptr + 1;
    double* fields[] = {&r.reconstruction, &r.kl, &r.total};
    for (std::size_t i = 0; i < 3; ++i) {
      auto d = std::from_chars(p, end, *fields[i]);
      if (d.ec != std::errc{}) throw fail();
      p = d.ptr;
      if (i < 2) {
        if (p == end || *p != ',') throw fail();
        ++p;
      }
    }
    if (p != end) throw fail();
    trace.push_back(r);
  }
  return trace;
}

}  // namespace pbd::surrogate
