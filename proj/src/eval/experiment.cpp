#include <algorithm>
#include <cmath>
#include <limits>

#include "pbd/error.hpp"
#include "pbd/eval/eval.hpp"
#include "pbd/util.hpp"

namespace pbd::eval {

namespace {

constexpr std::uint64_t kTestSetStream = 0x54455354;
constexpr std::uint64_t kRandomStream = 0x52414e44;
constexpr std::uint64_t kMseNoiseStream = 0x4d5345;

std::size_t thread_count(const ExperimentConfig& config) {
  return config.threads > 0 ? config.threads : default_thread_count();
}

FoldData make_fold(std::size_t index, const data::Dataset& train_set, std::span<const std::size_t> train_idx,
                   const data::Dataset& test_set, std::span<const std::size_t> test_idx,
                   const ExperimentConfig& config) {
  FoldData f;
  f.index = index;
  f.scaler = data::Scaler::fit(train_set, train_idx);
  f.train = data::to_model_space(f.scaler, train_set, train_idx);
  f.test = data::to_model_space(f.scaler, test_set, test_idx);
  const std::size_t q = std::min(config.instances_per_fold, test_idx.size());
  for (std::size_t i = 0; i < q; ++i) f.queries.push_back(test_set.samples[test_idx[i]]);
  return f;
}

void add_final_loss(FoldResult& r, const std::string& label, const FoldModels& m) {
  auto it = m.traces.find(label);
  if (it == m.traces.end() || it->second.empty()) return;
  const auto& last = it->second.back();
  r.final_loss[label] = {last.reconstruction, last.kl, last.total};
}

double min_nonzero(const std::vector<FoldResult>& folds) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& f : folds) {
    for (const auto& s : f.od) {
      if (s.value > 0.0) m = std::min(m, s.value);
    }
  }
  return std::isfinite(m) ? m : 0.0;
}

}  // namespace

std::string variational_label(double alpha) { return "rm_fm_var(" + format_double(alpha) + ")"; }

std::vector<std::string> od_methods(const ExperimentConfig& config) {
  std::vector<std::string> m{"rm_fm"};
  for (double a : config.alphas) m.push_back(variational_label(a));
  m.push_back("random");
  return m;
}

std::vector<FoldData> prepare_folds(const domains::Domain& domain, const ExperimentConfig& config) {
  const auto& spec = domain.spec();
  const std::size_t threads = thread_count(config);
  if (spec.single_split_test_size > 0) {
    const data::Dataset train = data::generate(domain, config.n, config.data_seed, threads);
    const data::Dataset test = data::generate(domain, spec.single_split_test_size,
                                              derive_seed(config.data_seed, {kTestSetStream}), threads);
    return prepare_split(train, test, config);
  }
  return prepare_folds(data::generate(domain, config.n, config.data_seed, threads), config);
}

std::vector<FoldData> prepare_folds(const data::Dataset& dataset, const ExperimentConfig& config) {
  const data::FoldSplit split = data::kfold(dataset.size(), config.k, config.fold_seed);
  std::vector<std::size_t> selected = config.folds;
  if (selected.empty()) {
    for (std::size_t f = 0; f < config.k; ++f) selected.push_back(f);
  }
  std::vector<FoldData> out;
  for (std::size_t f : selected) {
    if (f >= config.k) throw UsageError("fold " + std::to_string(f) + " out of range for k = " + std::to_string(config.k));
    out.push_back(make_fold(f, dataset, split.train_indices(f), dataset, split.test_indices(f), config));
  }
  return out;
}

std::vector<FoldData> prepare_split(const data::Dataset& train, const data::Dataset& test,
                                    const ExperimentConfig& config) {
  std::vector<std::size_t> train_idx(train.size()), test_idx(test.size());
  for (std::size_t i = 0; i < train_idx.size(); ++i) train_idx[i] = i;
  for (std::size_t i = 0; i < test_idx.size(); ++i) test_idx[i] = i;
  std::vector<FoldData> out;
  out.push_back(make_fold(0, train, train_idx, test, test_idx, config));
  return out;
}

FoldModels train_fold(const domains::DomainSpec& domain, const FoldData& fold, const ExperimentConfig& config) {
  FoldModels m;
  auto [fm, fm_trace] = surrogate::train_fm(fold.train, fold.scaler, domain.name, config.training.fm);
  m.fm = std::move(fm);
  m.traces["fm"] = std::move(fm_trace);
  m.fm_hash_trained = m.fm.hash();

  auto [rm, rm_trace] = surrogate::train_rm_direct(fold.train, fold.scaler, domain, config.training.rm);
  m.rm = std::move(rm);
  m.traces["rm"] = std::move(rm_trace);

  auto [rm_fm, rm_fm_trace] = surrogate::train_rm_concat(fold.train, m.fm, domain, config.training.rm_fm);
  m.rm_fm = std::move(rm_fm);
  m.traces["rm_fm"] = std::move(rm_fm_trace);

  for (double alpha : config.alphas) {
    surrogate::TrainConfig c = config.training.rm_var;
    c.alpha = alpha;
    auto [var, var_trace] = surrogate::train_rm_variational(fold.train, m.fm, domain, c);
    m.rm_var.push_back(std::move(var));
    m.traces[variational_label(alpha)] = std::move(var_trace);
  }
  return m;
}

FoldResult evaluate_fold(const domains::Domain& domain, const FoldData& fold, const FoldModels& models,
                         const ExperimentConfig& config) {
  if (models.rm_var.size() != config.alphas.size()) throw UsageError("variational models do not match the alphas");
  FoldResult r;
  r.fold = fold.index;
  r.fm_hash_trained = models.fm_hash_trained;
  r.fm_hash_final = models.fm.hash();

  const auto noise_seed = [&](std::size_t model, std::size_t split) {
    return derive_seed(config.sim_seed, {fold.index, kMseNoiseStream, model, split});
  };
  r.train_mse["fm"] = fm_mse(models.fm, fold.train);
  r.test_mse["fm"] = fm_mse(models.fm, fold.test);
  r.train_mse["rm"] = rm_mse(models.rm, fold.train);
  r.test_mse["rm"] = rm_mse(models.rm, fold.test);
  r.train_mse["rm_fm"] = composite_mse(models.rm_fm, models.fm, fold.train, noise_seed(0, 0));
  r.test_mse["rm_fm"] = composite_mse(models.rm_fm, models.fm, fold.test, noise_seed(0, 1));
  for (std::size_t a = 0; a < config.alphas.size(); ++a) {
    const std::string label = variational_label(config.alphas[a]);
    r.train_mse[label] = composite_mse(models.rm_var[a], models.fm, fold.train, noise_seed(a + 1, 0));
    r.test_mse[label] = composite_mse(models.rm_var[a], models.fm, fold.test, noise_seed(a + 1, 1));
  }
  for (const auto& [label, trace] : models.traces) add_final_loss(r, label, models);

  for (std::size_t i = 0; i < fold.queries.size(); ++i) {
    const data::Sample& q = fold.queries[i];
    const auto slp_model = fold.scaler.transform_slp(q.slp);
    const std::uint64_t sim = derive_seed(config.sim_seed, {fold.index, i});
    r.od.push_back({fold.index, i, "rm_fm",
                    output_difference(domain, fold.scaler, q.slp, surrogate::suggest(models.rm_fm, slp_model), sim)});
    for (std::size_t a = 0; a < config.alphas.size(); ++a) {
      r.od.push_back({fold.index, i, variational_label(config.alphas[a]),
                      output_difference(domain, fold.scaler, q.slp, surrogate::suggest(models.rm_var[a], slp_model),
                                        sim)});
    }
    r.od.push_back({fold.index, i, "random",
                    random_baseline(domain, fold.scaler, q.slp, derive_seed(config.sim_seed, {fold.index, i, kRandomStream}))});
  }
  return r;
}

EvalReport assemble(const std::string& domain, std::vector<FoldResult> folds, const ExperimentConfig& config) {
  EvalReport rep;
  rep.domain = domain;
  rep.methods = od_methods(config);
  std::sort(folds.begin(), folds.end(), [](const FoldResult& a, const FoldResult& b) { return a.fold < b.fold; });
  rep.folds = std::move(folds);

  std::map<std::string, std::vector<double>> train, test;
  for (const auto& f : rep.folds) {
    if (f.error) continue;
    for (const auto& [k, v] : f.train_mse) train[k].push_back(v);
    for (const auto& [k, v] : f.test_mse) test[k].push_back(v);
  }
  for (const auto& [k, v] : train) rep.train_mse[k] = aggregate(v);
  for (const auto& [k, v] : test) rep.test_mse[k] = aggregate(v);

  rep.zero_substitute = min_nonzero(rep.folds);
  for (const auto& method : rep.methods) {
    std::vector<double> values;
    for (const auto& f : rep.folds) {
      for (const auto& s : f.od) {
        if (s.method == method) values.push_back(s.value);
      }
    }
    const bool all_zero = rep.zero_substitute == 0.0;
    if (values.empty() || all_zero) {
      rep.median_log_od[method] = std::nullopt;
    } else {
      rep.median_log_od[method] = median_log(values, rep.zero_substitute);
    }
  }
  return rep;
}

EvalReport run_experiment(const domains::Domain& domain, const ExperimentConfig& config) {
  return run_experiment(domain, prepare_folds(domain, config), config);
}

EvalReport run_experiment(const domains::Domain& domain, const std::vector<FoldData>& folds,
                          const ExperimentConfig& config) {
  std::vector<FoldResult> results(folds.size());
  parallel_for(folds.size(), thread_count(config), [&](std::size_t i) {
    try {
      const FoldModels models = train_fold(domain.spec(), folds[i], config);
      results[i] = evaluate_fold(domain, folds[i], models, config);
    } catch (const std::exception& e) {
      results[i] = FoldResult{};
      results[i].fold = folds[i].index;
      results[i].error = e.what();
    }
  });
  return assemble(domain.spec().name, std::move(results), config);
}

std::vector<SweepPoint> dataset_size_sweep(const domains::Domain& domain, std::span<const std::size_t> sizes,
                                           const ExperimentConfig& config) {
  if (sizes.empty()) throw UsageError("sweep needs at least one dataset size");
  if (!std::is_sorted(sizes.begin(), sizes.end())) throw UsageError("sweep sizes must be sorted ascending");
  std::vector<SweepPoint> out;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] == 0) throw UsageError("sweep sizes must be positive");
    ExperimentConfig c = config;
    c.n = sizes[i];
    c.data_seed = config.data_seed + i;
    SweepPoint p;
    p.size = sizes[i];
    p.report = run_experiment(domain, c);
    for (const auto& method : p.report.methods) {
      std::vector<double> values;
      for (const auto& f : p.report.folds) {
        for (const auto& s : f.od) {
          if (s.method == method) values.push_back(s.value);
        }
      }
      if (!values.empty()) p.od[method] = aggregate(values);
    }
    out.push_back(std::move(p));
  }
  return out;
}

namespace {

double spread(const std::vector<std::vector<double>>& points) {
  if (points.empty()) return 0.0;
  std::vector<double> c(points.front().size(), 0.0);
  for (const auto& p : points) {
    for (std::size_t j = 0; j < c.size(); ++j) c[j] += p[j];
  }
  for (double& v : c) v /= static_cast<double>(points.size());
  double total = 0.0;
  for (const auto& p : points) {
    double sq = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) sq += (p[j] - c[j]) * (p[j] - c[j]);
    total += std::sqrt(sq);
  }
  return total / static_cast<double>(points.size());
}

}  // namespace

SampleCloud sample_cloud_analysis(const surrogate::RmModel& rm_var, const surrogate::FmModel& fm,
                                  const domains::Domain& domain, std::span<const double> slp_query_raw, std::size_t k,
                                  std::uint64_t seed, std::uint64_t sim_seed) {
  if (!rm_var.fm_hash || *rm_var.fm_hash != fm.hash()) throw UsageError("reverse model was not trained against this FM");
  const data::Scaler& scaler = rm_var.scaler;
  const auto query = scaler.transform_slp(slp_query_raw);
  SampleCloud cloud;
  cloud.alp_points = surrogate::suggest_many(rm_var, query, k, seed);
  std::vector<std::vector<double>> alp_norm;
  for (std::size_t i = 0; i < cloud.alp_points.size(); ++i) {
    const auto& alp = cloud.alp_points[i];
    alp_norm.push_back(scaler.normalize_alp(alp));
    cloud.slp_points.push_back(nn::forward(fm.net.params, fm.net.spec, scaler.transform_alp(alp)).output);
    const auto sim = domains::simulate(domain, alp, derive_seed(sim_seed, {i}));
    cloud.simulated_slp_points.push_back(scaler.transform_slp(sim.slp));
    double sq = 0.0;
    for (std::size_t j = 0; j < query.size(); ++j) {
      const double d = cloud.simulated_slp_points.back()[j] - query[j];
      sq += d * d;
    }
    cloud.od_values.push_back(std::sqrt(sq));
  }
  cloud.spread_alp = spread(alp_norm);
  cloud.spread_slp = spread(cloud.slp_points);
  cloud.spread_slp_simulated = spread(cloud.simulated_slp_points);
  return cloud;
}

}  // namespace pbd::eval
