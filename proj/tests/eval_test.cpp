#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "pbd/data/dataset.hpp"
#include "pbd/domains/domain.hpp"
#include "pbd/error.hpp"
#include "pbd/eval/eval.hpp"

using namespace pbd;
using namespace pbd::eval;

namespace {

ExperimentConfig small_config(const std::string& domain, std::size_t n, std::size_t epochs) {
  ExperimentConfig c;
  c.domain = domain;
  c.n = n;
  c.threads = 1;
  for (auto* t : {&c.training.fm, &c.training.rm, &c.training.rm_fm, &c.training.rm_var}) t->epochs = epochs;
  return c;
}

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "pbd_eval_test" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("aggregate uses the population deviation") {
  const std::vector<double> v{1.0, 3.0};
  const auto s = aggregate(v);
  CHECK(s.mean == 2.0);
  CHECK(s.std == 1.0);
  const std::vector<double> one{0.25};
  CHECK(aggregate(one).std == 0.0);
}

TEST_CASE("network_mse: own predictions and constant-mean predictor") {
  const auto domain = domains::make_domain("brouwer");
  const auto ds = data::generate(*domain, 400, 3);
  const auto scaler = data::Scaler::fit(ds.samples);
  const auto m = data::to_model_space(scaler, ds.samples);

  surrogate::RmModel rm;
  rm.net.spec = surrogate::build_rm(1, 1, false);
  rm.net.params = nn::init_parameters(rm.net.spec, 4);
  rm.scaler = scaler;
  rm.domain_name = "brouwer";
  rm.alp_ranges = domain->spec().alp_ranges;

  const std::vector<nn::Stage> stages{{&rm.net.spec, &rm.net.params}};
  const auto own = nn::predict(stages, m.slp);
  CHECK(network_mse(stages, m.slp, own) == 0.0);

  // Zero output is the mean of standardized ALPs, so the MSE is their variance.
  auto& last = rm.net.params.layers.back();
  std::fill(last.weight.data.begin(), last.weight.data.end(), 0.0);
  double variance = 0.0;
  for (double v : m.alp.data) variance += v * v;
  variance /= static_cast<double>(m.alp.rows);
  CHECK(rm_mse(rm, m) == doctest::Approx(variance).epsilon(1e-14));
  CHECK(std::abs(rm_mse(rm, m) - 1.0) < 1e-9);
}

TEST_CASE("composite_mse refuses a foreign FM") {
  auto cfg = small_config("fk_a", 200, 2);
  const auto domain = domains::make_domain("fk_a");
  const auto folds = prepare_folds(*domain, cfg);
  const auto models = train_fold(domain->spec(), folds[0], cfg);
  auto other = models.fm;
  other.net.params.layers[0].bias[0] += 1.0;
  CHECK_NOTHROW(composite_mse(models.rm_fm, models.fm, folds[0].test, 0));
  CHECK_THROWS_AS(composite_mse(models.rm_fm, other, folds[0].test, 0), UsageError);
}

TEST_CASE("output difference: exact inverse, bounds, baseline") {
  const auto domain = domains::make_domain("brouwer");
  const auto ds = data::generate(*domain, 100, 0);
  const auto scaler = data::Scaler::fit(ds.samples);
  const std::vector<double> query{domains::eval_brouwer(0.25)}, alp{0.25};
  CHECK(output_difference(*domain, scaler, query, alp, 7) == 0.0);

  const auto cv = domains::make_domain("civil_violence", {{"grid_size", 12}, {"steps", 30}, {"burn_in", 5}});
  const auto cds = data::generate(*cv, 40, 1);
  const auto cscaler = data::Scaler::fit(cds.samples);
  for (std::size_t i = 0; i < 10; ++i) {
    const auto& q = cds.samples[i].slp;
    const double od = output_difference(*cv, cscaler, q, cds.samples[i + 10].alp, i);
    CHECK(od >= 0.0);
    const double r = random_baseline(*cv, cscaler, q, i);
    CHECK(r == random_baseline(*cv, cscaler, q, i));
    CHECK(r >= 0.0);
  }
  // Both points inside the unit cube bound the distance by its diagonal.
  for (std::size_t i = 0; i < 20; ++i) {
    const auto q = scaler.transform_slp(ds.samples[i].slp);
    if (q[0] < 0.0 || q[0] > 1.0) continue;
    CHECK(random_baseline(*domain, scaler, ds.samples[i].slp, i) <= 1.0);
  }
}

TEST_CASE("median_log: natural log, zero substitution, even counts") {
  const std::vector<double> odd{std::exp(1.0), std::exp(3.0), std::exp(2.0)};
  CHECK(median_log(odd, 1.0) == doctest::Approx(2.0).epsilon(1e-15));
  const std::vector<double> even{0.0, std::exp(-1.0), std::exp(-3.0), std::exp(-2.0)};
  // The zero becomes exp(-5): sorted logs -5, -3, -2, -1.
  CHECK(median_log(even, std::exp(-5.0)) == doctest::Approx(-2.5).epsilon(1e-15));
  const std::vector<double> bad{-1.0};
  CHECK_THROWS_AS(median_log(bad, 1.0), DomainError);
  CHECK_THROWS_AS(median_log(std::vector<double>{}, 1.0), DomainError);
}

TEST_CASE("reference constants match the published tables") {
  CHECK(ReferenceConstants::network_mse().size() == 11);
  const auto& rows = ReferenceConstants::network_mse();
  auto row = [&](const std::string& d) {
    return *std::find_if(rows.begin(), rows.end(), [&](const auto& r) { return r.domain == d; });
  };
  CHECK(row("fk_a").test_mu[0] == 0.5090);
  CHECK(row("fk_a").test_mu[1] == 0.0694);
  CHECK(row("brouwer").test_mu[0] == 1.0006);
  CHECK(row("brouwer").test_mu[1] == 0.0496);
  CHECK(row("fk_full").test_mu[0] == 1.0220);
  CHECK(row("civil_violence").test_mu[0] == 0.1627);
  CHECK(row("civil_violence").test_mu[2] == 0.0001);
  CHECK(row("flocking").test_mu[0] == 1.1925);
  CHECK(ReferenceConstants::variational_mse()[0].test_mu == 0.0381);
  CHECK(ReferenceConstants::amf_plus_median == -4.6212);
  CHECK(ReferenceConstants::nn_median == -3.7008);
  CHECK(ReferenceConstants::random_median == -2.3567);
  CHECK(ReferenceConstants::amf_plus_min_size == 430);
  CHECK(ReferenceConstants::amf_plus_max_size == 2700);
  // A natural-log median of -4.6212 is a distance of order 1e-2.
  CHECK(std::exp(ReferenceConstants::amf_plus_median) == doctest::Approx(0.0098409797970902429).epsilon(1e-12));
  CHECK(std::pow(10.0, ReferenceConstants::amf_plus_median) < 1e-4);
  const auto j = ReferenceConstants::to_json();
  CHECK(j["civil_violence_median_log_od"]["amf_plus"] == -4.6212);
}

TEST_CASE("variational labels") {
  CHECK(variational_label(0.5) == "rm_fm_var(0.5)");
  CHECK(variational_label(0.0) == "rm_fm_var(0)");
  CHECK(variational_label(1e-4) == "rm_fm_var(1e-04)");
  CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("folds: k-fold and single split") {
  auto cfg = small_config("brouwer", 100, 1);
  const auto brouwer = domains::make_domain("brouwer");
  const auto folds = prepare_folds(*brouwer, cfg);
  REQUIRE(folds.size() == 10);
  for (const auto& f : folds) {
    CHECK(f.train.size() == 90);
    CHECK(f.test.size() == 10);
    CHECK(f.queries.size() == 10);
  }
  cfg.folds = {2, 5};
  const auto some = prepare_folds(*brouwer, cfg);
  REQUIRE(some.size() == 2);
  CHECK(some[1].index == 5);
  CHECK(some[1].train.alp == folds[5].train.alp);

  auto fk = small_config("fk_full", 300, 1);
  const auto single = prepare_folds(*domains::make_domain("fk_full"), fk);
  REQUIRE(single.size() == 1);
  CHECK(single[0].train.size() == 300);
  CHECK(single[0].test.size() == 1000);
}

TEST_CASE("run_experiment: sample counts, determinism, report files") {
  auto cfg = small_config("brouwer", 100, 3);
  cfg.alphas = {0.0};
  const auto domain = domains::make_domain("brouwer");
  const auto a = run_experiment(*domain, cfg);
  const auto b = run_experiment(*domain, cfg);
  CHECK(to_json(a).dump() == to_json(b).dump());
  REQUIRE(a.folds.size() == 10);
  CHECK(a.methods == std::vector<std::string>{"rm_fm", "rm_fm_var(0)", "random"});
  std::map<std::string, std::size_t> count;
  for (const auto& f : a.folds) {
    CHECK_FALSE(f.error.has_value());
    CHECK(f.fm_hash_trained == f.fm_hash_final);
    for (const auto& od : f.od) {
      ++count[od.method];
      CHECK(od.value >= 0.0);
    }
    for (const auto& k : {"fm", "rm", "rm_fm", "rm_fm_var(0)"}) {
      CHECK(f.train_mse.count(k) == 1);
      CHECK(f.test_mse.count(k) == 1);
    }
  }
  for (const auto& m : a.methods) CHECK(count[m] == 100);
  for (const auto& m : a.methods) CHECK(a.median_log_od.at(m).has_value());

  const auto dir = temp_dir("report");
  write_report(a, dir);
  for (const char* f : {"report.json", "mse.csv", "od.csv", "loss.csv"}) CHECK(std::filesystem::exists(dir / f));
  const auto j = to_json(a);
  CHECK(j["reference"]["civil_violence_median_log_od"]["amf_plus"] == -4.6212);
}

TEST_CASE("assemble: zero substitution and all-zero medians") {
  ExperimentConfig cfg;
  cfg.alphas = {};
  FoldResult f;
  f.od = {{0, 0, "rm_fm", 0.0}, {0, 1, "rm_fm", 0.5}, {0, 0, "random", 0.25}, {0, 1, "random", 0.0}};
  auto r = assemble("brouwer", {f}, cfg);
  CHECK(r.zero_substitute == 0.25);
  CHECK(*r.median_log_od.at("rm_fm") == doctest::Approx(0.5 * (std::log(0.25) + std::log(0.5))));

  FoldResult z;
  z.od = {{0, 0, "rm_fm", 0.0}, {0, 0, "random", 0.0}};
  auto zr = assemble("brouwer", {z}, cfg);
  CHECK_FALSE(zr.median_log_od.at("rm_fm").has_value());
}

TEST_CASE("sweep: argument checks and consistency") {
  auto cfg = small_config("brouwer", 100, 2);
  cfg.alphas = {};
  cfg.k = 2;
  cfg.instances_per_fold = 3;
  const auto domain = domains::make_domain("brouwer");
  CHECK_THROWS_AS(dataset_size_sweep(*domain, std::vector<std::size_t>{}, cfg), UsageError);
  CHECK_THROWS_AS(dataset_size_sweep(*domain, std::vector<std::size_t>{50, 20}, cfg), UsageError);

  const std::vector<std::size_t> sizes{100};
  const auto sweep = dataset_size_sweep(*domain, sizes, cfg);
  REQUIRE(sweep.size() == 1);
  CHECK(to_json(sweep[0].report).dump() == to_json(run_experiment(*domain, cfg)).dump());
  CHECK(sweep[0].od.count("rm_fm") == 1);
}

TEST_CASE("sample cloud: single point has no spread") {
  auto cfg = small_config("fk_full", 200, 2);
  cfg.alphas = {0.0};
  const auto domain = domains::make_domain("fk_full");
  const auto folds = prepare_folds(*domain, cfg);
  const auto models = train_fold(domain->spec(), folds[0], cfg);
  const auto& q = folds[0].queries[0].slp;
  const auto one = sample_cloud_analysis(models.rm_var[0], models.fm, *domain, q, 1, 0, 1);
  CHECK(one.spread_alp == 0.0);
  CHECK(one.spread_slp == 0.0);
  CHECK(one.spread_slp_simulated == 0.0);
  const auto many = sample_cloud_analysis(models.rm_var[0], models.fm, *domain, q, 20, 0, 1);
  CHECK(many.alp_points.size() == 20);
  CHECK(many.simulated_slp_points.size() == 20);
  for (double v : many.od_values) CHECK(v >= 0.0);
  CHECK_THROWS_AS(sample_cloud_analysis(models.rm_fm, models.fm, *domain, q, 3, 0, 1), UsageError);
}
