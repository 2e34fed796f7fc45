#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "pbd/data/dataset.hpp"
#include "pbd/data/scaler.hpp"
#include "pbd/domains/domain.hpp"
#include "pbd/error.hpp"
#include "pbd/eval/eval.hpp"
#include "pbd/surrogate/surrogate.hpp"

using namespace pbd;
using namespace pbd::surrogate;

namespace {

struct Prepared {
  std::unique_ptr<domains::Domain> domain;
  data::Dataset dataset;
  data::Scaler scaler;
  data::ModelSpaceData train;
};

Prepared prepare(const std::string& name, std::size_t n, const nlohmann::json& overrides = nlohmann::json::object()) {
  Prepared p;
  p.domain = domains::make_domain(name, overrides);
  p.dataset = data::generate(*p.domain, n, 0);
  p.scaler = data::Scaler::fit(p.dataset.samples);
  p.train = data::to_model_space(p.scaler, p.dataset.samples);
  return p;
}

TrainConfig quick(std::size_t epochs, double alpha = 0.0) {
  TrainConfig c;
  c.epochs = epochs;
  c.alpha = alpha;
  return c;
}

std::filesystem::path temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / "pbd_surrogate_test";
  std::filesystem::create_directories(dir);
  return dir;
}

std::vector<std::size_t> reversed(std::vector<std::size_t> v) {
  std::reverse(v.begin(), v.end());
  return v;
}

}  // namespace

TEST_CASE("architecture: widths and activations") {
  CHECK(nn::layer_widths(build_rm(1, 2, false)) == std::vector<std::size_t>{2, 4, 4, 2, 1});
  CHECK(nn::layer_widths(build_fm(1, 2)) == std::vector<std::size_t>{1, 2, 4, 4, 2});
  CHECK(nn::layer_widths(build_rm(1, 1, false)) == std::vector<std::size_t>{1, 2, 1, 2, 1});
  const auto var = build_rm(3, 3, true);
  CHECK(var.variational);
  CHECK(var.latent_size == 9);
  CHECK(var.encoder_depth == 1);
  CHECK(nn::layer_widths(var) == std::vector<std::size_t>{3, 6, 9, 6, 3});

  for (std::size_t a = 1; a <= 4; ++a) {
    for (std::size_t s = 1; s <= 4; ++s) {
      const auto rm = build_rm(a, s, false), fm = build_fm(a, s);
      CHECK(nn::layer_widths(rm) == reversed(nn::layer_widths(fm)));
      CHECK(nn::layer_widths(build_rm(a, s, true)) == nn::layer_widths(rm));
      for (std::size_t i = 0; i + 1 < rm.layers.size(); ++i) {
        CHECK(rm.layers[i].activation == nn::Activation::relu);
        CHECK(fm.layers[i].activation == nn::Activation::sigmoid);
      }
      CHECK(rm.layers.back().activation == nn::Activation::linear);
      CHECK(fm.layers.back().activation == nn::Activation::linear);
    }
  }
}

TEST_CASE("train_fm: zero epochs keep the initialization") {
  const auto p = prepare("brouwer", 50);
  auto [fm, trace] = train_fm(p.train, p.scaler, "brouwer", quick(0));
  CHECK(trace.empty());
  CHECK(fm.net.params.frozen);
  auto init = nn::init_parameters(build_fm(1, 1), 0);
  init.frozen = true;
  CHECK(fm.net.params == init);
}

TEST_CASE("train_fm: deterministic and one record per epoch") {
  const auto p = prepare("fk_full", 300);
  const auto a = train_fm(p.train, p.scaler, "fk_full", quick(7));
  const auto b = train_fm(p.train, p.scaler, "fk_full", quick(7));
  CHECK(a.first.hash() == b.first.hash());
  REQUIRE(a.second.size() == 7);
  for (std::size_t i = 0; i < 7; ++i) {
    CHECK(a.second[i].epoch == i + 1);
    CHECK(a.second[i].total == b.second[i].total);
    CHECK(a.second[i].kl == 0.0);
    CHECK(a.second[i].total == a.second[i].reconstruction);
  }
  CHECK(a.second.back().total < a.second.front().total);
}

TEST_CASE("train_fm: brouwer at full size reaches the published MSE band") {
  const auto p = prepare("brouwer", 10000);
  const auto [fm, trace] = train_fm(p.train, p.scaler, "brouwer", TrainConfig{});
  const double mse = eval::fm_mse(fm, p.train);
  CHECK(mse >= 0.02);
  CHECK(mse <= 0.10);
}

TEST_CASE("train_fm: non-finite loss names the epoch") {
  auto p = prepare("brouwer", 40);
  p.train.slp.data[3] = 1e200;
  try {
    train_fm(p.train, p.scaler, "brouwer", quick(3));
    FAIL("expected TrainingError");
  } catch (const TrainingError& e) {
    CHECK(std::string(e.what()).find("epoch 1") != std::string::npos);
  }
}

TEST_CASE("train_rm_concat: learns the identity through an identity FM") {
  // Toy domain whose SLP equals its ALP.
  domains::DomainSpec spec{.name = "toy",
                           .alp_dim = 2,
                           .slp_dim = 2,
                           .alp_ranges = {{0.0, 1.0}, {0.0, 1.0}},
                           .slp_ranges = {{0.0, 1.0}, {0.0, 1.0}},
                           .stochastic = false,
                           .default_total_size = 500,
                           .single_split_test_size = 0,
                           .projection = std::nullopt};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<data::Sample> samples;
  for (int i = 0; i < 500; ++i) {
    const std::vector<double> v{u(rng), u(rng)};
    samples.push_back({v, v});
  }
  const auto scaler = data::Scaler::fit(samples);
  const auto train = data::to_model_space(scaler, samples);

  FmModel fm;
  fm.net.spec.layers = {{2, 2, nn::Activation::linear}};
  fm.net.params = nn::init_parameters(fm.net.spec, 0);
  fm.net.params.layers[0].weight = nn::Matrix(2, 2);
  fm.net.params.layers[0].weight(0, 0) = 1.0;
  fm.net.params.layers[0].weight(1, 1) = 1.0;
  fm.net.params.frozen = true;
  fm.scaler = scaler;
  fm.domain_name = "toy";
  const auto before = fm.hash();

  const auto [rm, trace] = train_rm_concat(train, fm, spec, quick(150));
  CHECK(fm.hash() == before);
  CHECK(rm.fm_hash == before);
  CHECK(rm.kind == ModelKind::rm_fm);
  CHECK(trace.back().reconstruction / 2.0 < 1e-3);
  CHECK(eval::composite_mse(rm, fm, train, 0) < 1e-3);
}

TEST_CASE("train_rm_concat: contract checks and FM freezing") {
  const auto p = prepare("fk_a", 200);
  auto [fm, fm_trace] = train_fm(p.train, p.scaler, "fk_a", quick(2));
  const auto before = fm.hash();
  const auto [rm, trace] = train_rm_concat(p.train, fm, p.domain->spec(), quick(3));
  CHECK(fm.hash() == before);
  CHECK(*rm.fm_hash == before);
  CHECK(trace.size() == 3);

  auto unfrozen = fm;
  unfrozen.net.params.frozen = false;
  CHECK_THROWS_AS(train_rm_concat(p.train, unfrozen, p.domain->spec(), quick(1)), UsageError);
  auto other = fm;
  other.domain_name = "fk_b";
  CHECK_THROWS_AS(train_rm_concat(p.train, other, p.domain->spec(), quick(1)), UsageError);
}

TEST_CASE("train_rm_variational: loss arithmetic") {
  const auto p = prepare("fk_full", 200);
  auto [fm, fm_trace] = train_fm(p.train, p.scaler, "fk_full", quick(3));
  const auto before = fm.hash();

  const auto [zero, t0] = train_rm_variational(p.train, fm, p.domain->spec(), quick(6, 0.0));
  CHECK(zero.kind == ModelKind::rm_var);
  for (const auto& r : t0) CHECK(r.total == r.reconstruction);

  const auto [half, t5] = train_rm_variational(p.train, fm, p.domain->spec(), quick(6, 0.5));
  CHECK(half.alpha == 0.5);
  for (const auto& r : t5) {
    CHECK(r.kl > 0.0);
    CHECK(std::abs(r.total - (0.5 * r.reconstruction + 0.5 * r.kl)) < 1e-12);
  }
  const auto [small, ts] = train_rm_variational(p.train, fm, p.domain->spec(), quick(4, 1e-4));
  for (const auto& r : ts) CHECK(std::abs(r.total - ((1 - 1e-4) * r.reconstruction + 1e-4 * r.kl)) < 1e-12);
  CHECK(fm.hash() == before);

  CHECK_THROWS_AS(train_rm_variational(p.train, fm, p.domain->spec(), quick(1, 1.5)), DomainError);
  CHECK_THROWS_AS(train_rm_variational(p.train, fm, p.domain->spec(), quick(1, -0.1)), DomainError);
}

TEST_CASE("train_rm_direct: fits SLP -> ALP") {
  const auto p = prepare("brouwer", 300);
  const auto [rm, trace] = train_rm_direct(p.train, p.scaler, p.domain->spec(), quick(5));
  CHECK(rm.kind == ModelKind::rm);
  CHECK_FALSE(rm.fm_hash.has_value());
  CHECK(trace.size() == 5);
}

TEST_CASE("suggest: constant network, clamping, mean path") {
  const auto p = prepare("fk_full", 100);
  RmModel rm;
  rm.kind = ModelKind::rm;
  rm.net.spec = build_rm(2, 2, false);
  rm.net.params = nn::init_parameters(rm.net.spec, 1);
  auto& last = rm.net.params.layers.back();
  std::fill(last.weight.data.begin(), last.weight.data.end(), 0.0);
  last.bias = {0.3, -0.2};
  rm.scaler = p.scaler;
  rm.domain_name = "fk_full";
  rm.alp_ranges = p.domain->spec().alp_ranges;

  const auto expected = p.scaler.invert_alp(std::vector<double>{0.3, -0.2});
  for (const auto& q : {std::vector<double>{0.1, 0.9}, std::vector<double>{0.5, 0.5}}) {
    const auto s = suggest(rm, q);
    CHECK(s[0] == doctest::Approx(expected[0]).epsilon(1e-14));
    CHECK(s[1] == doctest::Approx(expected[1]).epsilon(1e-14));
  }
  last.bias = {100.0, -100.0};
  const auto clamped = suggest(rm, std::vector<double>{0.1, 0.9});
  CHECK(clamped[0] == rm.alp_ranges[0].high);
  CHECK(clamped[1] == rm.alp_ranges[1].low);

  CHECK_THROWS_AS(suggest(rm, std::vector<double>{0.1}), ShapeError);
  CHECK_THROWS_AS(suggest_many(rm, std::vector<double>{0.1, 0.2}, 3, 0), UsageError);
}

TEST_CASE("suggest: brouwer suggestions stay in range") {
  const auto p = prepare("brouwer", 500);
  auto [fm, ft] = train_fm(p.train, p.scaler, "brouwer", quick(5));
  const auto [rm, rt] = train_rm_concat(p.train, fm, p.domain->spec(), quick(5));
  const auto q = p.scaler.transform_slp(std::vector<double>{domains::eval_brouwer(0.25)});
  const auto a = suggest(rm, q);
  CHECK(a == suggest(rm, q));
  CHECK((a[0] >= 0.0 && a[0] <= 1.0));
}

TEST_CASE("suggest_many: determinism, mean path, clamp floor") {
  const auto p = prepare("fk_full", 200);
  auto [fm, ft] = train_fm(p.train, p.scaler, "fk_full", quick(2));
  auto [rm, rt] = train_rm_variational(p.train, fm, p.domain->spec(), quick(2, 0.5));
  const std::vector<double> q{0.4, 0.6};

  CHECK(suggest_many(rm, q, 1, 5) == suggest_many(rm, q, 1, 5));
  CHECK(suggest_many(rm, q, 100, 5).size() == 100);

  const auto mean_path = nn::forward(rm.net.params, rm.net.spec, q);
  CHECK(suggest(rm, q) == p.scaler.invert_alp(mean_path.output));

  auto& head = *rm.net.params.logvar_head;
  std::fill(head.weight.data.begin(), head.weight.data.end(), 0.0);
  std::fill(head.bias.begin(), head.bias.end(), -1e6);
  const auto centre = suggest(rm, q);
  for (const auto& s : suggest_many(rm, q, 50, 9)) {
    for (std::size_t i = 0; i < 2; ++i) {
      const double width = rm.alp_ranges[i].width();
      CHECK(std::abs(s[i] - centre[i]) / width < 1e-2);
    }
  }
}

TEST_CASE("model files round trip bitwise") {
  const auto p = prepare("fk_b", 120);
  auto [fm, ft] = train_fm(p.train, p.scaler, "fk_b", quick(2));
  auto [rm, rt] = train_rm_variational(p.train, fm, p.domain->spec(), quick(2, 1e-4));
  const auto dir = temp_dir();
  save_json(to_json(fm), dir / "fm.json");
  save_json(to_json(rm), dir / "rm.json");

  const auto fm2 = fm_from_json(load_json(dir / "fm.json"));
  CHECK(fm2.hash() == fm.hash());
  CHECK(fm2.scaler == fm.scaler);
  CHECK(fm2.net.params.frozen);
  const auto rm2 = rm_from_json(load_json(dir / "rm.json"));
  CHECK(nn::content_hash(rm2.net) == nn::content_hash(rm.net));
  CHECK(rm2.kind == ModelKind::rm_var);
  CHECK(rm2.fm_hash == rm.fm_hash);
  CHECK(rm2.alpha == 1e-4);
  CHECK(rm2.alp_ranges == rm.alp_ranges);

  CHECK_THROWS_AS(load_json(dir / "absent.json"), MissingArtifactError);
  std::ofstream(dir / "broken.json") << "{ not json";
  CHECK_THROWS_AS(load_json(dir / "broken.json"), ParseError);
}

TEST_CASE("loss trace CSV round trip") {
  const LossTrace t{{1, 0.5, 0.25, 0.375}, {2, 0.1 + 0.2, 1e-17, 0.15000000000000002}};
  const auto path = temp_dir() / "trace.csv";
  write_trace_csv(t, path);
  const auto back = read_trace_csv(path);
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back[i].epoch == t[i].epoch);
    CHECK(back[i].reconstruction == t[i].reconstruction);
    CHECK(back[i].kl == t[i].kl);
    CHECK(back[i].total == t[i].total);
  }
}

TEST_CASE("model kind names") {
  for (auto k : {ModelKind::fm, ModelKind::rm, ModelKind::rm_fm, ModelKind::rm_var}) {
    CHECK(model_kind_from_string(to_string(k)) == k);
  }
  CHECK_THROWS(model_kind_from_string("nope"));
}
