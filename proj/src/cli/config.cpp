#include <fstream>
#include <set>

#include "pbd/cli/cli.hpp"
#include "pbd/error.hpp"

namespace pbd::cli {

using nlohmann::json;

namespace {

// Reads keys from one JSON object and rejects the ones nobody asked for.
class Reader {
 public:
  Reader(const json& doc, std::string where) : doc_(doc), where_(std::move(where)) {
    if (!doc_.is_object()) throw ConfigError(where_ + " must be an object");
  }

  template <class T>
  void read(const std::string& key, T& value) {
    seen_.insert(key);
    if (!doc_.contains(key)) return;
    try {
      value = doc_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
  }

  const json* child(const std::string& key) {
    seen_.insert(key);
    return doc_.contains(key) ? &doc_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [k, v] : doc_.items()) {
      if (!seen_.count(k)) throw ConfigError("unknown config key " + where_ + "." + k);
    }
  }

 private:
  const json& doc_;
  std::string where_;
  std::set<std::string> seen_;
};

void read_train(Reader& r, surrogate::TrainConfig& c) {
  r.read("epochs", c.epochs);
  r.read("batch_size", c.batch_size);
  r.read("seed", c.seed);
  r.read("learning_rate", c.adam.learning_rate);
  r.read("beta1", c.adam.beta1);
  r.read("beta2", c.adam.beta2);
  r.read("epsilon", c.adam.epsilon);
}

json train_json(const surrogate::TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"seed", c.seed},
          {"learning_rate", c.adam.learning_rate},
          {"beta1", c.adam.beta1},
          {"beta2", c.adam.beta2},
          {"epsilon", c.adam.epsilon}};
}

}  // namespace

eval::ExperimentConfig config_from_json(const json& doc) {
  eval::ExperimentConfig c;
  Reader top(doc, "config");
  top.read("domain", c.domain);
  if (const json* o = top.child("overrides")) {
    if (!o->is_object()) throw ConfigError("config.overrides must be an object");
    c.overrides = *o;
  }
  if (const json* d = top.child("dataset")) {
    Reader r(*d, "dataset");
    r.read("n", c.n);
    r.read("seed", c.data_seed);
    r.finish();
  }
  if (const json* f = top.child("folds")) {
    Reader r(*f, "folds");
    r.read("k", c.k);
    r.read("seed", c.fold_seed);
    r.read("run", c.folds);
    r.finish();
  }
  if (const json* t = top.child("training")) {
    Reader r(*t, "training");
    surrogate::TrainConfig shared;
    read_train(r, shared);
    c.training = {shared, shared, shared, shared};
    const std::pair<const char*, surrogate::TrainConfig*> kinds[] = {
        {"fm", &c.training.fm}, {"rm", &c.training.rm}, {"rm_fm", &c.training.rm_fm}, {"rm_var", &c.training.rm_var}};
    for (const auto& [name, target] : kinds) {
      if (const json* k = r.child(name)) {
        Reader kr(*k, std::string("training.") + name);
        read_train(kr, *target);
        kr.finish();
      }
    }
    r.finish();
  }
  top.read("alphas", c.alphas);
  if (const json* e = top.child("evaluation")) {
    Reader r(*e, "evaluation");
    r.read("instances_per_fold", c.instances_per_fold);
    r.read("sim_seed", c.sim_seed);
    r.read("sweep_sizes", c.sweep_sizes);
    r.finish();
  }
  std::string out = c.output_dir.string();
  top.read("output_dir", out);
  c.output_dir = out;
  top.read("threads", c.threads);
  top.finish();

  for (double a : c.alphas) {
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("alphas must lie in [0, 1]");
  }
  if (c.k == 0) throw ConfigError("folds.k must be positive");
  return c;
}

json to_json(const eval::ExperimentConfig& c) {
  return {{"domain", c.domain},
          {"overrides", c.overrides},
          {"dataset", {{"n", c.n}, {"seed", c.data_seed}}},
          {"folds", {{"k", c.k}, {"seed", c.fold_seed}, {"run", c.folds}}},
          {"training",
           {{"fm", train_json(c.training.fm)},
            {"rm", train_json(c.training.rm)},
            {"rm_fm", train_json(c.training.rm_fm)},
            {"rm_var", train_json(c.training.rm_var)}}},
          {"alphas", c.alphas},
          {"evaluation",
           {{"instances_per_fold", c.instances_per_fold}, {"sim_seed", c.sim_seed}, {"sweep_sizes", c.sweep_sizes}}},
          {"output_dir", c.output_dir.string()},
          {"threads", c.threads}};
}

eval::ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path.string());
  try {
    return config_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void apply(eval::ExperimentConfig& c, const Overrides& f) {
  if (f.domain) c.domain = *f.domain;
  if (f.n) c.n = *f.n;
  if (f.seed) {
    c.data_seed = *f.seed;
    c.fold_seed = *f.seed;
    for (auto* t : {&c.training.fm, &c.training.rm, &c.training.rm_fm, &c.training.rm_var}) t->seed = *f.seed;
  }
  if (f.k) c.k = *f.k;
  if (f.epochs) {
    for (auto* t : {&c.training.fm, &c.training.rm, &c.training.rm_fm, &c.training.rm_var}) t->epochs = *f.epochs;
  }
  if (!f.alphas.empty()) {
    for (double a : f.alphas) {
      if (!(a >= 0.0 && a <= 1.0)) throw UsageError("--alpha must lie in [0, 1]");
    }
    c.alphas = f.alphas;
  }
  if (f.out) c.output_dir = *f.out;
  if (!f.sizes.empty()) c.sweep_sizes = f.sizes;
  if (f.threads) c.threads = *f.threads;
}

}  // namespace pbd::cli
