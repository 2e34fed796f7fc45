#include <fstream>
#include <sstream>

#include "pbd/error.hpp"
#include "pbd/eval/eval.hpp"

namespace pbd::eval {

using nlohmann::json;

namespace {

std::string hex(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << v;
  return s.str();
}

json stat_json(const MseStat& s) { return {{"mean", s.mean}, {"std", s.std}}; }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

json to_json(const EvalReport& report) {
  json folds = json::array();
  json od = json::array();
  for (const auto& f : report.folds) {
    json losses = json::object();
    for (const auto& [k, l] : f.final_loss) {
      losses[k] = {{"reconstruction", l.reconstruction}, {"kl", l.kl}, {"total", l.total}};
    }
    folds.push_back({{"fold", f.fold},
                     {"error", f.error ? json(*f.error) : json(nullptr)},
                     {"train_mse", f.train_mse},
                     {"test_mse", f.test_mse},
                     {"final_loss", losses},
                     {"fm_hash_trained", hex(f.fm_hash_trained)},
                     {"fm_hash_final", hex(f.fm_hash_final)}});
    for (const auto& s : f.od) {
      od.push_back({{"fold", s.fold}, {"instance", s.instance}, {"method", s.method}, {"value", s.value}});
    }
  }
  json mse = json::object();
  for (const auto& [k, s] : report.train_mse) mse[k]["train"] = stat_json(s);
  for (const auto& [k, s] : report.test_mse) mse[k]["test"] = stat_json(s);
  json medians = json::object();
  for (const auto& [k, v] : report.median_log_od) medians[k] = v ? json(*v) : json(nullptr);
  return {{"domain", report.domain},
          {"methods", report.methods},
          {"folds", folds},
          {"network_mse", mse},
          {"output_difference_samples", od},
          {"summary", {{"median_log_od", medians}, {"zero_substitute", report.zero_substitute}}},
          {"reference", ReferenceConstants::to_json()}};
}

json to_json(const std::vector<SweepPoint>& sweep) {
  json points = json::array();
  for (const auto& p : sweep) {
    json od = json::object();
    for (const auto& [k, s] : p.od) od[k] = stat_json(s);
    points.push_back({{"size", p.size}, {"output_difference", od}, {"report", to_json(p.report)}});
  }
  return {{"sweep", points}};
}

json to_json(const SampleCloud& c) {
  return {{"alp_points", c.alp_points},
          {"slp_points", c.slp_points},
          {"simulated_slp_points", c.simulated_slp_points},
          {"spread_alp", c.spread_alp},
          {"spread_slp", c.spread_slp},
          {"spread_slp_simulated", c.spread_slp_simulated},
          {"od_values", c.od_values}};
}

void write_report(const EvalReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "report.json", to_json(report).dump(1) + "\n");

  std::string mse = "fold,network,split,mse\n";
  std::string od = "fold,instance,method,value\n";
  std::string loss = "fold,network,reconstruction,kl,total\n";
  for (const auto& f : report.folds) {
    const std::string fold = std::to_string(f.fold);
    for (const auto& [k, v] : f.train_mse) mse += fold + "," + k + ",train," + format_double(v) + "\n";
    for (const auto& [k, v] : f.test_mse) mse += fold + "," + k + ",test," + format_double(v) + "\n";
    for (const auto& s : f.od) {
      od += fold + "," + std::to_string(s.instance) + "," + s.method + "," + format_double(s.value) + "\n";
    }
    for (const auto& [k, l] : f.final_loss) {
      loss += fold + "," + k + "," + format_double(l.reconstruction) + "," + format_double(l.kl) + "," +
              format_double(l.total) + "\n";
    }
  }
  write_text(dir / "mse.csv", mse);
  write_text(dir / "od.csv", od);
  write_text(dir / "loss.csv", loss);
}

void write_sweep(const std::vector<SweepPoint>& sweep, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "sweep.json", to_json(sweep).dump(1) + "\n");
  std::string csv = "size,method,od_mean,od_std\n";
  for (const auto& p : sweep) {
    for (const auto& [k, s] : p.od) {
      csv += std::to_string(p.size) + "," + k + "," + format_double(s.mean) + "," + format_double(s.std) + "\n";
    }
  }
  write_text(dir / "sweep.csv", csv);
}

}  // namespace pbd::eval
