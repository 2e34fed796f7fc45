#include <fstream>
#include <sstream>

#include "pbd/error.hpp"
#include "pbd/nn/serialize.hpp"
#include "pbd/surrogate/surrogate.hpp"

namespace pbd::surrogate {

using nlohmann::json;

namespace {

std::string hex(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << v;
  return s.str();
}

std::uint64_t parse_hex(const std::string& s) {
  try {
    std::size_t pos = 0;
    const auto v = std::stoull(s, &pos, 16);
    if (pos != s.size()) throw ParseError("bad hash '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw ParseError("bad hash '" + s + "'");
  }
}

}  // namespace

json to_json(const FmModel& fm) {
  json doc = nn::to_json(fm.net);
  doc["kind"] = "fm";
  doc["domain"] = fm.domain_name;
  doc["scaler"] = fm.scaler.to_json();
  return doc;
}

json to_json(const RmModel& rm) {
  json doc = nn::to_json(rm.net);
  doc["kind"] = std::string(to_string(rm.kind));
  doc["domain"] = rm.domain_name;
  doc["scaler"] = rm.scaler.to_json();
  json ranges = json::array();
  for (const auto& r : rm.alp_ranges) ranges.push_back({r.low, r.high});
  doc["alp_ranges"] = ranges;
  doc["fm_hash"] = rm.fm_hash ? json(hex(*rm.fm_hash)) : json(nullptr);
  doc["alpha"] = rm.alpha;
  return doc;
}

FmModel fm_from_json(const json& doc) {
  try {
    if (doc.at("kind").get<std::string>() != "fm") throw ParseError("document is not an FM");
    FmModel fm;
    fm.net = nn::network_from_json(doc);
    fm.domain_name = doc.at("domain").get<std::string>();
    fm.scaler = data::Scaler::from_json(doc.at("scaler"));
    return fm;
  } catch (const json::exception& e) {
    throw ParseError(std::string("FM document: ") + e.what());
  }
}

RmModel rm_from_json(const json& doc) {
  try {
    RmModel rm;
    rm.kind = model_kind_from_string(doc.at("kind").get<std::string>());
    if (rm.kind == ModelKind::fm) throw ParseError("document is an FM, not an RM");
    rm.net = nn::network_from_json(doc);
    rm.domain_name = doc.at("domain").get<std::string>();
    rm.scaler = data::Scaler::from_json(doc.at("scaler"));
    for (const auto& r : doc.at("alp_ranges")) rm.alp_ranges.push_back({r.at(0).get<double>(), r.at(1).get<double>()});
    if (!doc.at("fm_hash").is_null()) rm.fm_hash = parse_hex(doc.at("fm_hash").get<std::string>());
    rm.alpha = doc.at("alpha").get<double>();
    if (rm.alp_ranges.size() != rm.net.spec.output_size()) throw ParseError("alp_ranges do not match the network");
    return rm;
  } catch (const json::exception& e) {
    throw ParseError(std::string("RM document: ") + e.what());
  }
}

void save_json(const json& doc, const std::filesystem::path& path) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << doc.dump(1) << '\n';
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifactError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace pbd::surrogate
