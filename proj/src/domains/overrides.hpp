#pragma once

#include <set>
#include <string>

#include <json.hpp>

#include "pbd/error.hpp"

namespace pbd::domains::detail {

/// Reads model parameters from a JSON object, rejecting unknown keys.
class Overrides {
 public:
  Overrides(std::string domain, const nlohmann::json& doc) : domain_(std::move(domain)), doc_(doc) {
    if (!doc_.is_object()) throw ConfigError(domain_ + ": overrides must be a JSON object");
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    known_.insert(key);
    if (!doc_.contains(key)) return fallback;
    try {
      return doc_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(domain_ + ": bad value for '" + key + "'");
    }
  }

  void finish() const {
    for (const auto& [key, _] : doc_.items()) {
      if (!known_.count(key)) throw ConfigError(domain_ + ": unknown parameter '" + key + "'");
    }
  }

 private:
  std::string domain_;
  const nlohmann::json& doc_;
  std::set<std::string> known_;
};

}  // namespace pbd::domains::detail
