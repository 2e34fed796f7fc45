#pragma once

#include <filesystem>

#include <json.hpp>

#include "pbd/nn/network.hpp"

namespace pbd::nn {

/// JSON model document:
/// {spec: {layers: [{in, out, activation}], variational, latent_size, encoder_depth},
///  weights: [[[...row...], ...] per layer], biases: [[...] per layer],
///  mu_head?: {weight, bias}, logvar_head?: {weight, bias}, frozen}
/// Doubles are written in shortest round-trip form, so load(save(x)) == x bitwise.
nlohmann::json to_json(const Network& net);
Network network_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const NetworkSpec& spec);
NetworkSpec spec_from_json(const nlohmann::json& doc);

}  // namespace pbd::nn
