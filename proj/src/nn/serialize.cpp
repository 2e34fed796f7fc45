#include "pbd/nn/serialize.hpp"

#include "pbd/error.hpp"

namespace pbd::nn {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows; ++r) {
    auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

Matrix matrix_from_json(const json& rows, std::size_t expect_rows, std::size_t expect_cols) {
  if (!rows.is_array() || rows.size() != expect_rows) throw ShapeError("weight matrix row count mismatch");
  Matrix m(expect_rows, expect_cols);
  for (std::size_t r = 0; r < expect_rows; ++r) {
    const auto& row = rows[r];
    if (!row.is_array() || row.size() != expect_cols) throw ShapeError("weight matrix column count mismatch");
    for (std::size_t c = 0; c < expect_cols; ++c) m(r, c) = row[c].get<double>();
  }
  return m;
}

std::vector<double> vector_from_json(const json& v, std::size_t expect) {
  if (!v.is_array() || v.size() != expect) throw ShapeError("bias length mismatch");
  return v.get<std::vector<double>>();
}

json head_to_json(const DenseParams& p) { return {{"weight", matrix_to_json(p.weight)}, {"bias", p.bias}}; }

DenseParams head_from_json(const json& doc, std::size_t in, std::size_t out) {
  return {matrix_from_json(doc.at("weight"), out, in), vector_from_json(doc.at("bias"), out)};
}

}  // namespace

json to_json(const NetworkSpec& spec) {
  json layers = json::array();
  for (const auto& l : spec.layers) {
    layers.push_back({{"in", l.input_size}, {"out", l.output_size}, {"activation", std::string(to_string(l.activation))}});
  }
  return {{"layers", layers},
          {"variational", spec.variational},
          {"latent_size", spec.latent_size},
          {"encoder_depth", spec.encoder_depth}};
}

NetworkSpec spec_from_json(const json& doc) {
  try {
    NetworkSpec spec;
    for (const auto& l : doc.at("layers")) {
      spec.layers.push_back({l.at("in").get<std::size_t>(), l.at("out").get<std::size_t>(),
                             activation_from_string(l.at("activation").get<std::string>())});
    }
    spec.variational = doc.value("variational", false);
    spec.latent_size = doc.value("latent_size", std::size_t{0});
    spec.encoder_depth = doc.value("encoder_depth", std::size_t{0});
    spec.validate();
    return spec;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed network spec: ") + e.what());
  }
}

json to_json(const Network& net) {
  json weights = json::array();
  json biases = json::array();
  for (const auto& l : net.params.layers) {
    weights.push_back(matrix_to_json(l.weight));
    biases.push_back(l.bias);
  }
  json doc = {{"spec", to_json(net.spec)}, {"weights", weights}, {"biases", biases}, {"frozen", net.params.frozen}};
  if (net.params.mu_head) doc["mu_head"] = head_to_json(*net.params.mu_head);
  if (net.params.logvar_head) doc["logvar_head"] = head_to_json(*net.params.logvar_head);
  return doc;
}

Network network_from_json(const json& doc) {
  try {
    Network net;
    net.spec = spec_from_json(doc.at("spec"));
    const auto& weights = doc.at("weights");
    const auto& biases = doc.at("biases");
    if (weights.size() != net.spec.layers.size() || biases.size() != net.spec.layers.size()) {
      throw ShapeError("layer count mismatch in model document");
    }
    for (std::size_t i = 0; i < net.spec.layers.size(); ++i) {
      const auto& l = net.spec.layers[i];
      net.params.layers.push_back(
          {matrix_from_json(weights[i], l.output_size, l.input_size), vector_from_json(biases[i], l.output_size)});
    }
    if (net.spec.variational) {
      net.params.mu_head = head_from_json(doc.at("mu_head"), net.spec.encoder_output_size(), net.spec.latent_size);
      net.params.logvar_head =
          head_from_json(doc.at("logvar_head"), net.spec.encoder_output_size(), net.spec.latent_size);
    }
    net.params.frozen = doc.value("frozen", false);
    check_shapes(net.spec, net.params);
    return net;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed model document: ") + e.what());
  }
}

}  // namespace pbd::nn
