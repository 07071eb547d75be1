#pragma once

#include <rldp/diffcore/autodiff.hpp>
#include <rldp/diffcore/param_store.hpp>
#include <rldp/diffcore/random.hpp>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace rldp {

enum class Activation { relu, tanh, none };
enum class OutputTransform { none, tanh, sphere };

inline const char* to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::none: return "none";
  }
  return "?";
}

inline const char* to_string(OutputTransform t) {
  switch (t) {
    case OutputTransform::none: return "none";
    case OutputTransform::tanh: return "tanh";
    case OutputTransform::sphere: return "sphere";
  }
  return "?";
}

inline Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  if (s == "none") return Activation::none;
  throw std::invalid_argument("unknown activation '" + s + "'");
}

inline OutputTransform output_transform_from_string(const std::string& s) {
  if (s == "none") return OutputTransform::none;
  if (s == "tanh") return OutputTransform::tanh;
  if (s == "sphere") return OutputTransform::sphere;
  throw std::invalid_argument("unknown output transform '" + s + "'");
}

/// Fully connected stack. `widths[i]` is the output width of layer i and
/// `activations[i]` is applied after it; `output` runs after the last layer.
struct MlpSpec {
  std::size_t input_dim = 0;
  std::vector<std::size_t> widths;
  std::vector<Activation> activations;
  OutputTransform output = OutputTransform::none;

  std::size_t output_dim() const { return widths.empty() ? input_dim : widths.back(); }

  void validate(const std::string& name) const {
    if (widths.empty()) throw DimensionError(name, "MLP needs at least one layer");
    if (activations.size() != widths.size()) throw DimensionError(name, "one activation per layer required");
    if (input_dim == 0) throw DimensionError(name, "input width must be positive");
    for (std::size_t w : widths)
      if (w == 0) throw DimensionError(name, "layer widths must be positive");
  }

  /// relu hidden layers then a linear output layer.
  static MlpSpec relu_net(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out,
                          OutputTransform transform = OutputTransform::none) {
    MlpSpec s;
    s.input_dim = in;
    s.widths = hidden;
    s.widths.push_back(out);
    s.activations.assign(hidden.size(), Activation::relu);
    s.activations.push_back(Activation::none);
    s.output = transform;
    return s;
  }

  friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

inline std::string layer_name(const std::string& prefix, std::size_t i) { return prefix + "l" + std::to_string(i); }

/// Adds weights (in x out) and biases (1 x out) drawn uniformly from
/// [-1/sqrt(fan_in), 1/sqrt(fan_in)].
inline void init_mlp(const MlpSpec& spec, const std::string& prefix, ParamStore& store, Rng& rng) {
  spec.validate(prefix);
  std::size_t fan_in = spec.input_dim;
  for (std::size_t i = 0; i < spec.widths.size(); ++i) {
    const std::size_t out = spec.widths[i];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Tensor w = Tensor::matrix(fan_in, out);
    for (double& v : w.values()) v = uniform(rng, -bound, bound);
    Tensor b = Tensor::matrix(1, out);
    for (double& v : b.values()) v = uniform(rng, -bound, bound);
    store.add(layer_name(prefix, i) + ".weight", std::move(w));
    store.add(layer_name(prefix, i) + ".bias", std::move(b));
    fan_in = out;
  }
}

inline Var apply_activation(const Var& x, Activation a) {
  switch (a) {
    case Activation::relu: return relu(x);
    case Activation::tanh: return tanh(x);
    case Activation::none: return x;
  }
  return x;
}

/// Runs the network on a batch. Shape problems are reported with the name
/// of the layer that failed.
inline Var forward_mlp(const MlpSpec& spec, const ParamStore& params, const std::string& prefix, const Var& input) {
  if (input.cols() != spec.input_dim) {
    throw DimensionError(layer_name(prefix, 0), "input width " + std::to_string(input.cols()) + " != expected " +
                                                    std::to_string(spec.input_dim));
  }
  Var x = input;
  for (std::size_t i = 0; i < spec.widths.size(); ++i) {
    const std::string lname = layer_name(prefix, i);
    const Var& w = params.get(lname + ".weight");
    const Var& b = params.get(lname + ".bias");
    if (w.rows() != x.cols() || w.cols() != spec.widths[i] || b.value().size() != spec.widths[i]) {
      throw DimensionError(lname, "parameters " + shape_str(w.shape()) + "/" + shape_str(b.shape()) +
                                      " do not match input width " + std::to_string(x.cols()) + " -> " +
                                      std::to_string(spec.widths[i]));
    }
    x = apply_activation(add_row(matmul(x, w), b), spec.activations[i]);
  }
  switch (spec.output) {
    case OutputTransform::none: return x;
    case OutputTransform::tanh: return tanh(x);
    case OutputTransform::sphere: return sphere_project(x, spec.output_dim());
  }
  return x;
}

}  // namespace rldp
