#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "confreg/error.hpp"
#include "confreg/prob.hpp"
#include "confreg/rng.hpp"
#include "json.hpp"

namespace confreg {

enum class Activation { tanh, relu };

inline std::string to_string(Activation a) {
  return a == Activation::tanh ? "tanh" : "relu";
}

inline Activation parse_activation(const std::string& name) {
  if (name == "tanh") return Activation::tanh;
  if (name == "relu") return Activation::relu;
  throw ConfigError("unknown activation '" + name + "'");
}

// Shape of a feed-forward classifier. dims = {D, h1, ..., K}; one activation
// per hidden layer. Teacher and student share a Layout by construction.
struct Layout {
  std::vector<std::size_t> dims;
  std::vector<Activation> activations;

  static Layout make(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                     std::size_t num_classes, Activation act = Activation::tanh) {
    Layout l;
    l.dims.push_back(input_dim);
    for (std::size_t h : hidden) l.dims.push_back(h);
    l.dims.push_back(num_classes);
    l.activations.assign(hidden.size(), act);
    return l;
  }

  std::size_t input_dim() const { return dims.front(); }
  std::size_t num_classes() const { return dims.back(); }
  std::size_t num_layers() const { return dims.size() - 1; }

  std::size_t param_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) n += dims[l] * dims[l + 1] + dims[l + 1];
    return n;
  }

  void validate() const {
    if (dims.size() < 2) throw ConfigError("layout needs input and output dims");
    for (std::size_t d : dims) {
      if (d == 0) throw ConfigError("layout dimension must be positive");
    }
    if (num_classes() < 2) {
      throw ConfigError("layout needs at least 2 output classes, got " +
                        std::to_string(num_classes()));
    }
    if (activations.size() != dims.size() - 2) {
      throw ConfigError("layout needs one activation per hidden layer");
    }
  }

  friend bool operator==(const Layout&, const Layout&) = default;
};

// Parameters are one flat vector: per layer, the in x out weight matrix in
// row-major order followed by the out-length bias.
class Model {
 public:
  Model(Layout layout, std::uint64_t seed, std::vector<double> params)
      : layout_(std::move(layout)), seed_(seed), params_(std::move(params)) {
    layout_.validate();
    if (params_.size() != layout_.param_count()) {
      throw ConfigError("parameter count " + std::to_string(params_.size()) +
                        " does not match layout (" +
                        std::to_string(layout_.param_count()) + ")");
    }
    for (double p : params_) {
      if (!std::isfinite(p)) throw NumericError("non-finite model parameter");
    }
    std::size_t offset = 0;
    for (std::size_t l = 0; l < layout_.num_layers(); ++l) {
      weight_offsets_.push_back(offset);
      offset += layout_.dims[l] * layout_.dims[l + 1];
      bias_offsets_.push_back(offset);
      offset += layout_.dims[l + 1];
    }
  }

  // Glorot-uniform draw for every parameter (weights and biases) of each
  // layer: U(-s, s) with s = sqrt(6 / (fan_in + fan_out)).
  static Model init(const Layout& layout, std::uint64_t seed) {
    layout.validate();
    Rng rng(seed);
    std::vector<double> params;
    params.reserve(layout.param_count());
    for (std::size_t l = 0; l < layout.num_layers(); ++l) {
      const std::size_t fan_in = layout.dims[l];
      const std::size_t fan_out = layout.dims[l + 1];
      const double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
      for (std::size_t i = 0; i < fan_in * fan_out + fan_out; ++i) {
        params.push_back(rng.uniform(-s, s));
      }
    }
    return Model(layout, seed, std::move(params));
  }

  const Layout& layout() const { return layout_; }
  std::uint64_t seed() const { return seed_; }
  std::span<const double> params() const { return params_; }
  std::span<double> mutable_params() { return params_; }

  std::size_t weight_offset(std::size_t layer) const { return weight_offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const { return bias_offsets_[layer]; }

  double weight(std::size_t layer, std::size_t in, std::size_t out) const {
    return params_[weight_offsets_[layer] + in * layout_.dims[layer + 1] + out];
  }

  friend bool operator==(const Model& a, const Model& b) {
    return a.layout_ == b.layout_ && a.seed_ == b.seed_ && a.params_ == b.params_;
  }

 private:
  Layout layout_;
  std::uint64_t seed_;
  std::vector<double> params_;
  std::vector<std::size_t> weight_offsets_;
  std::vector<std::size_t> bias_offsets_;
};

// Per-layer outputs of one forward pass: layers[0] is the input,
// layers.back() the logits.
struct ForwardTrace {
  std::vector<std::vector<double>> layers;

  std::span<const double> logits() const { return layers.back(); }
  // Representation feeding the output layer (the input for a linear model).
  std::span<const double> last_hidden() const { return layers[layers.size() - 2]; }
};

inline ForwardTrace forward_trace(const Model& model, std::span<const double> x) {
  const Layout& layout = model.layout();
  if (x.size() != layout.input_dim()) {
    throw InputError("input has " + std::to_string(x.size()) + " features, model expects " +
                     std::to_string(layout.input_dim()));
  }
  const auto params = model.params();
  ForwardTrace trace;
  trace.layers.reserve(layout.dims.size());
  trace.layers.emplace_back(x.begin(), x.end());
  for (std::size_t l = 0; l < layout.num_layers(); ++l) {
    const std::size_t n_in = layout.dims[l];
    const std::size_t n_out = layout.dims[l + 1];
    const auto& in = trace.layers.back();
    std::vector<double> out(params.begin() + static_cast<std::ptrdiff_t>(model.bias_offset(l)),
                            params.begin() + static_cast<std::ptrdiff_t>(model.bias_offset(l) + n_out));
    const double* w = params.data() + model.weight_offset(l);
    for (std::size_t i = 0; i < n_in; ++i) {
      const double xi = in[i];
      if (xi == 0.0) continue;
      const double* row = w + i * n_out;
      for (std::size_t j = 0; j < n_out; ++j) out[j] += xi * row[j];
    }
    if (l + 1 < layout.num_layers()) {
      if (layout.activations[l] == Activation::tanh) {
        for (double& v : out) v = std::tanh(v);
      } else {
        for (double& v : out) v = std::max(0.0, v);
      }
    }
    trace.layers.push_back(std::move(out));
  }
  for (double z : trace.layers.back()) {
    if (!std::isfinite(z)) throw NumericError("non-finite logit in forward pass");
  }
  return trace;
}

inline std::vector<double> forward(const Model& model, std::span<const double> x) {
  return std::move(forward_trace(model, x).layers.back());
}

inline ProbDist predict(const Model& model, std::span<const double> x) {
  return softmax(forward(model, x));
}

// Accumulates d(loss)/d(params) into `grad` given d(loss)/d(logits).
// `dhidden`, when non-empty, is an extra gradient arriving at the last hidden
// representation (used by the learned-mixin gate); it is ignored for linear
// models, whose last hidden representation is the input.
inline void backward(const Model& model, const ForwardTrace& trace,
                     std::span<const double> dlogits, std::span<const double> dhidden,
                     std::span<double> grad) {
  const Layout& layout = model.layout();
  const auto params = model.params();
  std::vector<double> delta(dlogits.begin(), dlogits.end());
  for (std::size_t l = layout.num_layers(); l-- > 0;) {
    const std::size_t n_in = layout.dims[l];
    const std::size_t n_out = layout.dims[l + 1];
    const auto& in = trace.layers[l];
    double* gw = grad.data() + model.weight_offset(l);
    double* gb = grad.data() + model.bias_offset(l);
    for (std::size_t j = 0; j < n_out; ++j) gb[j] += delta[j];
    for (std::size_t i = 0; i < n_in; ++i) {
      const double xi = in[i];
      if (xi == 0.0) continue;
      double* row = gw + i * n_out;
      for (std::size_t j = 0; j < n_out; ++j) row[j] += xi * delta[j];
    }
    if (l == 0) break;
    // Propagate to the previous layer's post-activation, then through its
    // activation.
    const double* w = params.data() + model.weight_offset(l);
    std::vector<double> prev(n_in, 0.0);
    for (std::size_t i = 0; i < n_in; ++i) {
      const double* row = w + i * n_out;
      double s = 0.0;
      for (std::size_t j = 0; j < n_out; ++j) s += row[j] * delta[j];
      prev[i] = s;
    }
    if (l == layout.num_layers() - 1 && !dhidden.empty()) {
      for (std::size_t i = 0; i < n_in; ++i) prev[i] += dhidden[i];
    }
    const Activation act = layout.activations[l - 1];
    for (std::size_t i = 0; i < n_in; ++i) {
      const double a = in[i];
      prev[i] *= act == Activation::tanh ? 1.0 - a * a : (a > 0.0 ? 1.0 : 0.0);
    }
    delta = std::move(prev);
  }
}

// ---- checkpoint JSON ------------------------------------------------------

inline nlohmann::json layout_to_json(const Layout& layout) {
  nlohmann::json acts = nlohmann::json::array();
  for (Activation a : layout.activations) acts.push_back(to_string(a));
  return {{"dims", layout.dims}, {"activations", acts}};
}

inline Layout layout_from_json(const nlohmann::json& j) {
  try {
    Layout layout;
    layout.dims = j.at("dims").get<std::vector<std::size_t>>();
    for (const auto& a : j.at("activations")) layout.activations.push_back(parse_activation(a.get<std::string>()));
    layout.validate();
    return layout;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad layout: ") + e.what());
  }
}

inline nlohmann::json model_to_json(const Model& model) {
  return {{"layout", layout_to_json(model.layout())},
          {"seed", model.seed()},
          {"parameters", std::vector<double>(model.params().begin(), model.params().end())}};
}

inline Model model_from_json(const nlohmann::json& j) {
  try {
    return Model(layout_from_json(j.at("layout")), j.at("seed").get<std::uint64_t>(),
                 j.at("parameters").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad checkpoint: ") + e.what());
  }
}

}  // namespace confreg
