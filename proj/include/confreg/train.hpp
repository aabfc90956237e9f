#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "confreg/baselines.hpp"
#include "confreg/error.hpp"
#include "confreg/losses.hpp"
#include "confreg/model.hpp"
#include "confreg/rng.hpp"
#include "confreg/table.hpp"
#include "json.hpp"

namespace confreg {

struct TrainSchedule {
  std::size_t epochs = 1;
  std::size_t batch_size = 32;
  double learning_rate = 0.1;
  std::uint64_t seed = 0;

  void validate() const {
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("batch size must be >= 1");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
      throw ConfigError("learning rate must be finite and >= 0");
    }
  }
};

struct EpochStats {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  std::optional<double> eval_accuracy;
};

// Per-epoch record. The returned model is always the final-epoch one;
// `best_epoch` (by eval accuracy, earliest on ties) is recorded alongside.
struct History {
  std::vector<EpochStats> epochs;
  std::optional<std::size_t> best_epoch;

  nlohmann::json to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& e : epochs) {
      nlohmann::json r = {{"epoch", e.epoch}, {"mean_loss", e.mean_loss}};
      r["eval_accuracy"] = e.eval_accuracy ? nlohmann::json(*e.eval_accuracy) : nlohmann::json(nullptr);
      rows.push_back(r);
    }
    nlohmann::json j = {{"epochs", rows}, {"selected", "final"}};
    j["best_epoch"] = best_epoch ? nlohmann::json(*best_epoch) : nlohmann::json(nullptr);
    return j;
  }
};

struct TrainResult {
  Model model;
  std::optional<Gate> gate;
  History history;
};

struct BatchGradient {
  double loss = 0.0;
  std::vector<double> model_grad;
  std::vector<double> gate_grad;  // gate weights then gate bias; empty unless learned-mixin
};

// Objective over `batch` (row indices into `data`) and its gradient with
// respect to every trainable parameter. Per-example losses are averaged,
// except reweight-batch whose normalized weights already sum to one.
inline BatchGradient batch_objective(const Model& model, const Gate* gate, const TrainingSet& data,
                                     std::span<const std::size_t> batch, const LossSpec& spec) {
  if (batch.empty()) throw InputError("empty batch");
  BatchGradient out;
  out.model_grad.assign(model.layout().param_count(), 0.0);
  if (spec.kind == LossKind::learned_mixin) {
    if (gate == nullptr) throw ConfigError("learned-mixin objective needs a gate");
    out.gate_grad.assign(gate->param_count(), 0.0);
  }

  std::vector<double> example_weight(batch.size(), 1.0 / static_cast<double>(batch.size()));
  if (spec.kind == LossKind::reweight_batch) {
    std::vector<double> gold(batch.size());
    for (std::size_t s = 0; s < batch.size(); ++s) gold[s] = spec.teacher_gold[batch[s]];
    example_weight = reweight_batch_weights(gold);
  }

  const std::vector<double> no_hidden_grad;
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const std::size_t i = batch[s];
    const std::size_t gold = data.labels[i];
    const ForwardTrace trace = forward_trace(model, data.x.row(i));
    const ProbDist p = softmax(trace.logits());
    std::vector<double> dlogits;
    std::vector<double> dhidden;
    double loss = 0.0;

    switch (spec.kind) {
      case LossKind::hard_ce:
      case LossKind::reweight_batch:
        loss = hard_ce(gold, p);
        dlogits = ce_logit_gradient(gold, p.values());
        break;
      case LossKind::soft_ce:
        loss = soft_ce(spec.soft_targets[i], p);
        dlogits = ce_logit_gradient(spec.soft_targets[i].values(), p.values());
        break;
      case LossKind::poe: {
        const EnsembleOutput e = poe_combine(p, spec.biased[i]);
        loss = hard_ce(gold, e.combined);
        dlogits = ce_logit_gradient(gold, e.combined.values());
        break;
      }
      case LossKind::learned_mixin: {
        const auto h = trace.last_hidden();
        const double u = gate->pre_activation(h);
        const MixinTerms t = learned_mixin_terms(clamped_log(p), clamped_log(spec.biased[i]),
                                                 Gate::softplus(u), gold, spec.entropy_weight);
        loss = t.loss;
        dlogits = t.dlogits;
        const double du = t.dgate * Gate::sigmoid(u) * example_weight[s];
        for (std::size_t d = 0; d < h.size(); ++d) out.gate_grad[d] += du * h[d];
        out.gate_grad.back() += du;
        if (model.layout().num_layers() > 1) {
          dhidden.resize(h.size());
          for (std::size_t d = 0; d < h.size(); ++d) dhidden[d] = du * gate->weights[d];
        }
        break;
      }
    }
    out.loss += example_weight[s] * loss;
    for (double& v : dlogits) v *= example_weight[s];
    backward(model, trace, dlogits, dhidden.empty() ? std::span<const double>(no_hidden_grad) : dhidden,
             out.model_grad);
  }
  return out;
}

// Fraction of rows whose argmax prediction equals the label.
inline double classification_accuracy(const Model& model, const TrainingSet& data) {
  if (data.size() == 0) throw InputError("accuracy over empty set");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (argmax(forward(model, data.x.row(i))) == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

// Mini-batch SGD with a fresh seeded shuffle every epoch.
inline TrainResult train(Model model, const TrainingSet& data, const LossSpec& spec,
                         const TrainSchedule& sched, const TrainingSet* eval = nullptr) {
  sched.validate();
  if (data.size() == 0) throw DataError("training set is empty");
  if (data.x.dim() != model.layout().input_dim()) {
    throw ConfigError("training features have dimension " + std::to_string(data.x.dim()) +
                      ", model expects " + std::to_string(model.layout().input_dim()));
  }
  spec.validate(data.size(), model.layout().num_classes());

  std::optional<Gate> gate;
  if (spec.kind == LossKind::learned_mixin) {
    const auto& dims = model.layout().dims;
    gate = Gate::init(dims[dims.size() - 2]);
  }

  Rng shuffle_rng(sched.seed);
  History history;
  double best_acc = -1.0;
  for (std::size_t epoch = 0; epoch < sched.epochs; ++epoch) {
    const std::vector<std::size_t> order = shuffle_rng.permutation(data.size());
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += sched.batch_size) {
      const std::size_t end = std::min(order.size(), start + sched.batch_size);
      const std::span<const std::size_t> batch(order.data() + start, end - start);
      const BatchGradient g = batch_objective(model, gate ? &*gate : nullptr, data, batch, spec);
      loss_sum += g.loss * static_cast<double>(batch.size());
      if (sched.learning_rate == 0.0) continue;
      auto params = model.mutable_params();
      for (std::size_t p = 0; p < params.size(); ++p) params[p] -= sched.learning_rate * g.model_grad[p];
      if (gate) {
        for (std::size_t d = 0; d < gate->weights.size(); ++d) {
          gate->weights[d] -= sched.learning_rate * g.gate_grad[d];
        }
        gate->bias -= sched.learning_rate * g.gate_grad.back();
      }
    }
    for (double p : model.params()) {
      if (!std::isfinite(p)) throw NumericError("training diverged at epoch " + std::to_string(epoch));
    }
    EpochStats stats{epoch, loss_sum / static_cast<double>(data.size()), std::nullopt};
    if (eval != nullptr && eval->size() > 0) {
      stats.eval_accuracy = classification_accuracy(model, *eval);
      if (*stats.eval_accuracy > best_acc) {
        best_acc = *stats.eval_accuracy;
        history.best_epoch = epoch;
      }
    }
    history.epochs.push_back(stats);
  }
  return {std::move(model), std::move(gate), std::move(history)};
}

}  // namespace confreg
