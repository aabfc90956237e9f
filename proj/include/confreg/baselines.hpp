#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "confreg/debias.hpp"
#include "confreg/error.hpp"
#include "confreg/losses.hpp"
#include "confreg/prob.hpp"

namespace confreg {

// p' = softmax(log p + g * log b), keeping the components for inspection.
struct EnsembleOutput {
  ProbDist combined;
  std::vector<double> main_log;
  std::vector<double> biased_log;
  std::optional<double> gate;
};

// Product of experts: p' proportional to main * biased (clamped).
inline EnsembleOutput poe_combine(const ProbDist& main, const ProbDist& biased) {
  if (main.size() != biased.size()) {
    throw InputError("poe_combine: main has " + std::to_string(main.size()) +
                     " classes, biased " + std::to_string(biased.size()));
  }
  std::vector<double> lp = clamped_log(main);
  std::vector<double> lb = clamped_log(biased);
  std::vector<double> s(lp.size());
  for (std::size_t j = 0; j < s.size(); ++j) s[j] = lp[j] + lb[j];
  return {softmax(s), std::move(lp), std::move(lb), std::nullopt};
}

// ---- learned-mixin --------------------------------------------------------

// g(h) = softplus(weights . h + bias) where h is the main model's last hidden
// representation. Starts at g = 1 so training begins from plain PoE.
struct Gate {
  std::vector<double> weights;
  double bias = 0.0;

  static Gate init(std::size_t hidden_dim) {
    return {std::vector<double>(hidden_dim, 0.0), std::log(std::exp(1.0) - 1.0)};
  }

  std::size_t param_count() const { return weights.size() + 1; }

  double pre_activation(std::span<const double> h) const {
    if (h.size() != weights.size()) throw InputError("gate input has wrong dimension");
    double u = bias;
    for (std::size_t i = 0; i < h.size(); ++i) u += weights[i] * h[i];
    return u;
  }

  double value(std::span<const double> h) const { return softplus(pre_activation(h)); }

  static double softplus(double u) { return u > 30.0 ? u : std::log1p(std::exp(u)); }
  static double sigmoid(double u) { return 1.0 / (1.0 + std::exp(-u)); }
};

struct MixinTerms {
  double loss = 0.0;
  std::vector<double> dlogits;  // d loss / d main logits
  double dgate = 0.0;           // d loss / d g
};

// hard_ce(gold, softmax(log p + g log b)) + w * H(softmax(g log b)), natural
// log throughout, with its derivatives.
inline MixinTerms learned_mixin_terms(std::span<const double> main_log,
                                      std::span<const double> biased_log, double g,
                                      std::size_t gold, double w) {
  if (!(w >= 0.0)) throw ConfigError("entropy-penalty weight must be >= 0");
  if (!(g >= 0.0) || !std::isfinite(g)) throw NumericError("gate value must be finite and >= 0");
  if (main_log.size() != biased_log.size()) throw InputError("learned-mixin: class count mismatch");
  const std::size_t k = main_log.size();
  if (gold >= k) throw InputError("gold label out of range");

  std::vector<double> mixed(k), scaled(k);
  for (std::size_t j = 0; j < k; ++j) {
    mixed[j] = main_log[j] + g * biased_log[j];
    scaled[j] = g * biased_log[j];
  }
  const std::vector<double> p_mix = softmax_values(mixed);
  const std::vector<double> r = softmax_values(scaled);

  MixinTerms t;
  t.loss = -std::log(clamp_prob(p_mix[gold]));
  t.dlogits = ce_logit_gradient(gold, p_mix);
  for (std::size_t j = 0; j < k; ++j) t.dgate += t.dlogits[j] * biased_log[j];

  if (w > 0.0) {
    const double h = entropy(r);
    t.loss += w * h;
    // dH/ds_j = -r_j (log r_j + H) for s = g log b.
    double dh_dg = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (r[j] > 0.0) dh_dg += -r[j] * (std::log(r[j]) + h) * biased_log[j];
    }
    t.dgate += w * dh_dg;
  }
  return t;
}

inline double learned_mixin_loss(std::span<const double> main_log, std::span<const double> biased_log,
                                 double g, std::size_t gold, double w) {
  return learned_mixin_terms(main_log, biased_log, g, gold, w).loss;
}

// ---- example reweighting --------------------------------------------------

// Batch weights t_s / sum_u t_u over teacher gold probabilities.
inline std::vector<double> reweight_batch_weights(std::span<const double> teacher_gold) {
  if (teacher_gold.empty()) throw InputError("reweight batch is empty");
  double total = 0.0;
  for (double t : teacher_gold) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw InputError("teacher gold probability must be >= 0");
    total += t;
  }
  if (!(total > 0.0)) throw NumericError("reweight batch weights are all zero");
  std::vector<double> w(teacher_gold.size());
  for (std::size_t s = 0; s < w.size(); ++s) w[s] = teacher_gold[s] / total;
  return w;
}

// -sum_s w_s log p_{s,c}.
inline double reweight_batch_loss(std::span<const double> teacher_gold,
                                  std::span<const double> student_gold) {
  if (teacher_gold.size() != student_gold.size()) {
    throw InputError("reweight batch: teacher and student sizes differ");
  }
  const auto w = reweight_batch_weights(teacher_gold);
  double loss = 0.0;
  for (std::size_t s = 0; s < w.size(); ++s) loss -= w[s] * std::log(clamp_prob(student_gold[s]));
  return loss;
}

// ---- self-distillation ----------------------------------------------------

// Teacher distributions as targets, beta forced to 0.
inline std::vector<SoftTarget> self_distill_targets(const Model& teacher, const TrainingSet& data) {
  return make_soft_targets(teacher, {}, data, /*force_zero_beta=*/true);
}

}  // namespace confreg
