#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "confreg/error.hpp"
#include "confreg/prob.hpp"

namespace confreg {

enum class LossKind { hard_ce, soft_ce, poe, learned_mixin, reweight_batch };

inline std::string to_string(LossKind k) {
  switch (k) {
    case LossKind::hard_ce: return "hard-ce";
    case LossKind::soft_ce: return "soft-ce";
    case LossKind::poe: return "poe";
    case LossKind::learned_mixin: return "learned-mixin";
    case LossKind::reweight_batch: return "reweight-batch";
  }
  return "?";
}

inline LossKind parse_loss_kind(const std::string& name) {
  if (name == "hard-ce") return LossKind::hard_ce;
  if (name == "soft-ce") return LossKind::soft_ce;
  if (name == "poe") return LossKind::poe;
  if (name == "learned-mixin") return LossKind::learned_mixin;
  if (name == "reweight-batch") return LossKind::reweight_batch;
  throw ConfigError("unknown loss kind '" + name + "'");
}

// Training objective plus the per-example auxiliary data it consumes. The
// auxiliary vectors are indexed like the rows of the training table.
struct LossSpec {
  LossKind kind = LossKind::hard_ce;
  // Learned-mixin entropy-penalty weight.
  double entropy_weight = 0.03;
  // soft-ce: target distribution per row.
  std::vector<ProbDist> soft_targets;
  // poe / learned-mixin: frozen biased-model distribution per row.
  std::vector<ProbDist> biased;
  // reweight-batch: (scaled) teacher probability of the gold label per row.
  std::vector<double> teacher_gold;

  static LossSpec hard() { return {}; }

  static LossSpec soft(std::vector<ProbDist> targets) {
    LossSpec s;
    s.kind = LossKind::soft_ce;
    s.soft_targets = std::move(targets);
    return s;
  }

  static LossSpec poe(std::vector<ProbDist> biased_outputs) {
    LossSpec s;
    s.kind = LossKind::poe;
    s.biased = std::move(biased_outputs);
    return s;
  }

  static LossSpec learned_mixin(std::vector<ProbDist> biased_outputs, double w = 0.03) {
    LossSpec s;
    s.kind = LossKind::learned_mixin;
    s.biased = std::move(biased_outputs);
    s.entropy_weight = w;
    return s;
  }

  static LossSpec reweight(std::vector<double> gold_probs) {
    LossSpec s;
    s.kind = LossKind::reweight_batch;
    s.teacher_gold = std::move(gold_probs);
    return s;
  }

  // Checks that the auxiliaries required by `kind` cover `rows` examples
  // over `k` classes.
  void validate(std::size_t rows, std::size_t k) const {
    if (!(entropy_weight >= 0.0) || !std::isfinite(entropy_weight)) {
      throw ConfigError("entropy-penalty weight must be finite and >= 0");
    }
    auto check_dists = [&](const std::vector<ProbDist>& v, const char* what) {
      if (v.size() != rows) {
        throw ConfigError(to_string(kind) + " loss needs " + what + " for all " +
                          std::to_string(rows) + " rows, got " + std::to_string(v.size()));
      }
      for (const auto& d : v) {
        if (d.size() != k) throw ConfigError(std::string(what) + " have wrong class count");
      }
    };
    switch (kind) {
      case LossKind::hard_ce: break;
      case LossKind::soft_ce: check_dists(soft_targets, "soft targets"); break;
      case LossKind::poe:
      case LossKind::learned_mixin: check_dists(biased, "biased-model outputs"); break;
      case LossKind::reweight_batch:
        if (teacher_gold.size() != rows) {
          throw ConfigError("reweight-batch loss needs teacher gold probabilities for all rows");
        }
        break;
    }
  }
};

// -target . log(clamp(student)). Cross entropy in nats.
inline double soft_ce(const ProbDist& target, const ProbDist& student) {
  if (target.size() != student.size()) {
    throw InputError("soft_ce: target has " + std::to_string(target.size()) +
                     " classes, student " + std::to_string(student.size()));
  }
  double loss = 0.0;
  for (std::size_t j = 0; j < target.size(); ++j) {
    if (target[j] != 0.0) loss -= target[j] * std::log(clamp_prob(student[j]));
  }
  return loss;
}

inline double hard_ce(std::size_t gold, const ProbDist& student) {
  if (gold >= student.size()) {
    throw InputError("gold label " + std::to_string(gold) + " out of range for " +
                     std::to_string(student.size()) + " classes");
  }
  return -std::log(clamp_prob(student[gold]));
}

// Gradient of soft_ce / hard_ce with respect to the student's logits.
inline std::vector<double> ce_logit_gradient(std::span<const double> target,
                                             std::span<const double> student) {
  std::vector<double> g(student.size());
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = student[j] - target[j];
  return g;
}

inline std::vector<double> ce_logit_gradient(std::size_t gold, std::span<const double> student) {
  std::vector<double> g(student.begin(), student.end());
  g[gold] -= 1.0;
  return g;
}

}  // namespace confreg
