#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "confreg/error.hpp"

namespace confreg {

// Floor applied to probabilities before any log or power.
inline constexpr double kProbFloor = 1e-12;

// Tolerance on the sum of a probability vector.
inline constexpr double kProbSumTolerance = 1e-9;

inline double clamp_prob(double p) { return std::clamp(p, kProbFloor, 1.0); }

// Index of the largest value; ties go to the lowest index.
inline std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw InputError("argmax of empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

// A validated categorical distribution over K >= 2 classes.
class ProbDist {
 public:
  ProbDist() = default;

  explicit ProbDist(std::vector<double> values) : values_(std::move(values)) {
    if (values_.size() < 2) {
      throw InputError("distribution needs at least 2 classes, got " +
                       std::to_string(values_.size()));
    }
    double sum = 0.0;
    for (double v : values_) {
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        throw InputError("probability out of [0,1]: " + std::to_string(v));
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kProbSumTolerance) {
      throw InputError("probabilities sum to " + std::to_string(sum));
    }
  }

  static ProbDist uniform(std::size_t k) {
    return ProbDist(std::vector<double>(k, 1.0 / static_cast<double>(k)));
  }

  static ProbDist one_hot(std::size_t k, std::size_t index) {
    if (index >= k) throw InputError("one-hot index out of range");
    std::vector<double> v(k, 0.0);
    v[index] = 1.0;
    return ProbDist(std::move(v));
  }

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }
  const std::vector<double>& vec() const { return values_; }
  std::size_t argmax() const { return confreg::argmax(values_); }
  double max() const { return *std::max_element(values_.begin(), values_.end()); }

  friend bool operator==(const ProbDist&, const ProbDist&) = default;

 private:
  std::vector<double> values_;
};

// Max-subtracted softmax. Throws NumericError on non-finite logits.
inline std::vector<double> softmax_values(std::span<const double> logits) {
  if (logits.empty()) throw InputError("softmax of empty vector");
  double top = logits[0];
  for (double z : logits) {
    if (!std::isfinite(z)) throw NumericError("non-finite logit");
    top = std::max(top, z);
  }
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - top);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

inline ProbDist softmax(std::span<const double> logits) {
  return ProbDist(softmax_values(logits));
}

// Natural-log entropy; zero entries contribute nothing.
inline double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

inline double entropy(const ProbDist& p) { return entropy(p.values()); }

// Elementwise log of clamped probabilities.
inline std::vector<double> clamped_log(const ProbDist& p) {
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = std::log(clamp_prob(p[i]));
  return out;
}

}  // namespace confreg
