#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "confreg/error.hpp"
#include "confreg/rng.hpp"

namespace confreg {

// Premise/hypothesis pair (also claim/evidence or question/question).
struct TokenPair {
  std::vector<std::string> premise;
  std::vector<std::string> hypothesis;

  void validate() const {
    if (premise.empty() || hypothesis.empty()) throw InputError("token pair with empty side");
  }

  friend bool operator==(const TokenPair&, const TokenPair&) = default;
};

// Whitespace split + ASCII lowercasing.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

// Deterministic unit-norm Gaussian direction seeded by (token bytes, seed).
inline std::vector<double> hashed_embedding(std::string_view token, std::size_t dim, std::uint64_t seed) {
  if (token.empty()) throw InputError("cannot embed an empty token");
  if (dim < 2) throw InputError("embedding dimension must be >= 2");
  Rng rng(mix_seed(fnv1a(token), seed));
  std::vector<double> v(dim);
  double norm2 = 0.0;
  while (norm2 == 0.0) {
    norm2 = 0.0;
    for (double& x : v) {
      x = rng.normal();
      norm2 += x * x;
    }
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& x : v) x *= inv;
  return v;
}

class HashedEmbedder {
 public:
  explicit HashedEmbedder(std::size_t dim = 16, std::uint64_t seed = 0) : dim_(dim), seed_(seed) {
    if (dim < 2) throw InputError("embedding dimension must be >= 2");
  }
  std::size_t dim() const { return dim_; }
  std::uint64_t seed() const { return seed_; }
  std::vector<double> operator()(std::string_view token) const { return hashed_embedding(token, dim_, seed_); }

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

inline double cosine_distance(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::clamp(1.0 - dot / std::sqrt(na * nb), 0.0, 2.0);
}

// Lexical-overlap heuristics of a hypothesis against its premise.
struct OverlapFeatures {
  bool all_in = false;           // every hypothesis word occurs in the premise
  bool subsequence = false;      // hypothesis is a contiguous run of the premise
  double fraction_overlap = 0.0; // share of hypothesis word types found in the premise
  double mean_cos_dist = 0.0;    // over hypothesis tokens, of min distance to any premise token
  double max_cos_dist = 0.0;

  static constexpr std::size_t kSize = 5;

  std::array<double, kSize> as_array() const {
    return {all_in ? 1.0 : 0.0, subsequence ? 1.0 : 0.0, fraction_overlap, mean_cos_dist, max_cos_dist};
  }
};

inline OverlapFeatures overlap_features(const TokenPair& pair, const HashedEmbedder& embed) {
  pair.validate();
  const auto& prem = pair.premise;
  const auto& hyp = pair.hypothesis;
  const std::set<std::string> prem_types(prem.begin(), prem.end());
  const std::set<std::string> hyp_types(hyp.begin(), hyp.end());

  OverlapFeatures f;
  std::size_t shared = 0;
  for (const auto& t : hyp_types) shared += prem_types.contains(t) ? 1 : 0;
  f.fraction_overlap = static_cast<double>(shared) / static_cast<double>(hyp_types.size());
  f.all_in = shared == hyp_types.size();
  f.subsequence = std::search(prem.begin(), prem.end(), hyp.begin(), hyp.end()) != prem.end();

  std::vector<std::vector<double>> prem_vecs;
  prem_vecs.reserve(prem.size());
  for (const auto& t : prem) prem_vecs.push_back(embed(t));
  double sum = 0.0;
  for (const auto& h : hyp) {
    double best = 2.0;
    if (prem_types.contains(h)) {
      best = 0.0;
    } else {
      const auto hv = embed(h);
      for (const auto& pv : prem_vecs) best = std::min(best, cosine_distance(hv, pv));
    }
    sum += best;
    f.max_cos_dist = std::max(f.max_cos_dist, best);
  }
  f.mean_cos_dist = sum / static_cast<double>(hyp.size());
  return f;
}

// Token types seen in the training split.
class Vocabulary {
 public:
  Vocabulary() = default;

  void add(std::span<const std::string> tokens) {
    for (const auto& t : tokens) types_.insert(t);
  }

  bool contains(const std::string& token) const { return types_.contains(token); }
  std::size_t size() const { return types_.size(); }

 private:
  std::set<std::string> types_;
};

// Element-wise max over embeddings of in-vocabulary tokens; zero vector when
// every token is out of vocabulary.
inline std::vector<double> max_pooled_embedding(std::span<const std::string> tokens, const Vocabulary& vocab,
                                                const HashedEmbedder& embed) {
  std::vector<double> out(embed.dim(), 0.0);
  bool any = false;
  for (const auto& t : tokens) {
    if (!vocab.contains(t)) continue;
    const auto v = embed(t);
    if (!any) {
      out = v;
      any = true;
    } else {
      for (std::size_t d = 0; d < out.size(); ++d) out[d] = std::max(out[d], v[d]);
    }
  }
  return out;
}

// Hypothesis-only (partial-input) features for the biased model.
inline std::vector<double> partial_input_features(std::span<const std::string> hypothesis,
                                                  const Vocabulary& vocab, const HashedEmbedder& embed) {
  return max_pooled_embedding(hypothesis, vocab, embed);
}

// Full-input encoding for the main model in text-pair mode: pooled premise,
// pooled hypothesis, then the overlap heuristics.
inline std::vector<double> pair_features(const TokenPair& pair, const Vocabulary& vocab,
                                         const HashedEmbedder& embed) {
  std::vector<double> out = max_pooled_embedding(pair.premise, vocab, embed);
  const auto hyp = max_pooled_embedding(pair.hypothesis, vocab, embed);
  out.insert(out.end(), hyp.begin(), hyp.end());
  const auto ov = overlap_features(pair, embed).as_array();
  out.insert(out.end(), ov.begin(), ov.end());
  return out;
}

}  // namespace confreg
