#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "confreg/error.hpp"
#include "confreg/features.hpp"
#include "confreg/io.hpp"
#include "confreg/rng.hpp"
#include "json.hpp"

namespace confreg {

// Subset tags written by the generator.
inline constexpr const char* kAligned = "aligned";
inline constexpr const char* kConflicting = "conflicting";

enum class PayloadKind { vector, textpair };

struct Example {
  std::string id;
  std::variant<std::vector<double>, TokenPair> payload;
  std::size_t label = 0;
  std::string subset;

  PayloadKind kind() const {
    return std::holds_alternative<TokenPair>(payload) ? PayloadKind::textpair : PayloadKind::vector;
  }
  const std::vector<double>& features() const { return std::get<std::vector<double>>(payload); }
  const TokenPair& pair() const { return std::get<TokenPair>(payload); }

  friend bool operator==(const Example&, const Example&) = default;
};

struct Dataset {
  std::size_t num_classes = 0;
  std::vector<Example> examples;

  std::size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }
  PayloadKind kind() const { return examples.empty() ? PayloadKind::vector : examples.front().kind(); }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct Splits {
  Dataset train;
  Dataset indist;
  Dataset ood;
  Dataset extra;  // optional pool drawn like `ood`, used for augmentation sweeps
};

// Generator parameters. In vector mode each example is
// [signal (dim values), bias one-hot (num_classes values)]; the bias class
// equals the label with probability rho in train/indist and is uniform in
// ood/extra. In text-pair mode rho is the probability that high lexical
// overlap coincides with label 0 (entailment-like).
struct GenConfig {
  std::size_t num_classes = 3;
  std::size_t n_train = 3000;
  std::size_t n_indist = 1000;
  std::size_t n_ood = 1000;
  std::size_t n_extra = 0;
  std::size_t dim = 10;
  double sigma = 1.0;
  // Distance between any two class means (regular simplex).
  double separation = 3.5;
  double rho = 0.9;
  PayloadKind mode = PayloadKind::vector;
  // Text-pair mode: probability the class cue word is drawn from a random class.
  double cue_noise = 0.2;
  std::uint64_t seed = 7;

  void validate() const {
    if (num_classes < 2) throw ConfigError("generator needs at least 2 classes");
    const double lo = 1.0 / static_cast<double>(num_classes);
    if (!(rho >= lo - 1e-12 && rho <= 1.0)) {
      throw ConfigError("bias strength rho must lie in [1/K, 1], got " + std::to_string(rho));
    }
    if (n_train < num_classes || n_indist < num_classes || n_ood < num_classes) {
      throw ConfigError("each split needs at least K examples");
    }
    if (mode == PayloadKind::vector && dim < num_classes) {
      throw ConfigError("signal dimension must be >= K");
    }
    if (!(sigma >= 0.0) || !(separation >= 0.0)) throw ConfigError("sigma and separation must be >= 0");
    if (!(cue_noise >= 0.0 && cue_noise <= 1.0)) throw ConfigError("cue noise must lie in [0,1]");
  }

  nlohmann::json to_json() const {
    return {{"num_classes", num_classes}, {"n_train", n_train},     {"n_indist", n_indist},
            {"n_ood", n_ood},             {"n_extra", n_extra},     {"dim", dim},
            {"sigma", sigma},             {"separation", separation}, {"rho", rho},
            {"mode", mode == PayloadKind::vector ? "vector" : "textpair"},
            {"cue_noise", cue_noise},     {"seed", seed}};
  }

  static GenConfig from_json(const nlohmann::json& j) {
    GenConfig c;
    try {
      c.num_classes = j.value("num_classes", c.num_classes);
      c.n_train = j.value("n_train", c.n_train);
      c.n_indist = j.value("n_indist", c.n_indist);
      c.n_ood = j.value("n_ood", c.n_ood);
      c.n_extra = j.value("n_extra", c.n_extra);
      c.dim = j.value("dim", c.dim);
      c.sigma = j.value("sigma", c.sigma);
      c.separation = j.value("separation", c.separation);
      c.rho = j.value("rho", c.rho);
      const std::string mode = j.value("mode", std::string("vector"));
      if (mode == "vector") {
        c.mode = PayloadKind::vector;
      } else if (mode == "textpair") {
        c.mode = PayloadKind::textpair;
      } else {
        throw ConfigError("unknown generator mode '" + mode + "'");
      }
      c.cue_noise = j.value("cue_noise", c.cue_noise);
      c.seed = j.value("seed", c.seed);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("bad generator config: ") + e.what());
    }
    c.validate();
    return c;
  }
};

namespace detail {

enum class SplitRole { biased, unbiased };

inline std::string make_id(const std::string& prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s-%06zu", prefix.c_str(), i);
  return buf;
}

inline Dataset gen_vector_split(const GenConfig& c, const std::string& prefix, std::size_t n, SplitRole role,
                                std::uint64_t stream) {
  Rng rng(mix_seed(c.seed, stream));
  const std::size_t k = c.num_classes;
  const double radius = c.separation / std::sqrt(2.0);
  const double centroid = 1.0 / static_cast<double>(k);
  Dataset d{k, {}};
  d.examples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t y = rng.below(k);
    std::vector<double> x(c.dim + k, 0.0);
    for (std::size_t j = 0; j < c.dim; ++j) {
      const double mean = j < k ? radius * ((j == y ? 1.0 : 0.0) - centroid) : 0.0;
      x[j] = mean + c.sigma * rng.normal();
    }
    std::size_t bias_class;
    if (role == SplitRole::biased) {
      if (rng.bernoulli(c.rho)) {
        bias_class = y;
      } else {
        bias_class = rng.below(k - 1);
        if (bias_class >= y) ++bias_class;
      }
    } else {
      bias_class = rng.below(k);
    }
    x[c.dim + bias_class] = 1.0;
    d.examples.push_back({make_id(prefix, i), std::move(x), y, bias_class == y ? kAligned : kConflicting});
  }
  return d;
}

inline Dataset gen_text_split(const GenConfig& c, const std::string& prefix, std::size_t n, SplitRole role,
                              std::uint64_t stream) {
  constexpr std::size_t kContentPool = 400;
  constexpr std::size_t kCuePool = 6;
  constexpr std::size_t kPremiseLen = 8;
  constexpr std::size_t kHypothesisLen = 4;
  Rng rng(mix_seed(c.seed, stream));
  const std::size_t k = c.num_classes;
  Dataset d{k, {}};
  d.examples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t y = rng.below(k);
    const std::size_t cue_class = rng.bernoulli(c.cue_noise) ? rng.below(k) : y;
    const std::string cue = "c" + std::to_string(cue_class) + "_" + std::to_string(rng.below(kCuePool));

    std::vector<std::string> premise;
    std::set<std::size_t> used;
    while (premise.size() < kPremiseLen) {
      const std::size_t w = rng.below(kContentPool);
      if (used.insert(w).second) premise.push_back("w" + std::to_string(w));
    }

    bool high;
    if (role == SplitRole::biased) {
      const bool aligned = rng.bernoulli(c.rho);
      high = aligned == (y == 0);
    } else {
      high = rng.bernoulli(0.5);
    }

    std::vector<std::string> hypothesis;
    if (high) {
      const std::size_t pos = rng.below(premise.size() + 1);
      premise.insert(premise.begin() + static_cast<std::ptrdiff_t>(pos), cue);
      if (rng.bernoulli(0.5)) {
        // Contiguous span covering the cue.
        const std::size_t lo_min = pos + 1 >= kHypothesisLen ? pos + 1 - kHypothesisLen : 0;
        const std::size_t lo_max = std::min(pos, premise.size() - kHypothesisLen);
        const std::size_t lo = lo_min + rng.below(lo_max - lo_min + 1);
        hypothesis.assign(premise.begin() + static_cast<std::ptrdiff_t>(lo),
                          premise.begin() + static_cast<std::ptrdiff_t>(lo + kHypothesisLen));
      } else {
        hypothesis.push_back(cue);
        const auto order = rng.permutation(premise.size());
        for (std::size_t j : order) {
          if (hypothesis.size() == kHypothesisLen) break;
          if (premise[j] != cue) hypothesis.push_back(premise[j]);
        }
        const auto shuffle = rng.permutation(hypothesis.size());
        std::vector<std::string> shuffled;
        for (std::size_t j : shuffle) shuffled.push_back(hypothesis[j]);
        hypothesis = std::move(shuffled);
      }
    } else {
      hypothesis.push_back(cue);
      while (hypothesis.size() < kHypothesisLen) {
        const std::size_t w = rng.below(kContentPool);
        if (used.insert(w).second) hypothesis.push_back("w" + std::to_string(w));
      }
      const auto shuffle = rng.permutation(hypothesis.size());
      std::vector<std::string> shuffled;
      for (std::size_t j : shuffle) shuffled.push_back(hypothesis[j]);
      hypothesis = std::move(shuffled);
    }
    const bool aligned = high == (y == 0);
    d.examples.push_back({make_id(prefix, i), TokenPair{std::move(premise), std::move(hypothesis)}, y,
                          aligned ? kAligned : kConflicting});
  }
  return d;
}

}  // namespace detail

inline Splits gen_synthetic(const GenConfig& c) {
  c.validate();
  using detail::SplitRole;
  auto gen = c.mode == PayloadKind::vector ? detail::gen_vector_split : detail::gen_text_split;
  Splits s;
  s.train = gen(c, "train", c.n_train, SplitRole::biased, 1);
  s.indist = gen(c, "indist", c.n_indist, SplitRole::biased, 2);
  s.ood = gen(c, "ood", c.n_ood, SplitRole::unbiased, 3);
  s.extra = c.n_extra > 0 ? gen(c, "extra", c.n_extra, SplitRole::unbiased, 4) : Dataset{c.num_classes, {}};
  return s;
}

// ---- JSONL persistence ----------------------------------------------------

inline std::string dataset_to_jsonl(const Dataset& d) {
  std::string out;
  for (const auto& e : d.examples) {
    nlohmann::ordered_json j;
    j["id"] = e.id;
    if (e.kind() == PayloadKind::vector) {
      j["x"] = e.features();
    } else {
      j["premise"] = e.pair().premise;
      j["hypothesis"] = e.pair().hypothesis;
    }
    j["label"] = e.label;
    j["subset"] = e.subset;
    out += j.dump();
    out += '\n';
  }
  return out;
}

inline void write_dataset(const Dataset& d, const std::filesystem::path& path) {
  write_file_atomic(path, dataset_to_jsonl(d));
}

inline Dataset read_dataset(const std::filesystem::path& path, std::size_t num_classes) {
  if (num_classes < 2) throw ConfigError("need at least 2 classes");
  Dataset d{num_classes, {}};
  std::set<std::string> seen;
  for_each_jsonl(path, [&](const nlohmann::json& j, std::size_t line) {
    const std::string where = path.string() + ":" + std::to_string(line);
    Example e;
    try {
      e.id = j.at("id").get<std::string>();
      const auto label = j.at("label").get<std::int64_t>();
      if (label < 0 || static_cast<std::size_t>(label) >= num_classes) {
        throw DataError(where + ": label " + std::to_string(label) + " out of range for " +
                        std::to_string(num_classes) + " classes");
      }
      e.label = static_cast<std::size_t>(label);
      e.subset = j.value("subset", std::string());
      if (j.contains("x")) {
        e.payload = j.at("x").get<std::vector<double>>();
      } else {
        TokenPair p{j.at("premise").get<std::vector<std::string>>(),
                    j.at("hypothesis").get<std::vector<std::string>>()};
        p.validate();
        e.payload = std::move(p);
      }
    } catch (const nlohmann::json::exception& ex) {
      throw ParseError(where + ": " + ex.what(), line);
    } catch (const InputError& ex) {
      throw DataError(where + ": " + ex.what());
    }
    if (!d.examples.empty()) {
      const Example& first = d.examples.front();
      if (e.kind() != first.kind()) throw DataError(where + ": mixed payload kinds");
      if (e.kind() == PayloadKind::vector && e.features().size() != first.features().size()) {
        throw DataError(where + ": feature vector length differs from first example");
      }
    }
    if (!seen.insert(e.id).second) throw DataError(where + ": duplicate id " + e.id);
    d.examples.push_back(std::move(e));
  });
  if (d.examples.empty()) throw DataError(path.string() + ": dataset is empty");
  return d;
}

// Appends a seeded random floor(fraction * |extra|) subset of `extra`.
inline Dataset augment(const Dataset& train, const Dataset& extra, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ConfigError("augment fraction must lie in [0,1]");
  if (extra.num_classes != train.num_classes) throw DataError("augment: class counts differ");
  if (!extra.empty() && !train.empty() && extra.kind() != train.kind()) {
    throw DataError("augment: payload kinds differ");
  }
  const auto take = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(extra.size())));
  Dataset out = train;
  if (take == 0) return out;
  Rng rng(seed);
  auto order = rng.permutation(extra.size());
  order.resize(take);
  std::sort(order.begin(), order.end());
  std::set<std::string> ids;
  for (const auto& e : train.examples) ids.insert(e.id);
  for (std::size_t i : order) {
    if (!ids.insert(extra.examples[i].id).second) throw DataError("augment: duplicate id " + extra.examples[i].id);
    out.examples.push_back(extra.examples[i]);
  }
  return out;
}

}  // namespace confreg
