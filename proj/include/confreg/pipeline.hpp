#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "confreg/baselines.hpp"
#include "confreg/data.hpp"
#include "confreg/debias.hpp"
#include "confreg/error.hpp"
#include "confreg/features.hpp"
#include "confreg/metrics.hpp"
#include "confreg/model.hpp"
#include "confreg/rng.hpp"
#include "confreg/train.hpp"

namespace confreg {

enum class Method { baseline, confreg, poe, lmixin, reweight, selfdistill };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::baseline: return "baseline";
    case Method::confreg: return "confreg";
    case Method::poe: return "poe";
    case Method::lmixin: return "lmixin";
    case Method::reweight: return "reweight";
    case Method::selfdistill: return "selfdistill";
  }
  return "?";
}

inline std::optional<Method> parse_method(const std::string& name) {
  for (Method m : {Method::baseline, Method::confreg, Method::poe, Method::lmixin, Method::reweight,
                   Method::selfdistill}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

inline bool needs_biased_model(Method m) {
  return m == Method::confreg || m == Method::poe || m == Method::lmixin || m == Method::reweight;
}

// Which view of an example the biased model is trained on.
enum class BiasFeatures {
  bias_dims,        // vector mode: the trailing K-dim bias one-hot
  overlap,          // text-pair mode: lexical-overlap heuristics
  hypothesis_only,  // text-pair mode: pooled hypothesis embedding
};

inline std::string to_string(BiasFeatures b) {
  switch (b) {
    case BiasFeatures::bias_dims: return "bias-dims";
    case BiasFeatures::overlap: return "overlap";
    case BiasFeatures::hypothesis_only: return "hypothesis-only";
  }
  return "?";
}

inline BiasFeatures parse_bias_features(const std::string& name) {
  if (name == "bias-dims") return BiasFeatures::bias_dims;
  if (name == "overlap") return BiasFeatures::overlap;
  if (name == "hypothesis-only") return BiasFeatures::hypothesis_only;
  throw ConfigError("unknown biased-feature kind '" + name + "'");
}

struct ModelSpec {
  std::vector<std::size_t> hidden;
  Activation activation = Activation::tanh;

  Layout layout(std::size_t input_dim, std::size_t num_classes) const {
    return Layout::make(input_dim, hidden, num_classes, activation);
  }
};

// Everything one seed of one method needs besides the data.
struct PipelineConfig {
  Method method = Method::confreg;
  std::optional<BiasFeatures> bias_features;
  ModelSpec main_model{{16}, Activation::tanh};
  ModelSpec biased_model{{8}, Activation::tanh};
  TrainSchedule teacher{100, 32, 0.1, 0};
  TrainSchedule biased{20, 32, 0.1, 0};
  TrainSchedule main{200, 32, 0.1, 0};
  double lmixin_w = 0.03;
  std::size_t n_bins = 10;
  std::size_t embed_dim = 16;
  std::uint64_t embed_seed = 0;
};

// Numeric tables for every split, for both the main and the biased model.
struct PreparedData {
  TrainingSet train;
  TrainingSet indist;
  TrainingSet ood;
  std::optional<TrainingSet> train_biased;
  std::size_t num_classes = 0;
};

namespace detail {

inline TrainingSet to_table(const Dataset& d, std::size_t dim, const auto& encode) {
  TrainingSet t;
  t.num_classes = d.num_classes;
  t.x = FeatureTable(dim);
  for (const auto& e : d.examples) {
    const std::vector<double> row = encode(e);
    t.x.push_back(row);
    t.labels.push_back(e.label);
    t.ids.push_back(e.id);
    t.subsets.push_back(e.subset);
  }
  return t;
}

}  // namespace detail

inline PreparedData prepare_data(const Dataset& train, const Dataset& indist, const Dataset& ood,
                                 std::optional<BiasFeatures> bias, std::size_t embed_dim = 16,
                                 std::uint64_t embed_seed = 0) {
  if (train.empty()) throw DataError("training split is empty");
  if (indist.num_classes != train.num_classes || ood.num_classes != train.num_classes) {
    throw DataError("splits disagree on the number of classes");
  }
  const std::size_t k = train.num_classes;
  PreparedData out;
  out.num_classes = k;
  if (train.kind() == PayloadKind::vector) {
    const std::size_t dim = train.examples.front().features().size();
    auto identity = [&](const Example& e) {
      if (e.kind() != PayloadKind::vector || e.features().size() != dim) {
        throw DataError("example " + e.id + " does not match the training feature layout");
      }
      return e.features();
    };
    out.train = detail::to_table(train, dim, identity);
    out.indist = detail::to_table(indist, dim, identity);
    out.ood = detail::to_table(ood, dim, identity);
    if (bias) {
      if (*bias != BiasFeatures::bias_dims) {
        throw ConfigError("biased-feature kind '" + to_string(*bias) + "' needs text-pair data");
      }
      if (dim <= k) throw ConfigError("vector examples too short to carry a bias one-hot");
      out.train_biased = detail::to_table(train, k, [&](const Example& e) {
        return std::vector<double>(e.features().end() - static_cast<std::ptrdiff_t>(k), e.features().end());
      });
    }
    return out;
  }

  const HashedEmbedder embed(embed_dim, embed_seed);
  Vocabulary vocab;
  for (const auto& e : train.examples) {
    vocab.add(e.pair().premise);
    vocab.add(e.pair().hypothesis);
  }
  const std::size_t dim = 2 * embed_dim + OverlapFeatures::kSize;
  auto encode = [&](const Example& e) {
    if (e.kind() != PayloadKind::textpair) throw DataError("example " + e.id + " is not a text pair");
    return pair_features(e.pair(), vocab, embed);
  };
  out.train = detail::to_table(train, dim, encode);
  out.indist = detail::to_table(indist, dim, encode);
  out.ood = detail::to_table(ood, dim, encode);
  if (bias) {
    if (*bias == BiasFeatures::bias_dims) throw ConfigError("biased-feature kind 'bias-dims' needs vector data");
    if (*bias == BiasFeatures::overlap) {
      out.train_biased = detail::to_table(train, OverlapFeatures::kSize, [&](const Example& e) {
        const auto a = overlap_features(e.pair(), embed).as_array();
        return std::vector<double>(a.begin(), a.end());
      });
    } else {
      out.train_biased = detail::to_table(train, embed_dim, [&](const Example& e) {
        return partial_input_features(e.pair().hypothesis, vocab, embed);
      });
    }
  }
  return out;
}

// Result of one method on one seed.
struct SeedOutcome {
  Method method = Method::baseline;
  std::uint64_t seed = 0;
  std::optional<Model> teacher;
  std::optional<Model> biased;
  std::optional<Model> main;
  std::vector<PredictionRecord> indist_records;
  std::vector<PredictionRecord> ood_records;
  std::vector<std::string> biased_ids;
  std::vector<ProbDist> biased_outputs;
  std::vector<double> betas;
  std::optional<double> biased_train_accuracy;
  std::vector<SoftTarget> soft_targets;
  nlohmann::json histories = nlohmann::json::object();

  // metrics.json content for this seed.
  nlohmann::json metrics(std::size_t n_bins) const {
    nlohmann::json m;
    m["method"] = to_string(method);
    m["seed"] = seed;
    m["indist"] = metrics_json(indist_records, n_bins);
    m["ood"] = metrics_json(ood_records, n_bins);
    m["indist_acc"] = accuracy(indist_records);
    m["ood_acc"] = accuracy(ood_records);
    m["ece"] = ece(indist_records, n_bins);
    m["ood_ece"] = ece(ood_records, n_bins);
    if (biased_train_accuracy) {
      m["biased_train_acc"] = *biased_train_accuracy;
      m["beta_frac_above_0.8"] = bias_weight_histogram(betas).fraction_above;
    }
    return m;
  }
};

// Independent streams per (run seed, role).
struct SeedStreams {
  std::uint64_t teacher_init, teacher_shuffle, biased_init, biased_shuffle, main_init, main_shuffle;

  static SeedStreams from(std::uint64_t seed) {
    return {mix_seed(seed, 1), mix_seed(seed, 11), mix_seed(seed, 2),
            mix_seed(seed, 12), mix_seed(seed, 3), mix_seed(seed, 13)};
  }
};

namespace detail {

template <typename F>
auto stage(const std::string& name, F&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

inline TrainSchedule with_seed(TrainSchedule s, std::uint64_t seed) {
  s.seed = seed;
  return s;
}

}  // namespace detail

// Runs `cfg.method` for one seed:
//   baseline     main model with hard-ce (this is also the teacher)
//   confreg      teacher (hard-ce) -> biased model -> scaled soft targets ->
//                fresh main model with soft-ce on those targets only
//   selfdistill  as confreg with beta forced to 0
//   reweight     fresh main model, hard-ce weighted per batch by the scaled
//                teacher probability of the gold label
//   poe/lmixin   main model trained through the ensemble with the frozen
//                biased model; evaluated alone
inline SeedOutcome run_seed(const PipelineConfig& cfg, const PreparedData& data, std::uint64_t seed) {
  const Method m = cfg.method;
  if (needs_biased_model(m) && !data.train_biased) {
    throw ConfigError("method '" + to_string(m) + "' needs a biased-feature kind");
  }
  const std::size_t k = data.num_classes;
  const SeedStreams streams = SeedStreams::from(seed);
  const Layout layout = cfg.main_model.layout(data.train.x.dim(), k);

  SeedOutcome out;
  out.method = m;
  out.seed = seed;

  if (data.train_biased) {
    detail::stage("biased", [&] {
      const TrainingSet& tb = *data.train_biased;
      TrainResult r = train(Model::init(cfg.biased_model.layout(tb.x.dim(), k), streams.biased_init), tb,
                            LossSpec::hard(), detail::with_seed(cfg.biased, streams.biased_shuffle));
      out.histories["biased"] = r.history.to_json();
      out.biased_ids = tb.ids;
      for (std::size_t i = 0; i < tb.size(); ++i) {
        out.biased_outputs.push_back(predict(r.model, tb.x.row(i)));
        out.betas.push_back(bias_weight(out.biased_outputs.back(), tb.labels[i]).value());
      }
      out.biased_train_accuracy = classification_accuracy(r.model, tb);
      out.biased = std::move(r.model);
      return 0;
    });
  }

  const bool needs_teacher = m == Method::baseline || m == Method::confreg || m == Method::selfdistill ||
                             m == Method::reweight;
  if (needs_teacher) {
    detail::stage("teacher", [&] {
      TrainResult r = train(Model::init(layout, streams.teacher_init), data.train, LossSpec::hard(),
                            detail::with_seed(cfg.teacher, streams.teacher_shuffle), &data.indist);
      out.histories["teacher"] = r.history.to_json();
      out.teacher = std::move(r.model);
      return 0;
    });
  }

  if (m == Method::confreg || m == Method::selfdistill || m == Method::reweight) {
    detail::stage("soft-targets", [&] {
      if (m == Method::selfdistill) {
        out.soft_targets = self_distill_targets(*out.teacher, data.train);
      } else {
        std::map<std::string, ProbDist> by_id;
        for (std::size_t i = 0; i < out.biased_ids.size(); ++i) by_id.emplace(out.biased_ids[i], out.biased_outputs[i]);
        out.soft_targets = make_soft_targets(*out.teacher, by_id, data.train);
      }
      return 0;
    });
  }

  detail::stage("main", [&] {
    if (m == Method::baseline) {
      out.main = out.teacher;
      return 0;
    }
    LossSpec spec;
    switch (m) {
      case Method::confreg:
      case Method::selfdistill: {
        std::vector<ProbDist> targets;
        for (const auto& t : out.soft_targets) targets.push_back(t.target);
        spec = LossSpec::soft(std::move(targets));
        break;
      }
      case Method::reweight: {
        std::vector<double> gold;
        for (std::size_t i = 0; i < out.soft_targets.size(); ++i) {
          gold.push_back(out.soft_targets[i].target[data.train.labels[i]]);
        }
        spec = LossSpec::reweight(std::move(gold));
        break;
      }
      case Method::poe: spec = LossSpec::poe(out.biased_outputs); break;
      case Method::lmixin: spec = LossSpec::learned_mixin(out.biased_outputs, cfg.lmixin_w); break;
      case Method::baseline: break;
    }
    TrainResult r = train(Model::init(layout, streams.main_init), data.train, spec,
                          detail::with_seed(cfg.main, streams.main_shuffle), &data.indist);
    out.histories["main"] = r.history.to_json();
    out.main = std::move(r.model);
    return 0;
  });

  detail::stage("evaluate", [&] {
    out.indist_records = predict_records(*out.main, data.indist);
    out.ood_records = predict_records(*out.main, data.ood);
    return 0;
  });
  return out;
}

// The confidence-regularization pipeline for one seed.
inline SeedOutcome run_confreg(PipelineConfig cfg, const PreparedData& data, std::uint64_t seed) {
  cfg.method = Method::confreg;
  return run_seed(cfg, data, seed);
}

}  // namespace confreg
