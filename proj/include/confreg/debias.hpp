#pragma once

#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "confreg/error.hpp"
#include "confreg/io.hpp"
#include "confreg/model.hpp"
#include "confreg/prob.hpp"
#include "confreg/table.hpp"

namespace confreg {

// How well the biased model alone predicts an example: its probability on
// the gold label. Always in [0, 1].
class BiasWeight {
 public:
  BiasWeight() = default;
  explicit BiasWeight(double value) : value_(value) {
    if (!(value >= 0.0 && value <= 1.0)) {
      throw InputError("bias weight must lie in [0,1], got " + std::to_string(value));
    }
  }
  double value() const { return value_; }
  friend bool operator==(BiasWeight, BiasWeight) = default;

 private:
  double value_ = 0.0;
};

inline BiasWeight bias_weight(const ProbDist& biased, std::size_t gold) {
  if (gold >= biased.size()) {
    throw InputError("gold label " + std::to_string(gold) + " out of range for " +
                     std::to_string(biased.size()) + " classes");
  }
  return BiasWeight(biased[gold]);
}

// S(p, beta)_j = p_j^(1-beta) / sum_k p_k^(1-beta), computed on clamped p.
// beta = 0 returns p unchanged; beta = 1 returns the uniform distribution.
inline ProbDist scale_distribution(const ProbDist& teacher, BiasWeight beta) {
  const std::size_t k = teacher.size();
  bool clamped = false;
  for (double p : teacher.values()) clamped = clamped || p < kProbFloor;
  if (beta.value() == 0.0 && !clamped) return teacher;
  if (beta.value() == 1.0) return ProbDist::uniform(k);

  const double exponent = 1.0 - beta.value();
  std::vector<double> out(k);
  double sum = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    out[j] = std::pow(clamp_prob(teacher[j]), exponent);
    sum += out[j];
  }
  for (double& v : out) v /= sum;
  return ProbDist(std::move(out));
}

// One row of the soft-target file.
struct SoftTarget {
  std::string id;
  BiasWeight beta;
  ProbDist teacher;
  ProbDist target;
};

// Scaled teacher distribution for every training row. `biased_outputs` maps
// example id to the biased model's distribution; a missing id is a DataError
// listing every missing id. Passing `force_zero_beta` yields plain
// self-distillation targets.
inline std::vector<SoftTarget> make_soft_targets(const Model& teacher,
                                                 const std::map<std::string, ProbDist>& biased_outputs,
                                                 const TrainingSet& data,
                                                 bool force_zero_beta = false) {
  std::vector<std::string> missing;
  if (!force_zero_beta) {
    for (const auto& id : data.ids) {
      if (!biased_outputs.contains(id)) missing.push_back(id);
    }
  }
  if (!missing.empty()) {
    std::ostringstream msg;
    msg << "biased-model output missing for " << missing.size() << " example(s):";
    for (const auto& id : missing) msg << ' ' << id;
    throw DataError(msg.str());
  }
  std::vector<SoftTarget> out;
  out.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    ProbDist p_hat = predict(teacher, data.x.row(i));
    BiasWeight beta = force_zero_beta ? BiasWeight(0.0)
                                      : bias_weight(biased_outputs.at(data.ids[i]), data.labels[i]);
    ProbDist target = scale_distribution(p_hat, beta);
    out.push_back({data.ids[i], beta, std::move(p_hat), std::move(target)});
  }
  return out;
}

// ---- soft-target JSONL: {"id", "beta", "teacher", "target"} --------------

inline std::string soft_targets_to_jsonl(const std::vector<SoftTarget>& targets) {
  std::string out;
  for (const auto& t : targets) {
    nlohmann::ordered_json j;
    j["id"] = t.id;
    j["beta"] = t.beta.value();
    j["teacher"] = t.teacher.vec();
    j["target"] = t.target.vec();
    out += j.dump();
    out += '\n';
  }
  return out;
}

inline void write_soft_targets(const std::filesystem::path& path,
                               const std::vector<SoftTarget>& targets) {
  write_file_atomic(path, soft_targets_to_jsonl(targets));
}

inline std::vector<SoftTarget> read_soft_targets(const std::filesystem::path& path) {
  std::vector<SoftTarget> out;
  for_each_jsonl(path, [&](const nlohmann::json& j, std::size_t line) {
    try {
      out.push_back({j.at("id").get<std::string>(), BiasWeight(j.at("beta").get<double>()),
                     ProbDist(j.at("teacher").get<std::vector<double>>()),
                     ProbDist(j.at("target").get<std::vector<double>>())});
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(line) + ": " + e.what(), line);
    } catch (const InputError& e) {
      throw DataError(path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  return out;
}

// ---- biased-model output JSONL: {"id", "dist"} ----------------------------

inline void write_biased_outputs(const std::filesystem::path& path,
                                 const std::vector<std::string>& ids,
                                 const std::vector<ProbDist>& dists) {
  if (ids.size() != dists.size()) throw InputError("ids and distributions differ in length");
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    nlohmann::ordered_json j;
    j["id"] = ids[i];
    j["dist"] = dists[i].vec();
    out += j.dump();
    out += '\n';
  }
  write_file_atomic(path, out);
}

inline std::map<std::string, ProbDist> read_biased_outputs(const std::filesystem::path& path) {
  std::map<std::string, ProbDist> out;
  for_each_jsonl(path, [&](const nlohmann::json& j, std::size_t line) {
    try {
      out.insert_or_assign(j.at("id").get<std::string>(),
                           ProbDist(j.at("dist").get<std::vector<double>>()));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(line) + ": " + e.what(), line);
    } catch (const InputError& e) {
      throw DataError(path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  return out;
}

}  // namespace confreg
