#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "confreg/error.hpp"
#include "confreg/model.hpp"
#include "confreg/table.hpp"
#include "json.hpp"

namespace confreg {

struct PredictionRecord {
  std::string id;
  std::size_t predicted = 0;
  double confidence = 0.0;  // probability of the predicted class
  bool correct = false;
  std::string subset;
};

inline std::vector<PredictionRecord> predict_records(const Model& model, const TrainingSet& data) {
  std::vector<PredictionRecord> out;
  out.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const ProbDist p = predict(model, data.x.row(i));
    const std::size_t pred = p.argmax();
    out.push_back({data.ids[i], pred, p[pred], pred == data.labels[i],
                   i < data.subsets.size() ? data.subsets[i] : std::string()});
  }
  return out;
}

// Mean correctness, optionally restricted to one subset tag.
inline double accuracy(const std::vector<PredictionRecord>& records,
                       const std::optional<std::string>& subset = std::nullopt) {
  std::size_t n = 0, correct = 0;
  for (const auto& r : records) {
    if (subset && r.subset != *subset) continue;
    ++n;
    correct += r.correct ? 1 : 0;
  }
  if (n == 0) {
    throw MetricError(subset ? "no records with subset '" + *subset + "'" : "accuracy of empty record set");
  }
  return static_cast<double>(correct) / static_cast<double>(n);
}

// Bin of a value in (0, 1] split into n right-closed bins; values <= 0 land
// in the first bin.
inline std::size_t confidence_bin(double value, std::size_t n_bins) {
  const double scaled = std::ceil(value * static_cast<double>(n_bins));
  if (!(scaled >= 1.0)) return 0;
  return std::min(n_bins - 1, static_cast<std::size_t>(scaled) - 1);
}

struct ReliabilityBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  double mean_confidence = 0.0;
  double accuracy = 0.0;

  friend bool operator==(const ReliabilityBin&, const ReliabilityBin&) = default;
};

struct ReliabilityBins {
  std::vector<ReliabilityBin> bins;

  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& b : bins) n += b.count;
    return n;
  }

  friend bool operator==(const ReliabilityBins&, const ReliabilityBins&) = default;
};

inline ReliabilityBins reliability_histogram(const std::vector<PredictionRecord>& records,
                                             std::size_t n_bins = 10) {
  if (records.empty()) throw MetricError("reliability histogram of empty record set");
  if (n_bins < 1) throw MetricError("need at least one bin");
  ReliabilityBins out;
  out.bins.resize(n_bins);
  std::vector<double> conf_sum(n_bins, 0.0);
  std::vector<std::size_t> correct(n_bins, 0);
  for (const auto& r : records) {
    const std::size_t b = confidence_bin(r.confidence, n_bins);
    ++out.bins[b].count;
    conf_sum[b] += r.confidence;
    correct[b] += r.correct ? 1 : 0;
  }
  for (std::size_t b = 0; b < n_bins; ++b) {
    auto& bin = out.bins[b];
    bin.lo = static_cast<double>(b) / static_cast<double>(n_bins);
    bin.hi = static_cast<double>(b + 1) / static_cast<double>(n_bins);
    if (bin.count > 0) {
      bin.mean_confidence = conf_sum[b] / static_cast<double>(bin.count);
      bin.accuracy = static_cast<double>(correct[b]) / static_cast<double>(bin.count);
    }
  }
  return out;
}

// Expected calibration error: sum_b (|B_b| / n) |acc(B_b) - conf(B_b)|.
inline double ece(const std::vector<PredictionRecord>& records, std::size_t n_bins = 10) {
  if (records.empty()) throw MetricError("ECE of empty record set");
  const ReliabilityBins h = reliability_histogram(records, n_bins);
  const double n = static_cast<double>(records.size());
  double e = 0.0;
  for (const auto& b : h.bins) {
    if (b.count == 0) continue;
    e += static_cast<double>(b.count) / n * std::abs(b.accuracy - b.mean_confidence);
  }
  return e;
}

inline std::string reliability_to_csv(const ReliabilityBins& h) {
  std::ostringstream out;
  out.precision(17);
  out << "bin_lo,bin_hi,count,mean_conf,accuracy\n";
  for (const auto& b : h.bins) {
    out << b.lo << ',' << b.hi << ',' << b.count << ',' << b.mean_confidence << ',' << b.accuracy << '\n';
  }
  return out.str();
}

inline ReliabilityBins reliability_from_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::size_t line_no = 0;
  ReliabilityBins out;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;
    ReliabilityBin b;
    if (std::sscanf(line.c_str(), "%lf,%lf,%zu,%lf,%lf", &b.lo, &b.hi, &b.count, &b.mean_confidence,
                    &b.accuracy) != 5) {
      throw ParseError("reliability csv: malformed line " + std::to_string(line_no), line_no);
    }
    out.bins.push_back(b);
  }
  return out;
}

// Distribution of bias weights over 10 equal-width bins of [0, 1], plus the
// share of examples the biased model gets right with beta > 0.8.
struct BiasHistogram {
  std::vector<std::size_t> counts;
  double fraction_above = 0.0;
  double threshold = 0.8;
  std::size_t n = 0;
};

inline BiasHistogram bias_weight_histogram(const std::vector<double>& betas, double threshold = 0.8) {
  if (betas.empty()) throw MetricError("bias-weight histogram of empty list");
  constexpr std::size_t kBins = 10;
  BiasHistogram h;
  h.counts.assign(kBins, 0);
  h.threshold = threshold;
  h.n = betas.size();
  std::size_t above = 0;
  for (double b : betas) {
    if (!(b >= 0.0 && b <= 1.0)) throw MetricError("bias weight outside [0,1]");
    ++h.counts[confidence_bin(b, kBins)];
    above += b > threshold ? 1 : 0;
  }
  h.fraction_above = static_cast<double>(above) / static_cast<double>(betas.size());
  return h;
}

inline std::string bias_histogram_to_csv(const BiasHistogram& h) {
  std::ostringstream out;
  out.precision(17);
  out << "bin_lo,bin_hi,count\n";
  const std::size_t k = h.counts.size();
  for (std::size_t b = 0; b < k; ++b) {
    out << static_cast<double>(b) / static_cast<double>(k) << ',' << static_cast<double>(b + 1) / static_cast<double>(k)
        << ',' << h.counts[b] << '\n';
  }
  return out.str();
}

// metrics.json body: accuracy by subset (plus "all"), ECE and record count.
inline nlohmann::json metrics_json(const std::vector<PredictionRecord>& records, std::size_t n_bins = 10) {
  nlohmann::json acc;
  acc["all"] = accuracy(records);
  std::vector<std::string> tags;
  for (const auto& r : records) {
    if (!r.subset.empty() && std::find(tags.begin(), tags.end(), r.subset) == tags.end()) tags.push_back(r.subset);
  }
  std::sort(tags.begin(), tags.end());
  for (const auto& t : tags) acc[t] = accuracy(records, t);
  return {{"accuracy", acc}, {"ece", ece(records, n_bins)}, {"n", records.size()}};
}

}  // namespace confreg
