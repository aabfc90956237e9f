#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "confreg/data.hpp"
#include "confreg/debias.hpp"
#include "confreg/error.hpp"
#include "confreg/io.hpp"
#include "confreg/metrics.hpp"
#include "confreg/pipeline.hpp"
#include "json.hpp"

namespace confreg {

namespace fs = std::filesystem;

// Where the splits come from: the generator, or JSONL files on disk.
struct DataSource {
  std::optional<GenConfig> generator;
  std::string train_path, indist_path, ood_path, extra_path;
  std::size_t num_classes = 0;
};

struct ExperimentConfig {
  Method method = Method::confreg;
  std::vector<Method> methods;  // sweep only; defaults to {method}
  DataSource data;
  PipelineConfig pipeline;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::uint64_t augment_seed = 0;
  std::string output_dir = "runs/experiment";

  // Fully resolved JSON: every default spelled out. Re-running from this
  // document reproduces the run.
  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  // The default synthetic benchmark.
  static ExperimentConfig defaults() { return from_json(nlohmann::json::object()); }
};

namespace detail {

inline nlohmann::json schedule_json(const TrainSchedule& s) {
  return {{"epochs", s.epochs}, {"batch_size", s.batch_size}, {"learning_rate", s.learning_rate}};
}

inline TrainSchedule schedule_from(const nlohmann::json& j, TrainSchedule s) {
  s.epochs = j.value("epochs", s.epochs);
  s.batch_size = j.value("batch_size", s.batch_size);
  s.learning_rate = j.value("learning_rate", s.learning_rate);
  s.validate();
  return s;
}

inline nlohmann::json model_spec_json(const ModelSpec& m) {
  return {{"hidden", m.hidden}, {"activation", to_string(m.activation)}};
}

inline ModelSpec model_spec_from(const nlohmann::json& j, ModelSpec m) {
  m.hidden = j.value("hidden", m.hidden);
  if (j.contains("activation")) m.activation = parse_activation(j.at("activation").get<std::string>());
  return m;
}

inline Method method_from(const std::string& name) {
  const auto m = parse_method(name);
  if (!m) throw ConfigError("unknown method '" + name + "'");
  return *m;
}

}  // namespace detail

inline nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["method"] = to_string(method);
  nlohmann::json ms = nlohmann::json::array();
  for (Method m : methods) ms.push_back(to_string(m));
  j["methods"] = ms;
  if (data.generator) {
    j["data"] = {{"generator", data.generator->to_json()}};
  } else {
    j["data"] = {{"files",
                  {{"train", data.train_path},
                   {"indist", data.indist_path},
                   {"ood", data.ood_path},
                   {"extra", data.extra_path},
                   {"num_classes", data.num_classes}}}};
  }
  const PipelineConfig& p = pipeline;
  j["bias_features"] = p.bias_features ? nlohmann::json(to_string(*p.bias_features)) : nlohmann::json(nullptr);
  j["model"] = detail::model_spec_json(p.main_model);
  j["biased_model"] = detail::model_spec_json(p.biased_model);
  j["teacher"] = detail::schedule_json(p.teacher);
  j["biased"] = detail::schedule_json(p.biased);
  j["main"] = detail::schedule_json(p.main);
  j["lmixin_w"] = p.lmixin_w;
  j["n_bins"] = p.n_bins;
  j["embedding"] = {{"dim", p.embed_dim}, {"seed", p.embed_seed}};
  j["seeds"] = seeds;
  j["augment_seed"] = augment_seed;
  j["output_dir"] = output_dir;
  return j;
}

inline ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  try {
    c.method = detail::method_from(j.value("method", std::string("confreg")));
    if (j.contains("methods")) {
      for (const auto& m : j.at("methods")) c.methods.push_back(detail::method_from(m.get<std::string>()));
    }
    if (c.methods.empty()) c.methods.push_back(c.method);

    const nlohmann::json data = j.value("data", nlohmann::json::object());
    if (data.contains("files")) {
      const auto& f = data.at("files");
      c.data.train_path = f.at("train").get<std::string>();
      c.data.indist_path = f.at("indist").get<std::string>();
      c.data.ood_path = f.at("ood").get<std::string>();
      c.data.extra_path = f.value("extra", std::string());
      c.data.num_classes = f.at("num_classes").get<std::size_t>();
    } else {
      c.data.generator = GenConfig::from_json(data.value("generator", nlohmann::json::object()));
    }

    PipelineConfig& p = c.pipeline;
    p.method = c.method;
    if (j.contains("bias_features") && !j.at("bias_features").is_null()) {
      p.bias_features = parse_bias_features(j.at("bias_features").get<std::string>());
    } else if (!j.contains("bias_features") && c.data.generator && c.data.generator->mode == PayloadKind::vector) {
      p.bias_features = BiasFeatures::bias_dims;
    }
    p.main_model = detail::model_spec_from(j.value("model", nlohmann::json::object()), p.main_model);
    p.biased_model = detail::model_spec_from(j.value("biased_model", nlohmann::json::object()), p.biased_model);
    p.teacher = detail::schedule_from(j.value("teacher", nlohmann::json::object()), p.teacher);
    p.biased = detail::schedule_from(j.value("biased", nlohmann::json::object()), p.biased);
    p.main = detail::schedule_from(j.value("main", nlohmann::json::object()), p.main);
    p.lmixin_w = j.value("lmixin_w", p.lmixin_w);
    if (!(p.lmixin_w >= 0.0)) throw ConfigError("lmixin_w must be >= 0");
    p.n_bins = j.value("n_bins", p.n_bins);
    if (p.n_bins < 1) throw ConfigError("n_bins must be >= 1");
    const nlohmann::json emb = j.value("embedding", nlohmann::json::object());
    p.embed_dim = emb.value("dim", p.embed_dim);
    p.embed_seed = emb.value("seed", p.embed_seed);

    c.seeds = j.value("seeds", c.seeds);
    if (c.seeds.empty()) throw ConfigError("at least one seed is required");
    c.augment_seed = j.value("augment_seed", c.augment_seed);
    c.output_dir = j.value("output_dir", c.output_dir);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad experiment config: ") + e.what());
  }
  for (Method m : c.methods) {
    if (needs_biased_model(m) && !c.pipeline.bias_features) {
      throw ConfigError("method '" + to_string(m) + "' needs a biased-feature kind");
    }
  }
  return c;
}

inline ExperimentConfig load_experiment_config(const fs::path& path) {
  return ExperimentConfig::from_json(read_json_file(path));
}

// Loaded splits for an experiment.
inline Splits load_splits(const DataSource& src) {
  if (src.generator) return gen_synthetic(*src.generator);
  Splits s;
  s.train = read_dataset(src.train_path, src.num_classes);
  s.indist = read_dataset(src.indist_path, src.num_classes);
  s.ood = read_dataset(src.ood_path, src.num_classes);
  s.extra = src.extra_path.empty() ? Dataset{src.num_classes, {}} : read_dataset(src.extra_path, src.num_classes);
  return s;
}

// ---- aggregation ----------------------------------------------------------

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single value
};

inline MeanStd mean_std(const std::vector<double>& v) {
  if (v.empty()) throw MetricError("mean of empty list");
  double sum = 0.0;
  for (double x : v) sum += x;
  MeanStd out;
  out.mean = sum / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return out;
}

inline nlohmann::json aggregate_json(const std::vector<double>& v) {
  const MeanStd ms = mean_std(v);
  return {{"mean", ms.mean}, {"std", ms.std}, {"per_seed", v}};
}

// summary.json from per-seed metrics.json documents.
inline nlohmann::json summarize(const std::string& method, std::size_t num_classes,
                                const std::vector<nlohmann::json>& per_seed) {
  if (per_seed.empty()) throw MetricError("no seeds to summarize");
  std::map<std::string, std::vector<double>> series;
  std::vector<std::uint64_t> seeds;
  for (const auto& m : per_seed) {
    seeds.push_back(m.at("seed").get<std::uint64_t>());
    for (const char* key : {"indist_acc", "ood_acc", "ece", "ood_ece", "biased_train_acc", "beta_frac_above_0.8"}) {
      if (m.contains(key)) series[key].push_back(m.at(key).get<double>());
    }
    for (const char* split : {"indist", "ood"}) {
      for (const auto& [tag, v] : m.at(split).at("accuracy").items()) {
        series[std::string(split) + "/" + tag].push_back(v.get<double>());
      }
    }
  }
  nlohmann::json s;
  s["method"] = method;
  s["num_classes"] = num_classes;
  s["seeds"] = seeds;
  nlohmann::json subsets = nlohmann::json::object();
  for (const auto& [key, values] : series) {
    if (values.size() != per_seed.size()) continue;
    if (key.find('/') != std::string::npos) {
      subsets[key] = aggregate_json(values);
    } else {
      s[key] = aggregate_json(values);
    }
  }
  s["subsets"] = subsets;
  return s;
}

// ---- run ------------------------------------------------------------------

inline constexpr const char* kIncompleteMarker = "INCOMPLETE";

struct RunRecord {
  nlohmann::json config;
  std::vector<nlohmann::json> per_seed;
  nlohmann::json summary;
  fs::path dir;
};

namespace detail {

inline void write_seed_artifacts(const fs::path& dir, const SeedOutcome& o, std::size_t n_bins) {
  fs::create_directories(dir);
  write_json_file(dir / "metrics.json", o.metrics(n_bins));
  write_file_atomic(dir / "reliability.csv", reliability_to_csv(reliability_histogram(o.indist_records, n_bins)));
  write_file_atomic(dir / "reliability_ood.csv", reliability_to_csv(reliability_histogram(o.ood_records, n_bins)));
  if (!o.betas.empty()) {
    write_file_atomic(dir / "bias_hist.csv", bias_histogram_to_csv(bias_weight_histogram(o.betas)));
    write_biased_outputs(dir / "biased_outputs.jsonl", o.biased_ids, o.biased_outputs);
  }
  if (!o.soft_targets.empty()) write_soft_targets(dir / "soft_targets.jsonl", o.soft_targets);
  if (o.main) write_json_file(dir / "main.json", model_to_json(*o.main));
  if (o.teacher) write_json_file(dir / "teacher.json", model_to_json(*o.teacher));
  if (o.biased) write_json_file(dir / "biased.json", model_to_json(*o.biased));
  write_json_file(dir / "history.json", o.histories);
}

inline std::string seed_dir_name(std::uint64_t seed) { return "seed-" + std::to_string(seed); }

}  // namespace detail

// Runs `method` over all seeds on `splits` and writes the run directory:
// config.json, seed-*/{metrics.json, reliability.csv, bias_hist.csv, ...},
// summary.json, and pooled reliability.csv / bias_hist.csv.
inline RunRecord run_experiment_on(const ExperimentConfig& cfg, Method method, const Splits& splits,
                                   const fs::path& out_dir, const Dataset* train_override = nullptr) {
  ExperimentConfig resolved = cfg;
  resolved.method = method;
  resolved.pipeline.method = method;
  resolved.output_dir = out_dir.string();

  fs::create_directories(out_dir);
  write_file_atomic(out_dir / kIncompleteMarker, "run in progress\n");
  write_json_file(out_dir / "config.json", resolved.to_json());

  const Dataset& train = train_override ? *train_override : splits.train;
  const PreparedData data =
      detail::stage("prepare", [&] {
        return prepare_data(train, splits.indist, splits.ood, resolved.pipeline.bias_features,
                            resolved.pipeline.embed_dim, resolved.pipeline.embed_seed);
      });

  RunRecord rec;
  rec.config = resolved.to_json();
  rec.dir = out_dir;
  std::vector<PredictionRecord> pooled;
  std::vector<double> pooled_betas;
  const std::size_t n_bins = resolved.pipeline.n_bins;
  for (std::uint64_t seed : resolved.seeds) {
    const SeedOutcome o = run_seed(resolved.pipeline, data, seed);
    detail::write_seed_artifacts(out_dir / detail::seed_dir_name(seed), o, n_bins);
    rec.per_seed.push_back(o.metrics(n_bins));
    pooled.insert(pooled.end(), o.indist_records.begin(), o.indist_records.end());
    pooled_betas.insert(pooled_betas.end(), o.betas.begin(), o.betas.end());
  }
  rec.summary = summarize(to_string(method), data.num_classes, rec.per_seed);
  write_file_atomic(out_dir / "reliability.csv", reliability_to_csv(reliability_histogram(pooled, n_bins)));
  if (!pooled_betas.empty()) {
    write_file_atomic(out_dir / "bias_hist.csv", bias_histogram_to_csv(bias_weight_histogram(pooled_betas)));
  }
  write_json_file(out_dir / "summary.json", rec.summary);
  fs::remove(out_dir / kIncompleteMarker);
  return rec;
}

inline RunRecord run_experiment(const ExperimentConfig& cfg, const std::optional<fs::path>& out_override = {}) {
  const fs::path out = out_override ? *out_override : fs::path(cfg.output_dir);
  const Splits splits = detail::stage("data", [&] { return load_splits(cfg.data); });
  return run_experiment_on(cfg, cfg.method, splits, out);
}

// ---- compare --------------------------------------------------------------

struct CompareRow {
  std::string run;
  std::string method;
  std::map<std::string, MeanStd> columns;
};

struct CompareTable {
  std::vector<std::string> columns;
  std::vector<CompareRow> rows;
  std::vector<std::string> skipped;

  // Accuracies and ECE rendered in percentage points.
  std::string to_text() const {
    std::ostringstream out;
    out << std::left << std::setw(24) << "run" << std::setw(12) << "method";
    for (const auto& c : columns) out << std::setw(18) << c;
    out << '\n';
    for (const auto& r : rows) {
      out << std::setw(24) << r.run << std::setw(12) << r.method;
      for (const auto& c : columns) {
        std::string cell = "-";
        if (auto it = r.columns.find(c); it != r.columns.end()) {
          char buf[48];
          std::snprintf(buf, sizeof buf, "%.1f +- %.1f", 100.0 * it->second.mean, 100.0 * it->second.std);
          cell = buf;
        }
        out << std::setw(18) << cell;
      }
      out << '\n';
    }
    return out.str();
  }

  std::string to_csv() const {
    std::ostringstream out;
    out.precision(17);
    out << "run,method";
    for (const auto& c : columns) out << ',' << c << "_mean," << c << "_std";
    out << '\n';
    for (const auto& r : rows) {
      out << r.run << ',' << r.method;
      for (const auto& c : columns) {
        if (auto it = r.columns.find(c); it != r.columns.end()) {
          out << ',' << it->second.mean << ',' << it->second.std;
        } else {
          out << ",,";
        }
      }
      out << '\n';
    }
    return out.str();
  }
};

inline bool run_complete(const fs::path& dir) {
  return fs::exists(dir / "summary.json") && !fs::exists(dir / kIncompleteMarker);
}

inline CompareTable compare_runs(const std::vector<fs::path>& dirs, std::ostream* warn = &std::cerr) {
  CompareTable table;
  table.columns = {"indist_acc", "ood_acc"};
  std::vector<std::string> subset_cols;
  std::optional<std::size_t> k;
  for (const auto& dir : dirs) {
    if (!run_complete(dir)) {
      table.skipped.push_back(dir.string());
      if (warn) *warn << "warning: skipping incomplete run " << dir.string() << '\n';
      continue;
    }
    const nlohmann::json s = read_json_file(dir / "summary.json");
    const std::size_t rk = s.at("num_classes").get<std::size_t>();
    if (k && *k != rk) {
      throw ConfigError("cannot compare runs with different class counts (" + std::to_string(*k) + " vs " +
                        std::to_string(rk) + ")");
    }
    k = rk;
    CompareRow row;
    row.run = dir.filename().empty() ? dir.parent_path().filename().string() : dir.filename().string();
    row.method = s.at("method").get<std::string>();
    for (const char* key : {"indist_acc", "ood_acc", "ece"}) {
      row.columns[key] = {s.at(key).at("mean").get<double>(), s.at(key).at("std").get<double>()};
    }
    for (const auto& [key, v] : s.at("subsets").items()) {
      if (key.rfind("ood/", 0) != 0 || key == "ood/all") continue;
      row.columns[key] = {v.at("mean").get<double>(), v.at("std").get<double>()};
      if (std::find(subset_cols.begin(), subset_cols.end(), key) == subset_cols.end()) subset_cols.push_back(key);
    }
    table.rows.push_back(std::move(row));
  }
  std::sort(subset_cols.begin(), subset_cols.end());
  table.columns.insert(table.columns.end(), subset_cols.begin(), subset_cols.end());
  table.columns.push_back("ece");
  return table;
}

// ---- sweep ----------------------------------------------------------------

struct SweepPoint {
  std::string method;
  double fraction = 0.0;
  std::string subset;  // "all" or a subset tag of the ood split
  MeanStd accuracy;
};

// Minimal line chart: one polyline per series over shared x values.
inline std::string svg_line_chart(const std::string& title, const std::vector<double>& xs,
                                  const std::vector<std::pair<std::string, std::vector<double>>>& series) {
  constexpr double kW = 640, kH = 400, kL = 60, kR = 150, kT = 40, kB = 50;
  double lo = 1.0, hi = 0.0;
  for (const auto& [name, ys] : series) {
    for (double y : ys) {
      lo = std::min(lo, y);
      hi = std::max(hi, y);
    }
  }
  if (!(hi > lo)) {
    lo -= 0.05;
    hi += 0.05;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  const double x_lo = xs.empty() ? 0.0 : *std::min_element(xs.begin(), xs.end());
  double x_hi = xs.empty() ? 1.0 : *std::max_element(xs.begin(), xs.end());
  if (!(x_hi > x_lo)) x_hi = x_lo + 1.0;
  auto px = [&](double x) { return kL + (x - x_lo) / (x_hi - x_lo) * (kW - kL - kR); };
  auto py = [&](double y) { return kH - kB - (y - lo) / (hi - lo) * (kH - kT - kB); };
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kL << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
  out << "<line x1=\"" << kL << "\" y1=\"" << kH - kB << "\" x2=\"" << kW - kR << "\" y2=\"" << kH - kB
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kL << "\" y1=\"" << kT << "\" x2=\"" << kL << "\" y2=\"" << kH - kB
      << "\" stroke=\"black\"/>\n";
  for (double x : xs) {
    out << "<text x=\"" << px(x) << "\" y=\"" << kH - kB + 18 << "\" font-family=\"sans-serif\" font-size=\"11\" "
        << "text-anchor=\"middle\">" << x << "</text>\n";
  }
  for (int t = 0; t <= 4; ++t) {
    const double y = lo + (hi - lo) * t / 4.0;
    out << "<text x=\"" << kL - 6 << "\" y=\"" << py(y) + 4 << "\" font-family=\"sans-serif\" font-size=\"11\" "
        << "text-anchor=\"end\">" << 100.0 * y << "</text>\n";
  }
  out << "<text x=\"" << (kL + kW - kR) / 2 << "\" y=\"" << kH - 10
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">fraction of extra pool</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % 6];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < xs.size() && i < series[s].second.size(); ++i) {
      out << (i ? " " : "") << px(xs[i]) << ',' << py(series[s].second[i]);
    }
    out << "\"/>\n";
    out << "<text x=\"" << kW - kR + 10 << "\" y=\"" << kT + 16 * (s + 1) << "\" font-family=\"sans-serif\" "
        << "font-size=\"12\" fill=\"" << color << "\">" << series[s].first << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

inline std::vector<double> parse_fractions(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    std::size_t used = 0;
    double f;
    try {
      f = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ConfigError("bad fraction '" + item + "'");
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos) throw ConfigError("bad fraction '" + item + "'");
    if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("fraction " + item + " outside [0,1]");
    out.push_back(f);
  }
  if (out.empty()) throw ConfigError("no fractions given");
  return out;
}

// For each fraction, augments the training split with that share of the
// extra pool and runs every configured method against the fixed ood split.
// Writes sweep.csv and one sweep_<subset>.svg per subset.
inline std::vector<SweepPoint> run_sweep(const ExperimentConfig& cfg, const std::vector<double>& fractions,
                                         const std::optional<fs::path>& out_override = {}) {
  for (double f : fractions) {
    if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("fraction outside [0,1]");
  }
  const fs::path out = out_override ? *out_override : fs::path(cfg.output_dir);
  const Splits splits = detail::stage("data", [&] { return load_splits(cfg.data); });
  if (splits.extra.empty()) {
    throw ConfigError("sweep needs an extra training pool (generator n_extra > 0 or files.extra)");
  }
  fs::create_directories(out);
  ExperimentConfig resolved = cfg;
  resolved.output_dir = out.string();
  write_json_file(out / "config.json", resolved.to_json());

  std::vector<SweepPoint> points;
  std::vector<std::string> subsets;
  for (double f : fractions) {
    const Dataset train = augment(splits.train, splits.extra, f, cfg.augment_seed);
    char tag[32];
    std::snprintf(tag, sizeof tag, "frac-%.4f", f);
    for (Method m : cfg.methods) {
      const RunRecord rec = run_experiment_on(cfg, m, splits, out / tag / to_string(m), &train);
      for (const auto& [key, v] : rec.summary.at("subsets").items()) {
        if (key.rfind("ood/", 0) != 0) continue;
        const std::string subset = key.substr(4);
        points.push_back({to_string(m), f, subset, {v.at("mean").get<double>(), v.at("std").get<double>()}});
        if (std::find(subsets.begin(), subsets.end(), subset) == subsets.end()) subsets.push_back(subset);
      }
    }
  }

  std::ostringstream csv;
  csv.precision(17);
  csv << "method,fraction,subset,mean,std\n";
  for (const auto& p : points) {
    csv << p.method << ',' << p.fraction << ',' << p.subset << ',' << p.accuracy.mean << ',' << p.accuracy.std << '\n';
  }
  write_file_atomic(out / "sweep.csv", csv.str());

  for (const auto& subset : subsets) {
    std::vector<std::pair<std::string, std::vector<double>>> series;
    for (Method m : cfg.methods) {
      std::vector<double> ys;
      for (double f : fractions) {
        for (const auto& p : points) {
          if (p.method == to_string(m) && p.fraction == f && p.subset == subset) ys.push_back(p.accuracy.mean);
        }
      }
      series.emplace_back(to_string(m), std::move(ys));
    }
    write_file_atomic(out / ("sweep_" + subset + ".svg"),
                      svg_line_chart("ood accuracy (" + subset + ")", fractions, series));
  }
  return points;
}

}  // namespace confreg
