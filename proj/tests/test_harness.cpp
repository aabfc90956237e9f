#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "confreg/harness.hpp"
#include "support/checks.hpp"

using namespace confreg;
using confreg::testing::TempDir;
using nlohmann::json;

namespace {

// Small enough to run in about a second per method.
json small_config(const std::string& method = "confreg") {
  return {{"method", method},
          {"data", {{"generator", {{"n_train", 300}, {"n_indist", 150}, {"n_ood", 150}, {"n_extra", 100}}}}},
          {"teacher", {{"epochs", 5}}},
          {"biased", {{"epochs", 3}}},
          {"main", {{"epochs", 5}}},
          {"seeds", {1, 2, 3}}};
}

int run_cli(const std::string& args, std::string* output = nullptr, const std::filesystem::path& log = {}) {
  const std::filesystem::path out = log.empty() ? std::filesystem::temp_directory_path() / "confreg-cli.log" : log;
  const std::string cmd = std::string(CONFREG_CLI_PATH) + " " + args + " > " + out.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  if (output) *output = read_file(out);
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

void write_json(const std::filesystem::path& p, const json& j) { write_json_file(p, j); }

}  // namespace

TEST(Config, DefaultsResolve) {
  const ExperimentConfig c = ExperimentConfig::defaults();
  EXPECT_EQ(c.method, Method::confreg);
  ASSERT_TRUE(c.data.generator.has_value());
  EXPECT_EQ(c.data.generator->num_classes, 3u);
  EXPECT_EQ(c.data.generator->rho, 0.9);
  EXPECT_EQ(c.seeds.size(), 5u);
  EXPECT_EQ(c.pipeline.lmixin_w, 0.03);
  ASSERT_TRUE(c.pipeline.bias_features.has_value());
  EXPECT_EQ(*c.pipeline.bias_features, BiasFeatures::bias_dims);
}

TEST(Config, ResolvedRoundTrip) {
  const ExperimentConfig c = ExperimentConfig::from_json(small_config("poe"));
  const json resolved = c.to_json();
  EXPECT_EQ(ExperimentConfig::from_json(resolved).to_json().dump(), resolved.dump());
  EXPECT_EQ(resolved.at("method"), "poe");
  EXPECT_EQ(resolved.at("teacher").at("epochs"), 5);
}

TEST(Config, Errors) {
  EXPECT_THROW(ExperimentConfig::from_json({{"method", "foo"}}), ConfigError);
  EXPECT_THROW(ExperimentConfig::from_json({{"seeds", json::array()}}), ConfigError);
  EXPECT_THROW(ExperimentConfig::from_json({{"lmixin_w", -1.0}}), ConfigError);
  EXPECT_THROW(ExperimentConfig::from_json({{"teacher", {{"epochs", "many"}}}}), ConfigError);
  EXPECT_THROW(ExperimentConfig::from_json({{"method", "confreg"}, {"bias_features", nullptr}}), ConfigError);
  EXPECT_NO_THROW(ExperimentConfig::from_json({{"method", "baseline"}, {"bias_features", nullptr}}));
}

TEST(Run, WritesRunDirectory) {
  TempDir tmp("run-dir");
  const auto rec = run_experiment(ExperimentConfig::from_json(small_config()), tmp / "run");
  const auto dir = tmp / "run";
  for (const char* f : {"config.json", "summary.json", "reliability.csv", "bias_hist.csv"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  EXPECT_FALSE(std::filesystem::exists(dir / kIncompleteMarker));
  for (const char* f : {"metrics.json", "reliability.csv", "bias_hist.csv", "soft_targets.jsonl",
                        "biased_outputs.jsonl", "main.json", "teacher.json", "biased.json", "history.json"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / "seed-2" / f)) << f;
  }
  const json s = read_json_file(dir / "summary.json");
  for (const char* key : {"indist_acc", "ood_acc", "ece"}) {
    ASSERT_TRUE(s.contains(key)) << key;
    EXPECT_EQ(s.at(key).at("per_seed").size(), 3u);
  }
  EXPECT_EQ(s.at("num_classes"), 3);
  EXPECT_TRUE(s.at("subsets").contains("ood/conflicting"));
  EXPECT_EQ(rec.summary.dump(), s.dump());
}

TEST(Run, SummaryMatchesPerSeedFiles) {
  TempDir tmp("run-agg");
  run_experiment(ExperimentConfig::from_json(small_config()), tmp / "run");
  const json s = read_json_file(tmp / "run" / "summary.json");
  for (const char* key : {"indist_acc", "ood_acc", "ece"}) {
    std::vector<double> v;
    for (int seed : {1, 2, 3}) {
      v.push_back(read_json_file(tmp / "run" / ("seed-" + std::to_string(seed)) / "metrics.json").at(key));
    }
    double mean = (v[0] + v[1] + v[2]) / 3.0, ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    EXPECT_NEAR(s.at(key).at("mean").get<double>(), mean, 1e-12);
    EXPECT_NEAR(s.at(key).at("std").get<double>(), std::sqrt(ss / 2.0), 1e-12);
  }
}

TEST(Run, RerunFromResolvedConfigIsByteIdentical) {
  TempDir tmp("run-repro");
  run_experiment(ExperimentConfig::from_json(small_config()), tmp / "a");
  run_experiment(load_experiment_config(tmp / "a" / "config.json"), tmp / "b");
  EXPECT_EQ(read_file(tmp / "a" / "summary.json"), read_file(tmp / "b" / "summary.json"));
  EXPECT_EQ(read_file(tmp / "a" / "seed-1" / "soft_targets.jsonl"),
            read_file(tmp / "b" / "seed-1" / "soft_targets.jsonl"));
}

TEST(Run, EveryMethodRuns) {
  TempDir tmp("run-methods");
  for (const char* m : {"baseline", "confreg", "poe", "lmixin", "reweight", "selfdistill"}) {
    json c = small_config(m);
    c["seeds"] = {1};
    const auto rec = run_experiment(ExperimentConfig::from_json(c), tmp / m);
    EXPECT_EQ(rec.summary.at("method"), m);
    EXPECT_GT(rec.summary.at("indist_acc").at("mean").get<double>(), 0.4) << m;
  }
}

TEST(Run, TextPairModeRuns) {
  TempDir tmp("run-text");
  for (const char* kind : {"overlap", "hypothesis-only"}) {
    json c = small_config();
    c["data"]["generator"]["mode"] = "textpair";
    c["bias_features"] = kind;
    c["seeds"] = {1};
    const auto rec = run_experiment(ExperimentConfig::from_json(c), tmp / kind);
    EXPECT_TRUE(rec.summary.contains("ood_acc"));
  }
}

TEST(Run, FileDataSource) {
  TempDir tmp("run-files");
  GenConfig g;
  g.n_train = 200;
  g.n_indist = 100;
  g.n_ood = 100;
  const Splits s = gen_synthetic(g);
  write_dataset(s.train, tmp / "train.jsonl");
  write_dataset(s.indist, tmp / "indist.jsonl");
  write_dataset(s.ood, tmp / "ood.jsonl");
  json c = small_config();
  c["data"] = {{"files",
                {{"train", (tmp / "train.jsonl").string()},
                 {"indist", (tmp / "indist.jsonl").string()},
                 {"ood", (tmp / "ood.jsonl").string()},
                 {"num_classes", 3}}}};
  c["bias_features"] = "bias-dims";
  c["seeds"] = {1};
  const auto rec = run_experiment(ExperimentConfig::from_json(c), tmp / "run");
  EXPECT_EQ(rec.summary.at("num_classes"), 3);
}

TEST(Compare, SingleRunSingleRow) {
  TempDir tmp("cmp-one");
  run_experiment(ExperimentConfig::from_json(small_config()), tmp / "run");
  const CompareTable t = compare_runs({tmp / "run"}, nullptr);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0].method, "confreg");
  const json s = read_json_file(tmp / "run" / "summary.json");
  EXPECT_EQ(t.rows[0].columns.at("ood_acc").mean, s.at("ood_acc").at("mean").get<double>());
  EXPECT_NE(t.to_text().find("confreg"), std::string::npos);
  const std::string csv = t.to_csv();
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
}

TEST(Compare, DifferentClassCountsRejected) {
  TempDir tmp("cmp-k");
  json a = small_config("baseline");
  a["seeds"] = {1};
  json b = a;
  b["data"]["generator"]["num_classes"] = 4;
  b["data"]["generator"]["rho"] = 0.9;
  run_experiment(ExperimentConfig::from_json(a), tmp / "a");
  run_experiment(ExperimentConfig::from_json(b), tmp / "b");
  EXPECT_THROW(compare_runs({tmp / "a", tmp / "b"}, nullptr), ConfigError);
}

TEST(Compare, IncompleteRunsSkipped) {
  TempDir tmp("cmp-skip");
  json a = small_config("baseline");
  a["seeds"] = {1};
  run_experiment(ExperimentConfig::from_json(a), tmp / "a");
  std::filesystem::create_directories(tmp / "half");
  write_file_atomic(tmp / "half" / kIncompleteMarker, "");
  std::ostringstream warn;
  const CompareTable t = compare_runs({tmp / "a", tmp / "half"}, &warn);
  EXPECT_EQ(t.rows.size(), 1u);
  ASSERT_EQ(t.skipped.size(), 1u);
  EXPECT_NE(warn.str().find("half"), std::string::npos);
}

TEST(Sweep, ShapeAndZeroFraction) {
  TempDir tmp("sweep");
  json c = small_config("baseline");
  c["methods"] = {"baseline", "confreg"};
  c["seeds"] = {1, 2};
  const ExperimentConfig cfg = ExperimentConfig::from_json(c);
  const auto points = run_sweep(cfg, {0.0, 0.5, 1.0}, tmp / "sweep");
  // 2 methods x 3 fractions x {all, aligned, conflicting}
  EXPECT_EQ(points.size(), 18u);
  const std::string csv = read_file(tmp / "sweep" / "sweep.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 19);
  for (const char* svg : {"sweep_all.svg", "sweep_aligned.svg", "sweep_conflicting.svg"}) {
    const std::string body = read_file(tmp / "sweep" / svg);
    EXPECT_NE(body.find("<polyline"), std::string::npos);
  }

  // fraction 0 reproduces a plain run
  ExperimentConfig plain = cfg;
  plain.method = Method::confreg;
  const auto rec = run_experiment(plain, tmp / "plain");
  for (const auto& p : points) {
    if (p.method == "confreg" && p.fraction == 0.0 && p.subset == "all") {
      EXPECT_EQ(p.accuracy.mean, rec.summary.at("ood_acc").at("mean").get<double>());
    }
  }
}

TEST(Sweep, Errors) {
  EXPECT_THROW(parse_fractions("0,1.5"), ConfigError);
  EXPECT_THROW(parse_fractions("-0.1"), ConfigError);
  EXPECT_THROW(parse_fractions("a"), ConfigError);
  EXPECT_EQ(parse_fractions("0, 0.25,0.5,1").size(), 4u);
  json c = small_config("baseline");
  c["data"]["generator"]["n_extra"] = 0;
  EXPECT_THROW(run_sweep(ExperimentConfig::from_json(c), {0.0}, std::filesystem::temp_directory_path() / "x"),
               ConfigError);
}

TEST(Aggregate, SampleStd) {
  const MeanStd m = mean_std({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  EXPECT_NEAR(m.std, std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_EQ(mean_std({0.7}).std, 0.0);
}

TEST(Svg, EmitsOnePolylinePerSeries) {
  const std::string svg = svg_line_chart("t", {0.0, 0.5, 1.0}, {{"a", {0.1, 0.2, 0.3}}, {"b", {0.3, 0.3, 0.3}}});
  std::size_t n = 0;
  for (std::size_t pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1)) ++n;
  EXPECT_EQ(n, 2u);
  EXPECT_EQ(svg.rfind("</svg>"), svg.size() - 7);
}

TEST(Cli, RunCompareGen) {
  TempDir tmp("cli");
  write_json(tmp / "cfg.json", small_config());
  std::string out;
  ASSERT_EQ(run_cli("run --config " + (tmp / "cfg.json").string() + " --out " + (tmp / "run").string(), &out,
                    tmp / "log"),
            0)
      << out;
  EXPECT_TRUE(std::filesystem::exists(tmp / "run" / "summary.json"));
  ASSERT_EQ(run_cli("compare " + (tmp / "run").string() + " --csv " + (tmp / "t.csv").string(), &out, tmp / "log"), 0)
      << out;
  EXPECT_NE(out.find("confreg"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(tmp / "t.csv"));
  ASSERT_EQ(run_cli("gen --config " + (tmp / "cfg.json").string() + " --out " + (tmp / "data").string(), &out,
                    tmp / "log"),
            0)
      << out;
  EXPECT_EQ(read_dataset(tmp / "data" / "train.jsonl", 3).size(), 300u);
  EXPECT_TRUE(std::filesystem::exists(tmp / "data" / "extra.jsonl"));
}

TEST(Cli, ExitCodes) {
  TempDir tmp("cli-codes");
  write_json(tmp / "bad.json", {{"method", "foo"}});
  std::string out;
  EXPECT_EQ(run_cli("run --config " + (tmp / "bad.json").string(), &out, tmp / "log"), 2);
  EXPECT_NE(out.find("foo"), std::string::npos);
  EXPECT_EQ(run_cli("frobnicate", nullptr, tmp / "log"), 2);
  EXPECT_EQ(run_cli("run", nullptr, tmp / "log"), 2);

  json diverge = small_config();
  diverge["teacher"]["learning_rate"] = 1e308;
  write_json(tmp / "div.json", diverge);
  EXPECT_EQ(run_cli("run --config " + (tmp / "div.json").string() + " --out " + (tmp / "div").string(), &out,
                    tmp / "log"),
            1);
  EXPECT_NE(out.find("teacher"), std::string::npos) << out;
  EXPECT_TRUE(std::filesystem::exists(tmp / "div" / kIncompleteMarker));

  write_json(tmp / "sw.json", small_config());
  EXPECT_EQ(run_cli("sweep --config " + (tmp / "sw.json").string() + " --fractions 0,2", nullptr, tmp / "log"), 2);
}
