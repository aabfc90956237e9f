#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "confreg/data.hpp"
#include "confreg/error.hpp"
#include "confreg/harness.hpp"
#include "confreg/io.hpp"

namespace fs = std::filesystem;
using namespace confreg;

namespace {

constexpr int kUsage = 2;
constexpr int kFailure = 1;

int cmd_run(const std::string& config, const std::string& out) {
  const ExperimentConfig cfg = load_experiment_config(config);
  const RunRecord rec = run_experiment(cfg, out.empty() ? std::nullopt : std::optional<fs::path>(out));
  const auto& s = rec.summary;
  std::cout << "method " << s.at("method").get<std::string>() << "  indist "
            << s.at("indist_acc").at("mean").get<double>() << "  ood " << s.at("ood_acc").at("mean").get<double>()
            << "  ece " << s.at("ece").at("mean").get<double>() << '\n'
            << "wrote " << rec.dir.string() << '\n';
  return 0;
}

int cmd_compare(const std::vector<std::string>& dirs, const std::string& csv) {
  std::vector<fs::path> paths(dirs.begin(), dirs.end());
  const CompareTable table = compare_runs(paths);
  std::cout << table.to_text();
  if (!csv.empty()) write_file_atomic(csv, table.to_csv());
  return 0;
}

int cmd_sweep(const std::string& config, const std::string& fractions, const std::string& out) {
  const ExperimentConfig cfg = load_experiment_config(config);
  const auto fr = parse_fractions(fractions);
  const auto points = run_sweep(cfg, fr, out.empty() ? std::nullopt : std::optional<fs::path>(out));
  for (const auto& p : points) {
    std::cout << p.method << "  fraction " << p.fraction << "  " << p.subset << "  " << p.accuracy.mean << " +- "
              << p.accuracy.std << '\n';
  }
  return 0;
}

// Accepts either a bare generator config or an experiment config.
int cmd_gen(const std::string& config, const std::string& out) {
  const nlohmann::json j = read_json_file(config);
  GenConfig g;
  if (j.contains("data")) {
    const auto& d = j.at("data");
    if (!d.contains("generator") && d.contains("files")) throw ConfigError("config has no generator section");
    g = GenConfig::from_json(d.value("generator", nlohmann::json::object()));
  } else {
    g = GenConfig::from_json(j);
  }
  const Splits s = gen_synthetic(g);
  const fs::path dir(out);
  fs::create_directories(dir);
  write_dataset(s.train, dir / "train.jsonl");
  write_dataset(s.indist, dir / "indist.jsonl");
  write_dataset(s.ood, dir / "ood.jsonl");
  if (!s.extra.empty()) write_dataset(s.extra, dir / "extra.jsonl");
  write_json_file(dir / "gen_config.json", g.to_json());
  std::cout << "wrote " << s.train.size() << "/" << s.indist.size() << "/" << s.ood.size() << " examples to "
            << dir.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"confidence-regularized debiasing experiments"};
  app.require_subcommand(1);

  std::string config, out, csv, fractions;
  std::vector<std::string> dirs;

  auto* run = app.add_subcommand("run", "train and evaluate one method over all seeds");
  run->add_option("--config", config, "experiment config (JSON)")->required();
  run->add_option("--out", out, "output directory (overrides output_dir)");

  auto* compare = app.add_subcommand("compare", "tabulate finished runs");
  compare->add_option("dirs", dirs, "run directories")->required();
  compare->add_option("--csv", csv, "also write the table as CSV");

  auto* sweep = app.add_subcommand("sweep", "ood accuracy against share of extra training data");
  sweep->add_option("--config", config, "experiment config (JSON)")->required();
  sweep->add_option("--fractions", fractions, "comma-separated fractions in [0,1]")->default_str("0,0.25,0.5,1");
  sweep->add_option("--out", out, "output directory (overrides output_dir)");

  auto* gen = app.add_subcommand("gen", "write synthetic splits as JSONL");
  gen->add_option("--config", config, "generator or experiment config (JSON)")->required();
  gen->add_option("--out", out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }
  if (fractions.empty()) fractions = "0,0.25,0.5,1";

  try {
    if (*run) return cmd_run(config, out);
    if (*compare) return cmd_compare(dirs, csv);
    if (*sweep) return cmd_sweep(config, fractions, out);
    if (*gen) return cmd_gen(config, out);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}
