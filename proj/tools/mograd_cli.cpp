// Command-line front end: run sweeps, score fronts, compare variants.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <json.hpp>

#include "mograd/data.hpp"
#include "mograd/runner.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

int cmd_run(const std::string& config_path, std::uint64_t seed, const std::string& output_dir,
            std::size_t jobs) {
  auto config = mograd::load_experiment_config(config_path);
  if (!output_dir.empty()) config.output_dir = output_dir;
  if (jobs > 0) config.jobs = jobs;
  const auto summary = mograd::run_experiment(config, seed);
  std::size_t failed = 0;
  for (const auto& r : summary.runs) {
    if (!r.ok) {
      ++failed;
      std::cerr << "run " << r.spec.dir.generic_string() << " failed: " << r.error << '\n';
    }
  }
  std::cout << "completed " << summary.runs.size() - failed << "/" << summary.runs.size()
            << " runs; manifest: " << summary.manifest_path.string() << '\n';
  return failed ? kExitRuntime : 0;
}

int cmd_metrics(const std::string& first, const std::string& second, const std::string& json_out) {
  const auto a = mograd::read_front_csv(first);
  std::optional<mograd::FrontFile> b;
  if (!second.empty()) b = mograd::read_front_csv(second);
  const auto report = mograd::metrics_report(a, b ? &*b : nullptr);
  std::cout << mograd::format_metrics_report(report);
  if (!json_out.empty()) write_json(json_out, report);
  return 0;
}

int cmd_compare(const std::string& vanilla, const std::string& adamized, const std::string& json_out) {
  const auto report = mograd::compare_report(vanilla, adamized);
  std::cout << mograd::format_compare_report(report);
  if (!json_out.empty()) write_json(json_out, report);
  return 0;
}

int cmd_export(const std::vector<std::string>& dirs, const std::string& out_path) {
  std::vector<fs::path> sources(dirs.begin(), dirs.end());
  const auto merged = mograd::merge_fronts(sources);
  const std::string text = mograd::front_csv_text(merged.names, merged.points);
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << text;
  }
  return 0;
}

int cmd_synth(const std::string& config_path, std::optional<std::uint64_t> seed,
              const std::string& output_dir) {
  std::ifstream in(config_path);
  if (!in) throw mograd::ConfigError("<file>", "cannot open " + config_path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw mograd::ConfigError("<file>", std::string("invalid JSON: ") + e.what());
  }
  // Reuse the experiment parser for the synth and split blocks.
  json wrapped = {{"problem", {{"type", "recsys"}, {"data", {{"synth", j.value("synth", json::object())}}}}},
                  {"objectives", {"relevance", "revenue"}},
                  {"train", {{"learning_rate", 0.0}}}};
  if (j.contains("split")) {
    for (const auto& [k, v] : j.at("split").items()) wrapped["problem"][k] = v;
  }
  auto config = mograd::parse_experiment_config(wrapped);
  auto synth = *config.recsys.synth;
  if (seed) synth.seed = *seed;
  const fs::path out = output_dir.empty() ? fs::path(j.value("output_dir", std::string("synth_data")))
                                          : fs::path(output_dir);
  fs::create_directories(out);
  const auto data = mograd::synth_dataset(synth);
  mograd::write_ratings_csv(out / "ratings.csv", data.ratings);
  mograd::write_prices_csv(out / "prices.csv", data.prices);
  auto prepare = config.recsys.prepare;
  prepare.seed = synth.seed;
  const auto split = mograd::prepare_dataset(data.ratings, data.prices, prepare);
  mograd::write_split(out / "split", split);
  std::cout << "wrote " << data.ratings.size() << " ratings for " << synth.num_users << " users and "
            << synth.num_items << " items to " << out.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-objective gradient descent with per-objective Adamize"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  std::string output_dir;
  std::size_t jobs = 0;
  auto* run = app.add_subcommand("run", "Run the vanilla/adamized sweep described by a config");
  run->add_option("config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Master seed")->required();
  run->add_option("--output-dir", output_dir, "Override output_dir");
  run->add_option("--jobs", jobs, "Parallel runs (overrides jobs)");

  std::string front_a;
  std::string front_b;
  std::string json_out;
  auto* metrics = app.add_subcommand("metrics", "Hypervolume, spacing and coverage of front CSVs");
  metrics->add_option("front", front_a, "Front CSV")->required()->check(CLI::ExistingFile);
  metrics->add_option("second", front_b, "Second front CSV")->check(CLI::ExistingFile);
  metrics->add_option("--json", json_out, "Also write the report as JSON");

  std::string dir_a;
  std::string dir_b;
  auto* compare = app.add_subcommand("compare", "Vanilla vs adamized comparison table");
  compare->add_option("vanilla", dir_a, "Vanilla variant directory")->required();
  compare->add_option("adamized", dir_b, "Adamized variant directory")->required();
  compare->add_option("--json", json_out, "Also write the report as JSON");

  std::vector<std::string> dirs;
  std::string out_path;
  auto* export_front = app.add_subcommand("export-front", "Merge run fronts into one non-dominated CSV");
  export_front->add_option("dirs", dirs, "Run directories or front CSVs")->required();
  export_front->add_option("-o,--output", out_path, "Output CSV (default stdout)");

  std::optional<std::uint64_t> synth_seed;
  auto* synth = app.add_subcommand("synth-data", "Generate a synthetic ratings dataset and its split");
  synth->add_option("config", config_path, "Synth config (JSON)")->required()->check(CLI::ExistingFile);
  synth->add_option("--seed", synth_seed, "Override synth.seed");
  synth->add_option("--output-dir", output_dir, "Override output_dir");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*run) return cmd_run(config_path, seed, output_dir, jobs);
    if (*metrics) return cmd_metrics(front_a, front_b, json_out);
    if (*compare) return cmd_compare(dir_a, dir_b, json_out);
    if (*export_front) return cmd_export(dirs, out_path);
    if (*synth) return cmd_synth(config_path, synth_seed, output_dir);
  } catch (const mograd::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
