#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mograd/data.hpp"
#include "mograd/engine.hpp"
#include "mograd/pareto.hpp"
#include "mograd/problem.hpp"

namespace mograd {

inline constexpr const char* kToolkitVersion = "0.1.0";

/// Invalid experiment configuration; field() is the dotted path of the culprit.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message);
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct QuadraticSpec {
  std::vector<Vec64> centers;
  double noise_sigma = 0.0;
  double init_scale = 1.0;
};

struct RecsysSpec {
  std::optional<SynthConfig> synth;
  /// Synth seed pinned in the config; otherwise the run's --seed is used.
  bool synth_seed_fixed = false;
  std::filesystem::path ratings_csv;
  std::filesystem::path prices_csv;
  PrepareOptions prepare;
  /// "validation" or "test": which masked split feeds the metrics.
  std::string eval_split = "validation";
  RecsysOptions options;
};

struct ExperimentConfig {
  std::string problem_type;  // "quadratic" or "recsys"
  QuadraticSpec quadratic;
  RecsysSpec recsys;
  /// Base training settings; learning_rate, seed and adamize are set per run.
  TrainConfig train;
  std::vector<double> learning_rates;
  /// Runs per (variant, learning rate); replicate r uses seed + r.
  std::size_t replicates = 1;
  /// One Adamized variant per lambda.
  std::vector<double> lambdas{1.0};
  std::filesystem::path output_dir = "runs";
  std::size_t jobs = 1;
  /// Config with output_dir and jobs removed; hashed into every manifest.
  nlohmann::json canonical;
};

ExperimentConfig parse_experiment_config(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Builds the problem described by the config. `data` receives the prepared
/// split for recsys problems.
std::unique_ptr<MultiObjectiveProblem> build_problem(const ExperimentConfig& config,
                                                     std::uint64_t seed,
                                                     std::shared_ptr<SplitDataset>* data = nullptr);

struct RunSpec {
  std::string variant;  // "vanilla", "adamized" or "adamized_lambda<l>"
  double learning_rate = 0.0;
  std::uint64_t seed = 0;
  std::optional<double> lambda;
  std::filesystem::path dir;  // relative to the output directory
};

/// Every run of the sweep in a fixed order: variants, then learning rates, then replicates.
std::vector<RunSpec> plan_runs(const ExperimentConfig& config, std::uint64_t seed);

struct RunOutcome {
  RunSpec spec;
  bool ok = false;
  std::string error;
  ParetoFront front;
};

struct ExperimentSummary {
  std::vector<RunOutcome> runs;
  std::vector<std::string> variants;
  std::vector<std::string> objective_names;
  std::filesystem::path manifest_path;
  bool all_ok() const;
};

/// Executes the sweep and writes, under config.output_dir:
///   manifest.json, <variant>/front.csv, <variant>/runs/<run>/{front,history}.csv
///   and run.json, plus data/ for recsys problems.
ExperimentSummary run_experiment(const ExperimentConfig& config, std::uint64_t seed);

// Front files -----------------------------------------------------------

struct FrontFile {
  std::vector<std::string> names;  // without the obj_ prefix
  ParetoFront points;
};

FrontFile read_front_csv(const std::filesystem::path& path);
/// Writes `obj_<name>` headers and rows sorted ascending by the first column
/// (later columns break ties).
void write_front_csv(const std::filesystem::path& path, const std::vector<std::string>& names,
                     ParetoFront points);
std::string front_csv_text(const std::vector<std::string>& names, ParetoFront points);

void write_history_csv(const std::filesystem::path& path, const std::vector<std::string>& names,
                       const TrainHistory& history);

/// Concatenates the fronts found in each directory (its front.csv, or the
/// file itself), filters dominated points and sorts by the first axis.
/// Throws when objective names differ.
FrontFile merge_fronts(const std::vector<std::filesystem::path>& sources);

// Reports ----------------------------------------------------------------

/// Hypervolume and spacing per front; with two fronts also coverage both
/// ways. Raw and per-axis min-max normalised variants, with the axis ranges.
nlohmann::json metrics_report(const FrontFile& first, const FrontFile* second);
std::string format_metrics_report(const nlohmann::json& report);

/// The vanilla/adamized comparison table built from two variant directories.
nlohmann::json compare_report(const std::filesystem::path& vanilla_dir,
                              const std::filesystem::path& adamized_dir);
std::string format_compare_report(const nlohmann::json& report);

}  // namespace mograd
