#include "mograd/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "mograd/csv.hpp"
#include "mograd/quadratic.hpp"
#include "mograd/recsys.hpp"

namespace mograd {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Config parsing ------------------------------------------------------------

std::string join_path(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> known) {
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      throw ConfigError(join_path(path, key), "unknown field");
    }
  }
}

const json& require_object(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) throw ConfigError(join_path(path, key), "missing required field");
  const json& v = obj.at(key);
  if (!v.is_object()) throw ConfigError(join_path(path, key), "must be an object");
  return v;
}

double number_at(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "must be a number");
  return v.get<double>();
}

std::size_t count_at(const json& v, const std::string& path, std::size_t minimum) {
  if (!v.is_number_integer() || v.get<long long>() < static_cast<long long>(minimum)) {
    throw ConfigError(path, "must be an integer >= " + std::to_string(minimum));
  }
  return v.get<std::size_t>();
}

double opt_number(const json& obj, const std::string& key, const std::string& path, double fallback) {
  return obj.contains(key) ? number_at(obj.at(key), join_path(path, key)) : fallback;
}

std::size_t opt_count(const json& obj, const std::string& key, const std::string& path,
                      std::size_t fallback, std::size_t minimum = 1) {
  return obj.contains(key) ? count_at(obj.at(key), join_path(path, key), minimum) : fallback;
}

bool opt_bool(const json& obj, const std::string& key, const std::string& path, bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_boolean()) throw ConfigError(join_path(path, key), "must be true or false");
  return obj.at(key).get<bool>();
}

std::string opt_string(const json& obj, const std::string& key, const std::string& path,
                       const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_string()) throw ConfigError(join_path(path, key), "must be a string");
  return obj.at(key).get<std::string>();
}

std::vector<double> number_list(const json& v, const std::string& path) {
  std::vector<double> out;
  if (v.is_number()) {
    out.push_back(v.get<double>());
  } else if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(number_at(v[i], path + "[" + std::to_string(i) + "]"));
    }
  } else {
    throw ConfigError(path, "must be a number or a list of numbers");
  }
  if (out.empty()) throw ConfigError(path, "must not be empty");
  return out;
}

QuadraticSpec parse_quadratic(const json& p) {
  reject_unknown(p, "problem", {"type", "centers", "noise_sigma", "init_scale"});
  QuadraticSpec spec;
  if (!p.contains("centers")) throw ConfigError("problem.centers", "missing required field");
  const json& centers = p.at("centers");
  if (!centers.is_array() || centers.size() < 2) {
    throw ConfigError("problem.centers", "must be a list of at least two points");
  }
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const std::string path = "problem.centers[" + std::to_string(i) + "]";
    if (!centers[i].is_array() || centers[i].empty()) throw ConfigError(path, "must be a non-empty list");
    spec.centers.push_back(number_list(centers[i], path));
    if (spec.centers.back().size() != spec.centers.front().size()) {
      throw ConfigError(path, "dimension differs from problem.centers[0]");
    }
  }
  spec.noise_sigma = opt_number(p, "noise_sigma", "problem", 0.0);
  if (spec.noise_sigma < 0.0) throw ConfigError("problem.noise_sigma", "must be >= 0");
  spec.init_scale = opt_number(p, "init_scale", "problem", 1.0);
  return spec;
}

SynthConfig parse_synth(const json& s, const std::string& path) {
  reject_unknown(s, path, {"num_users", "num_items", "density", "num_clusters", "latent_dim",
                           "price_log_mean", "price_log_sigma", "time_start", "time_span", "seed"});
  SynthConfig c;
  c.num_users = opt_count(s, "num_users", path, c.num_users);
  c.num_items = opt_count(s, "num_items", path, c.num_items);
  c.density = opt_number(s, "density", path, c.density);
  c.num_clusters = opt_count(s, "num_clusters", path, c.num_clusters);
  c.latent_dim = opt_count(s, "latent_dim", path, c.latent_dim);
  c.price_log_mean = opt_number(s, "price_log_mean", path, c.price_log_mean);
  c.price_log_sigma = opt_number(s, "price_log_sigma", path, c.price_log_sigma);
  if (s.contains("time_start")) c.time_start = static_cast<std::int64_t>(number_at(s.at("time_start"), path + ".time_start"));
  if (s.contains("time_span")) c.time_span = static_cast<std::int64_t>(number_at(s.at("time_span"), path + ".time_span"));
  if (s.contains("seed")) c.seed = count_at(s.at("seed"), path + ".seed", 0);
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
  return c;
}

RecsysSpec parse_recsys(const json& p, const json& root) {
  reject_unknown(p, "problem", {"type", "data", "threshold", "ratios", "mask_fraction", "eval_split",
                                "model", "beta", "k"});
  RecsysSpec spec;
  const json& data = require_object(p, "data", "problem");
  reject_unknown(data, "problem.data", {"synth", "ratings_csv", "prices_csv"});
  if (data.contains("synth")) {
    if (!data.at("synth").is_object()) throw ConfigError("problem.data.synth", "must be an object");
    spec.synth = parse_synth(data.at("synth"), "problem.data.synth");
    spec.synth_seed_fixed = data.at("synth").contains("seed");
  } else if (data.contains("ratings_csv")) {
    spec.ratings_csv = opt_string(data, "ratings_csv", "problem.data", "");
    spec.prices_csv = opt_string(data, "prices_csv", "problem.data", "");
  } else {
    throw ConfigError("problem.data", "needs either 'synth' or 'ratings_csv'");
  }
  spec.prepare.threshold = opt_number(p, "threshold", "problem", 3.5);
  if (p.contains("ratios")) {
    const auto r = number_list(p.at("ratios"), "problem.ratios");
    if (r.size() != 3) throw ConfigError("problem.ratios", "must list three ratios (train, validation, test)");
    spec.prepare.ratios = {r[0], r[1], r[2]};
  }
  spec.prepare.mask_fraction = opt_number(p, "mask_fraction", "problem", 0.2);
  spec.eval_split = opt_string(p, "eval_split", "problem", "validation");
  if (spec.eval_split != "validation" && spec.eval_split != "test") {
    throw ConfigError("problem.eval_split", "must be 'validation' or 'test'");
  }

  auto& model = spec.options.model;
  if (p.contains("model")) {
    const json& m = p.at("model");
    if (!m.is_object()) throw ConfigError("problem.model", "must be an object");
    reject_unknown(m, "problem.model", {"hidden", "latent", "variational", "dropout"});
    if (m.contains("hidden")) {
      model.hidden.clear();
      const json& h = m.at("hidden");
      if (!h.is_array()) throw ConfigError("problem.model.hidden", "must be a list of widths");
      for (std::size_t i = 0; i < h.size(); ++i) {
        model.hidden.push_back(count_at(h[i], "problem.model.hidden[" + std::to_string(i) + "]", 1));
      }
    }
    model.latent = opt_count(m, "latent", "problem.model", model.latent);
    model.variational = opt_bool(m, "variational", "problem.model", model.variational);
    model.dropout = opt_number(m, "dropout", "problem.model", model.dropout);
    if (!(model.dropout >= 0.0 && model.dropout < 1.0)) throw ConfigError("problem.model.dropout", "must be in [0, 1)");
  }
  spec.options.beta = opt_number(p, "beta", "problem", 0.0);
  spec.options.k = opt_count(p, "k", "problem", 10);

  spec.options.objectives.clear();
  if (!root.contains("objectives")) throw ConfigError("objectives", "missing required field");
  const json& objs = root.at("objectives");
  if (!objs.is_array() || objs.size() < 2) throw ConfigError("objectives", "must list at least two objectives");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < objs.size(); ++i) {
    const std::string path = "objectives[" + std::to_string(i) + "]";
    if (!objs[i].is_string()) throw ConfigError(path, "must be a string");
    const auto name = objs[i].get<std::string>();
    if (!seen.insert(name).second) throw ConfigError(path, "duplicate objective '" + name + "'");
    try {
      spec.options.objectives.push_back(parse_objective(name));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(path, e.what());
    }
  }
  return spec;
}

// Output helpers ---------------------------------------------------------------

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string config_hash(const json& canonical) {
  const std::string text = canonical.dump();
  return hex64(fnv1a64(text));
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

bool lexicographic_less(const ParetoPoint& a, const ParetoPoint& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json run_record(const RunSpec& spec) {
  json j;
  j["variant"] = spec.variant;
  j["learning_rate"] = spec.learning_rate;
  j["seed"] = spec.seed;
  j["lambda"] = optional_number(spec.lambda);
  j["dir"] = spec.dir.generic_string();
  return j;
}

RunOutcome execute_run(const ExperimentConfig& config, const MultiObjectiveProblem& problem,
                       const RunSpec& spec, const std::string& hash) {
  RunOutcome outcome;
  outcome.spec = spec;
  const fs::path dir = config.output_dir / spec.dir;
  fs::create_directories(dir);
  const auto names = problem.objective_names();

  json record = run_record(spec);
  record["config_hash"] = hash;
  record["toolkit_version"] = kToolkitVersion;
  try {
    TrainConfig tc = config.train;
    tc.learning_rate = spec.learning_rate;
    tc.seed = spec.seed;
    tc.adamize = spec.lambda.has_value();
    if (spec.lambda) tc.adamize_params.lambda = *spec.lambda;
    const TrainResult result = train(problem, tc);

    outcome.front = result.archive.points();
    write_front_csv(dir / "front.csv", names, outcome.front);
    write_history_csv(dir / "history.csv", names, result.history);
    record["status"] = "ok";
    record["baseline"] = result.baseline.initial_losses;
    record["final_metrics"] = result.final_metrics;
    record["archive_tags"] = result.archive.tags();
    record["warnings"] = result.warnings;
    record["outputs"] = {{"front", "front.csv"}, {"history", "history.csv"}};
    outcome.ok = true;
  } catch (const std::exception& e) {
    outcome.error = e.what();
    record["status"] = "failed";
    record["error"] = outcome.error;
    record["outputs"] = json::object();
  }
  write_text(dir / "run.json", record.dump(2) + "\n");
  return outcome;
}

std::string variant_name(const std::optional<double>& lambda, std::size_t lambda_count) {
  if (!lambda) return "vanilla";
  if (lambda_count == 1) return "adamized";
  return "adamized_lambda" + csv::format_double(*lambda);
}

}  // namespace

ConfigError::ConfigError(std::string field, const std::string& message)
    : std::invalid_argument("config field '" + field + "': " + message), field_(std::move(field)) {}

ExperimentConfig parse_experiment_config(const json& j) {
  if (!j.is_object()) throw ConfigError("<root>", "config must be a JSON object");
  reject_unknown(j, "", {"problem", "objectives", "train", "sweep", "output_dir", "jobs"});
  ExperimentConfig config;

  const json& problem = require_object(j, "problem", "");
  config.problem_type = opt_string(problem, "type", "problem", "");
  if (config.problem_type == "quadratic") {
    config.quadratic = parse_quadratic(problem);
  } else if (config.problem_type == "recsys") {
    config.recsys = parse_recsys(problem, j);
  } else {
    throw ConfigError("problem.type", "must be 'quadratic' or 'recsys'");
  }

  const json& train = require_object(j, "train", "");
  reject_unknown(train, "train", {"epochs", "batch_size", "learning_rate", "eval_every",
                                  "stationarity_tol", "adamize", "frank_wolfe"});
  auto& tc = config.train;
  tc.epochs = opt_count(train, "epochs", "train", 1);
  tc.batch_size = opt_count(train, "batch_size", "train", 1);
  if (!train.contains("learning_rate")) throw ConfigError("train.learning_rate", "missing required field");
  config.learning_rates = number_list(train.at("learning_rate"), "train.learning_rate");
  for (double lr : config.learning_rates) {
    if (!(lr >= 0.0)) throw ConfigError("train.learning_rate", "must be >= 0");
  }
  if (train.contains("eval_every")) tc.eval_every = count_at(train.at("eval_every"), "train.eval_every", 1);
  tc.stationarity_tol = opt_number(train, "stationarity_tol", "train", tc.stationarity_tol);
  if (train.contains("adamize")) {
    const json& a = train.at("adamize");
    if (!a.is_object()) throw ConfigError("train.adamize", "must be an object");
    reject_unknown(a, "train.adamize", {"beta1", "beta2", "epsilon", "lambda", "reset_per_epoch"});
    tc.adamize_params.beta1 = opt_number(a, "beta1", "train.adamize", 0.9);
    tc.adamize_params.beta2 = opt_number(a, "beta2", "train.adamize", 0.999);
    tc.adamize_params.epsilon = opt_number(a, "epsilon", "train.adamize", 1e-8);
    if (a.contains("lambda")) config.lambdas = number_list(a.at("lambda"), "train.adamize.lambda");
    tc.reset_moments_per_epoch = opt_bool(a, "reset_per_epoch", "train.adamize", false);
  }
  for (double l : config.lambdas) {
    AdamizeParams p = tc.adamize_params;
    p.lambda = l;
    try {
      p.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("train.adamize", e.what());
    }
  }
  if (train.contains("frank_wolfe")) {
    const json& fw = train.at("frank_wolfe");
    if (!fw.is_object()) throw ConfigError("train.frank_wolfe", "must be an object");
    reject_unknown(fw, "train.frank_wolfe", {"max_iter", "tol"});
    tc.frank_wolfe.max_iter = opt_count(fw, "max_iter", "train.frank_wolfe", 100);
    tc.frank_wolfe.tol = opt_number(fw, "tol", "train.frank_wolfe", 1e-7);
  }

  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    if (!s.is_object()) throw ConfigError("sweep", "must be an object");
    reject_unknown(s, "sweep", {"replicates"});
    config.replicates = opt_count(s, "replicates", "sweep", 1);
  }
  config.output_dir = opt_string(j, "output_dir", "", "runs");
  config.jobs = opt_count(j, "jobs", "", 1);

  config.canonical = j;
  config.canonical.erase("output_dir");
  config.canonical.erase("jobs");
  return config;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
  }
  return parse_experiment_config(j);
}

std::unique_ptr<MultiObjectiveProblem> build_problem(const ExperimentConfig& config,
                                                     std::uint64_t seed,
                                                     std::shared_ptr<SplitDataset>* data_out) {
  if (config.problem_type == "quadratic") {
    const auto& q = config.quadratic;
    return std::make_unique<QuadraticProblem>(q.centers, q.noise_sigma, q.init_scale);
  }
  const auto& spec = config.recsys;
  RatingsTable ratings;
  std::map<std::string, double> prices;
  if (spec.synth) {
    SynthConfig synth = *spec.synth;
    if (!spec.synth_seed_fixed) synth.seed = seed;
    auto generated = synth_dataset(synth);
    ratings = std::move(generated.ratings);
    prices = std::move(generated.prices);
  } else {
    ratings = read_ratings_csv(spec.ratings_csv);
    if (!spec.prices_csv.empty()) prices = read_prices_csv(spec.prices_csv);
  }
  PrepareOptions prepare = spec.prepare;
  prepare.seed = seed;
  auto data = std::make_shared<SplitDataset>(prepare_dataset(ratings, prices, prepare));

  RecsysOptions options = spec.options;
  options.model.num_items = data->interactions.items.size();
  const auto& eval = spec.eval_split == "test" ? data->test : data->validation;
  auto problem = std::make_unique<RecsysProblem>(data->train_rows, eval.users, data->weights, options);
  if (data_out) *data_out = std::move(data);
  return problem;
}

std::vector<RunSpec> plan_runs(const ExperimentConfig& config, std::uint64_t seed) {
  std::vector<std::optional<double>> variants{std::nullopt};
  for (double l : config.lambdas) variants.emplace_back(l);
  std::vector<RunSpec> runs;
  for (const auto& lambda : variants) {
    const std::string variant = variant_name(lambda, config.lambdas.size());
    for (double lr : config.learning_rates) {
      for (std::size_t r = 0; r < config.replicates; ++r) {
        RunSpec spec;
        spec.variant = variant;
        spec.learning_rate = lr;
        spec.seed = seed + r;
        spec.lambda = lambda;
        spec.dir = fs::path(variant) / "runs" /
                   ("lr" + csv::format_double(lr) + "_seed" + std::to_string(spec.seed));
        runs.push_back(std::move(spec));
      }
    }
  }
  return runs;
}

bool ExperimentSummary::all_ok() const {
  return std::all_of(runs.begin(), runs.end(), [](const RunOutcome& r) { return r.ok; });
}

ExperimentSummary run_experiment(const ExperimentConfig& config, std::uint64_t seed) {
  const fs::path root = config.output_dir;
  fs::create_directories(root);
  const std::string hash = config_hash(config.canonical);

  json manifest;
  manifest["toolkit_version"] = kToolkitVersion;
  manifest["config_hash"] = hash;
  manifest["seed"] = seed;
  manifest["problem"] = config.problem_type;
  manifest["config"] = config.canonical;

  std::shared_ptr<SplitDataset> data;
  const auto problem = build_problem(config, seed, &data);
  ExperimentSummary summary;
  summary.objective_names = problem->objective_names();
  manifest["objectives"] = summary.objective_names;
  if (data) {
    write_split(root / "data", *data);
    manifest["data"] = {{"manifest", "data/manifest.json"},
                        {"files", {"data/train.csv", "data/validation_fold_in.csv",
                                   "data/validation_held_out.csv", "data/test_fold_in.csv",
                                   "data/test_held_out.csv", "data/items.csv"}}};
  }

  const auto plan = plan_runs(config, seed);
  summary.runs.resize(plan.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < plan.size(); i = next++) {
      summary.runs[i] = execute_run(config, *problem, plan[i], hash);
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(config.jobs, 1, plan.size());
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  json runs = json::array();
  for (const auto& r : summary.runs) {
    json j = run_record(r.spec);
    j["status"] = r.ok ? "ok" : "failed";
    const std::string dir = r.spec.dir.generic_string();
    j["run"] = dir + "/run.json";
    if (r.ok) {
      j["front"] = dir + "/front.csv";
      j["history"] = dir + "/history.csv";
    } else {
      j["error"] = r.error;
    }
    runs.push_back(std::move(j));
  }
  manifest["runs"] = runs;

  json merged = json::object();
  for (const auto& r : summary.runs) {
    if (std::find(summary.variants.begin(), summary.variants.end(), r.spec.variant) == summary.variants.end()) {
      summary.variants.push_back(r.spec.variant);
    }
  }
  for (const auto& variant : summary.variants) {
    ParetoFront points;
    for (const auto& r : summary.runs) {
      if (r.ok && r.spec.variant == variant) points.insert(points.end(), r.front.begin(), r.front.end());
    }
    if (points.empty()) {
      merged[variant] = nullptr;
      continue;
    }
    write_front_csv(root / variant / "front.csv", summary.objective_names, non_dominated_filter(points));
    merged[variant] = variant + "/front.csv";
  }
  manifest["merged_fronts"] = merged;

  summary.manifest_path = root / "manifest.json";
  write_text(summary.manifest_path, manifest.dump(2) + "\n");
  return summary;
}

// Front files -------------------------------------------------------------------

FrontFile read_front_csv(const fs::path& path) {
  const auto lines = csv::read_lines(path);
  if (lines.empty()) throw std::invalid_argument(path.string() + ": missing header");
  FrontFile front;
  for (const auto& col : csv::split_line(lines.front())) {
    if (col.rfind("obj_", 0) != 0) {
      throw std::invalid_argument(path.string() + ": header column '" + col + "' lacks the obj_ prefix");
    }
    front.names.push_back(col.substr(4));
  }
  for (std::size_t n = 1; n < lines.size(); ++n) {
    const auto fields = csv::split_line(lines[n]);
    if (fields.size() != front.names.size()) {
      throw std::invalid_argument(path.string() + ": line " + std::to_string(n + 1) + " has " +
                                  std::to_string(fields.size()) + " columns, expected " +
                                  std::to_string(front.names.size()));
    }
    ParetoPoint p;
    for (const auto& f : fields) p.push_back(csv::parse_double(f, "front value"));
    front.points.push_back(std::move(p));
  }
  return front;
}

std::string front_csv_text(const std::vector<std::string>& names, ParetoFront points) {
  std::sort(points.begin(), points.end(), lexicographic_less);
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    out += (i ? "," : "") + csv::escape("obj_" + names[i]);
  }
  out += '\n';
  for (const auto& p : points) {
    for (std::size_t i = 0; i < p.size(); ++i) out += (i ? "," : "") + csv::format_double(p[i]);
    out += '\n';
  }
  return out;
}

void write_front_csv(const fs::path& path, const std::vector<std::string>& names, ParetoFront points) {
  write_text(path, front_csv_text(names, std::move(points)));
}

void write_history_csv(const fs::path& path, const std::vector<std::string>& names,
                       const TrainHistory& history) {
  std::ostringstream out;
  out << "epoch,batch,step";
  for (const auto& n : names) out << ",loss_" << n;
  for (const auto& n : names) out << ",metric_" << n;
  for (const auto& n : names) out << ",alpha_" << n;
  out << ",d_norm,stationary\n";
  for (const auto& r : history.records) {
    out << r.epoch << ',' << r.batch << ',' << r.step;
    for (double v : r.losses) out << ',' << csv::format_double(v);
    for (double v : r.metrics) out << ',' << csv::format_double(v);
    for (double v : r.alphas) out << ',' << csv::format_double(v);
    out << ',' << csv::format_double(r.d_norm) << ',' << (r.stationary ? 1 : 0) << '\n';
  }
  write_text(path, out.str());
}

FrontFile merge_fronts(const std::vector<fs::path>& sources) {
  if (sources.empty()) throw std::invalid_argument("export-front: no input directories");
  FrontFile merged;
  bool first = true;
  for (const auto& src : sources) {
    const fs::path file = fs::is_directory(src) ? src / "front.csv" : src;
    if (!fs::exists(file)) throw std::invalid_argument("no front.csv in " + src.string());
    FrontFile f = read_front_csv(file);
    if (first) {
      merged.names = f.names;
      first = false;
    } else if (f.names != merged.names) {
      throw std::invalid_argument("inconsistent objective names: " + file.string() +
                                  " does not match " + (fs::is_directory(sources.front()) ? (sources.front() / "front.csv").string() : sources.front().string()));
    }
    merged.points.insert(merged.points.end(), f.points.begin(), f.points.end());
  }
  merged.points = non_dominated_filter(merged.points);
  std::sort(merged.points.begin(), merged.points.end(), lexicographic_less);
  return merged;
}

// Reports -------------------------------------------------------------------------

namespace {

json front_metrics(const ParetoFront& front) {
  json j;
  try {
    j["hypervolume"] = hypervolume(front);
  } catch (const std::invalid_argument& e) {
    j["hypervolume"] = nullptr;
    const std::string what = e.what();
    j["hypervolume_note"] = what.find("unsupported dimension") != std::string::npos
                                ? "unsupported (n > 3)"
                                : what;
  }
  if (front.size() < 2) {
    j["spacing"] = nullptr;
    j["spacing_note"] = "undefined (|front| < 2)";
  } else {
    j["spacing"] = spacing(front);
  }
  return j;
}

json ranges_json(const std::vector<std::string>& names, const std::vector<AxisRange>& ranges) {
  json out = json::array();
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    out.push_back({{"name", names[i]}, {"min", ranges[i].min}, {"max", ranges[i].max}});
  }
  return out;
}

json notes_for(const std::vector<std::string>& names) {
  json notes = json::array();
  for (const auto& n : names) {
    if (n == "revenue" || n == "recency") {
      notes.push_back("axis '" + n + "' is the mean min-max-normalised item " +
                      (n == "revenue" ? std::string("price") : std::string("recency")) +
                      " over the top-k recommendations (toolkit-defined metric)");
    }
  }
  notes.push_back("hypervolume uses the origin as reference; dominated points are filtered first");
  notes.push_back("normalised variants rescale every axis to [0, 1] using the ranges over all fronts in this report");
  return notes;
}

std::string cell(const json& v, int precision = 6) {
  if (v.is_null()) return "-";
  if (v.is_number()) {
    std::ostringstream s;
    s << std::setprecision(precision) << std::fixed << v.get<double>();
    return s.str();
  }
  return v.dump();
}

std::string value_or_note(const json& metrics, const std::string& key) {
  if (!metrics.at(key).is_null()) return cell(metrics.at(key));
  const std::string note_key = key + "_note";
  return metrics.contains(note_key) ? metrics.at(note_key).get<std::string>() : "-";
}

FrontFile load_variant_front(const fs::path& dir) {
  const fs::path file = fs::is_directory(dir) ? dir / "front.csv" : dir;
  if (!fs::exists(file)) throw std::invalid_argument("no merged front.csv in " + dir.string());
  return read_front_csv(file);
}

}  // namespace

json metrics_report(const FrontFile& first, const FrontFile* second) {
  if (first.points.empty()) throw std::invalid_argument("metrics: first front is empty");
  if (second) {
    if (second->points.empty()) throw std::invalid_argument("metrics: second front is empty");
    if (second->names.size() != first.names.size()) {
      throw std::invalid_argument("metrics: fronts have different dimensions (" +
                                  std::to_string(first.names.size()) + " vs " +
                                  std::to_string(second->names.size()) + ")");
    }
  }
  std::vector<const FrontFile*> files{&first};
  if (second) files.push_back(second);
  std::vector<ParetoFront> filtered;
  for (const auto* f : files) filtered.push_back(non_dominated_filter(f->points));
  std::vector<const ParetoFront*> ptrs;
  for (const auto& f : filtered) ptrs.push_back(&f);
  const auto ranges = axis_ranges(ptrs);

  json report;
  report["objectives"] = first.names;
  report["axis_ranges"] = ranges_json(first.names, ranges);
  json fronts = json::array();
  const char* labels[] = {"A", "B"};
  for (std::size_t i = 0; i < files.size(); ++i) {
    json f;
    f["label"] = labels[i];
    f["points"] = files[i]->points.size();
    f["non_dominated_points"] = filtered[i].size();
    f["raw"] = front_metrics(filtered[i]);
    f["normalized"] = front_metrics(normalize_front(filtered[i], ranges));
    fronts.push_back(std::move(f));
  }
  report["fronts"] = fronts;
  if (second) {
    report["coverage"] = {{"C(A,B)", coverage(filtered[0], filtered[1])},
                          {"C(B,A)", coverage(filtered[1], filtered[0])}};
  }
  report["notes"] = notes_for(first.names);
  return report;
}

std::string format_metrics_report(const json& report) {
  std::ostringstream out;
  out << std::left;
  for (const char* variant : {"raw", "normalized"}) {
    out << "[" << variant << " axes]\n";
    out << std::setw(8) << "front" << std::setw(10) << "points" << std::setw(26) << "hypervolume"
        << "spacing\n";
    for (const auto& f : report.at("fronts")) {
      const auto& m = f.at(variant);
      out << std::setw(8) << f.at("label").get<std::string>() << std::setw(10)
          << f.at("non_dominated_points").get<std::size_t>() << std::setw(26)
          << value_or_note(m, "hypervolume") << value_or_note(m, "spacing") << '\n';
    }
  }
  if (report.contains("coverage")) {
    out << "coverage  C(A,B) = " << cell(report["coverage"]["C(A,B)"])
        << "  C(B,A) = " << cell(report["coverage"]["C(B,A)"]) << '\n';
  }
  out << "axis ranges:";
  for (const auto& r : report.at("axis_ranges")) {
    out << "  " << r.at("name").get<std::string>() << " [" << cell(r.at("min")) << ", "
        << cell(r.at("max")) << "]";
  }
  out << '\n';
  for (const auto& n : report.at("notes")) out << "note: " << n.get<std::string>() << '\n';
  return out.str();
}

json compare_report(const fs::path& vanilla_dir, const fs::path& adamized_dir) {
  const FrontFile vanilla = load_variant_front(vanilla_dir);
  const FrontFile adamized = load_variant_front(adamized_dir);
  if (vanilla.names != adamized.names) {
    throw std::invalid_argument("compare: fronts have different objectives");
  }
  const json base = metrics_report(vanilla, &adamized);
  json report;
  report["objectives"] = base["objectives"];
  report["axis_ranges"] = base["axis_ranges"];
  report["notes"] = base["notes"];
  const auto& f = base["fronts"];
  report["rows"] = json::array({
      {{"method", "Vanilla"}, {"points", f[0]["non_dominated_points"]}, {"raw", f[0]["raw"]},
       {"normalized", f[0]["normalized"]}, {"coverage", base["coverage"]["C(A,B)"]}},
      {{"method", "Adamized"}, {"points", f[1]["non_dominated_points"]}, {"raw", f[1]["raw"]},
       {"normalized", f[1]["normalized"]}, {"coverage", base["coverage"]["C(B,A)"]}},
  });
  report["coverage"] = {{"C(vanilla,adamized)", base["coverage"]["C(A,B)"]},
                        {"C(adamized,vanilla)", base["coverage"]["C(B,A)"]}};
  return report;
}

std::string format_compare_report(const json& report) {
  std::ostringstream out;
  out << std::left;
  for (const char* variant : {"raw", "normalized"}) {
    out << "[" << variant << " axes]\n";
    out << std::setw(10) << "Method" << std::setw(8) << "Points" << std::setw(16) << "Hypervolume"
        << std::setw(12) << "Coverage" << "Spacing\n";
    for (const auto& row : report.at("rows")) {
      const auto& m = row.at(variant);
      out << std::setw(10) << row.at("method").get<std::string>() << std::setw(8)
          << row.at("points").get<std::size_t>() << std::setw(16) << value_or_note(m, "hypervolume")
          << std::setw(12) << cell(row.at("coverage"), 4) << value_or_note(m, "spacing") << '\n';
    }
  }
  out << "coverage of a row = C(row method, other method)\n";
  out << "axis ranges:";
  for (const auto& r : report.at("axis_ranges")) {
    out << "  " << r.at("name").get<std::string>() << " [" << cell(r.at("min")) << ", "
        << cell(r.at("max")) << "]";
  }
  out << '\n';
  for (const auto& n : report.at("notes")) out << "note: " << n.get<std::string>() << '\n';
  return out.str();
}

}  // namespace mograd
