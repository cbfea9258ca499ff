#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "mograd/runner.hpp"

using namespace mograd;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kCli = MOGRAD_CLI_PATH;

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("mograd_test_runner_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

CliResult cli(const std::string& args, const fs::path& workdir) {
  const fs::path out = workdir / "stdout.txt";
  const fs::path err = workdir / "stderr.txt";
  const std::string cmd = "cd '" + workdir.string() + "' && '" + kCli.string() + "' " + args +
                          " > '" + out.string() + "' 2> '" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

const char* kQuadConfig = R"({
  "problem": {"type": "quadratic", "centers": [[-1, 0.5], [1.5, -0.5]], "noise_sigma": 0.3},
  "train": {"epochs": 40, "learning_rate": [0.01, 0.05], "eval_every": 4},
  "sweep": {"replicates": 2},
  "output_dir": "out"
})";

json quad_json() { return json::parse(kQuadConfig); }

std::set<std::string> files_under(const fs::path& root) {
  std::set<std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out.insert(fs::relative(e.path(), root).generic_string());
  }
  return out;
}

void collect_paths(const json& j, std::set<std::string>& out) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s.find('/') != std::string::npos || s.ends_with(".csv") || s.ends_with(".json")) out.insert(s);
  } else if (j.is_structured()) {
    for (const auto& v : j) collect_paths(v, out);
  }
}

}  // namespace

TEST_CASE("config errors name the field") {
  json j = quad_json();
  j["train"].erase("learning_rate");
  try {
    parse_experiment_config(j);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "train.learning_rate");
  }
  json unknown = quad_json();
  unknown["train"]["learnig_rate"] = 0.1;
  CHECK_THROWS_AS(parse_experiment_config(unknown), ConfigError);
  json bad_type = quad_json();
  bad_type["problem"]["type"] = "cubic";
  CHECK_THROWS_AS(parse_experiment_config(bad_type), ConfigError);
  json bad_lambda = quad_json();
  bad_lambda["train"]["adamize"] = {{"lambda", 2.0}};
  CHECK_THROWS_AS(parse_experiment_config(bad_lambda), ConfigError);
  json no_objectives = {{"problem", {{"type", "recsys"}, {"data", {{"synth", json::object()}}}}},
                        {"train", {{"learning_rate", 0.01}}}};
  try {
    parse_experiment_config(no_objectives);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "objectives");
  }
}

TEST_CASE("sweep plan") {
  const auto config = parse_experiment_config(quad_json());
  const auto runs = plan_runs(config, 3);
  REQUIRE(runs.size() == 8);
  CHECK(runs[0].variant == "vanilla");
  CHECK(runs[4].variant == "adamized");
  CHECK(runs[0].dir.generic_string() == "vanilla/runs/lr0.01_seed3");
  CHECK(runs[1].seed == 4);
  CHECK(runs[7].dir.generic_string() == "adamized/runs/lr0.05_seed4");
  CHECK_FALSE(runs[0].lambda.has_value());
  CHECK(runs[4].lambda == 1.0);

  json multi = quad_json();
  multi["train"]["adamize"] = {{"lambda", {0.5, 1.0}}};
  const auto m = plan_runs(parse_experiment_config(multi), 0);
  CHECK(m.size() == 12);
  std::set<std::string> variants;
  for (const auto& r : m) variants.insert(r.variant);
  CHECK(variants == std::set<std::string>{"vanilla", "adamized_lambda0.5", "adamized_lambda1"});
}

TEST_CASE("front CSV round trip") {
  const fs::path dir = scratch_dir("csv");
  write_front_csv(dir / "f.csv", {"a", "b"}, {{2, 1}, {1, 2}, {1.5, 1.5}});
  CHECK(slurp(dir / "f.csv").rfind("obj_a,obj_b\n1,2\n1.5,1.5\n2,1\n", 0) == 0);
  const FrontFile f = read_front_csv(dir / "f.csv");
  CHECK(f.names == std::vector<std::string>{"a", "b"});
  CHECK(f.points == ParetoFront{{1, 2}, {1.5, 1.5}, {2, 1}});
  write_text(dir / "bad.csv", "a,b\n1,2\n");
  CHECK_THROWS(read_front_csv(dir / "bad.csv"));
  write_text(dir / "ragged.csv", "obj_a,obj_b\n1\n");
  CHECK_THROWS(read_front_csv(dir / "ragged.csv"));
  fs::remove_all(dir);
}

TEST_CASE("run writes the sweep layout") {
  const fs::path dir = scratch_dir("layout");
  write_text(dir / "q.json", kQuadConfig);
  const auto r = cli("run q.json --seed 3", dir);
  REQUIRE(r.code == 0);
  const fs::path out = dir / "out";
  std::size_t run_dirs = 0;
  for (const char* variant : {"vanilla", "adamized"}) {
    CHECK(fs::exists(out / variant / "front.csv"));
    for (const auto& e : fs::directory_iterator(out / variant / "runs")) {
      ++run_dirs;
      CHECK(fs::exists(e.path() / "front.csv"));
      CHECK(fs::exists(e.path() / "history.csv"));
      CHECK(fs::exists(e.path() / "run.json"));
    }
  }
  CHECK(run_dirs == 8);

  const json manifest = json::parse(slurp(out / "manifest.json"));
  CHECK(manifest.at("runs").size() == 8);
  CHECK(manifest.contains("config_hash"));
  CHECK(manifest.contains("seed"));
  CHECK(manifest.contains("toolkit_version"));
  std::set<std::string> referenced;
  collect_paths(manifest, referenced);
  for (const auto& p : referenced) {
    CHECK(fs::path(p).is_relative());
    CHECK(fs::exists(out / p));
  }
  referenced.insert("manifest.json");
  for (const auto& f : files_under(out)) CHECK_MESSAGE(referenced.count(f) == 1, f);

  const FrontFile merged = read_front_csv(out / "vanilla" / "front.csv");
  std::vector<fs::path> run_fronts;
  for (const auto& e : fs::directory_iterator(out / "vanilla" / "runs")) run_fronts.push_back(e.path());
  CHECK(merge_fronts(run_fronts).points == merged.points);
  fs::remove_all(dir);
}

TEST_CASE("run is deterministic across repeats and job counts") {
  const fs::path dir = scratch_dir("determinism");
  write_text(dir / "q.json", kQuadConfig);
  REQUIRE(cli("run q.json --seed 9 --output-dir a", dir).code == 0);
  REQUIRE(cli("run q.json --seed 9 --output-dir b --jobs 3", dir).code == 0);
  REQUIRE(cli("run q.json --seed 10 --output-dir c", dir).code == 0);
  const auto files = files_under(dir / "a");
  CHECK(files == files_under(dir / "b"));
  for (const auto& f : files) CHECK_MESSAGE(slurp(dir / "a" / f) == slurp(dir / "b" / f), f);
  CHECK(slurp(dir / "a" / "vanilla" / "front.csv") != slurp(dir / "c" / "vanilla" / "front.csv"));
  fs::remove_all(dir);
}

TEST_CASE("run exit codes") {
  const fs::path dir = scratch_dir("exit");
  json j = quad_json();
  j["train"].erase("learning_rate");
  write_text(dir / "missing_lr.json", j.dump());
  auto r = cli("run missing_lr.json --seed 1", dir);
  CHECK(r.code == 1);
  CHECK(r.err.find("learning_rate") != std::string::npos);

  write_text(dir / "broken.json", "{\"problem\": ");
  CHECK(cli("run broken.json --seed 1", dir).code == 1);
  write_text(dir / "q.json", kQuadConfig);
  CHECK(cli("run q.json", dir).code == 1);
  CHECK(cli("run nope.json --seed 1", dir).code == 1);
  CHECK(cli("frobnicate", dir).code == 1);
  CHECK(cli("", dir).code == 1);

  json unreadable = quad_json();
  unreadable["problem"] = {{"type", "recsys"}, {"data", {{"ratings_csv", "absent.csv"}}}};
  unreadable["objectives"] = {"relevance", "revenue"};
  write_text(dir / "absent.json", unreadable.dump());
  CHECK(cli("run absent.json --seed 1", dir).code == 2);
  fs::remove_all(dir);
}

TEST_CASE("metrics subcommand") {
  const fs::path dir = scratch_dir("metrics");
  write_text(dir / "a.csv", "obj_x,obj_y\n1,2\n2,1\n");
  write_text(dir / "one.csv", "obj_x,obj_y\n1,2\n");
  write_text(dir / "three.csv", "obj_x,obj_y,obj_z\n1,2,3\n");

  auto r = cli("metrics a.csv --json a.json", dir);
  REQUIRE(r.code == 0);
  const json report = json::parse(slurp(dir / "a.json"));
  CHECK(report["fronts"][0]["raw"]["hypervolume"] == 3.0);
  CHECK(r.out.find("3.0") != std::string::npos);

  r = cli("metrics a.csv a.csv --json aa.json", dir);
  REQUIRE(r.code == 0);
  const json both = json::parse(slurp(dir / "aa.json"));
  CHECK(both["coverage"]["C(A,B)"] == 1.0);
  CHECK(both["coverage"]["C(B,A)"] == 1.0);
  CHECK(both.contains("axis_ranges"));

  r = cli("metrics one.csv", dir);
  CHECK(r.code == 0);
  CHECK(r.out.find("undefined (|front| < 2)") != std::string::npos);

  CHECK(cli("metrics a.csv three.csv", dir).code == 2);
  CHECK(cli("metrics missing.csv", dir).code == 1);
  fs::remove_all(dir);
}

TEST_CASE("compare subcommand") {
  const fs::path dir = scratch_dir("compare");
  write_text(dir / "van" / "front.csv", "obj_relevance,obj_revenue\n0.1,0.3\n0.2,0.2\n");
  write_text(dir / "adam" / "front.csv", "obj_relevance,obj_revenue\n0.15,0.35\n0.25,0.3\n");
  auto r = cli("compare van adam --json c.json", dir);
  REQUIRE(r.code == 0);
  const json c = json::parse(slurp(dir / "c.json"));
  CHECK(c["coverage"]["C(adamized,vanilla)"] == 1.0);
  CHECK(c["coverage"]["C(vanilla,adamized)"] == 0.0);
  CHECK(c.contains("axis_ranges"));
  CHECK(r.out.find("axis ranges") != std::string::npos);
  CHECK(r.out.find("toolkit-defined") != std::string::npos);

  r = cli("compare van van --json same.json", dir);
  REQUIRE(r.code == 0);
  const json same = json::parse(slurp(dir / "same.json"));
  CHECK(same["rows"][0]["raw"]["hypervolume"] == same["rows"][1]["raw"]["hypervolume"]);
  CHECK(cli("compare van nowhere", dir).code == 2);
  fs::remove_all(dir);
}

TEST_CASE("export-front subcommand") {
  const fs::path dir = scratch_dir("export");
  write_text(dir / "r1" / "front.csv", "obj_a,obj_b\n3,1\n1,2\n");
  write_text(dir / "r2" / "front.csv", "obj_a,obj_b\n2,2\n0.5,1.5\n");
  write_text(dir / "r3" / "front.csv", "obj_a,obj_c\n1,1\n");
  auto r = cli("export-front r1 r2", dir);
  REQUIRE(r.code == 0);
  CHECK(r.out == "obj_a,obj_b\n2,2\n3,1\n");
  r = cli("export-front r1", dir);
  CHECK(r.out == "obj_a,obj_b\n1,2\n3,1\n");
  REQUIRE(cli("export-front r1 r2 -o merged.csv", dir).code == 0);
  CHECK(slurp(dir / "merged.csv") == "obj_a,obj_b\n2,2\n3,1\n");
  CHECK(cli("export-front r1 r3", dir).code == 2);
  fs::remove_all(dir);
}

TEST_CASE("synth-data and a small recommender run") {
  const fs::path dir = scratch_dir("recsys");
  write_text(dir / "synth.json", R"({
    "synth": {"num_users": 200, "num_items": 40, "density": 0.15, "seed": 5},
    "output_dir": "synth"
  })");
  REQUIRE(cli("synth-data synth.json", dir).code == 0);
  for (const char* f : {"ratings.csv", "prices.csv", "split/train.csv", "split/manifest.json"}) {
    CHECK_MESSAGE(fs::exists(dir / "synth" / f), f);
  }

  write_text(dir / "rec.json", R"({
    "problem": {"type": "recsys",
                "data": {"ratings_csv": "synth/ratings.csv", "prices_csv": "synth/prices.csv"},
                "model": {"hidden": [16], "latent": 8}, "k": 5},
    "objectives": ["relevance", "revenue", "recency"],
    "train": {"epochs": 2, "batch_size": 32, "learning_rate": 0.01},
    "output_dir": "rec"
  })");
  const auto r = cli("run rec.json --seed 2", dir);
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "rec" / "data" / "manifest.json"));
  const FrontFile f = read_front_csv(dir / "rec" / "adamized" / "front.csv");
  CHECK(f.names == std::vector<std::string>{"relevance", "revenue", "recency"});
  const auto metrics = cli("metrics rec/vanilla/front.csv rec/adamized/front.csv", dir);
  CHECK(metrics.code == 0);
  fs::remove_all(dir);
}
