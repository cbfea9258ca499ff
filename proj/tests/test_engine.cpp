#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <set>
#include <stdexcept>

#include "mograd/engine.hpp"
#include "mograd/quadratic.hpp"

using namespace mograd;

namespace {

// Rows r = 0..size-1 with L_i(w) = mean over batch rows of |w - c_i - r e_0|^2.
// Records every batch it sees so batching can be inspected.
class RowProblem final : public MultiObjectiveProblem {
 public:
  explicit RowProblem(std::size_t size, bool poison = false) : size_(size), poison_(poison) {}

  std::size_t dim() const override { return 2; }
  std::size_t num_objectives() const override { return 2; }
  std::vector<std::string> objective_names() const override { return {"a", "b"}; }
  Vec64 init_params(std::uint64_t seed) const override {
    RngStream rng(seed);
    return rand_normal(rng, 2);
  }
  std::size_t train_size() const override { return size_; }
  Batch reference_batch() const override {
    Batch b{Batch::Pool::kReference, {}, 0};
    for (std::size_t r = 0; r < size_; ++r) b.rows.push_back(r);
    return b;
  }
  double loss(std::size_t i, const Vec64& w, const Batch& batch) const override {
    if (poison_ && batch.pool == Batch::Pool::kTrain && seen_.size() > 3) return NAN;
    if (batch.pool == Batch::Pool::kTrain && i == 0) seen_.push_back(batch.rows);
    double total = 0.0;
    for (std::size_t r : batch.rows) {
      const Vec64 c = center(i, r);
      total += (w[0] - c[0]) * (w[0] - c[0]) + (w[1] - c[1]) * (w[1] - c[1]);
    }
    return total / static_cast<double>(batch.rows.size());
  }
  Vec64 grad(std::size_t i, const Vec64& w, const Batch& batch) const override {
    Vec64 g(2, 0.0);
    for (std::size_t r : batch.rows) {
      const Vec64 c = center(i, r);
      g[0] += 2 * (w[0] - c[0]);
      g[1] += 2 * (w[1] - c[1]);
    }
    return scaled(g, 1.0 / static_cast<double>(batch.rows.size()));
  }
  ParetoPoint eval_metrics(const Vec64& w) const override {
    return {1.0 / (1.0 + loss(0, w, reference_batch())), 1.0 / (1.0 + loss(1, w, reference_batch()))};
  }

  mutable std::vector<std::vector<std::size_t>> seen_;

 private:
  static Vec64 center(std::size_t i, std::size_t r) {
    return {static_cast<double>(r) * 0.1 + (i == 0 ? -1.0 : 1.0), i == 0 ? 0.5 : -0.5};
  }
  std::size_t size_;
  bool poison_;
};

double terminal_d(const QuadraticProblem& p, const Vec64& w) {
  const GradientSet gs({p.exact_grad(0, w), p.exact_grad(1, w)});
  return norm(combine(gs, solve_min_norm(gs)));
}

double median(Vec64 v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

bool same_history(const TrainHistory& a, const TrainHistory& b) {
  if (a.records.size() != b.records.size()) return false;
  for (std::size_t k = 0; k < a.records.size(); ++k) {
    const auto& x = a.records[k];
    const auto& y = b.records[k];
    if (x.epoch != y.epoch || x.batch != y.batch || x.step != y.step) return false;
    if (x.losses != y.losses || x.metrics != y.metrics || x.alphas != y.alphas) return false;
    if (std::memcmp(&x.d_norm, &y.d_norm, sizeof(double)) != 0) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("normalize_gradient") {
  CHECK(normalize_gradient(Vec64{3, -4}, 1.0) == Vec64{3, -4});
  CHECK(normalize_gradient(Vec64{2, 4}, 2.0) == Vec64{1, 2});
  CHECK_THROWS_AS(normalize_gradient(Vec64{1}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(normalize_gradient(Vec64{1}, 1e-13), std::invalid_argument);
  CHECK_NOTHROW(normalize_gradient(Vec64{1}, kBaselineFloor));
}

TEST_CASE("baseline capture") {
  QuadraticProblem p({{0, 0}, {2, 0}});
  const Vec64 w{1, 1};
  const auto b = capture_baseline(p, w);
  CHECK(b.initial_losses == Vec64{p.loss(0, w, p.reference_batch()), p.loss(1, w, p.reference_batch())});

  std::vector<std::string> warnings;
  const auto floored = capture_baseline(p, Vec64{0, 0}, &warnings);
  CHECK(floored.initial_losses[0] == kBaselineFloor);
  CHECK(floored.initial_losses[1] == 4.0);
  CHECK(warnings.size() == 1);

  QuadraticProblem degenerate({{0, 0}, {2, 0}}, 0.0, 0.0);
  TrainConfig cfg;
  cfg.epochs = 3;
  const auto r = train(degenerate, cfg);
  CHECK(r.warnings.size() == 1);
  CHECK(r.baseline.initial_losses[0] == kBaselineFloor);
  CHECK(all_finite(r.final_params));
}

TEST_CASE("config validation") {
  QuadraticProblem p({{0, 0}, {2, 0}});
  TrainConfig cfg;
  cfg.epochs = 0;
  CHECK_THROWS_AS(train(p, cfg), std::invalid_argument);
  cfg = TrainConfig{};
  cfg.batch_size = 0;
  CHECK_THROWS_AS(train(p, cfg), std::invalid_argument);
  cfg = TrainConfig{};
  cfg.learning_rate = NAN;
  CHECK_THROWS_AS(train(p, cfg), std::invalid_argument);
  cfg = TrainConfig{};
  cfg.eval_every = 0;
  CHECK_THROWS_AS(train(p, cfg), std::invalid_argument);
  cfg = TrainConfig{};
  cfg.adamize_params.beta1 = 1.0;
  CHECK_THROWS_AS(train(p, cfg), std::invalid_argument);
}

TEST_CASE("steps match a hand-rolled loop") {
  QuadraticProblem p({{-1, 0.5, 0.2}, {1, -0.5, 0.0}, {0.3, 1.0, -1.0}});
  for (bool adam : {false, true}) {
    TrainConfig cfg;
    cfg.epochs = 25;
    cfg.learning_rate = 0.07;
    cfg.seed = 4;
    cfg.adamize = adam;
    cfg.eval_every = 1;
    const auto r = train(p, cfg);

    Vec64 w = p.init_params(4);
    Vec64 base{p.exact_loss(0, w), p.exact_loss(1, w), p.exact_loss(2, w)};
    std::vector<Vec64> m(3, Vec64(3, 0.0)), v(3, Vec64(3, 0.0));
    REQUIRE(r.history.records.size() == 25);
    for (int t = 1; t <= 25; ++t) {
      std::vector<Vec64> gs;
      for (std::size_t i = 0; i < 3; ++i) {
        Vec64 g = p.exact_grad(i, w);
        for (auto& x : g) x /= base[i];
        if (adam) {
          for (std::size_t k = 0; k < 3; ++k) {
            m[i][k] = 0.9 * m[i][k] + 0.1 * g[k];
            v[i][k] = 0.999 * v[i][k] + 0.001 * g[k] * g[k];
            const double mh = m[i][k] / (1 - std::pow(0.9, t));
            const double vh = v[i][k] / (1 - std::pow(0.999, t));
            g[k] = mh / (std::sqrt(vh) + 1e-8);
          }
        }
        gs.push_back(g);
      }
      const auto& rec = r.history.records[static_cast<std::size_t>(t - 1)];
      CHECK(rec.alphas.size() == 3);
      double sum = 0.0;
      for (double a : rec.alphas) {
        CHECK(a >= 0.0);
        sum += a;
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
      const ParetoPoint expect = p.eval_metrics(w);
      for (std::size_t i = 0; i < 3; ++i) CHECK(rec.metrics[i] == doctest::Approx(expect[i]).epsilon(1e-12));
      for (std::size_t k = 0; k < 3; ++k) {
        double dk = 0.0;
        for (std::size_t i = 0; i < 3; ++i) dk += rec.alphas[i] * gs[i][k];
        w[k] -= 0.07 * dk;
      }
    }
    for (std::size_t k = 0; k < 3; ++k) CHECK(r.final_params[k] == doctest::Approx(w[k]).epsilon(1e-10));
  }
}

TEST_CASE("converges to the Pareto segment") {
  QuadraticProblem p({{-1, 0.5}, {1.5, -0.5}});
  QuadraticParetoSegment seg(p);
  for (std::uint64_t seed = 0; seed < 11; ++seed) {
    TrainConfig cfg;
    cfg.epochs = 500;
    cfg.learning_rate = 0.05;
    cfg.seed = seed;
    const auto r = train(p, cfg);
    CHECK(terminal_d(p, r.final_params) < 1e-3);
    CHECK(seg.distance(r.final_params) < 1e-2);
  }
}

TEST_CASE("zero learning rate leaves w unchanged") {
  QuadraticProblem p({{-1, 0.5}, {1.5, -0.5}});
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.learning_rate = 0.0;
  cfg.seed = 3;
  const auto r = train(p, cfg);
  CHECK(r.final_params == p.init_params(3));
  for (const auto& rec : r.history.records) CHECK(rec.losses == r.history.records.front().losses);
}

TEST_CASE("determinism and lambda-zero equivalence") {
  QuadraticProblem p({{-1, 0.5, 0}, {1.5, -0.5, 1}}, 0.7);
  RowProblem rows(37);
  for (const MultiObjectiveProblem* prob : {static_cast<const MultiObjectiveProblem*>(&p),
                                            static_cast<const MultiObjectiveProblem*>(&rows)}) {
    TrainConfig cfg;
    cfg.epochs = 15;
    cfg.batch_size = 5;
    cfg.learning_rate = 0.03;
    cfg.seed = 12;
    cfg.eval_every = 2;
    const auto a = train(*prob, cfg);
    const auto b = train(*prob, cfg);
    CHECK(same_history(a.history, b.history));
    CHECK(std::memcmp(a.final_params.data(), b.final_params.data(), a.final_params.size() * 8) == 0);

    TrainConfig zero = cfg;
    zero.adamize = true;
    zero.adamize_params.lambda = 0.0;
    const auto c = train(*prob, zero);
    CHECK(same_history(a.history, c.history));
    CHECK(std::memcmp(a.final_params.data(), c.final_params.data(), a.final_params.size() * 8) == 0);

    TrainConfig other = cfg;
    other.seed = 13;
    CHECK_FALSE(same_history(a.history, train(*prob, other).history));
  }
}

TEST_CASE("every row is visited once per epoch") {
  RowProblem rows(23);
  TrainConfig cfg;
  cfg.epochs = 4;
  cfg.batch_size = 5;
  cfg.learning_rate = 0.01;
  const auto r = train(rows, cfg);
  REQUIRE(rows.seen_.size() == 4 * 5);
  for (std::size_t e = 0; e < 4; ++e) {
    std::multiset<std::size_t> all;
    for (std::size_t b = 0; b < 5; ++b) {
      const auto& batch = rows.seen_[e * 5 + b];
      CHECK(batch.size() == (b < 4 ? 5u : 3u));
      all.insert(batch.begin(), batch.end());
    }
    CHECK(all.size() == 23);
    CHECK(std::set<std::size_t>(all.begin(), all.end()).size() == 23);
  }
  CHECK(rows.seen_[0] != rows.seen_[5]);
  // Default cadence: one evaluation per epoch.
  CHECK(r.history.records.size() == 4);
  for (std::size_t e = 0; e < 4; ++e) CHECK(r.history.records[e].epoch == e + 1);
}

TEST_CASE("archive holds non-dominated evaluation points") {
  QuadraticProblem p({{-1, 0.5}, {1.5, -0.5}}, 0.3, 3.0);
  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.learning_rate = 0.02;
  cfg.eval_every = 1;
  const auto r = train(p, cfg);
  const auto& pts = r.archive.points();
  CHECK_FALSE(pts.empty());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (i != j) CHECK_FALSE(dominates(pts[i], pts[j]));
    }
  }
  for (const auto& rec : r.history.records) {
    bool covered = false;
    for (const auto& q : pts) covered = covered || dominates(q, rec.metrics);
    CHECK(covered);
  }
  bool final_covered = false;
  for (const auto& q : pts) final_covered = final_covered || dominates(q, r.final_metrics);
  CHECK(final_covered);
}

TEST_CASE("non-finite losses carry their position") {
  RowProblem rows(10, true);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 2;
  try {
    train(rows, cfg);
    FAIL("expected TrainError");
  } catch (const TrainError& e) {
    CHECK(e.epoch() == 1);
    CHECK(e.batch() == 4);
    CHECK(std::string(e.what()).find("epoch 1, batch 4") != std::string::npos);
  }
}

TEST_CASE("per-epoch moment reset changes the trajectory") {
  QuadraticProblem p({{-1, 0.5}, {1.5, -0.5}});
  RowProblem rows(8);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 3;
  cfg.adamize = true;
  const auto keep = train(rows, cfg);
  cfg.reset_moments_per_epoch = true;
  const auto reset = train(rows, cfg);
  CHECK(keep.final_params != reset.final_params);
  CHECK(same_history(keep.history, reset.history) == false);
}

TEST_CASE("Adamize stabilises noisy descent") {
  QuadraticProblem p({{-1, 0.5, 0, 0, 0}, {1, -0.5, 0.3, 0, 0}}, 2.0, 2.0);
  Vec64 vanilla, adamized;
  for (std::uint64_t seed = 0; seed < 11; ++seed) {
    TrainConfig cfg;
    cfg.epochs = 1000;
    cfg.learning_rate = 0.01;
    cfg.seed = seed;
    vanilla.push_back(terminal_d(p, train(p, cfg).final_params));
    cfg.adamize = true;
    adamized.push_back(terminal_d(p, train(p, cfg).final_params));
  }
  CHECK(median(adamized) <= median(vanilla));
}
