#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mograd/pareto.hpp"

using namespace mograd;

namespace {

double monte_carlo_hv(const ParetoFront& front, std::size_t samples, std::uint64_t seed) {
  const std::size_t n = front.front().size();
  Vec64 upper(n, 0.0);
  for (const auto& p : front) {
    for (std::size_t k = 0; k < n; ++k) upper[k] = std::max(upper[k], p[k]);
  }
  double box = 1.0;
  for (double u : upper) box *= u;
  RngStream rng(seed);
  std::size_t hits = 0;
  Vec64 x(n);
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t k = 0; k < n; ++k) x[k] = rng.uniform() * upper[k];
    for (const auto& p : front) {
      if (dominates(p, x)) {
        ++hits;
        break;
      }
    }
  }
  return box * static_cast<double>(hits) / static_cast<double>(samples);
}

// Exact 2-D oracle by inclusion-exclusion over all subsets (small fronts only).
double inclusion_exclusion_hv(const ParetoFront& front) {
  const std::size_t m = front.size();
  double total = 0.0;
  for (std::size_t mask = 1; mask < (std::size_t{1} << m); ++mask) {
    Vec64 corner(front[0].size(), INFINITY);
    int bits = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (mask & (std::size_t{1} << i)) {
        ++bits;
        for (std::size_t k = 0; k < corner.size(); ++k) corner[k] = std::min(corner[k], front[i][k]);
      }
    }
    double vol = 1.0;
    for (double c : corner) vol *= c;
    total += (bits % 2 == 1) ? vol : -vol;
  }
  return total;
}

double brute_spacing(const ParetoFront& f) {
  Vec64 d;
  for (std::size_t i = 0; i < f.size(); ++i) {
    double best = INFINITY;
    for (std::size_t j = 0; j < f.size(); ++j) {
      if (i == j) continue;
      double s = 0.0;
      for (std::size_t k = 0; k < f[i].size(); ++k) s += (f[i][k] - f[j][k]) * (f[i][k] - f[j][k]);
      best = std::min(best, std::sqrt(s));
    }
    d.push_back(best);
  }
  double mean = 0.0;
  for (double x : d) mean += x;
  mean /= static_cast<double>(d.size());
  double acc = 0.0;
  for (double x : d) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(d.size() - 1));
}

ParetoFront random_front(RngStream& rng, std::size_t n, std::size_t size) {
  ParetoFront pts;
  for (std::size_t i = 0; i < size; ++i) {
    ParetoPoint p(n);
    for (auto& x : p) x = rng.uniform();
    pts.push_back(p);
  }
  return non_dominated_filter(pts);
}

bool mutually_non_dominated(const ParetoFront& f) {
  for (std::size_t i = 0; i < f.size(); ++i) {
    for (std::size_t j = 0; j < f.size(); ++j) {
      if (i != j && dominates(f[i], f[j])) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("dominance") {
  CHECK(dominates({1, 1}, {1, 1}));
  CHECK_FALSE(dominates({2, 0}, {1, 1}));
  CHECK(dominates({2, 2}, {1, 1}));
  CHECK_FALSE(strictly_dominates({1, 1}, {1, 1}));
  CHECK(strictly_dominates({1, 2}, {1, 1}));
  CHECK_THROWS_AS(dominates({1, 1}, {1, 1, 1}), std::invalid_argument);
}

TEST_CASE("non-dominated filter") {
  CHECK(non_dominated_filter({{1, 2}, {2, 1}, {0, 0}}) == ParetoFront{{1, 2}, {2, 1}});
  CHECK(non_dominated_filter({{3, 4}}) == ParetoFront{{3, 4}});
  CHECK(non_dominated_filter({{1, 1}, {1, 1}, {1, 1}}) == ParetoFront{{1, 1}});
  CHECK(non_dominated_filter({}).empty());
  RngStream rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const ParetoFront f = random_front(rng, 3, 30);
    CHECK(mutually_non_dominated(f));
  }
}

TEST_CASE("hypervolume fixtures") {
  CHECK(hypervolume({{1, 2}}) == 2.0);
  CHECK(hypervolume({{1, 2}, {2, 1}}) == 3.0);
  CHECK(hypervolume({{1, 1, 1}}) == 1.0);
  CHECK(hypervolume({{1, 2}, {2, 1}, {0.5, 0.5}}) == 3.0);
  CHECK(hypervolume({{2, 1, 1}, {1, 2, 1}, {1, 1, 2}}) == doctest::Approx(4.0));
  CHECK(hypervolume({}) == 0.0);
  CHECK_THROWS_AS(hypervolume({{1, 1, 1, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(hypervolume({{-0.1, 1}}), std::invalid_argument);
}

TEST_CASE("hypervolume matches inclusion-exclusion") {
  RngStream rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 2);
    const ParetoFront f = random_front(rng, n, 10);
    if (f.size() > 12) continue;
    CHECK(hypervolume(f) == doctest::Approx(inclusion_exclusion_hv(f)).epsilon(1e-12));
  }
}

TEST_CASE("hypervolume roughly matches Monte-Carlo") {
  RngStream rng(23);
  for (int trial = 0; trial < 6; ++trial) {
    const ParetoFront f = random_front(rng, 2 + static_cast<std::size_t>(trial % 2), 20);
    const double mc = monte_carlo_hv(f, 200000, 100 + static_cast<std::uint64_t>(trial));
    CHECK(std::abs(hypervolume(f) - mc) / mc < 0.02);
  }
}

TEST_CASE("hypervolume monotonicity and permutation invariance") {
  RngStream rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 2);
    ParetoFront f = random_front(rng, n, 15);
    const double hv = hypervolume(f);
    ParetoPoint extra(n);
    for (auto& x : extra) x = rng.uniform();
    ParetoFront g = f;
    g.push_back(extra);
    CHECK(hypervolume(g) >= hv - 1e-15);
    ParetoPoint dominated = f.front();
    for (auto& x : dominated) x *= 0.5;
    ParetoFront h = f;
    h.push_back(dominated);
    CHECK(hypervolume(h) == doctest::Approx(hv).epsilon(1e-14));
    rng.shuffle(f);
    CHECK(hypervolume(f) == doctest::Approx(hv).epsilon(1e-14));
  }
}

TEST_CASE("coverage fixtures and properties") {
  const ParetoFront a{{1, 2}, {2, 1}};
  CHECK(coverage(a, a) == 1.0);
  CHECK(coverage({{2, 2}}, {{1, 1}, {1, 2}}) == 1.0);
  CHECK(coverage({{1, 2}}, {{2, 1}, {0, 1}}) == 0.5);
  CHECK_THROWS_AS(coverage(a, {}), std::invalid_argument);

  RngStream rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const ParetoFront f = random_front(rng, 2, 10);
    ParetoFront worse;
    for (const auto& p : f) worse.push_back({p[0] * 0.9, p[1] * 0.8});
    CHECK(coverage(f, worse) == 1.0);
    CHECK(coverage(worse, f) == 0.0);
    const ParetoFront other = random_front(rng, 2, 10);
    const double c = coverage(f, other);
    CHECK(c >= 0.0);
    CHECK(c <= 1.0);
    ParetoFront shuffled = other;
    rng.shuffle(shuffled);
    CHECK(coverage(f, shuffled) == c);
  }
}

TEST_CASE("spacing fixtures") {
  CHECK(spacing({{0, 0}, {1, 1}, {2, 2}}) == doctest::Approx(0.0));
  CHECK(spacing({{0, 0}, {3, 7}}) == 0.0);
  const double sp = spacing({{0, 0}, {1, 1}, {3, 3}});
  CHECK(std::abs(sp - std::sqrt(2.0 / 3.0)) < 1e-12);
  CHECK(std::abs(sp - 0.8165) < 1e-4);
  CHECK_THROWS_AS(spacing({{1, 1}}), std::invalid_argument);
}

TEST_CASE("spacing matches brute force and scales") {
  RngStream rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    ParetoFront f = random_front(rng, 2 + static_cast<std::size_t>(trial % 2), 20);
    if (f.size() < 2) continue;
    const double sp = spacing(f);
    CHECK(sp == doctest::Approx(brute_spacing(f)).epsilon(1e-12));
    ParetoFront moved = f;
    for (auto& p : moved) {
      for (auto& x : p) x = 3.0 * x + 5.0;
    }
    CHECK(spacing(moved) == doctest::Approx(3.0 * sp).epsilon(1e-9));
    rng.shuffle(f);
    CHECK(spacing(f) == doctest::Approx(sp).epsilon(1e-12));
  }
}

TEST_CASE("axis ranges and normalisation") {
  const ParetoFront a{{1, 10}, {3, 10}};
  const ParetoFront b{{2, 10}};
  const auto ranges = axis_ranges({&a, &b});
  REQUIRE(ranges.size() == 2);
  CHECK(ranges[0].min == 1.0);
  CHECK(ranges[0].max == 3.0);
  const ParetoFront n = normalize_front(a, ranges);
  CHECK(n == ParetoFront{{0.0, 0.0}, {1.0, 0.0}});
}

TEST_CASE("archive keeps a non-dominated set") {
  ParetoArchive ar(2);
  CHECK(ar.update({1, 2}, "a"));
  CHECK(ar.points() == ParetoFront{{1, 2}});
  CHECK(ar.update({2, 1}, "b"));
  CHECK_FALSE(ar.update({0.5, 0.5}, "c"));
  CHECK_FALSE(ar.update({1, 2}, "dup"));
  CHECK(ar.size() == 2);
  CHECK(ar.update({3, 3}, "d"));
  CHECK(ar.points() == ParetoFront{{3, 3}});
  CHECK(ar.tags() == std::vector<std::string>{"d"});
  CHECK_THROWS_AS(ar.update({1, 1, 1}, "bad"), std::invalid_argument);

  RngStream rng(77);
  ParetoArchive big(3);
  ParetoFront all;
  for (int i = 0; i < 300; ++i) {
    ParetoPoint p{rng.uniform(), rng.uniform(), rng.uniform()};
    big.update(p, std::to_string(i));
    all.push_back(p);
    CHECK(mutually_non_dominated(big.points()));
  }
  CHECK(hypervolume(big.points()) == doctest::Approx(hypervolume(non_dominated_filter(all))));
}
