#include "mograd/combiner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mograd {

namespace {

// Minimiser over gamma in [0, 1] of |gamma u + (1 - gamma) v|^2 given the
// three inner products. Degenerate (u == v) returns 0.5.
double two_point_step(double uu, double uv, double vv) {
  const double denom = uu + vv - 2.0 * uv;
  if (!(denom > 0.0)) return 0.5;
  return std::clamp((vv - uv) / denom, 0.0, 1.0);
}

double quad_form(const Mat64& m, const Vec64& alpha, Vec64& m_alpha) {
  const std::size_t n = alpha.size();
  m_alpha.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m_alpha[i] += m(i, j) * alpha[j];
  }
  return dot(alpha, m_alpha);
}

// Minimiser of alpha' M alpha over the affine hull {sum alpha = 1} of the
// support, via the KKT system [M_S 1; 1' 0]. A small ridge keeps it solvable
// when the support's gradients are affinely dependent. Returns false when
// the system is singular.
bool affine_minimiser(const Mat64& m, const std::vector<std::size_t>& support, Vec64& out) {
  const std::size_t k = support.size();
  const std::size_t size = k + 1;
  double trace = 0.0;
  for (std::size_t i : support) trace += m(i, i);
  const double ridge = 1e-13 * std::max(trace / static_cast<double>(k), 1e-300);

  Mat64 a(size, size + 1);
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t c = 0; c < k; ++c) a(r, c) = m(support[r], support[c]);
    a(r, r) += ridge;
    a(r, k) = 1.0;
    a(k, r) = 1.0;
  }
  a(k, size) = 1.0;

  for (std::size_t col = 0; col < size; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < size; ++r) {
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    }
    if (!(std::abs(a(pivot, col)) > 0.0)) return false;
    if (pivot != col) {
      for (std::size_t c = 0; c <= size; ++c) std::swap(a(col, c), a(pivot, c));
    }
    for (std::size_t r = 0; r < size; ++r) {
      if (r == col) continue;
      const double f = a(r, col) / a(col, col);
      if (f == 0.0) continue;
      for (std::size_t c = col; c <= size; ++c) a(r, c) -= f * a(col, c);
    }
  }
  out.assign(k, 0.0);
  for (std::size_t r = 0; r < k; ++r) out[r] = a(r, size) / a(r, r);
  return all_finite(out);
}

}  // namespace

GradientSet::GradientSet(std::vector<Vec64> grads) : grads_(std::move(grads)) {
  if (grads_.empty()) throw std::invalid_argument("GradientSet: need at least one gradient");
  const std::size_t d = grads_.front().size();
  for (const auto& g : grads_) {
    if (g.size() != d) throw std::invalid_argument("GradientSet: gradients differ in dimension");
    if (!all_finite(g)) throw std::invalid_argument("GradientSet: non-finite gradient entry");
  }
}

Mat64 GradientSet::gram() const {
  const std::size_t n = size();
  Mat64 m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      m(i, j) = m(j, i) = dot(grads_[i], grads_[j]);
    }
  }
  return m;
}

bool SimplexWeights::valid(double tol) const {
  if (alphas.empty()) return false;
  double total = 0.0;
  for (double a : alphas) {
    if (!(a >= 0.0)) return false;
    total += a;
  }
  return std::abs(total - 1.0) <= tol;
}

SimplexWeights solve_two_objective(std::span<const double> g1, std::span<const double> g2) {
  if (g1.size() != g2.size()) throw std::invalid_argument("solve_two_objective: length mismatch");
  // Written directly as (g2 - g1).g2 / |g1 - g2|^2 so g1 == g2 is caught exactly.
  double numer = 0.0;
  double denom = 0.0;
  for (std::size_t i = 0; i < g1.size(); ++i) {
    const double diff = g2[i] - g1[i];
    numer += diff * g2[i];
    denom += diff * diff;
  }
  if (!(denom > 0.0)) return {{0.5, 0.5}};
  const double a = std::clamp(numer / denom, 0.0, 1.0);
  return {{a, 1.0 - a}};
}

SimplexWeights solve_frank_wolfe(const GradientSet& grads, const FrankWolfeOptions& options) {
  const std::size_t n = grads.size();
  if (n < 2) throw std::invalid_argument("solve_frank_wolfe: need at least two gradients");
  const Mat64 m = grads.gram();
  if (!all_finite(m.data)) throw std::invalid_argument("solve_frank_wolfe: non-finite Gram matrix");

  std::size_t start = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (m(i, i) < m(start, start)) start = i;
  }
  Vec64 alpha(n, 0.0);
  alpha[start] = 1.0;

  Vec64 m_alpha;
  for (std::size_t iter = 0; iter < options.max_iter; ++iter) {
    const double dd = quad_form(m, alpha, m_alpha);

    // Toward vertex: smallest directional derivative over all vertices.
    std::size_t toward = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (m_alpha[i] < m_alpha[toward]) toward = i;
    }
    const double fw_gap = dd - m_alpha[toward];
    if (fw_gap <= options.tol) break;

    // Away vertex: largest directional derivative over the active support.
    std::size_t away = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (alpha[i] > 0.0 && (away == n || m_alpha[i] > m_alpha[away])) away = i;
    }
    const double away_gap = m_alpha[away] - dd;

    if (fw_gap >= away_gap) {
      // Line search on the segment [d, g_toward].
      const double gamma = two_point_step(dd, m_alpha[toward], m(toward, toward));
      for (auto& a : alpha) a *= gamma;
      alpha[toward] += 1.0 - gamma;
    } else {
      // Move away from g_away: alpha <- alpha + s (alpha - e_away), s in [0, s_max].
      const double a_away = alpha[away];
      const double s_max = a_away / (1.0 - a_away);
      // f(s) = |d + s (d - g_away)|^2; minimise the quadratic in s.
      const double curvature = dd - 2.0 * m_alpha[away] + m(away, away);
      double s = s_max;
      if (curvature > 0.0) s = std::min(s_max, away_gap / curvature);
      for (auto& a : alpha) a *= 1.0 + s;
      alpha[away] -= s;
      if (s == s_max) alpha[away] = 0.0;
    }

    for (auto& a : alpha) a = std::max(a, 0.0);
    double total = std::accumulate(alpha.begin(), alpha.end(), 0.0);
    for (auto& a : alpha) a /= total;

    // Minor cycle: move toward the exact minimiser of the active face,
    // dropping vertices that hit zero on the way.
    Vec64 scratch;
    for (std::size_t cycle = 0; cycle < n; ++cycle) {
      std::vector<std::size_t> support;
      for (std::size_t i = 0; i < n; ++i) {
        if (alpha[i] > 0.0) support.push_back(i);
      }
      Vec64 face;
      if (support.size() < 2 || !affine_minimiser(m, support, face)) break;
      double t = 1.0;
      std::size_t blocking = n;
      for (std::size_t s = 0; s < support.size(); ++s) {
        const double cur = alpha[support[s]];
        if (face[s] < 0.0) {
          const double limit = cur / (cur - face[s]);
          if (limit < t) {
            t = limit;
            blocking = support[s];
          }
        }
      }
      Vec64 candidate = alpha;
      for (std::size_t s = 0; s < support.size(); ++s) {
        candidate[support[s]] = (1.0 - t) * alpha[support[s]] + t * face[s];
      }
      if (blocking < n) candidate[blocking] = 0.0;
      for (auto& a : candidate) a = std::max(a, 0.0);
      total = std::accumulate(candidate.begin(), candidate.end(), 0.0);
      for (auto& a : candidate) a /= total;
      if (!(quad_form(m, candidate, scratch) <= quad_form(m, alpha, scratch))) break;
      alpha.swap(candidate);
      if (blocking == n) break;
    }
  }
  return {std::move(alpha)};
}

SimplexWeights solve_min_norm(const GradientSet& grads, const FrankWolfeOptions& options) {
  if (grads.size() == 1) return {{1.0}};
  if (grads.size() == 2) return solve_two_objective(grads[0], grads[1]);
  return solve_frank_wolfe(grads, options);
}

Vec64 combine(const GradientSet& grads, const SimplexWeights& weights) {
  if (weights.size() != grads.size()) throw std::invalid_argument("combine: length mismatch");
  Vec64 d(grads.dim(), 0.0);
  for (std::size_t i = 0; i < grads.size(); ++i) axpy_inplace(weights.alphas[i], grads[i], d);
  return d;
}

bool is_pareto_stationary(std::span<const double> d, double tol) { return norm(d) <= tol; }

}  // namespace mograd
