#pragma once

#include <cstddef>
#include <vector>

#include "mograd/numerics.hpp"

namespace mograd {

/// Per-objective gradients at one parameter vector, all of the same dimension.
class GradientSet {
 public:
  explicit GradientSet(std::vector<Vec64> grads);

  std::size_t size() const { return grads_.size(); }
  std::size_t dim() const { return grads_.front().size(); }
  const Vec64& operator[](std::size_t i) const { return grads_[i]; }
  const std::vector<Vec64>& grads() const { return grads_; }

  /// Gram matrix M(i, j) = g_i . g_j.
  Mat64 gram() const;

 private:
  std::vector<Vec64> grads_;
};

/// Convex weights over the objectives: non-negative, summing to one.
struct SimplexWeights {
  Vec64 alphas;

  std::size_t size() const { return alphas.size(); }
  bool valid(double tol = 1e-9) const;
};

struct FrankWolfeOptions {
  std::size_t max_iter = 100;
  double tol = 1e-7;
};

/// Closed-form minimiser of |a g1 + (1 - a) g2|^2 over a in [0, 1].
/// Identical or all-zero gradients give (0.5, 0.5).
SimplexWeights solve_two_objective(std::span<const double> g1, std::span<const double> g2);

/// Min-norm point of the convex hull of the gradients, found with away-step
/// Frank-Wolfe on the Gram matrix. Starts from the shortest gradient, so the
/// objective never exceeds min_i |g_i|^2. Stops once the duality gap
/// alpha'M alpha - min(M alpha) drops to tol or after max_iter iterations.
SimplexWeights solve_frank_wolfe(const GradientSet& grads, const FrankWolfeOptions& options = {});

/// Analytic solver for two objectives, Frank-Wolfe otherwise.
SimplexWeights solve_min_norm(const GradientSet& grads, const FrankWolfeOptions& options = {});

/// sum_i alpha_i g_i.
Vec64 combine(const GradientSet& grads, const SimplexWeights& weights);

/// True when |d| <= tol.
bool is_pareto_stationary(std::span<const double> d, double tol);

}  // namespace mograd
