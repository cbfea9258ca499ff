#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "mograd/problem.hpp"

namespace mograd {

/// L_i(w) = |w - c_i|^2 with optional additive Gaussian gradient noise.
///
/// Each objective's noise is drawn from a stream seeded by (batch.seed, i), so
/// a gradient is a deterministic function of (w, batch). Metrics are
/// 1 / (1 + L_i) on the noiseless losses.
class QuadraticProblem final : public MultiObjectiveProblem {
 public:
  QuadraticProblem(std::vector<Vec64> centers, double noise_sigma = 0.0, double init_scale = 1.0);

  std::size_t dim() const override { return centers_.front().size(); }
  std::size_t num_objectives() const override { return centers_.size(); }
  std::vector<std::string> objective_names() const override;
  Vec64 init_params(std::uint64_t seed) const override;
  std::size_t train_size() const override { return 1; }
  Batch reference_batch() const override;
  double loss(std::size_t objective, const Vec64& w, const Batch& batch) const override;
  Vec64 grad(std::size_t objective, const Vec64& w, const Batch& batch) const override;
  ParetoPoint eval_metrics(const Vec64& w) const override;

  const std::vector<Vec64>& centers() const { return centers_; }
  double noise_sigma() const { return noise_sigma_; }

  double exact_loss(std::size_t objective, const Vec64& w) const;
  Vec64 exact_grad(std::size_t objective, const Vec64& w) const;

 private:
  std::vector<Vec64> centers_;
  double noise_sigma_;
  double init_scale_;
};

/// Pareto set of two noiseless quadratics: the segment between their centres.
class QuadraticParetoSegment {
 public:
  explicit QuadraticParetoSegment(const QuadraticProblem& problem);

  /// (1 - t) c1 + t c2 for t in [0, 1].
  Vec64 point(double t) const;
  /// Euclidean distance from w to the segment.
  double distance(const Vec64& w) const;

 private:
  Vec64 c1_;
  Vec64 c2_;
};

}  // namespace mograd
