#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mograd/numerics.hpp"
#include "mograd/pareto.hpp"

namespace mograd {

/// A mini-batch: training-row indices plus a seed for any randomness the
/// problem needs while evaluating it (gradient noise, dropout, sampling).
/// Losses and gradients must be deterministic functions of (w, batch).
struct Batch {
  enum class Pool { kTrain, kReference };

  Pool pool = Pool::kTrain;
  std::vector<std::size_t> rows;
  std::uint64_t seed = 0;
};

struct ObjectiveEval {
  double loss = 0.0;
  Vec64 grad;
};

/// Vector-valued objective L(w) = (L_1(w), ..., L_n(w)) with differentiable parts.
class MultiObjectiveProblem {
 public:
  virtual ~MultiObjectiveProblem() = default;

  virtual std::size_t dim() const = 0;
  virtual std::size_t num_objectives() const = 0;
  virtual std::vector<std::string> objective_names() const = 0;

  /// Seeded parameter initialisation. The engine never initialises parameters itself.
  virtual Vec64 init_params(std::uint64_t seed) const = 0;

  /// Number of training rows that batches index into.
  virtual std::size_t train_size() const = 0;

  /// The fixed batch used to capture the normalisation baseline.
  virtual Batch reference_batch() const = 0;

  virtual double loss(std::size_t objective, const Vec64& w, const Batch& batch) const = 0;
  virtual Vec64 grad(std::size_t objective, const Vec64& w, const Batch& batch) const = 0;

  /// Loss and gradient of every objective on one batch. Override when the
  /// objectives can share work (e.g. one forward pass).
  virtual std::vector<ObjectiveEval> evaluate(const Vec64& w, const Batch& batch) const;

  /// Evaluation metrics, larger is better, one per objective.
  virtual ParetoPoint eval_metrics(const Vec64& w) const = 0;
};

/// Shuffles the training rows and cuts them into batches of `batch_size`
/// (the last one may be short). Each batch gets a seed drawn from `rng`.
std::vector<Batch> make_epoch_batches(std::size_t train_size, std::size_t batch_size,
                                      RngStream& rng);

}  // namespace mograd
