#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mograd/adamizer.hpp"
#include "mograd/combiner.hpp"
#include "mograd/pareto.hpp"
#include "mograd/problem.hpp"

namespace mograd {

/// Baseline losses below this are floored (with a warning) before normalising.
inline constexpr double kBaselineFloor = 1e-12;

struct TrainConfig {
  std::size_t epochs = 1;
  std::size_t batch_size = 1;
  double learning_rate = 0.01;
  bool adamize = false;
  AdamizeParams adamize_params;
  /// Off by default: moments persist across epochs.
  bool reset_moments_per_epoch = false;
  double stationarity_tol = 1e-6;
  std::uint64_t seed = 0;
  /// Batches between evaluations; unset means once per epoch.
  std::optional<std::size_t> eval_every;
  FrankWolfeOptions frank_wolfe;

  void validate() const;
};

/// L_i(w_init) per objective, used to put the gradients on a common scale.
struct NormalizationBaseline {
  Vec64 initial_losses;
};

struct HistoryRecord {
  std::size_t epoch = 0;
  std::size_t batch = 0;
  std::size_t step = 0;
  Vec64 losses;
  ParetoPoint metrics;
  Vec64 alphas;
  double d_norm = 0.0;
  bool stationary = false;
};

struct TrainHistory {
  std::vector<HistoryRecord> records;
};

struct TrainResult {
  ParetoArchive archive;
  TrainHistory history;
  NormalizationBaseline baseline;
  Vec64 final_params;
  ParetoPoint final_metrics;
  std::vector<std::string> warnings;
};

/// Non-finite loss or gradient during training, with the epoch/batch it happened in.
class TrainError : public std::runtime_error {
 public:
  TrainError(const std::string& what, std::size_t epoch, std::size_t batch);
  std::size_t epoch() const { return epoch_; }
  std::size_t batch() const { return batch_; }

 private:
  std::size_t epoch_;
  std::size_t batch_;
};

/// g / baseline. Throws when baseline < kBaselineFloor.
Vec64 normalize_gradient(std::span<const double> grad, double baseline);

/// Losses of every objective at w on the problem's reference batch. Values
/// below kBaselineFloor are floored and reported through `warnings`.
NormalizationBaseline capture_baseline(const MultiObjectiveProblem& problem, const Vec64& w,
                                       std::vector<std::string>* warnings = nullptr);

/// Stochastic multi-gradient descent. For every batch: per-objective loss and
/// gradient, normalisation by the baseline, optional Adamize, min-norm
/// weights, then w <- w - lr * sum_i alpha_i g_i. The archive collects the
/// evaluation metrics of every scheduled evaluation plus the final parameters.
/// With batch_size >= train_size this is full-batch MGDA.
TrainResult train(const MultiObjectiveProblem& problem, const TrainConfig& config);

}  // namespace mograd
