#include "mograd/engine.hpp"

#include <cmath>
#include <string>

namespace mograd {

namespace {

std::string batch_context(std::size_t epoch, std::size_t batch) {
  return " (epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch) + ")";
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("epochs must be at least 1");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be at least 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning_rate must be finite and non-negative");
  }
  if (eval_every && *eval_every < 1) throw std::invalid_argument("eval_every must be at least 1");
  if (!(stationarity_tol >= 0.0)) throw std::invalid_argument("stationarity_tol must be >= 0");
  if (frank_wolfe.max_iter < 1) throw std::invalid_argument("frank_wolfe.max_iter must be >= 1");
  adamize_params.validate();
}

TrainError::TrainError(const std::string& what, std::size_t epoch, std::size_t batch)
    : std::runtime_error(what + batch_context(epoch, batch)), epoch_(epoch), batch_(batch) {}

Vec64 normalize_gradient(std::span<const double> grad, double baseline) {
  if (!(baseline >= kBaselineFloor)) {
    throw std::invalid_argument("normalize_gradient: baseline " + std::to_string(baseline) +
                                " is below the 1e-12 floor");
  }
  return scaled(grad, 1.0 / baseline);
}

NormalizationBaseline capture_baseline(const MultiObjectiveProblem& problem, const Vec64& w,
                                       std::vector<std::string>* warnings) {
  const Batch reference = problem.reference_batch();
  NormalizationBaseline baseline;
  for (std::size_t i = 0; i < problem.num_objectives(); ++i) {
    double loss = problem.loss(i, w, reference);
    if (!std::isfinite(loss)) {
      throw std::runtime_error("capture_baseline: non-finite initial loss for objective " +
                               std::to_string(i));
    }
    if (loss < kBaselineFloor) {
      if (warnings) {
        warnings->push_back("initial loss of objective " + std::to_string(i) + " is " +
                            std::to_string(loss) + "; flooring the baseline at 1e-12");
      }
      loss = kBaselineFloor;
    }
    baseline.initial_losses.push_back(loss);
  }
  return baseline;
}

TrainResult train(const MultiObjectiveProblem& problem, const TrainConfig& config) {
  config.validate();
  const std::size_t n = problem.num_objectives();

  TrainResult result{ParetoArchive(n), {}, {}, {}, {}, {}};
  Vec64 w = problem.init_params(config.seed);
  if (w.size() != problem.dim()) throw std::runtime_error("init_params returned wrong dimension");
  result.baseline = capture_baseline(problem, w, &result.warnings);

  std::vector<MomentState> moments;
  if (config.adamize) {
    for (std::size_t i = 0; i < n; ++i) moments.emplace_back(w.size(), config.adamize_params);
  }

  RngStream batch_rng(mix_seed(config.seed, 0xba7c4));
  const std::size_t batches_per_epoch =
      (problem.train_size() + config.batch_size - 1) / config.batch_size;
  const std::size_t eval_every = config.eval_every.value_or(batches_per_epoch);

  std::size_t step = 0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    if (config.reset_moments_per_epoch) {
      for (auto& m : moments) m.reset();
    }
    const auto batches = make_epoch_batches(problem.train_size(), config.batch_size, batch_rng);
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const std::size_t batch_no = b + 1;
      auto evals = problem.evaluate(w, batches[b]);

      std::vector<Vec64> corrected;
      corrected.reserve(n);
      Vec64 losses(n);
      for (std::size_t i = 0; i < n; ++i) {
        losses[i] = evals[i].loss;
        if (!std::isfinite(evals[i].loss)) {
          throw TrainError("non-finite loss for objective " + std::to_string(i), epoch, batch_no);
        }
        if (!all_finite(evals[i].grad)) {
          throw TrainError("non-finite gradient for objective " + std::to_string(i), epoch,
                           batch_no);
        }
        Vec64 g = normalize_gradient(evals[i].grad, result.baseline.initial_losses[i]);
        if (config.adamize) g = moments[i].adamize(g);
        corrected.push_back(std::move(g));
      }

      const GradientSet grads(std::move(corrected));
      const SimplexWeights weights = solve_min_norm(grads, config.frank_wolfe);
      const Vec64 d = combine(grads, weights);
      const double d_norm = norm(d);

      if (step % eval_every == 0) {
        ParetoPoint metrics = problem.eval_metrics(w);
        result.archive.update(metrics, "e" + std::to_string(epoch) + "b" + std::to_string(batch_no));
        result.history.records.push_back(HistoryRecord{
            epoch, batch_no, step, losses, std::move(metrics), weights.alphas, d_norm,
            d_norm <= config.stationarity_tol});
      }

      axpy_inplace(-config.learning_rate, d, w);
      ++step;
    }
  }

  result.final_metrics = problem.eval_metrics(w);
  result.archive.update(result.final_metrics, "final");
  result.final_params = std::move(w);
  return result;
}

}  // namespace mograd
