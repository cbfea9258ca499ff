#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "mograd/numerics.hpp"
#include "mograd/problem.hpp"

namespace mograd {

/// Sorted indices of the items a user interacted with (a binary row).
using UserRow = std::vector<std::uint32_t>;

/// Per-item weights used by the revenue and recency objectives.
struct ItemWeights {
  Vec64 prices;
  /// First-availability times min-max scaled to [0, 1].
  Vec64 recency_raw;
  /// recency_transform applied to recency_raw.
  Vec64 recency;
};

/// f(rho) = 1 for rho >= 0.8, else 0.3^((0.8 - rho) * 10 / 3). Throws outside [0, 1].
double recency_transform(double rho);

/// Min-max scaling to [0, 1]; a constant vector maps to all zeros.
Vec64 min_max_normalize(std::span<const double> values);

struct AutoencoderConfig {
  std::size_t num_items = 0;
  /// Encoder hidden widths; the decoder mirrors them.
  std::vector<std::size_t> hidden{64};
  std::size_t latent = 16;
  /// Encoder emits mean and log-variance; z is sampled by reparameterisation.
  bool variational = false;
  /// Input dropout probability during training.
  double dropout = 0.0;
};

/// Multinomial autoencoder over item vocabularies. The input row is
/// L2-normalised, passed through tanh hidden layers to a linear latent
/// layer, then decoded through tanh layers to item logits. Parameters live
/// in one flat vector so per-objective gradients can be combined directly.
class Autoencoder {
 public:
  struct Layer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::size_t weight_offset = 0;  // out x in, row-major
    std::size_t bias_offset = 0;
  };

  /// Activations kept from a forward pass for backward().
  struct Pass {
    std::vector<std::pair<std::uint32_t, double>> input;  // sparse normalised (and dropped) input
    std::vector<Vec64> encoder_acts;  // output of each encoder layer
    Vec64 epsilon;                    // reparameterisation noise (variational only)
    Vec64 z;
    std::vector<Vec64> decoder_acts;  // output of each decoder layer; last = logits
    double kl = 0.0;
  };

  explicit Autoencoder(AutoencoderConfig config);

  const AutoencoderConfig& config() const { return config_; }
  std::size_t num_params() const { return num_params_; }
  std::size_t num_items() const { return config_.num_items; }
  const std::vector<Layer>& encoder() const { return encoder_; }
  const std::vector<Layer>& decoder() const { return decoder_; }

  /// Glorot-uniform weights, zero biases.
  Vec64 init_params(std::uint64_t seed) const;

  /// Training mode when rng is non-null (dropout, sampled z); otherwise
  /// deterministic (no dropout, z = mean).
  Pass forward(std::span<const double> params, const UserRow& items, RngStream* rng) const;

  /// Accumulates into grad the gradient of
  ///   loss(logits) + kl_weight * KL
  /// given dloss/dlogits.
  void backward(std::span<const double> params, const Pass& pass,
                std::span<const double> dlogits, double kl_weight, std::span<double> grad) const;

 private:
  AutoencoderConfig config_;
  std::vector<Layer> encoder_;
  std::vector<Layer> decoder_;
  std::size_t num_params_ = 0;
};

/// Item probabilities and KL term for one user.
struct ForwardResult {
  Vec64 probabilities;
  double kl = 0.0;
};
ForwardResult forward(const Autoencoder& model, std::span<const double> params,
                      const UserRow& items, RngStream* rng);

/// Mean over the batch of  -sum_j weight_j x_j log p(j | z) + beta * KL.
/// Relevance is weight = 1; revenue uses prices, recency uses f(rho).
/// User k of the batch draws its randomness from mix_seed(seed, k).
double weighted_nll_loss(const Autoencoder& model, std::span<const double> params,
                         std::span<const UserRow> batch, std::span<const double> item_weight,
                         double beta, std::uint64_t seed);

/// Exact gradient of weighted_nll_loss. Softmax and weighted NLL fuse to
/// dlogits = (sum_j c_j) p - c with c = weight * x.
Vec64 weighted_nll_grad(const Autoencoder& model, std::span<const double> params,
                        std::span<const UserRow> batch, std::span<const double> item_weight,
                        double beta, std::uint64_t seed);

/// Top-k item indices by descending score, skipping `excluded`; ties go to the lower index.
std::vector<std::uint32_t> rank_top_k(std::span<const double> scores, const UserRow& excluded,
                                      std::size_t k);

/// hits in the first k ranks / min(k, |held_out|). Throws on empty held_out.
double recall_at_k(std::span<const std::uint32_t> ranked,
                   const std::unordered_set<std::uint32_t>& held_out, std::size_t k);

/// Mean of already-normalised item weights over the first k ranked items.
double avg_weight_at_k(std::span<const std::uint32_t> ranked,
                       std::span<const double> normalized_weights, std::size_t k);
inline double avg_price_at_k(std::span<const std::uint32_t> ranked,
                             std::span<const double> normalized_prices, std::size_t k) {
  return avg_weight_at_k(ranked, normalized_prices, k);
}
inline double avg_recency_at_k(std::span<const std::uint32_t> ranked,
                               std::span<const double> normalized_recency, std::size_t k) {
  return avg_weight_at_k(ranked, normalized_recency, k);
}

enum class RecObjective { kRelevance, kRevenue, kRecency };

std::string objective_name(RecObjective objective);
RecObjective parse_objective(const std::string& name);

/// An evaluation user: the 80% fed to the model and the masked 20% to recover.
struct MaskedUser {
  std::size_t user = 0;
  UserRow fold_in;
  UserRow held_out;
};

struct RecsysOptions {
  std::vector<RecObjective> objectives{RecObjective::kRelevance, RecObjective::kRevenue};
  AutoencoderConfig model;
  /// KL weight; applies to the relevance objective only.
  double beta = 0.0;
  std::size_t k = 10;
};

/// The recommender as a multi-objective problem. Training rows are the
/// training users; the reference batch is the evaluation users' full rows;
/// metrics are Recall@k, average normalised price and recency over the top k,
/// restricted to the active objectives.
class RecsysProblem final : public MultiObjectiveProblem {
 public:
  RecsysProblem(std::vector<UserRow> train_rows, std::vector<MaskedUser> eval_users,
                ItemWeights weights, RecsysOptions options);

  std::size_t dim() const override { return model_.num_params(); }
  std::size_t num_objectives() const override { return options_.objectives.size(); }
  std::vector<std::string> objective_names() const override;
  Vec64 init_params(std::uint64_t seed) const override { return model_.init_params(seed); }
  std::size_t train_size() const override { return train_rows_.size(); }
  Batch reference_batch() const override;
  double loss(std::size_t objective, const Vec64& w, const Batch& batch) const override;
  Vec64 grad(std::size_t objective, const Vec64& w, const Batch& batch) const override;
  std::vector<ObjectiveEval> evaluate(const Vec64& w, const Batch& batch) const override;
  ParetoPoint eval_metrics(const Vec64& w) const override;

  const Autoencoder& model() const { return model_; }
  std::span<const double> item_weight(std::size_t objective) const;
  double kl_weight(std::size_t objective) const;

 private:
  std::vector<UserRow> gather(const Batch& batch) const;

  std::vector<UserRow> train_rows_;
  std::vector<MaskedUser> eval_users_;
  std::vector<UserRow> reference_rows_;
  ItemWeights weights_;
  RecsysOptions options_;
  Autoencoder model_;
  Vec64 ones_;
  Vec64 norm_prices_;
  Vec64 norm_recency_;
};

}  // namespace mograd
