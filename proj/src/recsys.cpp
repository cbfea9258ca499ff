#include "mograd/recsys.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mograd {

namespace {

const double kLogFloor = std::log(1e-12);

void dense_layer(std::span<const double> params, const Autoencoder::Layer& layer,
                 const Vec64& input, Vec64& out) {
  out.assign(params.begin() + static_cast<std::ptrdiff_t>(layer.bias_offset),
             params.begin() + static_cast<std::ptrdiff_t>(layer.bias_offset + layer.out));
  const double* w = params.data() + layer.weight_offset;
  for (std::size_t r = 0; r < layer.out; ++r) {
    const double* row = w + r * layer.in;
    double s = 0.0;
    for (std::size_t c = 0; c < layer.in; ++c) s += row[c] * input[c];
    out[r] += s;
  }
}

// Accumulates dW += delta x input, db += delta; returns W^T delta when wanted.
void dense_layer_backward(std::span<const double> params, const Autoencoder::Layer& layer,
                          const Vec64& input, const Vec64& delta, std::span<double> grad,
                          Vec64* dinput) {
  const double* w = params.data() + layer.weight_offset;
  double* gw = grad.data() + layer.weight_offset;
  double* gb = grad.data() + layer.bias_offset;
  if (dinput) dinput->assign(layer.in, 0.0);
  for (std::size_t r = 0; r < layer.out; ++r) {
    const double dr = delta[r];
    gb[r] += dr;
    if (dr == 0.0) continue;
    double* grow = gw + r * layer.in;
    const double* row = w + r * layer.in;
    for (std::size_t c = 0; c < layer.in; ++c) grow[c] += dr * input[c];
    if (dinput) {
      for (std::size_t c = 0; c < layer.in; ++c) (*dinput)[c] += row[c] * dr;
    }
  }
}

void tanh_inplace(Vec64& v) {
  for (auto& x : v) x = std::tanh(x);
}

// Per-user weighted NLL and its logit gradient. Terms whose log-probability
// falls below log(1e-12) are clamped to a constant and contribute no gradient.
double user_nll(const Vec64& logits, const UserRow& items, std::span<const double> weight,
                Vec64* dlogits) {
  const Vec64 logp = log_softmax(logits);
  double loss = 0.0;
  double mass = 0.0;
  if (dlogits) dlogits->assign(logits.size(), 0.0);
  for (std::uint32_t j : items) {
    const double c = weight[j];
    if (c == 0.0) continue;
    if (logp[j] < kLogFloor) {
      loss -= c * kLogFloor;
      continue;
    }
    loss -= c * logp[j];
    mass += c;
    if (dlogits) (*dlogits)[j] -= c;
  }
  if (dlogits && mass != 0.0) {
    for (std::size_t j = 0; j < logits.size(); ++j) (*dlogits)[j] += mass * std::exp(logp[j]);
  }
  return loss;
}

void check_row(const UserRow& items, std::size_t num_items) {
  for (std::uint32_t j : items) {
    if (j >= num_items) throw std::invalid_argument("user row references item beyond vocabulary");
  }
}

void check_weight(std::span<const double> weight, std::size_t num_items) {
  if (weight.size() != num_items) {
    throw std::invalid_argument("item weight length does not match the item count");
  }
}

}  // namespace

double recency_transform(double rho) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("recency_transform: rho outside [0, 1]");
  if (rho >= 0.8) return 1.0;
  return std::pow(0.3, (0.8 - rho) * 10.0 / 3.0);
}

Vec64 min_max_normalize(std::span<const double> values) {
  if (values.empty()) return {};
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double width = *hi - *lo;
  Vec64 out(values.size(), 0.0);
  if (width > 0.0) {
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - *lo) / width;
  }
  return out;
}

Autoencoder::Autoencoder(AutoencoderConfig config) : config_(std::move(config)) {
  if (config_.num_items == 0) throw std::invalid_argument("autoencoder: num_items must be >= 1");
  if (config_.latent == 0) throw std::invalid_argument("autoencoder: latent must be >= 1");
  for (std::size_t h : config_.hidden) {
    if (h == 0) throw std::invalid_argument("autoencoder: hidden widths must be >= 1");
  }
  if (!(config_.dropout >= 0.0 && config_.dropout < 1.0)) {
    throw std::invalid_argument("autoencoder: dropout must be in [0, 1)");
  }

  auto add_layer = [this](std::vector<Layer>& stack, std::size_t in, std::size_t out) {
    Layer l{in, out, num_params_, num_params_ + in * out};
    num_params_ += in * out + out;
    stack.push_back(l);
  };

  std::vector<std::size_t> enc{config_.num_items};
  enc.insert(enc.end(), config_.hidden.begin(), config_.hidden.end());
  enc.push_back(config_.variational ? 2 * config_.latent : config_.latent);
  for (std::size_t i = 0; i + 1 < enc.size(); ++i) add_layer(encoder_, enc[i], enc[i + 1]);

  std::vector<std::size_t> dec{config_.latent};
  dec.insert(dec.end(), config_.hidden.rbegin(), config_.hidden.rend());
  dec.push_back(config_.num_items);
  for (std::size_t i = 0; i + 1 < dec.size(); ++i) add_layer(decoder_, dec[i], dec[i + 1]);
}

Vec64 Autoencoder::init_params(std::uint64_t seed) const {
  RngStream rng(seed);
  Vec64 params(num_params_, 0.0);
  auto fill = [&](const Layer& l) {
    const double limit = std::sqrt(6.0 / static_cast<double>(l.in + l.out));
    for (std::size_t k = 0; k < l.in * l.out; ++k) {
      params[l.weight_offset + k] = (2.0 * rng.uniform() - 1.0) * limit;
    }
  };
  for (const auto& l : encoder_) fill(l);
  for (const auto& l : decoder_) fill(l);
  return params;
}

Autoencoder::Pass Autoencoder::forward(std::span<const double> params, const UserRow& items,
                                       RngStream* rng) const {
  if (params.size() != num_params_) throw std::invalid_argument("autoencoder: parameter size mismatch");
  check_row(items, config_.num_items);

  Pass pass;
  const double scale = items.empty() ? 0.0 : 1.0 / std::sqrt(static_cast<double>(items.size()));
  const bool drop = rng != nullptr && config_.dropout > 0.0;
  const double keep_scale = drop ? 1.0 / (1.0 - config_.dropout) : 1.0;
  for (std::uint32_t j : items) {
    if (drop && rng->uniform() < config_.dropout) continue;
    pass.input.emplace_back(j, scale * keep_scale);
  }

  // First encoder layer reads the sparse input column by column.
  const Layer& first = encoder_.front();
  Vec64 h(params.begin() + static_cast<std::ptrdiff_t>(first.bias_offset),
          params.begin() + static_cast<std::ptrdiff_t>(first.bias_offset + first.out));
  const double* w0 = params.data() + first.weight_offset;
  for (const auto& [j, v] : pass.input) {
    for (std::size_t r = 0; r < first.out; ++r) h[r] += w0[r * first.in + j] * v;
  }
  for (std::size_t l = 0; l < encoder_.size(); ++l) {
    if (l > 0) dense_layer(params, encoder_[l], pass.encoder_acts.back(), h);
    if (l + 1 < encoder_.size()) tanh_inplace(h);
    pass.encoder_acts.push_back(h);
  }

  const Vec64& code = pass.encoder_acts.back();
  const std::size_t latent = config_.latent;
  if (config_.variational) {
    pass.z.assign(code.begin(), code.begin() + static_cast<std::ptrdiff_t>(latent));
    for (std::size_t k = 0; k < latent; ++k) {
      const double mu = code[k];
      const double logvar = code[latent + k];
      pass.kl += 0.5 * (std::exp(logvar) + mu * mu - 1.0 - logvar);
    }
    if (rng) {
      pass.epsilon = rand_normal(*rng, latent);
      for (std::size_t k = 0; k < latent; ++k) {
        pass.z[k] += pass.epsilon[k] * std::exp(0.5 * code[latent + k]);
      }
    }
  } else {
    pass.z = code;
  }

  const Vec64* input = &pass.z;
  for (std::size_t l = 0; l < decoder_.size(); ++l) {
    Vec64 out;
    dense_layer(params, decoder_[l], *input, out);
    if (l + 1 < decoder_.size()) tanh_inplace(out);
    pass.decoder_acts.push_back(std::move(out));
    input = &pass.decoder_acts.back();
  }
  return pass;
}

void Autoencoder::backward(std::span<const double> params, const Pass& pass,
                           std::span<const double> dlogits, double kl_weight,
                           std::span<double> grad) const {
  if (grad.size() != num_params_) throw std::invalid_argument("autoencoder: gradient size mismatch");
  if (dlogits.size() != config_.num_items) throw std::invalid_argument("autoencoder: dlogits size mismatch");

  Vec64 delta(dlogits.begin(), dlogits.end());
  Vec64 dinput;
  for (std::size_t l = decoder_.size(); l-- > 0;) {
    const Vec64& in = l == 0 ? pass.z : pass.decoder_acts[l - 1];
    dense_layer_backward(params, decoder_[l], in, delta, grad, &dinput);
    delta.swap(dinput);
    if (l > 0) {
      for (std::size_t c = 0; c < delta.size(); ++c) delta[c] *= 1.0 - in[c] * in[c];
    }
  }
  // delta now holds dloss/dz.

  const std::size_t latent = config_.latent;
  if (config_.variational) {
    const Vec64& code = pass.encoder_acts.back();
    Vec64 dcode(2 * latent);
    for (std::size_t k = 0; k < latent; ++k) {
      const double mu = code[k];
      const double logvar = code[latent + k];
      const double sd = std::exp(0.5 * logvar);
      const double dz = delta[k];
      dcode[k] = dz + kl_weight * mu;
      const double sample_term = pass.epsilon.empty() ? 0.0 : dz * pass.epsilon[k] * 0.5 * sd;
      dcode[latent + k] = sample_term + kl_weight * 0.5 * (sd * sd - 1.0);
    }
    delta.swap(dcode);
  }

  for (std::size_t l = encoder_.size(); l-- > 1;) {
    const Vec64& in = pass.encoder_acts[l - 1];
    dense_layer_backward(params, encoder_[l], in, delta, grad, &dinput);
    delta.swap(dinput);
    for (std::size_t c = 0; c < delta.size(); ++c) delta[c] *= 1.0 - in[c] * in[c];
  }
  const Layer& first = encoder_.front();
  double* gw = grad.data() + first.weight_offset;
  double* gb = grad.data() + first.bias_offset;
  for (std::size_t r = 0; r < first.out; ++r) gb[r] += delta[r];
  for (const auto& [j, v] : pass.input) {
    for (std::size_t r = 0; r < first.out; ++r) gw[r * first.in + j] += delta[r] * v;
  }
}

ForwardResult forward(const Autoencoder& model, std::span<const double> params,
                      const UserRow& items, RngStream* rng) {
  const auto pass = model.forward(params, items, rng);
  return {softmax(pass.decoder_acts.back()), pass.kl};
}

double weighted_nll_loss(const Autoencoder& model, std::span<const double> params,
                         std::span<const UserRow> batch, std::span<const double> item_weight,
                         double beta, std::uint64_t seed) {
  check_weight(item_weight, model.num_items());
  if (batch.empty()) throw std::invalid_argument("weighted_nll_loss: empty batch");
  CompensatedSum total;
  for (std::size_t u = 0; u < batch.size(); ++u) {
    RngStream rng(mix_seed(seed, u));
    const auto pass = model.forward(params, batch[u], &rng);
    total.add(user_nll(pass.decoder_acts.back(), batch[u], item_weight, nullptr) + beta * pass.kl);
  }
  return total.value() / static_cast<double>(batch.size());
}

Vec64 weighted_nll_grad(const Autoencoder& model, std::span<const double> params,
                        std::span<const UserRow> batch, std::span<const double> item_weight,
                        double beta, std::uint64_t seed) {
  check_weight(item_weight, model.num_items());
  if (batch.empty()) throw std::invalid_argument("weighted_nll_grad: empty batch");
  Vec64 grad(model.num_params(), 0.0);
  Vec64 dlogits;
  for (std::size_t u = 0; u < batch.size(); ++u) {
    RngStream rng(mix_seed(seed, u));
    const auto pass = model.forward(params, batch[u], &rng);
    user_nll(pass.decoder_acts.back(), batch[u], item_weight, &dlogits);
    model.backward(params, pass, dlogits, beta, grad);
  }
  for (auto& g : grad) g /= static_cast<double>(batch.size());
  return grad;
}

std::vector<std::uint32_t> rank_top_k(std::span<const double> scores, const UserRow& excluded,
                                      std::size_t k) {
  std::vector<bool> skip(scores.size(), false);
  for (std::uint32_t j : excluded) {
    if (j < skip.size()) skip[j] = true;
  }
  std::vector<std::uint32_t> candidates;
  candidates.reserve(scores.size());
  for (std::uint32_t j = 0; j < scores.size(); ++j) {
    if (!skip[j]) candidates.push_back(j);
  }
  const std::size_t top = std::min(k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(top),
                    candidates.end(), [&](std::uint32_t a, std::uint32_t b) {
                      return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
                    });
  candidates.resize(top);
  return candidates;
}

double recall_at_k(std::span<const std::uint32_t> ranked,
                   const std::unordered_set<std::uint32_t>& held_out, std::size_t k) {
  if (k == 0) throw std::invalid_argument("recall_at_k: k must be >= 1");
  if (held_out.empty()) throw std::invalid_argument("recall_at_k: empty held-out set");
  const std::size_t depth = std::min(k, ranked.size());
  std::size_t hits = 0;
  for (std::size_t r = 0; r < depth; ++r) hits += held_out.count(ranked[r]);
  return static_cast<double>(hits) / static_cast<double>(std::min(k, held_out.size()));
}

double avg_weight_at_k(std::span<const std::uint32_t> ranked,
                       std::span<const double> normalized_weights, std::size_t k) {
  if (k == 0) throw std::invalid_argument("avg_weight_at_k: k must be >= 1");
  const std::size_t depth = std::min(k, ranked.size());
  if (depth == 0) return 0.0;
  double s = 0.0;
  for (std::size_t r = 0; r < depth; ++r) s += normalized_weights[ranked[r]];
  return s / static_cast<double>(depth);
}

std::string objective_name(RecObjective objective) {
  switch (objective) {
    case RecObjective::kRelevance: return "relevance";
    case RecObjective::kRevenue: return "revenue";
    case RecObjective::kRecency: return "recency";
  }
  return "unknown";
}

RecObjective parse_objective(const std::string& name) {
  if (name == "relevance") return RecObjective::kRelevance;
  if (name == "revenue") return RecObjective::kRevenue;
  if (name == "recency") return RecObjective::kRecency;
  throw std::invalid_argument("unknown objective '" + name + "' (expected relevance, revenue or recency)");
}

RecsysProblem::RecsysProblem(std::vector<UserRow> train_rows, std::vector<MaskedUser> eval_users,
                             ItemWeights weights, RecsysOptions options)
    : train_rows_(std::move(train_rows)),
      eval_users_(std::move(eval_users)),
      weights_(std::move(weights)),
      options_(std::move(options)),
      model_(options_.model) {
  const std::size_t items = options_.model.num_items;
  if (train_rows_.empty()) throw std::invalid_argument("recsys: no training users");
  if (eval_users_.empty()) throw std::invalid_argument("recsys: empty evaluation split");
  if (options_.objectives.empty()) throw std::invalid_argument("recsys: no objectives");
  if (options_.k == 0) throw std::invalid_argument("recsys: k must be >= 1");
  check_weight(weights_.prices, items);
  check_weight(weights_.recency, items);
  for (const auto& r : train_rows_) check_row(r, items);
  for (const auto& u : eval_users_) {
    check_row(u.fold_in, items);
    check_row(u.held_out, items);
    if (u.held_out.empty()) throw std::invalid_argument("recsys: evaluation user without held-out items");
    UserRow full;
    std::merge(u.fold_in.begin(), u.fold_in.end(), u.held_out.begin(), u.held_out.end(),
               std::back_inserter(full));
    reference_rows_.push_back(std::move(full));
  }
  ones_.assign(items, 1.0);
  norm_prices_ = min_max_normalize(weights_.prices);
  norm_recency_ = min_max_normalize(weights_.recency);
}

std::vector<std::string> RecsysProblem::objective_names() const {
  std::vector<std::string> names;
  for (auto o : options_.objectives) names.push_back(objective_name(o));
  return names;
}

Batch RecsysProblem::reference_batch() const {
  Batch b;
  b.pool = Batch::Pool::kReference;
  b.rows.resize(reference_rows_.size());
  for (std::size_t i = 0; i < b.rows.size(); ++i) b.rows[i] = i;
  return b;
}

std::span<const double> RecsysProblem::item_weight(std::size_t objective) const {
  switch (options_.objectives.at(objective)) {
    case RecObjective::kRelevance: return ones_;
    case RecObjective::kRevenue: return weights_.prices;
    case RecObjective::kRecency: return weights_.recency;
  }
  return ones_;
}

double RecsysProblem::kl_weight(std::size_t objective) const {
  return options_.objectives.at(objective) == RecObjective::kRelevance ? options_.beta : 0.0;
}

std::vector<UserRow> RecsysProblem::gather(const Batch& batch) const {
  const auto& pool = batch.pool == Batch::Pool::kTrain ? train_rows_ : reference_rows_;
  std::vector<UserRow> rows;
  rows.reserve(batch.rows.size());
  for (std::size_t r : batch.rows) rows.push_back(pool.at(r));
  return rows;
}

double RecsysProblem::loss(std::size_t objective, const Vec64& w, const Batch& batch) const {
  return weighted_nll_loss(model_, w, gather(batch), item_weight(objective), kl_weight(objective),
                           batch.seed);
}

Vec64 RecsysProblem::grad(std::size_t objective, const Vec64& w, const Batch& batch) const {
  return weighted_nll_grad(model_, w, gather(batch), item_weight(objective), kl_weight(objective),
                           batch.seed);
}

std::vector<ObjectiveEval> RecsysProblem::evaluate(const Vec64& w, const Batch& batch) const {
  const auto rows = gather(batch);
  if (rows.empty()) throw std::invalid_argument("recsys: empty batch");
  const std::size_t n = num_objectives();
  std::vector<ObjectiveEval> out(n);
  std::vector<CompensatedSum> losses(n);
  for (auto& e : out) e.grad.assign(model_.num_params(), 0.0);

  // One forward pass per user, shared by every objective.
  Vec64 dlogits;
  for (std::size_t u = 0; u < rows.size(); ++u) {
    RngStream rng(mix_seed(batch.seed, u));
    const auto pass = model_.forward(w, rows[u], &rng);
    for (std::size_t i = 0; i < n; ++i) {
      const double beta = kl_weight(i);
      losses[i].add(user_nll(pass.decoder_acts.back(), rows[u], item_weight(i), &dlogits) +
                    beta * pass.kl);
      model_.backward(w, pass, dlogits, beta, out[i].grad);
    }
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  for (std::size_t i = 0; i < n; ++i) {
    out[i].loss = losses[i].value() * inv;
    for (auto& g : out[i].grad) g *= inv;
  }
  return out;
}

ParetoPoint RecsysProblem::eval_metrics(const Vec64& w) const {
  const std::size_t n = num_objectives();
  std::vector<CompensatedSum> sums(n);
  for (const auto& user : eval_users_) {
    const auto pass = model_.forward(w, user.fold_in, nullptr);
    const auto ranked = rank_top_k(pass.decoder_acts.back(), user.fold_in, options_.k);
    for (std::size_t i = 0; i < n; ++i) {
      switch (options_.objectives[i]) {
        case RecObjective::kRelevance: {
          const std::unordered_set<std::uint32_t> held(user.held_out.begin(), user.held_out.end());
          sums[i].add(recall_at_k(ranked, held, options_.k));
          break;
        }
        case RecObjective::kRevenue:
          sums[i].add(avg_price_at_k(ranked, norm_prices_, options_.k));
          break;
        case RecObjective::kRecency:
          sums[i].add(avg_recency_at_k(ranked, norm_recency_, options_.k));
          break;
      }
    }
  }
  ParetoPoint p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = sums[i].value() / static_cast<double>(eval_users_.size());
  return p;
}

}  // namespace mograd
