#include "mograd/quadratic.hpp"

#include <algorithm>
#include <stdexcept>

namespace mograd {

QuadraticProblem::QuadraticProblem(std::vector<Vec64> centers, double noise_sigma,
                                   double init_scale)
    : centers_(std::move(centers)), noise_sigma_(noise_sigma), init_scale_(init_scale) {
  if (centers_.size() < 2) throw std::invalid_argument("quadratic: need at least two centers");
  const std::size_t d = centers_.front().size();
  if (d == 0) throw std::invalid_argument("quadratic: centers must be non-empty");
  for (const auto& c : centers_) {
    if (c.size() != d) throw std::invalid_argument("quadratic: centers differ in dimension");
  }
  if (!(noise_sigma_ >= 0.0)) throw std::invalid_argument("quadratic: noise_sigma must be >= 0");
}

std::vector<std::string> QuadraticProblem::objective_names() const {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < centers_.size(); ++i) names.push_back("q" + std::to_string(i + 1));
  return names;
}

Vec64 QuadraticProblem::init_params(std::uint64_t seed) const {
  RngStream rng(seed);
  return scaled(rand_normal(rng, dim()), init_scale_);
}

Batch QuadraticProblem::reference_batch() const {
  return Batch{Batch::Pool::kReference, {0}, 0};
}

double QuadraticProblem::exact_loss(std::size_t objective, const Vec64& w) const {
  const Vec64& c = centers_.at(objective);
  if (w.size() != c.size()) throw std::invalid_argument("quadratic: parameter dimension mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) s += (w[k] - c[k]) * (w[k] - c[k]);
  return s;
}

Vec64 QuadraticProblem::exact_grad(std::size_t objective, const Vec64& w) const {
  const Vec64& c = centers_.at(objective);
  if (w.size() != c.size()) throw std::invalid_argument("quadratic: parameter dimension mismatch");
  Vec64 g(w.size());
  for (std::size_t k = 0; k < w.size(); ++k) g[k] = 2.0 * (w[k] - c[k]);
  return g;
}

double QuadraticProblem::loss(std::size_t objective, const Vec64& w, const Batch&) const {
  return exact_loss(objective, w);
}

Vec64 QuadraticProblem::grad(std::size_t objective, const Vec64& w, const Batch& batch) const {
  Vec64 g = exact_grad(objective, w);
  if (noise_sigma_ > 0.0 && batch.pool == Batch::Pool::kTrain) {
    RngStream rng(mix_seed(batch.seed, objective));
    for (auto& v : g) v += noise_sigma_ * rng.normal();
  }
  return g;
}

ParetoPoint QuadraticProblem::eval_metrics(const Vec64& w) const {
  ParetoPoint p(num_objectives());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = 1.0 / (1.0 + exact_loss(i, w));
  return p;
}

QuadraticParetoSegment::QuadraticParetoSegment(const QuadraticProblem& problem) {
  if (problem.num_objectives() != 2) {
    throw std::invalid_argument("quadratic Pareto segment: exactly two objectives required");
  }
  if (problem.noise_sigma() != 0.0) {
    throw std::invalid_argument("quadratic Pareto segment: problem must be noiseless");
  }
  c1_ = problem.centers()[0];
  c2_ = problem.centers()[1];
}

Vec64 QuadraticParetoSegment::point(double t) const {
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("segment parameter outside [0, 1]");
  Vec64 p(c1_.size());
  for (std::size_t k = 0; k < p.size(); ++k) p[k] = (1.0 - t) * c1_[k] + t * c2_[k];
  return p;
}

double QuadraticParetoSegment::distance(const Vec64& w) const {
  const Vec64 dir = axpy(-1.0, c1_, c2_);
  const Vec64 rel = axpy(-1.0, c1_, w);
  const double len2 = squared_norm(dir);
  const double t = len2 > 0.0 ? std::clamp(dot(rel, dir) / len2, 0.0, 1.0) : 0.0;
  return norm(axpy(-1.0, point(t), w));
}

}  // namespace mograd
