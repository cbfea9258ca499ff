#include "mograd/adamizer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mograd {

void AdamizeParams::validate() const {
  auto fail = [](const std::string& field, const std::string& rule) {
    throw std::invalid_argument("adamize." + field + " must be " + rule);
  };
  if (!(beta1 >= 0.0 && beta1 < 1.0)) fail("beta1", "in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) fail("beta2", "in [0, 1)");
  if (!(lambda >= 0.0 && lambda <= 1.0)) fail("lambda", "in [0, 1]");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) fail("epsilon", "positive and finite");
}

MomentState::MomentState(std::size_t dim, const AdamizeParams& params)
    : params_(params), m_(dim, 0.0), v_(dim, 0.0) {
  params_.validate();
}

Vec64 MomentState::adamize(std::span<const double> grad) {
  if (grad.size() != m_.size()) {
    throw std::invalid_argument("adamize: gradient dimension " + std::to_string(grad.size()) +
                                " does not match state dimension " + std::to_string(m_.size()));
  }
  if (!all_finite(grad)) throw std::invalid_argument("adamize: non-finite gradient entry");

  ++t_;
  const double b1 = params_.beta1;
  const double b2 = params_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const double lambda = params_.lambda;

  Vec64 out(grad.size());
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const double g = grad[i];
    m_[i] = b1 * m_[i] + (1.0 - b1) * g;
    v_[i] = b2 * v_[i] + (1.0 - b2) * g * g;
    const double m_hat = m_[i] / c1;
    const double v_hat = v_[i] / c2;
    out[i] = (1.0 - lambda) * g + lambda * m_hat / (std::sqrt(v_hat) + params_.epsilon);
  }
  // lambda == 0 returns the input untouched (the blend above would turn -0.0 into +0.0).
  if (lambda == 0.0) out.assign(grad.begin(), grad.end());
  return out;
}

void MomentState::reset() {
  std::fill(m_.begin(), m_.end(), 0.0);
  std::fill(v_.begin(), v_.end(), 0.0);
  t_ = 0;
}

Vec64 MomentState::corrected_first_moment() const {
  if (t_ == 0) return m_;
  return scaled(m_, 1.0 / (1.0 - std::pow(params_.beta1, static_cast<double>(t_))));
}

Vec64 MomentState::corrected_second_moment() const {
  if (t_ == 0) return v_;
  return scaled(v_, 1.0 / (1.0 - std::pow(params_.beta2, static_cast<double>(t_))));
}

MomentState new_moment_state(std::size_t dim, double beta1, double beta2, double lambda,
                             double epsilon) {
  return MomentState(dim, AdamizeParams{beta1, beta2, lambda, epsilon});
}

}  // namespace mograd
