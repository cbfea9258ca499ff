#pragma once

#include <cstddef>
#include <cstdint>

#include "mograd/numerics.hpp"

namespace mograd {

struct AdamizeParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  /// Blend between the raw gradient (0) and the moment-corrected one (1).
  double lambda = 1.0;
  double epsilon = 1e-8;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Running first/second moment estimates for one objective's gradient.
///
/// Each call to adamize() advances the step counter by one and returns
///   (1 - lambda) g + lambda * m_hat / (sqrt(v_hat) + epsilon)
/// where m_hat and v_hat are the bias-corrected moments. Moments start at
/// zero. One state per objective; never share a state between objectives.
class MomentState {
 public:
  MomentState(std::size_t dim, const AdamizeParams& params);

  Vec64 adamize(std::span<const double> grad);
  /// Zeroes the moments and the step counter; hyperparameters are kept.
  void reset();

  std::size_t dim() const { return m_.size(); }
  std::uint64_t step() const { return t_; }
  const AdamizeParams& params() const { return params_; }
  const Vec64& first_moment() const { return m_; }
  const Vec64& second_moment() const { return v_; }
  Vec64 corrected_first_moment() const;
  Vec64 corrected_second_moment() const;

 private:
  AdamizeParams params_;
  Vec64 m_;
  Vec64 v_;
  std::uint64_t t_ = 0;
};

/// Validated factory matching the (dim, beta1, beta2, lambda, epsilon) signature.
MomentState new_moment_state(std::size_t dim, double beta1, double beta2, double lambda,
                             double epsilon);

}  // namespace mograd
