#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

namespace mograd {

/// Dense vector of doubles. Parameters, gradients and metric points all use it.
using Vec64 = std::vector<double>;

/// Row-major dense matrix.
struct Mat64 {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vec64 data;

  Mat64() = default;
  Mat64(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);
double squared_norm(std::span<const double> a);

/// Returns alpha * x + y.
Vec64 axpy(double alpha, std::span<const double> x, std::span<const double> y);

/// In-place y += alpha * x.
void axpy_inplace(double alpha, std::span<const double> x, std::span<double> y);

Vec64 scaled(std::span<const double> x, double factor);

/// Numerically stable softmax (max-subtracted). Throws on empty input.
Vec64 softmax(std::span<const double> logits);

/// log(softmax(logits)), computed without forming the probabilities first.
Vec64 log_softmax(std::span<const double> logits);

bool all_finite(std::span<const double> a);

/// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

/// 64-bit mixing function from the splitmix64 generator.
std::uint64_t splitmix64(std::uint64_t& state);

/// Mixes two words into one; used to derive child seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

/// FNV-1a 64-bit hash of a byte string.
std::uint64_t fnv1a64(std::string_view bytes);

/// xoshiro256** stream seeded through splitmix64.
///
/// Uniform doubles take the top 53 bits of each output. Normal variates use
/// the polar-free Box-Muller transform, caching the second value of each pair.
/// Every draw is a pure function of the seed, so sequences match across
/// platforms and compilers.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next(); }

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next();
  /// Uniform in [0, 1).
  double uniform();
  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound);
  double normal();

  /// Fisher-Yates shuffle driven by below(); std::shuffle is not portable.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

Vec64 rand_uniform(RngStream& rng, std::size_t n);
Vec64 rand_normal(RngStream& rng, std::size_t n);

}  // namespace mograd
