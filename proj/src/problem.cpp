#include "mograd/problem.hpp"

#include <numeric>
#include <stdexcept>

namespace mograd {

std::vector<ObjectiveEval> MultiObjectiveProblem::evaluate(const Vec64& w,
                                                           const Batch& batch) const {
  std::vector<ObjectiveEval> out(num_objectives());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].loss = loss(i, w, batch);
    out[i].grad = grad(i, w, batch);
  }
  return out;
}

std::vector<Batch> make_epoch_batches(std::size_t train_size, std::size_t batch_size,
                                      RngStream& rng) {
  if (batch_size == 0) throw std::invalid_argument("batch_size must be at least 1");
  if (train_size == 0) throw std::invalid_argument("problem has no training rows");
  std::vector<std::size_t> order(train_size);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (batch_size < train_size) rng.shuffle(order);

  std::vector<Batch> batches;
  for (std::size_t start = 0; start < train_size; start += batch_size) {
    Batch b;
    const std::size_t stop = std::min(train_size, start + batch_size);
    b.rows.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                  order.begin() + static_cast<std::ptrdiff_t>(stop));
    b.seed = rng.next();
    batches.push_back(std::move(b));
  }
  return batches;
}

}  // namespace mograd
