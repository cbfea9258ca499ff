#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mograd/numerics.hpp"

namespace mograd {

// All fronts are in maximisation orientation: larger is better on every axis.
using ParetoPoint = Vec64;
using ParetoFront = std::vector<ParetoPoint>;

/// Weak dominance ("p covers q"): p_i >= q_i on every axis. Equal points cover each other.
bool dominates(const ParetoPoint& p, const ParetoPoint& q);

/// p covers q and is strictly better somewhere.
bool strictly_dominates(const ParetoPoint& p, const ParetoPoint& q);

/// Points not strictly dominated by any other point, with exact duplicates
/// collapsed. Keeps first-occurrence order.
ParetoFront non_dominated_filter(const ParetoFront& points);

/// Volume of the union of boxes [0, p] for n in {2, 3}. Dominated points are
/// allowed and simply contribute nothing. Throws on n > 3 or negative coordinates.
double hypervolume(const ParetoFront& front);

/// Fraction of `b` covered by at least one point of `a`. Not symmetric.
double coverage(const ParetoFront& a, const ParetoFront& b);

/// Distance used for spacing. Euclidean.
double point_distance(const ParetoPoint& p, const ParetoPoint& q);

/// Nearest-neighbour distance of each point to the rest of the front.
Vec64 nearest_neighbour_distances(const ParetoFront& front);

/// Sample standard deviation (denominator |front| - 1) of the nearest-neighbour
/// distances. Needs at least two points.
double spacing(const ParetoFront& front);

/// Per-axis [min, max] over the given fronts.
struct AxisRange {
  double min = 0.0;
  double max = 0.0;
};
std::vector<AxisRange> axis_ranges(const std::vector<const ParetoFront*>& fronts);

/// Maps each axis to [0, 1] with the given ranges; a zero-width axis maps to 0.
ParetoFront normalize_front(const ParetoFront& front, const std::vector<AxisRange>& ranges);

/// Mutually non-dominated set of evaluation points, each tagged with the
/// checkpoint that produced it.
class ParetoArchive {
 public:
  explicit ParetoArchive(std::size_t dim) : dim_(dim) {}

  /// Inserts `point` unless some archived point covers it (this includes an
  /// equal point); drops archived points it covers. Returns whether it was inserted.
  bool update(const ParetoPoint& point, const std::string& tag);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const ParetoFront& points() const { return points_; }
  const std::vector<std::string>& tags() const { return tags_; }

 private:
  std::size_t dim_;
  ParetoFront points_;
  std::vector<std::string> tags_;
};

}  // namespace mograd
