#include "mograd/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mograd {

namespace {

void require_same_dim(const ParetoPoint& p, const ParetoPoint& q) {
  if (p.size() != q.size()) throw std::invalid_argument("pareto: point dimension mismatch");
}

std::size_t front_dim(const ParetoFront& front) {
  const std::size_t n = front.front().size();
  for (const auto& p : front) {
    if (p.size() != n) throw std::invalid_argument("pareto: inconsistent point dimensions");
  }
  return n;
}

struct Xy {
  double x;
  double y;
};

// Area of the union of [0, x] x [0, y] rectangles.
double sweep_2d(std::vector<Xy> pts) {
  std::sort(pts.begin(), pts.end(), [](const Xy& a, const Xy& b) {
    return a.x != b.x ? a.x > b.x : a.y > b.y;
  });
  double area = 0.0;
  double covered_y = 0.0;
  for (const auto& p : pts) {
    if (p.y > covered_y) {
      area += p.x * (p.y - covered_y);
      covered_y = p.y;
    }
  }
  return area;
}

}  // namespace

bool dominates(const ParetoPoint& p, const ParetoPoint& q) {
  require_same_dim(p, q);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < q[i]) return false;
  }
  return true;
}

bool strictly_dominates(const ParetoPoint& p, const ParetoPoint& q) {
  return dominates(p, q) && p != q;
}

ParetoFront non_dominated_filter(const ParetoFront& points) {
  if (points.empty()) return {};
  front_dim(points);
  ParetoFront out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool keep = true;
    for (std::size_t j = 0; j < points.size() && keep; ++j) {
      if (j == i) continue;
      if (strictly_dominates(points[j], points[i])) keep = false;
      // Among duplicates only the first occurrence survives.
      if (j < i && points[j] == points[i]) keep = false;
    }
    if (keep) out.push_back(points[i]);
  }
  return out;
}

double hypervolume(const ParetoFront& front) {
  if (front.empty()) return 0.0;
  const std::size_t n = front_dim(front);
  if (n < 2 || n > 3) {
    throw std::invalid_argument("hypervolume: unsupported dimension " + std::to_string(n) +
                                " (supported: 2, 3)");
  }
  for (const auto& p : front) {
    for (double v : p) {
      if (!std::isfinite(v)) throw std::invalid_argument("hypervolume: non-finite coordinate");
      if (v < 0.0) throw std::invalid_argument("hypervolume: negative coordinate");
    }
  }

  if (n == 2) {
    std::vector<Xy> pts;
    pts.reserve(front.size());
    for (const auto& p : front) pts.push_back({p[0], p[1]});
    return sweep_2d(std::move(pts));
  }

  // Slice along the third axis: between consecutive z levels the cross-section
  // is the 2-D union of every point at or above that level.
  std::vector<const ParetoPoint*> order;
  order.reserve(front.size());
  for (const auto& p : front) order.push_back(&p);
  std::sort(order.begin(), order.end(),
            [](const ParetoPoint* a, const ParetoPoint* b) { return (*a)[2] > (*b)[2]; });

  double volume = 0.0;
  std::vector<Xy> slice;
  for (std::size_t k = 0; k < order.size(); ++k) {
    slice.push_back({(*order[k])[0], (*order[k])[1]});
    const double z_top = (*order[k])[2];
    const double z_bottom = k + 1 < order.size() ? (*order[k + 1])[2] : 0.0;
    if (z_top > z_bottom) volume += (z_top - z_bottom) * sweep_2d(slice);
  }
  return volume;
}

double coverage(const ParetoFront& a, const ParetoFront& b) {
  if (b.empty()) throw std::invalid_argument("coverage: second front is empty");
  std::size_t covered = 0;
  for (const auto& q : b) {
    for (const auto& p : a) {
      if (dominates(p, q)) {
        ++covered;
        break;
      }
    }
  }
  return static_cast<double>(covered) / static_cast<double>(b.size());
}

double point_distance(const ParetoPoint& p, const ParetoPoint& q) {
  require_same_dim(p, q);
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] - q[i]) * (p[i] - q[i]);
  return std::sqrt(s);
}

Vec64 nearest_neighbour_distances(const ParetoFront& front) {
  Vec64 d(front.size(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < front.size(); ++i) {
    for (std::size_t j = 0; j < front.size(); ++j) {
      if (i != j) d[i] = std::min(d[i], point_distance(front[i], front[j]));
    }
  }
  return d;
}

double spacing(const ParetoFront& front) {
  if (front.size() < 2) throw std::invalid_argument("spacing: undefined (|front| < 2)");
  front_dim(front);
  const Vec64 d = nearest_neighbour_distances(front);
  CompensatedSum total;
  for (double v : d) total.add(v);
  const double mean = total.value() / static_cast<double>(d.size());
  CompensatedSum sq;
  for (double v : d) sq.add((v - mean) * (v - mean));
  return std::sqrt(sq.value() / static_cast<double>(d.size() - 1));
}

std::vector<AxisRange> axis_ranges(const std::vector<const ParetoFront*>& fronts) {
  std::vector<AxisRange> ranges;
  for (const auto* front : fronts) {
    for (const auto& p : *front) {
      if (ranges.empty()) {
        for (double v : p) ranges.push_back({v, v});
        continue;
      }
      if (p.size() != ranges.size()) throw std::invalid_argument("axis_ranges: dimension mismatch");
      for (std::size_t i = 0; i < p.size(); ++i) {
        ranges[i].min = std::min(ranges[i].min, p[i]);
        ranges[i].max = std::max(ranges[i].max, p[i]);
      }
    }
  }
  return ranges;
}

ParetoFront normalize_front(const ParetoFront& front, const std::vector<AxisRange>& ranges) {
  ParetoFront out = front;
  for (auto& p : out) {
    if (p.size() != ranges.size()) throw std::invalid_argument("normalize_front: dimension mismatch");
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double width = ranges[i].max - ranges[i].min;
      p[i] = width > 0.0 ? (p[i] - ranges[i].min) / width : 0.0;
    }
  }
  return out;
}

bool ParetoArchive::update(const ParetoPoint& point, const std::string& tag) {
  if (point.size() != dim_) {
    throw std::invalid_argument("ParetoArchive::update: point has dimension " +
                                std::to_string(point.size()) + ", archive expects " +
                                std::to_string(dim_));
  }
  for (const auto& p : points_) {
    if (dominates(p, point)) return false;
  }
  std::size_t keep = 0;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!dominates(point, points_[i])) {
      if (keep != i) {
        points_[keep] = std::move(points_[i]);
        tags_[keep] = std::move(tags_[i]);
      }
      ++keep;
    }
  }
  points_.resize(keep);
  tags_.resize(keep);
  points_.push_back(point);
  tags_.push_back(tag);
  return true;
}

}  // namespace mograd
