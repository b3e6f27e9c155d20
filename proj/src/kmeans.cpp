#include "rlfit/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace rlfit {

double scaled_distance_sq(const Vec& a, const Vec& b, const Vec& scale) {
  if (a.size() != b.size() || a.size() != scale.size())
    throw std::invalid_argument("scaled_distance_sq: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d / scale[i];
  }
  return acc;
}

namespace {

std::size_t nearest_centroid(const Vec& p, const std::vector<Vec>& centroids, const Vec& scale) {
  std::size_t best = 0;
  double best_d = scaled_distance_sq(p, centroids[0], scale);
  for (std::size_t k = 1; k < centroids.size(); ++k) {
    const double d = scaled_distance_sq(p, centroids[k], scale);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

std::size_t count_distinct(const std::vector<Vec>& points, const std::vector<double>& weights) {
  std::set<Vec> seen;
  for (std::size_t j = 0; j < points.size(); ++j)
    if (weights[j] > 0.0) seen.insert(points[j]);
  return seen.size();
}

}  // namespace

KMeansResult weighted_kmeans(const std::vector<Vec>& points, const std::vector<double>& weights,
                             const Vec& metric_scale, const std::vector<Vec>& pinned,
                             std::size_t n_free, Rng& rng, std::size_t max_iterations) {
  if (points.empty()) throw std::invalid_argument("weighted_kmeans: no points");
  if (points.size() != weights.size())
    throw std::invalid_argument("weighted_kmeans: weights size mismatch");
  for (double s : metric_scale)
    if (!(s > 0.0)) throw std::invalid_argument("weighted_kmeans: metric scale must be positive");

  if (n_free > 0 && count_distinct(points, weights) < n_free)
    throw std::runtime_error(
        "weighted_kmeans: fewer distinct weight-positive points than free centroids; "
        "reduce the number of requested clusters");

  const std::size_t n = points.size();
  std::vector<Vec> centroids = pinned;

  // k-means++ seeding over weight-positive points, conditioned on the
  // centroids chosen so far (pinned ones included). The very first seed of a
  // run without pinned centroids is drawn proportionally to weight alone.
  Vec d2(n, 0.0);
  if (!centroids.empty()) {
    for (std::size_t j = 0; j < n; ++j) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centroids)
        best = std::min(best, scaled_distance_sq(points[j], c, metric_scale));
      d2[j] = best;
    }
  }
  for (std::size_t k = 0; k < n_free; ++k) {
    const bool use_d2 = !centroids.empty();
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!(weights[j] > 0.0)) continue;
      total += use_d2 ? weights[j] * d2[j] : weights[j];
    }
    if (!(total > 0.0))
      throw std::runtime_error(
          "weighted_kmeans: cannot seed a distinct centroid; reduce the number of "
          "requested clusters");
    const double target = rng.uniform() * total;
    double cum = 0.0;
    std::size_t pick = n;
    std::size_t last = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (!(weights[j] > 0.0)) continue;
      const double contrib = use_d2 ? weights[j] * d2[j] : weights[j];
      if (!(contrib > 0.0)) continue;  // coincides with an existing centroid
      last = j;
      cum += contrib;
      if (target < cum) {
        pick = j;
        break;
      }
    }
    if (pick == n) pick = last;  // rounding pushed target past the final bin
    centroids.push_back(points[pick]);
    for (std::size_t j = 0; j < n; ++j) {
      const double d = scaled_distance_sq(points[j], centroids.back(), metric_scale);
      if (centroids.size() == 1 || d < d2[j]) d2[j] = d;
    }
  }

  KMeansResult res;
  const std::size_t n_centroids = centroids.size();
  std::vector<std::size_t> assign(n, 0);
  std::vector<std::size_t> prev_assign;

  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    // Assignment over weight-positive points only.
    double objective = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!(weights[j] > 0.0)) continue;
      assign[j] = nearest_centroid(points[j], centroids, metric_scale);
      objective += weights[j] * scaled_distance_sq(points[j], centroids[assign[j]], metric_scale);
    }
    res.objective_trace.push_back(objective);
    if (!prev_assign.empty() && assign == prev_assign) break;
    prev_assign = assign;

    if (n_free == 0) break;

    // Update free centroids as weighted means of their members.
    const std::size_t dim = points.front().size();
    std::vector<Vec> sums(n_centroids, Vec(dim, 0.0));
    std::vector<double> wsums(n_centroids, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (!(weights[j] > 0.0)) continue;
      const std::size_t k = assign[j];
      wsums[k] += weights[j];
      for (std::size_t i = 0; i < dim; ++i) sums[k][i] += weights[j] * points[j][i];
    }
    std::vector<std::size_t> reseeded;
    for (std::size_t k = pinned.size(); k < n_centroids; ++k) {
      if (wsums[k] > 0.0) {
        for (std::size_t i = 0; i < dim; ++i) centroids[k][i] = sums[k][i] / wsums[k];
      } else {
        // Empty cluster: move it to the farthest weight-positive point.
        std::size_t far = n;
        double far_d = -1.0;
        for (std::size_t j = 0; j < n; ++j) {
          if (!(weights[j] > 0.0)) continue;
          if (std::find(reseeded.begin(), reseeded.end(), j) != reseeded.end()) continue;
          const double d = scaled_distance_sq(points[j], centroids[k], metric_scale);
          if (d > far_d) {
            far_d = d;
            far = j;
          }
        }
        if (far != n) {
          centroids[k] = points[far];
          reseeded.push_back(far);
        }
      }
    }
  }

  // Final assignment for every point, zero-weight ones included.
  for (std::size_t j = 0; j < n; ++j)
    assign[j] = nearest_centroid(points[j], centroids, metric_scale);

  res.centroids = std::move(centroids);
  res.assignment = std::move(assign);
  return res;
}

}  // namespace rlfit
