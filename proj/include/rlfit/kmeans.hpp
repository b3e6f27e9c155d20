#pragma once

#include <cstddef>
#include <vector>

#include "rlfit/common.hpp"
#include "rlfit/rng.hpp"

namespace rlfit {

/// Squared distance under the diagonal metric diag(scale)^-1:
/// sum_i (a_i - b_i)^2 / scale_i. `scale` entries must be positive.
double scaled_distance_sq(const Vec& a, const Vec& b, const Vec& scale);

struct KMeansResult {
  std::vector<Vec> centroids;           // pinned centroids first, then free ones
  std::vector<std::size_t> assignment;  // nearest centroid per input point
  std::vector<double> objective_trace;  // weighted objective after each assignment step
};

/// Lloyd iterations with k-means++ seeding under the scaled metric.
///
/// `pinned` centroids are fixed for the whole run: they participate in
/// assignments but are never moved by the update step. Points with zero
/// weight do not influence seeding or centroid updates; they still receive
/// an assignment in the result. `n_free` additional centroids are seeded
/// proportionally to weight * squared distance from the existing centroids
/// and then updated as weighted means of their members.
///
/// An empty free cluster is reseeded at the weight-positive point farthest
/// from its current centroid (lowest index on ties, never reusing a point
/// already taken by another reseed in the same round).
///
/// Terminates when assignments stop changing or after `max_iterations`.
/// Throws std::runtime_error when fewer distinct weight-positive points
/// exist than free centroids requested.
KMeansResult weighted_kmeans(const std::vector<Vec>& points, const std::vector<double>& weights,
                             const Vec& metric_scale, const std::vector<Vec>& pinned,
                             std::size_t n_free, Rng& rng, std::size_t max_iterations = 200);

}  // namespace rlfit
