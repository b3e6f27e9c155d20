#pragma once

#include <cstddef>
#include <vector>

#include <json.hpp>

#include "rlfit/common.hpp"
#include "rlfit/rng.hpp"

namespace rlfit {

/// Maximum acceptable absolute misfit per objective. All entries positive.
struct ConvergenceCriteria {
  Vec psi;

  std::size_t size() const { return psi.size(); }
  void validate() const;
};

/// Finite set of representative states over objective space. Centroid 0 is
/// always the origin anchor marking the success state; the anchors at
/// +-2*psi_i along each axis fence its region off from the data-driven
/// centroids.
struct RepresentativeStates {
  std::vector<Vec> centroids;
  std::size_t success_index = 0;
  ConvergenceCriteria psi;

  std::size_t n_states() const { return centroids.size(); }
  std::size_t n_objectives() const { return psi.size(); }
};

/// Distance between objective vectors, each squared component difference
/// weighted by 1/psi_i.
double psi_distance(const Vec& a, const Vec& b, const ConvergenceCriteria& psi);

/// True iff every |c_i| is strictly below psi_i.
bool is_success(const Vec& c, const ConvergenceCriteria& psi);

/// Quantizes observed objective vectors into `n_states` representative
/// states. The 2*n_c+1 anchor centroids (origin plus +-2*psi_i per axis) are
/// inserted verbatim and never moved; observed vectors falling inside the
/// open 2*psi box carry zero weight so no data-driven centroid can intrude
/// into the success region; the remaining centroids come from weighted
/// k-means. Requires n_states >= 2*n_c + 1 and enough distinct weight-
/// positive vectors for the free centroids.
RepresentativeStates build_states(const std::vector<Vec>& objectives,
                                  const ConvergenceCriteria& psi, std::size_t n_states, Rng& rng,
                                  std::vector<double>* lloyd_objective_trace = nullptr);

/// Index of the psi-nearest centroid; ties resolve to the lowest index.
std::size_t map_state(const Vec& c, const RepresentativeStates& states);

nlohmann::json states_to_json(const RepresentativeStates& states);
RepresentativeStates states_from_json(const nlohmann::json& doc);

}  // namespace rlfit
