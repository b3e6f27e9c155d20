#pragma once

#include <vector>

#include <json.hpp>

#include "rlfit/explorer.hpp"
#include "rlfit/gmm.hpp"
#include "rlfit/quantizer.hpp"

namespace rlfit {

/// Clustering of all model outputs seen during exploration, with the
/// generating parameter vectors attached to each cluster. Built once during
/// training; personalization only reads it.
struct OutputClustering {
  std::vector<Vec> centroids;                   // in model-output space
  std::vector<std::vector<Vec>> member_params;  // parameters whose outputs landed in the cluster
  ConvergenceCriteria psi;
};

/// k-means over every model output visited in the store (each chain state
/// counted once), using the criteria-scaled metric. Requires at least
/// `n_clusters` distinct outputs.
OutputClustering cluster_model_states(const EpisodeStore& store, const ConvergenceCriteria& psi,
                                      std::size_t n_clusters, Rng& rng);

/// Ordered initialization candidates with their mixture weights,
/// most likely first.
struct InitCandidates {
  std::vector<Vec> params;
  Vec weights;

  bool empty() const { return params.empty(); }
};

/// Candidate initial parameter vectors for a new case: the mixture-model
/// modes of the parameters that produced outputs similar to the target.
/// The cluster nearest the measurement is selected (lowest index on ties);
/// a Gaussian mixture is fitted over its member parameters with the
/// component count chosen by BIC; the component means, clamped to the
/// domain, are returned sorted by descending weight.
InitCandidates init_candidates(const Measurement& target, const OutputClustering& clustering,
                               const Domain& omega, Rng& rng);

nlohmann::json clustering_to_json(const OutputClustering& clustering);
OutputClustering clustering_from_json(const nlohmann::json& doc);

}  // namespace rlfit
