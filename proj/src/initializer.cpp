#include "rlfit/initializer.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "rlfit/kmeans.hpp"

namespace rlfit {

namespace {

// Every (parameters, output) pair visited by the exploration chains; chain-
// internal states appear in two consecutive samples but are counted once.
void extract_visits(const EpisodeStore& store, std::vector<Vec>& params,
                    std::vector<Vec>& outputs) {
  const auto& samples = store.samples;
  for (std::size_t j = 0; j < samples.size(); ++j) {
    params.push_back(samples[j].x);
    outputs.push_back(samples[j].y);
    if (chain_ends_at(samples, j)) {
      params.push_back(samples[j].x_next);
      outputs.push_back(samples[j].y_next);
    }
  }
}

}  // namespace

OutputClustering cluster_model_states(const EpisodeStore& store, const ConvergenceCriteria& psi,
                                      std::size_t n_clusters, Rng& rng) {
  psi.validate();
  if (n_clusters == 0)
    throw std::invalid_argument("cluster_model_states: n_clusters must be at least 1");
  if (store.samples.empty()) throw std::invalid_argument("cluster_model_states: empty store");

  std::vector<Vec> params, outputs;
  extract_visits(store, params, outputs);
  const std::vector<double> weights(outputs.size(), 1.0);
  KMeansResult km = weighted_kmeans(outputs, weights, psi.psi, {}, n_clusters, rng);

  OutputClustering clustering;
  clustering.centroids = std::move(km.centroids);
  clustering.member_params.resize(n_clusters);
  for (std::size_t j = 0; j < params.size(); ++j)
    clustering.member_params[km.assignment[j]].push_back(std::move(params[j]));
  clustering.psi = psi;
  return clustering;
}

InitCandidates init_candidates(const Measurement& target, const OutputClustering& clustering,
                               const Domain& omega, Rng& rng) {
  if (clustering.centroids.empty())
    throw std::invalid_argument("init_candidates: empty clustering");

  std::size_t nearest = 0;
  double nearest_d = scaled_distance_sq(target.z, clustering.centroids[0], clustering.psi.psi);
  for (std::size_t k = 1; k < clustering.centroids.size(); ++k) {
    const double d = scaled_distance_sq(target.z, clustering.centroids[k], clustering.psi.psi);
    if (d < nearest_d) {
      nearest_d = d;
      nearest = k;
    }
  }
  const auto& members = clustering.member_params[nearest];
  if (members.empty())
    throw std::runtime_error("init_candidates: nearest cluster has no member parameters");

  Vec floor(omega.size());
  for (std::size_t i = 0; i < omega.size(); ++i) {
    const double f = 1e-6 * omega[i].width();
    floor[i] = f * f;
  }
  GaussianMixture gmm = fit_gmm_bic(members, floor, rng);

  std::vector<std::size_t> order(gmm.n_components());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return gmm.weights[a] > gmm.weights[b]; });

  InitCandidates cands;
  for (std::size_t m : order) {
    Vec x = gmm.means[m];
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = omega[i].clamp(x[i]);
    cands.params.push_back(std::move(x));
    cands.weights.push_back(gmm.weights[m]);
  }
  return cands;
}

nlohmann::json clustering_to_json(const OutputClustering& clustering) {
  nlohmann::json doc;
  doc["psi"] = clustering.psi.psi;
  doc["centroids"] = clustering.centroids;
  doc["members"] = clustering.member_params;
  return doc;
}

OutputClustering clustering_from_json(const nlohmann::json& doc) {
  OutputClustering clustering;
  clustering.psi.psi = doc.at("psi").get<Vec>();
  clustering.psi.validate();
  clustering.centroids = doc.at("centroids").get<std::vector<Vec>>();
  clustering.member_params = doc.at("members").get<std::vector<std::vector<Vec>>>();
  if (clustering.member_params.size() != clustering.centroids.size())
    throw std::runtime_error("clustering_from_json: member list count mismatch");
  return clustering;
}

}  // namespace rlfit
