#include "rlfit/quantizer.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "rlfit/kmeans.hpp"

namespace rlfit {

void ConvergenceCriteria::validate() const {
  if (psi.empty()) throw std::invalid_argument("ConvergenceCriteria: empty");
  for (double p : psi)
    if (!(p > 0.0)) throw std::invalid_argument("ConvergenceCriteria: entries must be positive");
}

double psi_distance(const Vec& a, const Vec& b, const ConvergenceCriteria& psi) {
  return std::sqrt(scaled_distance_sq(a, b, psi.psi));
}

bool is_success(const Vec& c, const ConvergenceCriteria& psi) {
  if (c.size() != psi.size()) throw std::invalid_argument("is_success: dimension mismatch");
  for (std::size_t i = 0; i < c.size(); ++i)
    if (!(std::abs(c[i]) < psi.psi[i])) return false;
  return true;
}

namespace {

std::vector<Vec> anchor_centroids(const ConvergenceCriteria& psi) {
  const std::size_t n_c = psi.size();
  std::vector<Vec> anchors;
  anchors.reserve(2 * n_c + 1);
  anchors.emplace_back(n_c, 0.0);  // success anchor at the origin
  for (std::size_t i = 0; i < n_c; ++i) {
    Vec plus(n_c, 0.0), minus(n_c, 0.0);
    plus[i] = 2.0 * psi.psi[i];
    minus[i] = -2.0 * psi.psi[i];
    anchors.push_back(std::move(plus));
    anchors.push_back(std::move(minus));
  }
  return anchors;
}

bool inside_open_box(const Vec& c, const Vec& psi, double factor) {
  for (std::size_t i = 0; i < c.size(); ++i)
    if (!(std::abs(c[i]) < factor * psi[i])) return false;
  return true;
}

}  // namespace

RepresentativeStates build_states(const std::vector<Vec>& objectives,
                                  const ConvergenceCriteria& psi, std::size_t n_states, Rng& rng,
                                  std::vector<double>* lloyd_objective_trace) {
  psi.validate();
  if (objectives.empty()) throw std::invalid_argument("build_states: no objective vectors");
  const std::size_t n_c = psi.size();
  for (const auto& c : objectives)
    if (c.size() != n_c) throw std::invalid_argument("build_states: dimension mismatch");

  const std::size_t n_anchors = 2 * n_c + 1;
  if (n_states < n_anchors)
    throw std::invalid_argument("build_states: n_states must be at least 2*n_objectives + 1");
  const std::size_t n_free = n_states - n_anchors;

  // Vectors inside the open 2*psi box are cancelled out so the success
  // region stays clear of data-driven centroids.
  std::vector<double> weights(objectives.size(), 1.0);
  for (std::size_t j = 0; j < objectives.size(); ++j)
    if (inside_open_box(objectives[j], psi.psi, 2.0)) weights[j] = 0.0;

  if (n_free > 0) {
    std::set<Vec> distinct;
    for (std::size_t j = 0; j < objectives.size(); ++j)
      if (weights[j] > 0.0) distinct.insert(objectives[j]);
    if (distinct.size() < n_free)
      throw std::runtime_error(
          "build_states: only " + std::to_string(distinct.size()) +
          " distinct objective vectors lie outside the 2*psi box but " +
          std::to_string(n_free) + " data-driven centroids were requested; lower n_states");
  }

  KMeansResult km =
      weighted_kmeans(objectives, weights, psi.psi, anchor_centroids(psi), n_free, rng);
  if (lloyd_objective_trace) *lloyd_objective_trace = km.objective_trace;

  RepresentativeStates states;
  states.centroids = std::move(km.centroids);
  states.success_index = 0;
  states.psi = psi;
  return states;
}

std::size_t map_state(const Vec& c, const RepresentativeStates& states) {
  if (c.size() != states.n_objectives())
    throw std::invalid_argument("map_state: dimension mismatch");
  std::size_t best = 0;
  double best_d = scaled_distance_sq(c, states.centroids[0], states.psi.psi);
  for (std::size_t s = 1; s < states.centroids.size(); ++s) {
    const double d = scaled_distance_sq(c, states.centroids[s], states.psi.psi);
    if (d < best_d) {
      best_d = d;
      best = s;
    }
  }
  return best;
}

nlohmann::json states_to_json(const RepresentativeStates& states) {
  nlohmann::json doc;
  doc["psi"] = states.psi.psi;
  doc["success_index"] = states.success_index;
  auto flat = nlohmann::json::array();
  for (const auto& c : states.centroids)
    for (double v : c) flat.push_back(v);
  doc["centroids"] = std::move(flat);
  return doc;
}

RepresentativeStates states_from_json(const nlohmann::json& doc) {
  RepresentativeStates states;
  states.psi.psi = doc.at("psi").get<Vec>();
  states.psi.validate();
  states.success_index = doc.at("success_index").get<std::size_t>();
  const auto& flat = doc.at("centroids");
  const std::size_t n_c = states.psi.size();
  if (flat.size() % n_c != 0)
    throw std::runtime_error("states_from_json: centroid array length not divisible by n_c");
  for (std::size_t off = 0; off < flat.size(); off += n_c) {
    Vec c(n_c);
    for (std::size_t i = 0; i < n_c; ++i) c[i] = flat[off + i].get<double>();
    states.centroids.push_back(std::move(c));
  }
  if (states.success_index >= states.centroids.size())
    throw std::runtime_error("states_from_json: success_index out of range");
  return states;
}

}  // namespace rlfit
