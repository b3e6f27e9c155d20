#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "rlfit/common.hpp"
#include "rlfit/rng.hpp"

namespace rlfit {

/// Full-covariance Gaussian mixture. Covariances are stored row-major d*d.
struct GaussianMixture {
  std::vector<Vec> means;
  std::vector<Vec> covariances;
  Vec weights;
  double log_likelihood = 0.0;

  std::size_t n_components() const { return means.size(); }
};

/// Expectation-maximization fit with a fixed component count. Component
/// means start at randomly chosen distinct sample values; every covariance
/// update adds `variance_floor` to its diagonal. Returns nullopt when a
/// component collapses (loses all responsibility mass).
std::optional<GaussianMixture> fit_gmm(const std::vector<Vec>& samples,
                                       std::size_t n_components, const Vec& variance_floor,
                                       Rng& rng, std::size_t max_iterations = 200);

/// Fits mixtures for every component count in [1, max_components] (capped
/// at the number of distinct samples), `restarts` seeded runs each, and
/// returns the fit with the lowest Bayesian information criterion. Ties
/// resolve to fewer components.
GaussianMixture fit_gmm_bic(const std::vector<Vec>& samples, const Vec& variance_floor, Rng& rng,
                            std::size_t max_components = 5, std::size_t restarts = 10);

}  // namespace rlfit
