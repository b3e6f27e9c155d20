#include "rlfit/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace rlfit {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// In-place Cholesky factor L (lower) of a row-major SPD matrix.
// Returns false if a pivot is not positive.
bool cholesky(const Vec& m, std::size_t d, Vec& l) {
  l.assign(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double sum = m[i * d + j];
      for (std::size_t k = 0; k < j; ++k) sum -= l[i * d + k] * l[j * d + k];
      if (i == j) {
        if (!(sum > 0.0)) return false;
        l[i * d + i] = std::sqrt(sum);
      } else {
        l[i * d + j] = sum / l[j * d + j];
      }
    }
  }
  return true;
}

// Gaussian log density via the precomputed Cholesky factor of the covariance.
double log_density(const Vec& x, const Vec& mean, const Vec& l, std::size_t d) {
  // Solve L z = (x - mean) by forward substitution; the quadratic form is |z|^2.
  Vec z(d, 0.0);
  double log_det = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    double sum = x[i] - mean[i];
    for (std::size_t k = 0; k < i; ++k) sum -= l[i * d + k] * z[k];
    z[i] = sum / l[i * d + i];
    log_det += std::log(l[i * d + i]);
  }
  double quad = 0.0;
  for (double v : z) quad += v * v;
  return -0.5 * (d * kLog2Pi + quad) - log_det;
}

std::vector<std::size_t> distinct_sample_indices(const std::vector<Vec>& samples) {
  std::set<Vec> seen;
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < samples.size(); ++j)
    if (seen.insert(samples[j]).second) idx.push_back(j);
  return idx;
}

}  // namespace

std::optional<GaussianMixture> fit_gmm(const std::vector<Vec>& samples, std::size_t n_components,
                                       const Vec& variance_floor, Rng& rng,
                                       std::size_t max_iterations) {
  if (samples.empty()) throw std::invalid_argument("fit_gmm: no samples");
  const std::size_t n = samples.size();
  const std::size_t d = samples.front().size();
  if (variance_floor.size() != d)
    throw std::invalid_argument("fit_gmm: variance floor dimension mismatch");
  for (double f : variance_floor)
    if (!(f > 0.0)) throw std::invalid_argument("fit_gmm: variance floor must be positive");

  auto distinct = distinct_sample_indices(samples);
  if (n_components == 0 || n_components > distinct.size()) return std::nullopt;

  GaussianMixture gmm;
  gmm.weights.assign(n_components, 1.0 / static_cast<double>(n_components));

  // Initial means: distinct sample values drawn without replacement.
  for (std::size_t m = 0; m < n_components; ++m) {
    const std::size_t pick = m + rng.uniform_index(distinct.size() - m);
    std::swap(distinct[m], distinct[pick]);
    gmm.means.push_back(samples[distinct[m]]);
  }

  // Initial covariance: global scatter plus the floor, shared by components.
  Vec global_mean(d, 0.0);
  for (const auto& x : samples)
    for (std::size_t i = 0; i < d; ++i) global_mean[i] += x[i] / n;
  Vec scatter(d * d, 0.0);
  for (const auto& x : samples)
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        scatter[i * d + j] += (x[i] - global_mean[i]) * (x[j] - global_mean[j]) / n;
  for (std::size_t i = 0; i < d; ++i) scatter[i * d + i] += variance_floor[i];
  gmm.covariances.assign(n_components, scatter);

  std::vector<Vec> chol(n_components);
  std::vector<Vec> resp(n_components, Vec(n, 0.0));
  Vec log_prob(n_components, 0.0);

  double prev_ll = -std::numeric_limits<double>::infinity();
  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    for (std::size_t m = 0; m < n_components; ++m)
      if (!cholesky(gmm.covariances[m], d, chol[m])) return std::nullopt;

    // E step with log-sum-exp.
    double ll = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double hi = -std::numeric_limits<double>::infinity();
      for (std::size_t m = 0; m < n_components; ++m) {
        log_prob[m] = std::log(gmm.weights[m]) + log_density(samples[j], gmm.means[m], chol[m], d);
        hi = std::max(hi, log_prob[m]);
      }
      double denom = 0.0;
      for (std::size_t m = 0; m < n_components; ++m) denom += std::exp(log_prob[m] - hi);
      const double log_denom = hi + std::log(denom);
      ll += log_denom;
      for (std::size_t m = 0; m < n_components; ++m)
        resp[m][j] = std::exp(log_prob[m] - log_denom);
    }
    gmm.log_likelihood = ll;

    // M step.
    for (std::size_t m = 0; m < n_components; ++m) {
      double mass = 0.0;
      for (std::size_t j = 0; j < n; ++j) mass += resp[m][j];
      if (!(mass > 1e-10)) return std::nullopt;  // collapsed component
      gmm.weights[m] = mass / n;
      Vec mean(d, 0.0);
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < d; ++i) mean[i] += resp[m][j] * samples[j][i];
      for (std::size_t i = 0; i < d; ++i) mean[i] /= mass;
      Vec cov(d * d, 0.0);
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < d; ++i) {
          const double di = samples[j][i] - mean[i];
          for (std::size_t k = 0; k < d; ++k)
            cov[i * d + k] += resp[m][j] * di * (samples[j][k] - mean[k]);
        }
      }
      for (std::size_t i = 0; i < d * d; ++i) cov[i] /= mass;
      for (std::size_t i = 0; i < d; ++i) cov[i * d + i] += variance_floor[i];
      gmm.means[m] = std::move(mean);
      gmm.covariances[m] = std::move(cov);
    }

    if (std::abs(ll - prev_ll) <= 1e-8 * (1.0 + std::abs(ll))) break;
    prev_ll = ll;
  }
  return gmm;
}

GaussianMixture fit_gmm_bic(const std::vector<Vec>& samples, const Vec& variance_floor, Rng& rng,
                            std::size_t max_components, std::size_t restarts) {
  if (samples.empty()) throw std::invalid_argument("fit_gmm_bic: no samples");
  const std::size_t n = samples.size();
  const std::size_t d = samples.front().size();
  const std::size_t n_distinct = distinct_sample_indices(samples).size();
  const std::size_t top = std::min(max_components, n_distinct);

  std::optional<GaussianMixture> best;
  double best_bic = std::numeric_limits<double>::infinity();
  for (std::size_t m = 1; m <= top; ++m) {
    std::optional<GaussianMixture> best_run;
    for (std::size_t r = 0; r < restarts; ++r) {
      auto fit = fit_gmm(samples, m, variance_floor, rng);
      if (fit && (!best_run || fit->log_likelihood > best_run->log_likelihood))
        best_run = std::move(fit);
    }
    if (!best_run) continue;
    const double n_free_params =
        static_cast<double>((m - 1) + m * d + m * d * (d + 1) / 2);
    const double bic = -2.0 * best_run->log_likelihood + n_free_params * std::log(double(n));
    if (bic < best_bic) {
      best_bic = bic;
      best = std::move(best_run);
    }
  }
  if (!best) throw std::runtime_error("fit_gmm_bic: every mixture fit failed");
  return *best;
}

}  // namespace rlfit
