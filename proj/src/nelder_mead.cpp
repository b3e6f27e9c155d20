#include "rlfit/nelder_mead.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace rlfit {

namespace {

Vec project(Vec x, const Domain& omega) {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = omega[i].clamp(x[i]);
  return x;
}

struct EarlyStop {};

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const Vec&)>& cost, const Vec& x0,
                             const Domain& omega, std::size_t max_evaluations,
                             const std::function<bool(const Vec&)>& success) {
  const std::size_t dim = x0.size();
  if (dim == 0) throw std::invalid_argument("nelder_mead: empty start point");
  if (omega.size() != dim) throw std::invalid_argument("nelder_mead: domain dimension mismatch");
  if (max_evaluations == 0)
    throw std::invalid_argument("nelder_mead: max_evaluations must be at least 1");

  NelderMeadResult result;
  result.value = std::numeric_limits<double>::infinity();

  auto evaluate = [&](const Vec& x) -> double {
    const double f = cost(x);
    ++result.evaluations;
    if (f < result.value || result.evaluations == 1) {
      result.value = f;
      result.x = x;
    }
    if (success && success(x)) {
      result.x = x;
      result.value = f;
      result.stopped_on_success = true;
      throw EarlyStop{};
    }
    if (result.evaluations >= max_evaluations) throw EarlyStop{};
    return f;
  };

  std::vector<Vec> simplex;
  Vec values;
  try {
    simplex.push_back(project(x0, omega));
    values.push_back(evaluate(simplex[0]));
    for (std::size_t i = 0; i < dim; ++i) {
      Vec v = simplex[0];
      double h = 0.05 * omega[i].width();
      if (v[i] + h > omega[i].hi) h = -h;  // step inward at the boundary
      v[i] += h;
      simplex.push_back(project(std::move(v), omega));
      values.push_back(evaluate(simplex.back()));
    }

    std::vector<std::size_t> order(simplex.size());
    for (;;) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
      const std::size_t best = order.front();
      const std::size_t worst = order.back();
      const std::size_t second_worst = order[order.size() - 2];

      Vec centroid(dim, 0.0);
      for (std::size_t k = 0; k + 1 < order.size(); ++k)
        for (std::size_t i = 0; i < dim; ++i) centroid[i] += simplex[order[k]][i] / dim;

      auto along = [&](double t) {
        Vec v(dim);
        for (std::size_t i = 0; i < dim; ++i)
          v[i] = centroid[i] + t * (centroid[i] - simplex[worst][i]);
        return project(std::move(v), omega);
      };

      const Vec reflected = along(1.0);
      const double f_reflected = evaluate(reflected);
      if (f_reflected < values[best]) {
        const Vec expanded = along(2.0);
        const double f_expanded = evaluate(expanded);
        if (f_expanded < f_reflected) {
          simplex[worst] = expanded;
          values[worst] = f_expanded;
        } else {
          simplex[worst] = reflected;
          values[worst] = f_reflected;
        }
      } else if (f_reflected < values[second_worst]) {
        simplex[worst] = reflected;
        values[worst] = f_reflected;
      } else {
        bool shrink = false;
        if (f_reflected < values[worst]) {
          const Vec outside = along(0.5);
          const double f_outside = evaluate(outside);
          if (f_outside <= f_reflected) {
            simplex[worst] = outside;
            values[worst] = f_outside;
          } else {
            shrink = true;
          }
        } else {
          const Vec inside = along(-0.5);
          const double f_inside = evaluate(inside);
          if (f_inside < values[worst]) {
            simplex[worst] = inside;
            values[worst] = f_inside;
          } else {
            shrink = true;
          }
        }
        if (shrink) {
          for (std::size_t k = 1; k < order.size(); ++k) {
            const std::size_t idx = order[k];
            for (std::size_t i = 0; i < dim; ++i)
              simplex[idx][i] = simplex[best][i] + 0.5 * (simplex[idx][i] - simplex[best][i]);
            simplex[idx] = project(std::move(simplex[idx]), omega);
            values[idx] = evaluate(simplex[idx]);
          }
        }
      }
    }
  } catch (const EarlyStop&) {
    // budget spent or predicate satisfied
  }
  return result;
}

}  // namespace rlfit
