#pragma once

#include <functional>

#include "rlfit/common.hpp"

namespace rlfit {

struct NelderMeadResult {
  Vec x;
  double value = 0.0;
  std::size_t evaluations = 0;
  bool stopped_on_success = false;  // the stop predicate fired
};

/// Simplex search with reflection 1, expansion 2, contraction 0.5 and
/// shrink 0.5. The initial simplex spans 5% of each interval width from x0
/// (stepping inward at a boundary); every trial point is projected into the
/// box before evaluation. The optional `success` predicate is checked after
/// each cost evaluation and ends the search immediately; otherwise the
/// search runs until `max_evaluations` cost calls.
NelderMeadResult nelder_mead(const std::function<double(const Vec&)>& cost, const Vec& x0,
                             const Domain& omega, std::size_t max_evaluations,
                             const std::function<bool(const Vec&)>& success = {});

}  // namespace rlfit
