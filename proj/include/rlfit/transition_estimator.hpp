#pragma once

#include <cstdint>
#include <vector>

#include "rlfit/explorer.hpp"
#include "rlfit/quantizer.hpp"

namespace rlfit {

/// A transition sample reduced to state-action-state indices.
struct DiscretizedTransition {
  std::uint32_t state = 0;
  std::uint32_t action = 0;
  std::uint32_t next_state = 0;
};

/// Maps every sample's objective vectors through the representative states.
/// The store and the states must have been built against the same criteria.
std::vector<DiscretizedTransition> discretize(const EpisodeStore& store,
                                              const RepresentativeStates& states);

/// Frequency estimate of the transition tensor, flat [s][a][s'] layout.
/// Counts accumulate in integer arithmetic so the result is independent of
/// sample order; rows without observations fall back to the uniform
/// distribution 1/n_states.
std::vector<double> estimate_transitions(const std::vector<DiscretizedTransition>& transitions,
                                         std::size_t n_states, std::size_t n_actions);

}  // namespace rlfit
