#include "rlfit/transition_estimator.hpp"

#include <stdexcept>

namespace rlfit {

std::vector<DiscretizedTransition> discretize(const EpisodeStore& store,
                                              const RepresentativeStates& states) {
  if (store.meta.psi != states.psi.psi)
    throw std::invalid_argument(
        "discretize: store and representative states use different convergence criteria");
  std::vector<DiscretizedTransition> out;
  out.reserve(store.samples.size());
  for (const auto& sample : store.samples) {
    DiscretizedTransition t;
    t.state = static_cast<std::uint32_t>(map_state(sample.c, states));
    t.action = static_cast<std::uint32_t>(sample.action);
    t.next_state = static_cast<std::uint32_t>(map_state(sample.c_next, states));
    out.push_back(t);
  }
  return out;
}

std::vector<double> estimate_transitions(const std::vector<DiscretizedTransition>& transitions,
                                         std::size_t n_states, std::size_t n_actions) {
  if (n_states == 0 || n_actions == 0)
    throw std::invalid_argument("estimate_transitions: empty state or action space");
  std::vector<std::uint64_t> counts(n_states * n_actions * n_states, 0);
  for (const auto& t : transitions) {
    if (t.state >= n_states || t.next_state >= n_states || t.action >= n_actions)
      throw std::invalid_argument("estimate_transitions: transition index out of range");
    ++counts[(static_cast<std::size_t>(t.state) * n_actions + t.action) * n_states +
             t.next_state];
  }
  std::vector<double> tensor(counts.size(), 0.0);
  const double uniform = 1.0 / static_cast<double>(n_states);
  for (std::size_t s = 0; s < n_states; ++s) {
    for (std::size_t a = 0; a < n_actions; ++a) {
      const std::size_t base = (s * n_actions + a) * n_states;
      std::uint64_t row_total = 0;
      for (std::size_t s2 = 0; s2 < n_states; ++s2) row_total += counts[base + s2];
      if (row_total == 0) {
        for (std::size_t s2 = 0; s2 < n_states; ++s2) tensor[base + s2] = uniform;
      } else {
        const double denom = static_cast<double>(row_total);
        for (std::size_t s2 = 0; s2 < n_states; ++s2)
          tensor[base + s2] = static_cast<double>(counts[base + s2]) / denom;
      }
    }
  }
  return tensor;
}

}  // namespace rlfit
