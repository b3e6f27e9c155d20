#include "rlfit/agent.hpp"

#include <algorithm>
#include <stdexcept>

namespace rlfit {

bool detect_oscillation(std::span<const Vec> segment) {
  if (segment.size() < 2) return false;
  const Vec& current = segment.back();
  for (std::size_t j = 0; j + 1 < segment.size(); ++j)
    if (segment[j] == current) return true;
  return false;
}

namespace {

Vec random_domain_point(const Domain& omega, Rng& rng) {
  Vec x(omega.size());
  for (std::size_t i = 0; i < omega.size(); ++i) x[i] = rng.uniform(omega[i].lo, omega[i].hi);
  return x;
}

}  // namespace

PersonalizationResult personalize(const ForwardModel& model, const Measurement& target,
                                  const ModelSpec& spec, const ActionSet& actions,
                                  const RepresentativeStates& states,
                                  const StochasticPolicy& policy, const InitCandidates& candidates,
                                  const PersonalizationConfig& config, Rng& rng) {
  if (config.max_iterations == 0)
    throw std::invalid_argument("personalize: max_iterations must be at least 1");
  if (policy.n_states() != states.n_states())
    throw std::invalid_argument("personalize: policy and representative states disagree");
  if (config.initial_point && config.initial_point->size() != spec.n_params())
    throw std::invalid_argument("personalize: initial point dimension mismatch");

  std::size_t next_candidate = 0;
  auto next_init = [&]() -> Vec {
    if (config.use_candidates && next_candidate < candidates.params.size())
      return candidates.params[next_candidate++];
    return random_domain_point(spec.domain, rng);
  };

  PersonalizationResult result;
  std::vector<Vec> segment;  // parameter vectors visited since the last (re)initialization
  Vec x = config.initial_point ? *config.initial_point : next_init();
  segment.push_back(x);

  while (result.iterations_used < config.max_iterations) {
    const Vec y = model.evaluate(x);
    ++result.iterations_used;
    const Vec c = objectives(y, target);
    const std::size_t s = map_state(c, states);

    if (is_success(c, spec.psi)) {
      result.trace.push_back({x, c, s, std::nullopt});
      result.success = true;
      result.final_x = x;
      result.final_c = c;
      return result;
    }

    const std::size_t a = sample_action(policy, s, rng);
    result.trace.push_back({x, c, s, a});
    Vec x_next = apply_action(x, actions.actions[a], spec);

    const bool revisit = config.oscillation_detection &&
                         std::find(segment.begin(), segment.end(), x_next) != segment.end();
    if (revisit) {
      x = next_init();
      ++result.reinit_count;
      segment.clear();
    } else {
      x = std::move(x_next);
    }
    segment.push_back(x);
  }

  // Budget exhausted: report the last evaluated point.
  result.final_x = result.trace.back().x;
  result.final_c = result.trace.back().c;
  return result;
}

nlohmann::json result_to_json(const PersonalizationResult& result) {
  nlohmann::json doc;
  doc["success"] = result.success;
  doc["iterations_used"] = result.iterations_used;
  doc["final_x"] = result.final_x;
  doc["final_c"] = result.final_c;
  doc["reinit_count"] = result.reinit_count;
  auto trace = nlohmann::json::array();
  for (const auto& step : result.trace) {
    nlohmann::json rec;
    rec["x"] = step.x;
    rec["c"] = step.c;
    rec["s"] = step.state;
    if (step.action)
      rec["a"] = *step.action;
    else
      rec["a"] = nullptr;
    trace.push_back(std::move(rec));
  }
  doc["trace"] = std::move(trace);
  return doc;
}

}  // namespace rlfit
