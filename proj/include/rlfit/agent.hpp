#pragma once

#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "rlfit/forward_model.hpp"
#include "rlfit/initializer.hpp"
#include "rlfit/mdp.hpp"
#include "rlfit/quantizer.hpp"

namespace rlfit {

struct PersonalizationConfig {
  std::size_t max_iterations = 100;  // forward-model evaluation budget
  double epsilon = 0.8;              // policy threshold the bundle was built with
  bool oscillation_detection = true;
  bool use_candidates = true;        // consume data-driven candidates on (re)initialization
  std::optional<Vec> initial_point;  // forces the first initialization when set
};

struct TraceStep {
  Vec x;
  Vec c;
  std::size_t state = 0;
  std::optional<std::size_t> action;  // absent on the terminal (success) record
};

struct PersonalizationResult {
  bool success = false;
  std::size_t iterations_used = 0;  // exact forward-model run count
  Vec final_x;
  Vec final_c;
  std::vector<TraceStep> trace;
  std::size_t reinit_count = 0;
};

/// True iff the last parameter vector exactly equals an earlier one. The
/// span must cover a single initialization segment; actions move parameters
/// on the increment lattice (modulo clamping) so exact comparison is
/// meaningful.
bool detect_oscillation(std::span<const Vec> segment);

/// Policy-guided personalization loop. Starts from the forced initial point
/// when given, otherwise from the most likely candidate (or a random domain
/// point when no candidates exist). Each iteration runs the forward model
/// once; the run stops with success as soon as the objectives satisfy the
/// convergence criteria, or with failure when the iteration budget is
/// spent. A detected oscillation re-initializes at the next unused
/// candidate, then at uniform random domain points.
PersonalizationResult personalize(const ForwardModel& model, const Measurement& target,
                                  const ModelSpec& spec, const ActionSet& actions,
                                  const RepresentativeStates& states,
                                  const StochasticPolicy& policy, const InitCandidates& candidates,
                                  const PersonalizationConfig& config, Rng& rng);

nlohmann::json result_to_json(const PersonalizationResult& result);

}  // namespace rlfit
