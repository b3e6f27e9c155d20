#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rlfit/common.hpp"
#include "rlfit/rng.hpp"

namespace rlfit {

/// Finite tabular Markov decision process with dense transition and reward
/// tensors, both indexed [state][action][next_state].
///
/// Invariants (checked by validate()):
///   - every (s, a) transition row sums to 1 within 1e-12, entries in [0, 1]
///   - discount in [0, 1]
///   - success_state < n_states
struct Mdp {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::vector<double> transition;  // n_states * n_actions * n_states
  std::vector<double> reward;      // same layout
  double discount = 0.0;
  std::size_t success_state = 0;

  double t(std::size_t s, std::size_t a, std::size_t s2) const {
    return transition[(s * n_actions + a) * n_states + s2];
  }
  double r(std::size_t s, std::size_t a, std::size_t s2) const {
    return reward[(s * n_actions + a) * n_states + s2];
  }

  void validate() const;  // throws std::invalid_argument on violation
};

struct ValueFunction {
  Vec values;  // one entry per state
};

struct QFunction {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::vector<double> q;  // n_states * n_actions

  double operator()(std::size_t s, std::size_t a) const { return q[s * n_actions + a]; }
};

/// Per-state candidate actions with sampling weights. Candidates are the
/// actions whose min-max normalized Q-value reaches the threshold epsilon;
/// their weights are the normalized Q-values rescaled to sum to 1.
struct StochasticPolicy {
  struct Candidate {
    std::size_t action = 0;
    double weight = 0.0;
  };

  std::vector<std::vector<Candidate>> candidates;  // one list per state
  double epsilon = 0.8;

  std::size_t n_states() const { return candidates.size(); }
};

/// Thrown when value iteration fails to reach the requested tolerance.
class ValueIterationError : public std::runtime_error {
 public:
  ValueIterationError(const std::string& msg, double residual)
      : std::runtime_error(msg), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_ = 0.0;
};

struct ValueIterationResult {
  ValueFunction value;
  QFunction q;  // recomputed from the returned value function
  std::size_t sweeps = 0;
  double residual = 0.0;            // sup-norm Bellman residual of `value`
  std::vector<double> sweep_deltas; // sup-norm change per sweep
};

/// Reward tensor that punishes every transition with -1 except arrival in
/// the success state, which costs nothing.
std::vector<double> build_reward(std::size_t n_states, std::size_t n_actions,
                                 std::size_t success_state);

/// Dynamic-programming sweep until the sup-norm change between successive
/// value iterates drops to `tolerance`. Starts from the all-zero value
/// function. Throws ValueIterationError (carrying the last residual) if
/// `max_sweeps` is exhausted first.
ValueIterationResult value_iteration(const Mdp& mdp, double tolerance = 1e-9,
                                     std::size_t max_sweeps = 100000);

/// Per-state argmax action; ties resolve to the lowest action index.
std::vector<std::size_t> greedy_policy(const QFunction& q);

/// Builds the stochastic policy from Q. A degenerate all-equal Q row keeps
/// every action as a uniform candidate. epsilon must be in (0, 1].
StochasticPolicy make_stochastic_policy(const QFunction& q, double epsilon);

/// Draws one candidate action with probability proportional to its weight.
std::size_t sample_action(const StochasticPolicy& policy, std::size_t state, Rng& rng);

/// Versioned JSON document holding the MDP and its policy. The reward tensor
/// is not stored; it is reconstructed from the success state on load.
nlohmann::json mdp_policy_to_json(const Mdp& mdp, const StochasticPolicy& policy);
std::pair<Mdp, StochasticPolicy> mdp_policy_from_json(const nlohmann::json& doc);

}  // namespace rlfit
