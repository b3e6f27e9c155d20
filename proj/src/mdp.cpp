#include "rlfit/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rlfit {

void Mdp::validate() const {
  if (n_states == 0 || n_actions == 0)
    throw std::invalid_argument("Mdp: n_states and n_actions must be positive");
  const std::size_t n = n_states * n_actions * n_states;
  if (transition.size() != n || reward.size() != n)
    throw std::invalid_argument("Mdp: tensor sizes do not match n_states/n_actions");
  if (!(discount >= 0.0 && discount <= 1.0))
    throw std::invalid_argument("Mdp: discount must be in [0, 1]");
  if (success_state >= n_states)
    throw std::invalid_argument("Mdp: success_state out of range");
  for (std::size_t s = 0; s < n_states; ++s) {
    for (std::size_t a = 0; a < n_actions; ++a) {
      double sum = 0.0;
      for (std::size_t s2 = 0; s2 < n_states; ++s2) {
        const double p = t(s, a, s2);
        if (!(p >= 0.0 && p <= 1.0))
          throw std::invalid_argument("Mdp: transition probability outside [0, 1]");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("Mdp: transition row (" + std::to_string(s) + ", " +
                                    std::to_string(a) + ") is not stochastic");
    }
  }
}

std::vector<double> build_reward(std::size_t n_states, std::size_t n_actions,
                                 std::size_t success_state) {
  if (success_state >= n_states)
    throw std::invalid_argument("build_reward: success_state out of range");
  std::vector<double> reward(n_states * n_actions * n_states, -1.0);
  for (std::size_t s = 0; s < n_states; ++s)
    for (std::size_t a = 0; a < n_actions; ++a)
      reward[(s * n_actions + a) * n_states + success_state] = 0.0;
  return reward;
}

namespace {

// One application of the Bellman operator: Q from V, then V' = max_a Q.
void bellman_backup(const Mdp& mdp, const Vec& v, QFunction& q, Vec& v_next) {
  const std::size_t ns = mdp.n_states;
  const std::size_t na = mdp.n_actions;
  for (std::size_t s = 0; s < ns; ++s) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < na; ++a) {
      const double* trow = mdp.transition.data() + (s * na + a) * ns;
      const double* rrow = mdp.reward.data() + (s * na + a) * ns;
      double acc = 0.0;
      for (std::size_t s2 = 0; s2 < ns; ++s2)
        acc += trow[s2] * (rrow[s2] + mdp.discount * v[s2]);
      q.q[s * na + a] = acc;
      best = std::max(best, acc);
    }
    v_next[s] = best;
  }
}

}  // namespace

ValueIterationResult value_iteration(const Mdp& mdp, double tolerance, std::size_t max_sweeps) {
  mdp.validate();
  if (!(tolerance > 0.0)) throw std::invalid_argument("value_iteration: tolerance must be > 0");

  ValueIterationResult res;
  res.q.n_states = mdp.n_states;
  res.q.n_actions = mdp.n_actions;
  res.q.q.assign(mdp.n_states * mdp.n_actions, 0.0);

  Vec v(mdp.n_states, 0.0);
  Vec v_next(mdp.n_states, 0.0);

  double delta = std::numeric_limits<double>::infinity();
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    bellman_backup(mdp, v, res.q, v_next);
    delta = 0.0;
    for (std::size_t s = 0; s < mdp.n_states; ++s)
      delta = std::max(delta, std::abs(v_next[s] - v[s]));
    v.swap(v_next);
    res.sweep_deltas.push_back(delta);
    ++res.sweeps;
    if (delta <= tolerance) break;
  }
  if (delta > tolerance)
    throw ValueIterationError("value_iteration: no convergence after " +
                                  std::to_string(max_sweeps) + " sweeps (residual " +
                                  format_double(delta) + ")",
                              delta);

  // Recompute Q from the converged V so the returned pair is consistent,
  // then measure the Bellman residual of V against that Q.
  bellman_backup(mdp, v, res.q, v_next);
  res.residual = 0.0;
  for (std::size_t s = 0; s < mdp.n_states; ++s)
    res.residual = std::max(res.residual, std::abs(v_next[s] - v[s]));
  res.value.values = std::move(v);
  return res;
}

std::vector<std::size_t> greedy_policy(const QFunction& q) {
  std::vector<std::size_t> actions(q.n_states, 0);
  for (std::size_t s = 0; s < q.n_states; ++s) {
    std::size_t best = 0;
    for (std::size_t a = 1; a < q.n_actions; ++a)
      if (q(s, a) > q(s, best)) best = a;
    actions[s] = best;
  }
  return actions;
}

StochasticPolicy make_stochastic_policy(const QFunction& q, double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("make_stochastic_policy: epsilon must be in (0, 1]");
  if (q.n_actions == 0 || q.q.size() != q.n_states * q.n_actions)
    throw std::invalid_argument("make_stochastic_policy: malformed Q table");
  StochasticPolicy policy;
  policy.epsilon = epsilon;
  policy.candidates.resize(q.n_states);
  Vec normalized(q.n_actions, 0.0);
  for (std::size_t s = 0; s < q.n_states; ++s) {
    double lo = q(s, 0);
    double hi = q(s, 0);
    for (std::size_t a = 1; a < q.n_actions; ++a) {
      lo = std::min(lo, q(s, a));
      hi = std::max(hi, q(s, a));
    }
    if (hi == lo) {
      // No information in this row: keep every action, uniformly.
      std::fill(normalized.begin(), normalized.end(), 1.0);
    } else {
      for (std::size_t a = 0; a < q.n_actions; ++a)
        normalized[a] = (q(s, a) - lo) / (hi - lo);
    }
    double total = 0.0;
    for (std::size_t a = 0; a < q.n_actions; ++a)
      if (normalized[a] >= epsilon) total += normalized[a];
    auto& cands = policy.candidates[s];
    for (std::size_t a = 0; a < q.n_actions; ++a)
      if (normalized[a] >= epsilon)
        cands.push_back({a, normalized[a] / total});
  }
  return policy;
}

std::size_t sample_action(const StochasticPolicy& policy, std::size_t state, Rng& rng) {
  if (state >= policy.candidates.size())
    throw std::invalid_argument("sample_action: state out of range");
  const auto& cands = policy.candidates[state];
  if (cands.empty()) throw std::logic_error("sample_action: state has no candidate actions");
  if (cands.size() == 1) return cands.front().action;
  const double u = rng.uniform();
  double cum = 0.0;
  for (const auto& c : cands) {
    cum += c.weight;
    if (u < cum) return c.action;
  }
  return cands.back().action;  // guards against rounding in the weight sum
}

nlohmann::json mdp_policy_to_json(const Mdp& mdp, const StochasticPolicy& policy) {
  nlohmann::json doc;
  doc["schema"] = 1;
  doc["n_states"] = mdp.n_states;
  doc["n_actions"] = mdp.n_actions;
  doc["gamma"] = mdp.discount;
  doc["success_state"] = mdp.success_state;
  auto transition = nlohmann::json::array();
  for (std::size_t s = 0; s < mdp.n_states; ++s) {
    auto per_action = nlohmann::json::array();
    for (std::size_t a = 0; a < mdp.n_actions; ++a) {
      auto row = nlohmann::json::array();
      for (std::size_t s2 = 0; s2 < mdp.n_states; ++s2) row.push_back(mdp.t(s, a, s2));
      per_action.push_back(std::move(row));
    }
    transition.push_back(std::move(per_action));
  }
  doc["transition"] = std::move(transition);
  nlohmann::json pol;
  pol["epsilon"] = policy.epsilon;
  auto cand_states = nlohmann::json::array();
  for (const auto& cands : policy.candidates) {
    auto list = nlohmann::json::array();
    for (const auto& c : cands) list.push_back({c.action, c.weight});
    cand_states.push_back(std::move(list));
  }
  pol["candidates"] = std::move(cand_states);
  doc["policy"] = std::move(pol);
  return doc;
}

std::pair<Mdp, StochasticPolicy> mdp_policy_from_json(const nlohmann::json& doc) {
  if (doc.at("schema").get<int>() != 1)
    throw std::runtime_error("mdp_policy_from_json: unsupported schema version");
  Mdp mdp;
  mdp.n_states = doc.at("n_states").get<std::size_t>();
  mdp.n_actions = doc.at("n_actions").get<std::size_t>();
  mdp.discount = doc.at("gamma").get<double>();
  mdp.success_state = doc.at("success_state").get<std::size_t>();
  mdp.transition.reserve(mdp.n_states * mdp.n_actions * mdp.n_states);
  const auto& transition = doc.at("transition");
  if (transition.size() != mdp.n_states)
    throw std::runtime_error("mdp_policy_from_json: transition tensor shape mismatch");
  for (const auto& per_action : transition) {
    if (per_action.size() != mdp.n_actions)
      throw std::runtime_error("mdp_policy_from_json: transition tensor shape mismatch");
    for (const auto& row : per_action) {
      if (row.size() != mdp.n_states)
        throw std::runtime_error("mdp_policy_from_json: transition tensor shape mismatch");
      for (const auto& p : row) mdp.transition.push_back(p.get<double>());
    }
  }
  mdp.reward = build_reward(mdp.n_states, mdp.n_actions, mdp.success_state);
  mdp.validate();

  StochasticPolicy policy;
  const auto& pol = doc.at("policy");
  policy.epsilon = pol.at("epsilon").get<double>();
  for (const auto& list : pol.at("candidates")) {
    std::vector<StochasticPolicy::Candidate> cands;
    for (const auto& c : list)
      cands.push_back({c.at(0).get<std::size_t>(), c.at(1).get<double>()});
    policy.candidates.push_back(std::move(cands));
  }
  if (policy.candidates.size() != mdp.n_states)
    throw std::runtime_error("mdp_policy_from_json: policy state count mismatch");
  return {std::move(mdp), std::move(policy)};
}

}  // namespace rlfit
