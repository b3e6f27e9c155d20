#include "rlfit/bundle.hpp"

#include <fstream>

#include "rlfit/transition_estimator.hpp"

namespace rlfit {

PolicyBundle train_bundle(const std::vector<EpisodeStore>& stores, const TrainOptions& options) {
  std::vector<const EpisodeStore*> ptrs;
  ptrs.reserve(stores.size());
  for (const auto& s : stores) ptrs.push_back(&s);
  return train_bundle(ptrs, options);
}

PolicyBundle train_bundle(const std::vector<const EpisodeStore*>& stores,
                          const TrainOptions& options) {
  const EpisodeStore merged = merge_stores(stores);
  const auto& meta = merged.meta;

  PolicyBundle bundle;
  bundle.model = meta.model;
  bundle.spec.domain = meta.omega;
  bundle.spec.reference_increments = meta.delta;
  bundle.spec.psi.psi = meta.psi;
  bundle.spec.validate();
  bundle.multipliers = meta.multipliers;
  const std::size_t n_actions = bundle.actions().size();

  // Objective vectors visited by the exploration chains.
  std::vector<Vec> observed;
  observed.reserve(merged.samples.size() + stores.size());
  for (std::size_t j = 0; j < merged.samples.size(); ++j) {
    observed.push_back(merged.samples[j].c);
    if (chain_ends_at(merged.samples, j)) observed.push_back(merged.samples[j].c_next);
  }

  Rng quantize_rng(substream_seed(options.seed, fnv1a64("quantize")));
  bundle.states = build_states(observed, bundle.spec.psi, options.n_states, quantize_rng);

  const auto discretized = discretize(merged, bundle.states);
  bundle.mdp.n_states = bundle.states.n_states();
  bundle.mdp.n_actions = n_actions;
  bundle.mdp.transition = estimate_transitions(discretized, bundle.mdp.n_states, n_actions);
  bundle.mdp.discount = options.gamma;
  bundle.mdp.success_state = bundle.states.success_index;

  // The agent halts on arrival; make the success state absorbing so its
  // value is a well-defined fixed point.
  const std::size_t s_hat = bundle.mdp.success_state;
  for (std::size_t a = 0; a < n_actions; ++a) {
    const std::size_t base = (s_hat * n_actions + a) * bundle.mdp.n_states;
    for (std::size_t s2 = 0; s2 < bundle.mdp.n_states; ++s2)
      bundle.mdp.transition[base + s2] = (s2 == s_hat) ? 1.0 : 0.0;
  }

  bundle.mdp.reward = build_reward(bundle.mdp.n_states, n_actions, s_hat);
  const auto vi = value_iteration(bundle.mdp, options.vi_tolerance, options.vi_max_sweeps);
  bundle.policy = make_stochastic_policy(vi.q, options.epsilon);

  Rng cluster_rng(substream_seed(options.seed, fnv1a64("cluster")));
  bundle.clustering =
      cluster_model_states(merged, bundle.spec.psi, options.n_states, cluster_rng);
  return bundle;
}

namespace {

nlohmann::json bundle_to_json(const PolicyBundle& bundle) {
  nlohmann::json doc;
  doc["schema"] = 1;
  doc["model"] = bundle.model;
  nlohmann::json spec;
  auto omega = nlohmann::json::array();
  for (const auto& iv : bundle.spec.domain) omega.push_back({iv.lo, iv.hi});
  spec["omega"] = std::move(omega);
  spec["delta"] = bundle.spec.reference_increments;
  spec["psi"] = bundle.spec.psi.psi;
  doc["spec"] = std::move(spec);
  doc["multipliers"] = bundle.multipliers;
  doc["states"] = states_to_json(bundle.states);
  doc["mdp"] = mdp_policy_to_json(bundle.mdp, bundle.policy);
  doc["clustering"] = clustering_to_json(bundle.clustering);
  return doc;
}

PolicyBundle bundle_from_json(const nlohmann::json& doc) {
  if (doc.at("schema").get<int>() != 1)
    throw std::runtime_error("bundle_from_json: unsupported schema version");
  PolicyBundle bundle;
  bundle.model = doc.at("model").get<std::string>();
  const auto& spec = doc.at("spec");
  for (const auto& iv : spec.at("omega"))
    bundle.spec.domain.push_back({iv.at(0).get<double>(), iv.at(1).get<double>()});
  bundle.spec.reference_increments = spec.at("delta").get<Vec>();
  bundle.spec.psi.psi = spec.at("psi").get<Vec>();
  bundle.spec.validate();
  bundle.multipliers = doc.at("multipliers").get<std::vector<int>>();
  bundle.states = states_from_json(doc.at("states"));
  std::tie(bundle.mdp, bundle.policy) = mdp_policy_from_json(doc.at("mdp"));
  bundle.clustering = clustering_from_json(doc.at("clustering"));
  if (bundle.mdp.n_states != bundle.states.n_states())
    throw std::runtime_error("bundle_from_json: state count mismatch");
  if (bundle.mdp.n_actions != bundle.actions().size())
    throw std::runtime_error("bundle_from_json: action count mismatch");
  return bundle;
}

}  // namespace

void save_bundle(const PolicyBundle& bundle, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("save_bundle: cannot open " + path.string());
  out << bundle_to_json(bundle).dump() << '\n';
  out.flush();
  if (!out) throw std::runtime_error("save_bundle: write failed for " + path.string());
}

PolicyBundle load_bundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_bundle: cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& err) {
    throw std::runtime_error("load_bundle: " + path.string() + ": " + err.what());
  }
  return bundle_from_json(doc);
}

}  // namespace rlfit
