#include "rlfit/explorer.hpp"

#include <fstream>
#include <stdexcept>

namespace rlfit {

std::vector<TransitionSample> run_episode(const ForwardModel& model, const Measurement& target,
                                          const ModelSpec& spec, const ActionSet& actions,
                                          std::uint32_t n_steps, Rng& rng,
                                          std::uint32_t episode_id, const std::string& case_id) {
  if (n_steps == 0) throw std::invalid_argument("run_episode: n_steps must be at least 1");
  if (actions.actions.empty()) throw std::invalid_argument("run_episode: empty action set");

  Vec x(spec.n_params());
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = rng.uniform(spec.domain[i].lo, spec.domain[i].hi);
  Vec y = model.evaluate(x);
  Vec c = objectives(y, target);

  std::vector<TransitionSample> episode;
  episode.reserve(n_steps);
  for (std::uint32_t step = 0; step < n_steps; ++step) {
    const std::size_t a = rng.uniform_index(actions.size());
    Vec x_next = apply_action(x, actions.actions[a], spec);
    Vec y_next = model.evaluate(x_next);
    Vec c_next = objectives(y_next, target);

    TransitionSample sample;
    sample.x = x;
    sample.y = y;
    sample.c = c;
    sample.action = a;
    sample.x_next = x_next;
    sample.y_next = y_next;
    sample.c_next = c_next;
    sample.episode = episode_id;
    sample.step = step;
    sample.case_id = case_id;
    episode.push_back(std::move(sample));

    x = std::move(x_next);
    y = std::move(y_next);
    c = std::move(c_next);
  }
  return episode;
}

EpisodeStore explore_case(const ModelCase& kase, const std::vector<int>& multipliers,
                          std::uint32_t n_episodes, std::uint32_t n_steps,
                          std::uint64_t master_seed) {
  if (n_episodes == 0) throw std::invalid_argument("explore_case: n_episodes must be at least 1");
  const ActionSet actions = make_action_set(kase.spec.n_params(), multipliers);

  EpisodeStore store;
  store.meta.model = kase.model_name;
  store.meta.model_config = kase.config;
  store.meta.omega = kase.spec.domain;
  store.meta.delta = kase.spec.reference_increments;
  store.meta.psi = kase.spec.psi.psi;
  store.meta.multipliers = multipliers;
  store.meta.n_steps = n_steps;
  store.meta.seed = master_seed;

  const std::uint64_t case_salt = fnv1a64(kase.case_id);
  store.samples.reserve(static_cast<std::size_t>(n_episodes) * n_steps);
  for (std::uint32_t e = 0; e < n_episodes; ++e) {
    Rng rng(substream_seed(master_seed, case_salt, e));
    auto episode =
        run_episode(*kase.model, kase.target, kase.spec, actions, n_steps, rng, e, kase.case_id);
    for (auto& s : episode) store.samples.push_back(std::move(s));
  }
  return store;
}

namespace {

bool meta_compatible(const StoreMetadata& a, const StoreMetadata& b) {
  if (a.schema != b.schema || a.model != b.model) return false;
  if (a.delta != b.delta || a.psi != b.psi || a.multipliers != b.multipliers) return false;
  if (a.n_steps != b.n_steps) return false;
  if (a.omega.size() != b.omega.size()) return false;
  for (std::size_t i = 0; i < a.omega.size(); ++i)
    if (a.omega[i].lo != b.omega[i].lo || a.omega[i].hi != b.omega[i].hi) return false;
  return true;
}

}  // namespace

bool chain_ends_at(const std::vector<TransitionSample>& samples, std::size_t j) {
  if (j + 1 >= samples.size()) return true;
  const auto& cur = samples[j];
  const auto& next = samples[j + 1];
  return next.case_id != cur.case_id || next.episode != cur.episode ||
         next.step != cur.step + 1;
}

EpisodeStore merge_stores(const std::vector<const EpisodeStore*>& stores) {
  if (stores.empty()) throw std::invalid_argument("merge_stores: nothing to merge");
  EpisodeStore merged;
  merged.meta = stores.front()->meta;
  merged.meta.model_config = nullptr;  // per-case configs differ across a merge
  for (const auto* store : stores) {
    if (!meta_compatible(merged.meta, store->meta))
      throw std::invalid_argument("merge_stores: incompatible store metadata");
    merged.samples.insert(merged.samples.end(), store->samples.begin(), store->samples.end());
  }
  return merged;
}

EpisodeStore merge_stores(const std::vector<EpisodeStore>& stores) {
  std::vector<const EpisodeStore*> ptrs;
  ptrs.reserve(stores.size());
  for (const auto& s : stores) ptrs.push_back(&s);
  return merge_stores(ptrs);
}

namespace {

nlohmann::json meta_to_json(const StoreMetadata& meta) {
  nlohmann::json j;
  j["schema"] = meta.schema;
  j["model"] = meta.model;
  j["model_config"] = meta.model_config;
  auto omega = nlohmann::json::array();
  for (const auto& iv : meta.omega) omega.push_back({iv.lo, iv.hi});
  j["omega"] = std::move(omega);
  j["delta"] = meta.delta;
  j["psi"] = meta.psi;
  j["multipliers"] = meta.multipliers;
  j["n_steps"] = meta.n_steps;
  j["seed"] = meta.seed;
  return j;
}

StoreMetadata meta_from_json(const nlohmann::json& j) {
  StoreMetadata meta;
  meta.schema = j.at("schema").get<int>();
  if (meta.schema != 1)
    throw std::runtime_error("unsupported episode store schema version " +
                             std::to_string(meta.schema));
  meta.model = j.at("model").get<std::string>();
  meta.model_config = j.at("model_config");
  for (const auto& iv : j.at("omega"))
    meta.omega.push_back({iv.at(0).get<double>(), iv.at(1).get<double>()});
  meta.delta = j.at("delta").get<Vec>();
  meta.psi = j.at("psi").get<Vec>();
  meta.multipliers = j.at("multipliers").get<std::vector<int>>();
  meta.n_steps = j.at("n_steps").get<std::uint32_t>();
  meta.seed = j.at("seed").get<std::uint64_t>();
  return meta;
}

nlohmann::json sample_to_json(const TransitionSample& s) {
  nlohmann::json j;
  j["case"] = s.case_id;
  j["episode"] = s.episode;
  j["step"] = s.step;
  j["x"] = s.x;
  j["y"] = s.y;
  j["c"] = s.c;
  j["a"] = s.action;
  j["x1"] = s.x_next;
  j["y1"] = s.y_next;
  j["c1"] = s.c_next;
  return j;
}

TransitionSample sample_from_json(const nlohmann::json& j) {
  TransitionSample s;
  s.case_id = j.at("case").get<std::string>();
  s.episode = j.at("episode").get<std::uint32_t>();
  s.step = j.at("step").get<std::uint32_t>();
  s.x = j.at("x").get<Vec>();
  s.y = j.at("y").get<Vec>();
  s.c = j.at("c").get<Vec>();
  s.action = j.at("a").get<std::size_t>();
  s.x_next = j.at("x1").get<Vec>();
  s.y_next = j.at("y1").get<Vec>();
  s.c_next = j.at("c1").get<Vec>();
  return s;
}

}  // namespace

void save_store(const EpisodeStore& store, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("save_store: cannot open " + path.string());
  out << meta_to_json(store.meta).dump() << '\n';
  for (const auto& s : store.samples) out << sample_to_json(s).dump() << '\n';
  out.flush();
  if (!out) throw std::runtime_error("save_store: write failed for " + path.string());
}

EpisodeStore load_store(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_store: cannot open " + path.string());
  EpisodeStore store;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& err) {
      throw std::runtime_error(path.string() + ": line " + std::to_string(line_no) +
                               ": malformed record: " + err.what());
    }
    try {
      if (!have_header) {
        store.meta = meta_from_json(record);
        have_header = true;
      } else {
        store.samples.push_back(sample_from_json(record));
      }
    } catch (const nlohmann::json::exception& err) {
      throw std::runtime_error(path.string() + ": line " + std::to_string(line_no) +
                               ": invalid record: " + err.what());
    }
  }
  if (!have_header)
    throw std::runtime_error(path.string() + ": missing header record");
  return store;
}

}  // namespace rlfit
