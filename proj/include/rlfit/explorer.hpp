#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "rlfit/forward_model.hpp"
#include "rlfit/rng.hpp"

namespace rlfit {

/// One exploration transition: parameters, model outputs and objectives
/// before and after a single action. Consecutive samples of an episode
/// chain: x_next of step k equals x of step k+1.
struct TransitionSample {
  Vec x, y, c;
  std::size_t action = 0;
  Vec x_next, y_next, c_next;
  std::uint32_t episode = 0;
  std::uint32_t step = 0;
  std::string case_id;
};

struct StoreMetadata {
  int schema = 1;
  std::string model;
  nlohmann::json model_config;  // per-case config; null for merged stores
  Domain omega;
  Vec delta;
  Vec psi;
  std::vector<int> multipliers;  // action-set magnitudes the samples refer to
  std::uint32_t n_steps = 0;
  std::uint64_t seed = 0;
};

struct EpisodeStore {
  StoreMetadata meta;
  std::vector<TransitionSample> samples;
};

/// One exploration episode under the uniform-random action policy: the
/// start point is uniform in the domain, every action is drawn uniformly,
/// and the episode always runs for the full n_steps (no early stop at
/// success).
std::vector<TransitionSample> run_episode(const ForwardModel& model, const Measurement& target,
                                          const ModelSpec& spec, const ActionSet& actions,
                                          std::uint32_t n_steps, Rng& rng,
                                          std::uint32_t episode_id = 0,
                                          const std::string& case_id = {});

/// n_episodes independent episodes for one case. Episode e runs on the
/// substream seed derived from (master_seed, hash(case_id), e), so cases
/// and episodes can be generated in any order or in parallel.
EpisodeStore explore_case(const ModelCase& kase, const std::vector<int>& multipliers,
                          std::uint32_t n_episodes, std::uint32_t n_steps,
                          std::uint64_t master_seed);

/// Concatenates stores that agree on everything except the per-case model
/// config (which becomes null in the result).
EpisodeStore merge_stores(const std::vector<const EpisodeStore*>& stores);
EpisodeStore merge_stores(const std::vector<EpisodeStore>& stores);

/// True when sample j is the last of its exploration chain, i.e. sample j+1
/// does not continue the same (case, episode, step) sequence.
bool chain_ends_at(const std::vector<TransitionSample>& samples, std::size_t j);

/// Line-delimited JSON: a header record with the metadata followed by one
/// record per sample. Numeric fields round-trip exactly.
void save_store(const EpisodeStore& store, const std::filesystem::path& path);

/// Parses a store written by save_store. Malformed or truncated records
/// raise an error naming the offending line.
EpisodeStore load_store(const std::filesystem::path& path);

}  // namespace rlfit
