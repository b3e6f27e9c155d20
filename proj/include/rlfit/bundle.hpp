#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rlfit/explorer.hpp"
#include "rlfit/initializer.hpp"
#include "rlfit/mdp.hpp"
#include "rlfit/quantizer.hpp"

namespace rlfit {

struct TrainOptions {
  std::size_t n_states = 100;
  double gamma = 0.99;
  double epsilon = 0.8;
  double vi_tolerance = 1e-9;
  std::size_t vi_max_sweeps = 100000;
  std::uint64_t seed = 0;
};

/// Everything the on-line phase needs: the quantized state space, the
/// decision process with its value-iterated policy, and the output
/// clustering for data-driven initialization.
struct PolicyBundle {
  std::string model;
  ModelSpec spec;
  std::vector<int> multipliers;
  RepresentativeStates states;
  Mdp mdp;
  StochasticPolicy policy;
  OutputClustering clustering;

  ActionSet actions() const { return make_action_set(spec.n_params(), multipliers); }
};

/// Off-line phase over a set of exploration stores: quantize the observed
/// objective vectors, estimate the transition tensor (success state made
/// absorbing), value-iterate, derive the stochastic policy and cluster the
/// model outputs for initialization.
PolicyBundle train_bundle(const std::vector<const EpisodeStore*>& stores,
                          const TrainOptions& options);
PolicyBundle train_bundle(const std::vector<EpisodeStore>& stores, const TrainOptions& options);

void save_bundle(const PolicyBundle& bundle, const std::filesystem::path& path);
PolicyBundle load_bundle(const std::filesystem::path& path);

}  // namespace rlfit
