#include <doctest.h>

#include <algorithm>

#include "rlfit/agent.hpp"

using namespace rlfit;

namespace {

// One-parameter identity model: output equals the parameter.
class IdentityModel final : public ForwardModel {
 public:
  Vec evaluate(const Vec& x) const override { return x; }
  std::size_t n_params() const override { return 1; }
  std::size_t n_objectives() const override { return 1; }
};

// Setup whose target is unreachable and whose policy walks the agent into a
// two-state loop: below the midpoint it steps up, above it steps down.
struct LoopToy {
  IdentityModel model;
  ModelSpec spec;
  Measurement target{{10.0}};
  ActionSet actions = make_action_set(1, {1});  // (+1 delta, -1 delta)
  RepresentativeStates states;
  StochasticPolicy policy;

  LoopToy() {
    spec.domain = {{0.0, 1.0}};
    spec.reference_increments = {0.1};
    spec.psi.psi = {0.05};
    // anchors plus two far states covering x < 0.5 and x > 0.5
    states.centroids = {{0.0}, {0.1}, {-0.1}, {-9.75}, {-9.25}};
    states.success_index = 0;
    states.psi = spec.psi;
    policy.epsilon = 1.0;
    policy.candidates = {
        {{0, 1.0}}, {{0, 1.0}}, {{0, 1.0}},
        {{0, 1.0}},  // low state: increment
        {{1, 1.0}},  // high state: decrement
    };
  }
};

}  // namespace

TEST_SUITE("agent") {

TEST_CASE("oscillation is a revisit within the segment") {
  const Vec a = {1.0, 2.0};
  const Vec b = {1.1, 2.0};
  const Vec c = {1.2, 2.0};
  std::vector<Vec> segment = {a, b, a};
  CHECK(detect_oscillation(segment));
  segment = {a, b, c};
  CHECK_FALSE(detect_oscillation(segment));
  // a fresh segment beginning at a previously seen vector is not a revisit
  segment = {a};
  CHECK_FALSE(detect_oscillation(segment));
  CHECK_FALSE(detect_oscillation(std::vector<Vec>{}));
}

TEST_CASE("an already-matched start succeeds after one forward run") {
  const auto kase = make_model_case("rosenbrock", {{"alpha", 1.0}}, "f");
  RepresentativeStates states;
  states.psi = kase.spec.psi;
  states.centroids = {{0.0, 0.0}, {0.1, 0.0}, {-0.1, 0.0}, {0.0, 0.1}, {0.0, -0.1}};
  states.success_index = 0;
  StochasticPolicy policy;
  policy.candidates.assign(5, {{0, 1.0}});
  const ActionSet actions = make_action_set(2, {1, 10, 100});

  PersonalizationConfig config;
  config.initial_point = Vec{1.0, 1.0};  // the exact minimum
  config.use_candidates = false;
  Rng rng(1);
  const auto res = personalize(*kase.model, kase.target, kase.spec, actions, states, policy, {},
                               config, rng);
  CHECK(res.success);
  CHECK(res.iterations_used == 1);
  CHECK(res.trace.size() == 1);
  CHECK(res.reinit_count == 0);
  CHECK_FALSE(res.trace[0].action.has_value());
  CHECK(res.final_x == Vec{1.0, 1.0});
}

TEST_CASE("looping policies trigger re-initialization") {
  LoopToy toy;
  PersonalizationConfig config;
  config.max_iterations = 40;
  InitCandidates candidates;
  candidates.params = {{0.4}};
  candidates.weights = {1.0};
  Rng rng(2);
  const auto res = personalize(toy.model, toy.target, toy.spec, toy.actions, toy.states,
                               toy.policy, candidates, config, rng);
  CHECK_FALSE(res.success);  // the target is unreachable
  CHECK(res.iterations_used == 40);
  CHECK(res.trace.size() == 40);
  CHECK(res.reinit_count >= 1);
  for (const auto& step : res.trace) CHECK(in_domain(step.x, toy.spec.domain));
}

TEST_CASE("oscillation detection off lets the loop run the budget down") {
  LoopToy toy;
  PersonalizationConfig config;
  config.max_iterations = 30;
  config.oscillation_detection = false;
  config.initial_point = Vec{0.4};
  config.use_candidates = false;
  Rng rng(3);
  const auto res = personalize(toy.model, toy.target, toy.spec, toy.actions, toy.states,
                               toy.policy, {}, config, rng);
  CHECK_FALSE(res.success);
  CHECK(res.reinit_count == 0);
  CHECK(res.iterations_used == 30);
  // the walk stays on the three lattice points around the midpoint
  std::size_t on_lattice = 0;
  for (const auto& step : res.trace)
    if (step.x == Vec{0.4} || step.x == Vec{0.5} || step.x == Vec{0.6}) ++on_lattice;
  CHECK(on_lattice == res.trace.size());
}

TEST_CASE("a forced start keeps the candidate list for later re-inits") {
  LoopToy toy;
  PersonalizationConfig config;
  config.max_iterations = 10;
  config.initial_point = Vec{0.4};
  InitCandidates candidates;
  candidates.params = {{0.77}};
  candidates.weights = {1.0};
  Rng rng(4);
  const auto res = personalize(toy.model, toy.target, toy.spec, toy.actions, toy.states,
                               toy.policy, candidates, config, rng);
  REQUIRE(res.reinit_count >= 1);
  const bool visited_candidate =
      std::any_of(res.trace.begin(), res.trace.end(),
                  [](const TraceStep& s) { return s.x == Vec{0.77}; });
  CHECK(visited_candidate);
}

TEST_CASE("runs are reproducible under a fixed seed") {
  LoopToy toy;
  PersonalizationConfig config;
  config.max_iterations = 25;
  Rng a(5), b(5);
  const auto ra = personalize(toy.model, toy.target, toy.spec, toy.actions, toy.states,
                              toy.policy, {}, config, a);
  const auto rb = personalize(toy.model, toy.target, toy.spec, toy.actions, toy.states,
                              toy.policy, {}, config, b);
  REQUIRE(ra.trace.size() == rb.trace.size());
  for (std::size_t t = 0; t < ra.trace.size(); ++t) {
    CHECK(ra.trace[t].x == rb.trace[t].x);
    CHECK(ra.trace[t].state == rb.trace[t].state);
  }
  CHECK(ra.reinit_count == rb.reinit_count);
}

TEST_CASE("result JSON carries the run verbatim") {
  LoopToy toy;
  PersonalizationConfig config;
  config.max_iterations = 8;
  Rng rng(6);
  const auto res = personalize(toy.model, toy.target, toy.spec, toy.actions, toy.states,
                               toy.policy, {}, config, rng);
  const auto doc = result_to_json(res);
  CHECK(doc.at("success").get<bool>() == res.success);
  CHECK(doc.at("iterations_used").get<std::size_t>() == res.iterations_used);
  CHECK(doc.at("trace").size() == res.trace.size());
  CHECK(doc.at("final_x").get<Vec>() == res.final_x);
  CHECK(doc.at("reinit_count").get<std::size_t>() == res.reinit_count);
}

}  // TEST_SUITE
