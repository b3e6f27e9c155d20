#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "rlfit/transition_estimator.hpp"

using namespace rlfit;

namespace {

RepresentativeStates tiny_states() {
  // anchors only: origin plus +-0.1 per axis, criteria 0.05
  RepresentativeStates states;
  states.psi.psi = {0.05, 0.05};
  states.centroids = {{0.0, 0.0}, {0.1, 0.0}, {-0.1, 0.0}, {0.0, 0.1}, {0.0, -0.1}};
  states.success_index = 0;
  return states;
}

EpisodeStore store_with(const std::vector<TransitionSample>& samples) {
  EpisodeStore store;
  store.meta.psi = {0.05, 0.05};
  store.samples = samples;
  return store;
}

TransitionSample sample(Vec c, std::size_t action, Vec c_next) {
  TransitionSample s;
  s.c = std::move(c);
  s.c_next = std::move(c_next);
  s.action = action;
  return s;
}

}  // namespace

TEST_SUITE("transition_estimator") {

TEST_CASE("discretize maps objective vectors through the states") {
  const auto states = tiny_states();
  const auto store = store_with({
      sample({0.01, -0.02}, 2, {0.09, 0.0}),   // success box -> +x anchor
      sample({0.3, 0.3}, 0, {0.3, 0.3}),       // unchanged objectives keep the state
  });
  const auto d = discretize(store, states);
  REQUIRE(d.size() == 2);
  CHECK(d[0].state == states.success_index);
  CHECK(d[0].action == 2);
  CHECK(d[0].next_state == 1);
  CHECK(d[1].state == d[1].next_state);

  CHECK(discretize(store_with({}), states).empty());

  auto mismatched = store;
  mismatched.meta.psi = {0.1, 0.1};
  CHECK_THROWS_AS(discretize(mismatched, states), std::invalid_argument);
}

TEST_CASE("observed frequencies become transition probabilities") {
  std::vector<DiscretizedTransition> obs = {
      {0, 1, 1}, {0, 1, 1}, {0, 1, 1}, {0, 1, 2},  // (0,1): 3x to 1, 1x to 2
  };
  const auto t = estimate_transitions(obs, 3, 2);
  CHECK(t[(0 * 2 + 1) * 3 + 1] == 0.75);
  CHECK(t[(0 * 2 + 1) * 3 + 2] == 0.25);
  CHECK(t[(0 * 2 + 1) * 3 + 0] == 0.0);
}

TEST_CASE("unseen state-action rows are exactly uniform") {
  const auto t = estimate_transitions({}, 120, 2);
  for (double p : t) CHECK(p == 1.0 / 120.0);
}

TEST_CASE("a single observation concentrates the row") {
  const auto t = estimate_transitions({{2, 0, 1}}, 3, 1);
  CHECK(t[2 * 3 + 1] == 1.0);
  CHECK(t[2 * 3 + 0] == 0.0);
  CHECK(t[2 * 3 + 2] == 0.0);
}

TEST_CASE("every row is stochastic") {
  Rng rng(55);
  std::vector<DiscretizedTransition> obs;
  for (int i = 0; i < 5000; ++i)
    obs.push_back({static_cast<std::uint32_t>(rng.uniform_index(7)),
                   static_cast<std::uint32_t>(rng.uniform_index(3)),
                   static_cast<std::uint32_t>(rng.uniform_index(7))});
  const auto t = estimate_transitions(obs, 7, 3);
  for (std::size_t s = 0; s < 7; ++s) {
    for (std::size_t a = 0; a < 3; ++a) {
      double sum = 0.0;
      for (std::size_t s2 = 0; s2 < 7; ++s2) sum += t[(s * 3 + a) * 7 + s2];
      CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("estimation is bitwise invariant to sample order") {
  Rng rng(56);
  std::vector<DiscretizedTransition> obs;
  for (int i = 0; i < 2000; ++i)
    obs.push_back({static_cast<std::uint32_t>(rng.uniform_index(5)),
                   static_cast<std::uint32_t>(rng.uniform_index(2)),
                   static_cast<std::uint32_t>(rng.uniform_index(5))});
  const auto forward = estimate_transitions(obs, 5, 2);

  auto shuffled = obs;
  for (std::size_t j = shuffled.size(); j > 1; --j)
    std::swap(shuffled[j - 1], shuffled[rng.uniform_index(j)]);
  CHECK(estimate_transitions(shuffled, 5, 2) == forward);

  std::reverse(shuffled.begin(), shuffled.end());
  CHECK(estimate_transitions(shuffled, 5, 2) == forward);
}

TEST_CASE("counting over a concatenation equals counting the parts together") {
  Rng rng(57);
  std::vector<DiscretizedTransition> a, b;
  for (int i = 0; i < 500; ++i) {
    a.push_back({static_cast<std::uint32_t>(rng.uniform_index(4)), 0,
                 static_cast<std::uint32_t>(rng.uniform_index(4))});
    b.push_back({static_cast<std::uint32_t>(rng.uniform_index(4)), 0,
                 static_cast<std::uint32_t>(rng.uniform_index(4))});
  }
  std::vector<DiscretizedTransition> both = a;
  both.insert(both.end(), b.begin(), b.end());
  std::vector<DiscretizedTransition> swapped = b;
  swapped.insert(swapped.end(), a.begin(), a.end());
  CHECK(estimate_transitions(both, 4, 1) == estimate_transitions(swapped, 4, 1));
}

}  // TEST_SUITE
