#include <doctest.h>

#include <cmath>

#include "rlfit/initializer.hpp"

using namespace rlfit;

namespace {

// A store whose exploration chain visits exactly the given (x, y) pairs.
EpisodeStore store_from_visits(const std::vector<std::pair<Vec, Vec>>& visits, Vec psi) {
  REQUIRE(visits.size() >= 2);
  EpisodeStore store;
  store.meta.psi = std::move(psi);
  for (std::size_t t = 0; t + 1 < visits.size(); ++t) {
    TransitionSample s;
    s.x = visits[t].first;
    s.y = visits[t].second;
    s.c = visits[t].second;
    s.x_next = visits[t + 1].first;
    s.y_next = visits[t + 1].second;
    s.c_next = visits[t + 1].second;
    s.episode = 0;
    s.step = static_cast<std::uint32_t>(t);
    s.case_id = "case";
    store.samples.push_back(std::move(s));
  }
  return store;
}

double l2(const Vec& a, const Vec& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc);
}

const Domain unit_box = {{-10.0, 10.0}, {-10.0, 10.0}};

}  // namespace

TEST_SUITE("initializer") {

TEST_CASE("outputs cluster around well-separated groups") {
  Rng data_rng(1);
  std::vector<std::pair<Vec, Vec>> visits;
  for (int i = 0; i < 60; ++i) {
    visits.push_back({{1.0, 1.0}, {5.0 + 0.01 * data_rng.uniform(), 5.0}});
    visits.push_back({{3.0, 3.0}, {-5.0 + 0.01 * data_rng.uniform(), -5.0}});
  }
  const auto store = store_from_visits(visits, {1.0, 1.0});
  Rng rng(2);
  const auto clustering = cluster_model_states(store, ConvergenceCriteria{{1.0, 1.0}}, 2, rng);
  REQUIRE(clustering.centroids.size() == 2);
  std::size_t near_pos = 0, near_neg = 0;
  for (const auto& c : clustering.centroids) {
    if (l2(c, {5.0, 5.0}) < 0.1) ++near_pos;
    if (l2(c, {-5.0, -5.0}) < 0.1) ++near_neg;
  }
  CHECK(near_pos == 1);
  CHECK(near_neg == 1);
  // the generating parameters follow their outputs
  for (std::size_t k = 0; k < 2; ++k) {
    const bool positive = l2(clustering.centroids[k], {5.0, 5.0}) < 0.1;
    for (const auto& x : clustering.member_params[k])
      CHECK(x == (positive ? Vec{1.0, 1.0} : Vec{3.0, 3.0}));
  }
}

TEST_CASE("a single cluster sits at the output mean") {
  std::vector<std::pair<Vec, Vec>> visits = {
      {{0.0, 0.0}, {1.0, 3.0}}, {{0.0, 0.0}, {2.0, 4.0}}, {{0.0, 0.0}, {3.0, 5.0}}};
  const auto store = store_from_visits(visits, {1.0, 1.0});
  Rng rng(3);
  const auto clustering = cluster_model_states(store, ConvergenceCriteria{{1.0, 1.0}}, 1, rng);
  REQUIRE(clustering.centroids.size() == 1);
  CHECK(clustering.centroids[0][0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(clustering.centroids[0][1] == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("clustering is deterministic under a fixed seed") {
  Rng data_rng(4);
  std::vector<std::pair<Vec, Vec>> visits;
  for (int i = 0; i < 50; ++i)
    visits.push_back({{data_rng.uniform(), data_rng.uniform()},
                      {data_rng.uniform(-5.0, 5.0), data_rng.uniform(-5.0, 5.0)}});
  const auto store = store_from_visits(visits, {0.5, 0.5});
  Rng a(9), b(9);
  const auto ca = cluster_model_states(store, ConvergenceCriteria{{0.5, 0.5}}, 5, a);
  const auto cb = cluster_model_states(store, ConvergenceCriteria{{0.5, 0.5}}, 5, b);
  CHECK(ca.centroids == cb.centroids);
  CHECK(ca.member_params == cb.member_params);
}

TEST_CASE("more clusters than distinct outputs is an error") {
  std::vector<std::pair<Vec, Vec>> visits = {
      {{0.0, 0.0}, {1.0, 1.0}}, {{0.0, 0.0}, {1.0, 1.0}}, {{0.0, 0.0}, {2.0, 2.0}}};
  const auto store = store_from_visits(visits, {1.0, 1.0});
  Rng rng(5);
  CHECK_THROWS_AS(cluster_model_states(store, ConvergenceCriteria{{1.0, 1.0}}, 3, rng),
                  std::runtime_error);
}

TEST_CASE("two-mode parameter population is recovered in weight order") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    std::vector<std::pair<Vec, Vec>> visits;
    for (int i = 0; i < 280; ++i)
      visits.push_back({{1.0 + 0.01 * rng.gaussian(), 1.0 + 0.01 * rng.gaussian()}, {0.0, 0.0}});
    for (int i = 0; i < 120; ++i)
      visits.push_back({{3.0 + 0.01 * rng.gaussian(), 3.0 + 0.01 * rng.gaussian()}, {0.0, 0.0}});
    const auto store = store_from_visits(visits, {0.05, 0.05});
    Rng cluster_rng(seed + 100);
    const auto clustering =
        cluster_model_states(store, ConvergenceCriteria{{0.05, 0.05}}, 1, cluster_rng);

    Rng fit_rng(seed + 200);
    const auto cands = init_candidates({{0.0, 0.0}}, clustering, unit_box, fit_rng);
    REQUIRE(cands.params.size() >= 2);
    CHECK(l2(cands.params[0], {1.0, 1.0}) < 0.05);
    CHECK(l2(cands.params[1], {3.0, 3.0}) < 0.05);
    for (std::size_t k = 1; k < cands.weights.size(); ++k)
      CHECK(cands.weights[k] <= cands.weights[k - 1]);
    double total = 0.0;
    for (double w : cands.weights) total += w;
    CHECK(std::abs(total - 1.0) <= 1e-9);
    for (const auto& x : cands.params) CHECK(in_domain(x, unit_box));
  }
}

TEST_CASE("identical parameters collapse to a single candidate") {
  std::vector<std::pair<Vec, Vec>> visits(40, {{2.0, 2.0}, {0.0, 0.0}});
  const auto store = store_from_visits(visits, {0.05, 0.05});
  Rng rng(6);
  const auto clustering =
      cluster_model_states(store, ConvergenceCriteria{{0.05, 0.05}}, 1, rng);
  const auto cands = init_candidates({{0.0, 0.0}}, clustering, unit_box, rng);
  REQUIRE(cands.params.size() == 1);
  CHECK(cands.params[0] == Vec{2.0, 2.0});
  CHECK(cands.weights[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("identical targets get identical candidates") {
  Rng data_rng(7);
  std::vector<std::pair<Vec, Vec>> visits;
  for (int i = 0; i < 100; ++i) {
    const Vec x = {data_rng.uniform(-2.0, 2.0), data_rng.uniform(-2.0, 2.0)};
    visits.push_back({x, {x[0] + x[1], x[0] - x[1]}});
  }
  const auto store = store_from_visits(visits, {0.5, 0.5});
  Rng cluster_rng(8);
  const auto clustering =
      cluster_model_states(store, ConvergenceCriteria{{0.5, 0.5}}, 10, cluster_rng);
  Rng fit_a(11), fit_b(11);
  const auto a = init_candidates({{1.0, 0.5}}, clustering, unit_box, fit_a);
  const auto b = init_candidates({{1.0, 0.5}}, clustering, unit_box, fit_b);
  CHECK(a.params == b.params);
  CHECK(a.weights == b.weights);
}

TEST_CASE("candidates from a single training case recover its parameters") {
  // one case whose outputs equal its parameters; the candidate list should
  // point back at the parameter region that produced outputs near z
  Rng data_rng(12);
  std::vector<std::pair<Vec, Vec>> visits;
  for (int i = 0; i < 200; ++i) {
    const Vec x = {1.5 + 0.02 * data_rng.gaussian(), -0.5 + 0.02 * data_rng.gaussian()};
    visits.push_back({x, x});
  }
  const auto store = store_from_visits(visits, {0.1, 0.1});
  Rng rng(13);
  const auto clustering = cluster_model_states(store, ConvergenceCriteria{{0.1, 0.1}}, 4, rng);
  const auto cands = init_candidates({{1.5, -0.5}}, clustering, unit_box, rng);
  REQUIRE(!cands.params.empty());
  CHECK(l2(cands.params[0], {1.5, -0.5}) < 0.1);
}

TEST_CASE("clustering JSON round trip") {
  Rng data_rng(14);
  std::vector<std::pair<Vec, Vec>> visits;
  for (int i = 0; i < 30; ++i)
    visits.push_back({{data_rng.uniform(), data_rng.uniform()},
                      {data_rng.uniform(-1.0, 1.0), data_rng.uniform(-1.0, 1.0)}});
  const auto store = store_from_visits(visits, {0.2, 0.2});
  Rng rng(15);
  const auto clustering = cluster_model_states(store, ConvergenceCriteria{{0.2, 0.2}}, 3, rng);
  const auto doc = nlohmann::json::parse(clustering_to_json(clustering).dump());
  const auto back = clustering_from_json(doc);
  CHECK(back.centroids == clustering.centroids);
  CHECK(back.member_params == clustering.member_params);
  CHECK(back.psi.psi == clustering.psi.psi);
}

}  // TEST_SUITE
