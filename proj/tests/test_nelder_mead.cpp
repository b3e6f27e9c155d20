#include <doctest.h>

#include <cmath>

#include "rlfit/forward_model.hpp"
#include "rlfit/nelder_mead.hpp"
#include "rlfit/quantizer.hpp"

using namespace rlfit;

TEST_SUITE("nelder_mead") {

TEST_CASE("quadratic bowl converges from anywhere in the box") {
  const Domain omega = {{-5.0, 5.0}, {-5.0, 5.0}};
  const Vec target = {1.3, -2.1};
  auto cost = [&](const Vec& x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < 2; ++i) acc += (x[i] - target[i]) * (x[i] - target[i]);
    return acc;
  };
  Rng rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const Vec x0 = {rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)};
    const auto res = nelder_mead(cost, x0, omega, 200);
    CHECK(res.evaluations <= 200);
    CHECK(std::sqrt(cost(res.x)) < 1e-3);
  }
}

TEST_CASE("a start that already satisfies the predicate costs one evaluation") {
  const Domain omega = {{-1.0, 1.0}};
  const auto res = nelder_mead([](const Vec& x) { return x[0] * x[0]; }, {0.0}, omega, 100,
                               [](const Vec& x) { return std::abs(x[0]) < 0.5; });
  CHECK(res.stopped_on_success);
  CHECK(res.evaluations == 1);
  CHECK(res.x == Vec{0.0});
}

TEST_CASE("criteria-weighted misfit drives the benchmark family to success") {
  const RosenbrockModel model(0.0);
  const ModelSpec spec = rosenbrock_spec();
  const Measurement z{{0.0, 0.0}};
  const Vec zero = {0.0, 0.0};
  auto cost = [&](const Vec& x) {
    return psi_distance(objectives(model.evaluate(x), z), zero, spec.psi);
  };
  auto done = [&](const Vec& x) { return is_success(objectives(model.evaluate(x), z), spec.psi); };
  const auto res = nelder_mead(cost, {2.0, -2.0}, spec.domain, 100, done);
  CHECK(res.stopped_on_success);
  CHECK(res.evaluations <= 100);
  // reference run of this exact configuration
  CHECK(res.evaluations == 25);
  const Vec final_c = objectives(model.evaluate(res.x), z);
  CHECK(std::abs(final_c[0]) < 0.05);
  CHECK(std::abs(final_c[1]) < 0.05);
}

TEST_CASE("the baseline budget of 50 evaluations per parameter suffices nearby") {
  const RosenbrockModel model(1.0);
  const ModelSpec spec = rosenbrock_spec();
  const Measurement z{{0.0, 0.0}};
  const Vec zero = {0.0, 0.0};
  auto cost = [&](const Vec& x) {
    return psi_distance(objectives(model.evaluate(x), z), zero, spec.psi);
  };
  auto done = [&](const Vec& x) { return is_success(objectives(model.evaluate(x), z), spec.psi); };
  const auto res = nelder_mead(cost, {-1.0, 1.0}, spec.domain, 100, done);
  CHECK(res.stopped_on_success);
  CHECK(res.evaluations <= 100);  // 50 evaluations per parameter
}

TEST_CASE("every probed point stays inside the box") {
  const Domain omega = {{-2.0, 2.0}, {0.0, 4.0}};
  std::vector<Vec> probed;
  auto cost = [&](const Vec& x) {
    probed.push_back(x);
    return -x[0] - x[1];  // pushes toward the (+,+) corner
  };
  const auto res = nelder_mead(cost, {0.0, 1.0}, omega, 120);
  CHECK(res.evaluations == 120);
  for (const auto& x : probed) CHECK(in_domain(x, omega));
  CHECK(res.x[0] == 2.0);
  CHECK(res.x[1] == 4.0);
}

TEST_CASE("the budget is a hard cap") {
  const Domain omega = {{-5.0, 5.0}};
  const auto res =
      nelder_mead([](const Vec& x) { return std::abs(x[0] - 3.0); }, {-4.0}, omega, 7);
  CHECK(res.evaluations == 7);
  CHECK_FALSE(res.stopped_on_success);
}

}  // TEST_SUITE
