#include <doctest.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "rlfit/explorer.hpp"

using namespace rlfit;
namespace fs = std::filesystem;

namespace {

ModelCase test_case(double alpha, const std::string& id) {
  return make_model_case("rosenbrock", {{"alpha", alpha}}, id);
}

fs::path temp_file(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "rlfit_explorer_tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_SUITE("explorer") {

TEST_CASE("an episode has exactly n_steps chained samples") {
  const auto kase = test_case(1.0, "f0");
  const auto actions = make_action_set(2, {1, 10, 100});
  Rng rng(5);
  const auto episode =
      run_episode(*kase.model, kase.target, kase.spec, actions, 100, rng, 0, "f0");
  REQUIRE(episode.size() == 100);
  for (std::size_t t = 0; t + 1 < episode.size(); ++t) {
    CHECK(episode[t].x_next == episode[t + 1].x);
    CHECK(episode[t].y_next == episode[t + 1].y);
    CHECK(episode[t].c_next == episode[t + 1].c);
    CHECK(episode[t + 1].step == episode[t].step + 1);
  }
  for (const auto& s : episode) {
    CHECK(in_domain(s.x, kase.spec.domain));
    CHECK(in_domain(s.x_next, kase.spec.domain));
    CHECK(s.c == objectives(s.y, kase.target));
    CHECK(s.x_next == apply_action(s.x, actions.actions[s.action], kase.spec));
  }
}

TEST_CASE("a single step changes exactly one coordinate away from the boundary") {
  const auto kase = test_case(0.5, "f0");
  const auto actions = make_action_set(2, {1, 10, 100});
  Rng rng(3);
  const auto episode = run_episode(*kase.model, kase.target, kase.spec, actions, 1, rng);
  REQUIRE(episode.size() == 1);
  const auto& s = episode[0];
  REQUIRE(in_domain(s.x, {{-4.0, 4.0}, {-4.0, 4.0}}));  // interior start for this seed
  std::size_t changed = 0;
  for (std::size_t i = 0; i < 2; ++i) changed += (s.x[i] != s.x_next[i]) ? 1 : 0;
  CHECK(changed == 1);
}

TEST_CASE("episodes are bitwise reproducible under a fixed seed") {
  const auto kase = test_case(-0.3, "f1");
  const auto actions = make_action_set(2, {1, 10, 100});
  Rng a(99), b(99);
  const auto ea = run_episode(*kase.model, kase.target, kase.spec, actions, 50, a);
  const auto eb = run_episode(*kase.model, kase.target, kase.spec, actions, 50, b);
  REQUIRE(ea.size() == eb.size());
  for (std::size_t t = 0; t < ea.size(); ++t) {
    CHECK(ea[t].x == eb[t].x);
    CHECK(ea[t].action == eb[t].action);
    CHECK(ea[t].x_next == eb[t].x_next);
  }
}

TEST_CASE("explore_case sizes and substream independence") {
  const auto kase = test_case(1.2, "f2");
  const auto store = explore_case(kase, {1, 10, 100}, 10, 100, 1234);
  CHECK(store.samples.size() == 1000);
  CHECK(store.meta.n_steps == 100);
  CHECK(store.meta.model == "rosenbrock");

  const auto tiny = explore_case(kase, {1, 10, 100}, 1, 1, 1234);
  CHECK(tiny.samples.size() == 1);

  // same master seed, different case id: distinct exploration streams
  auto other = test_case(1.2, "f3");
  const auto store_b = explore_case(other, {1, 10, 100}, 10, 100, 1234);
  CHECK(store.samples.front().x != store_b.samples.front().x);

  // rerunning the same case reproduces the store exactly
  const auto again = explore_case(kase, {1, 10, 100}, 10, 100, 1234);
  for (std::size_t j = 0; j < store.samples.size(); ++j) {
    CHECK(again.samples[j].x == store.samples[j].x);
    CHECK(again.samples[j].action == store.samples[j].action);
  }
}

TEST_CASE("action draws are uniform to within three standard errors") {
  const auto kase = test_case(0.0, "f4");
  const auto actions = make_action_set(2, {1, 10, 100});
  const auto store = explore_case(kase, {1, 10, 100}, 100, 100, 77);
  REQUIRE(store.samples.size() == 10000);
  std::vector<std::size_t> counts(actions.size(), 0);
  for (const auto& s : store.samples) ++counts[s.action];
  const double n = static_cast<double>(store.samples.size());
  const double p = 1.0 / actions.size();
  const double se = std::sqrt(p * (1.0 - p) / n);
  for (std::size_t a = 0; a < counts.size(); ++a)
    CHECK(std::abs(counts[a] / n - p) <= 3.0 * se);
}

TEST_CASE("store round trip is lossless") {
  const auto kase = test_case(0.8, "f5");
  const auto store = explore_case(kase, {1, 10, 100}, 2, 25, 4242);
  const auto path = temp_file("roundtrip.episodes.jsonl");
  save_store(store, path);
  const auto loaded = load_store(path);

  CHECK(loaded.meta.model == store.meta.model);
  CHECK(loaded.meta.model_config == store.meta.model_config);
  CHECK(loaded.meta.delta == store.meta.delta);
  CHECK(loaded.meta.psi == store.meta.psi);
  CHECK(loaded.meta.multipliers == store.meta.multipliers);
  CHECK(loaded.meta.n_steps == store.meta.n_steps);
  CHECK(loaded.meta.seed == store.meta.seed);
  REQUIRE(loaded.samples.size() == store.samples.size());
  for (std::size_t j = 0; j < store.samples.size(); ++j) {
    CHECK(loaded.samples[j].x == store.samples[j].x);
    CHECK(loaded.samples[j].y == store.samples[j].y);
    CHECK(loaded.samples[j].c == store.samples[j].c);
    CHECK(loaded.samples[j].action == store.samples[j].action);
    CHECK(loaded.samples[j].x_next == store.samples[j].x_next);
    CHECK(loaded.samples[j].case_id == store.samples[j].case_id);
  }
  fs::remove(path);
}

TEST_CASE("rerunning exploration writes byte-identical store files") {
  const auto kase = test_case(-1.7, "f7");
  const auto path_a = temp_file("rerun_a.episodes.jsonl");
  const auto path_b = temp_file("rerun_b.episodes.jsonl");
  save_store(explore_case(kase, {1, 10, 100}, 3, 40, 777), path_a);
  save_store(explore_case(kase, {1, 10, 100}, 3, 40, 777), path_b);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  const auto text = slurp(path_a);
  CHECK(!text.empty());
  CHECK(text == slurp(path_b));
  fs::remove(path_a);
  fs::remove(path_b);
}

TEST_CASE("corrupt records are reported with their line number") {
  const auto kase = test_case(0.8, "f6");
  const auto store = explore_case(kase, {1, 10, 100}, 1, 5, 1);
  const auto path = temp_file("corrupt.episodes.jsonl");
  save_store(store, path);

  SUBCASE("truncated final line") {
    auto text = [&] {
      std::ifstream in(path, std::ios::binary);
      return std::string(std::istreambuf_iterator<char>(in), {});
    }();
    text.resize(text.size() - 20);
    std::ofstream(path, std::ios::binary | std::ios::trunc) << text;
    try {
      load_store(path);
      FAIL("expected a parse error");
    } catch (const std::runtime_error& err) {
      CHECK(std::string(err.what()).find("line 6") != std::string::npos);
    }
  }
  SUBCASE("unsupported schema version") {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << "{\"schema\":99}\n";
    out.close();
    CHECK_THROWS_WITH_AS(load_store(path), doctest::Contains("schema"), std::runtime_error);
  }
  fs::remove(path);
}

TEST_CASE("merge requires matching metadata") {
  const auto a = explore_case(test_case(1.0, "a"), {1, 10, 100}, 1, 5, 1);
  auto b = explore_case(test_case(2.0, "b"), {1, 10, 100}, 1, 5, 1);
  const auto merged = merge_stores(std::vector<EpisodeStore>{a, b});
  CHECK(merged.samples.size() == 10);
  CHECK(merged.meta.model_config.is_null());

  b.meta.psi = {0.1, 0.1};
  CHECK_THROWS_AS(merge_stores(std::vector<EpisodeStore>{a, b}), std::invalid_argument);
}

TEST_CASE("a hundred-thousand-sample store round-trips inside the time budget") {
  const auto kase = test_case(1.5, "big");
  auto store = explore_case(kase, {1, 10, 100}, 10, 100, 7);
  // replicate up to 1e5 samples; content volume is what matters here
  const auto base = store.samples;
  while (store.samples.size() < 100000)
    store.samples.insert(store.samples.end(), base.begin(), base.end());
  store.samples.resize(100000);

  const auto path = temp_file("large.episodes.jsonl");
  const auto start = std::chrono::steady_clock::now();
  save_store(store, path);
  const auto loaded = load_store(path);
  const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start);
  CHECK(loaded.samples.size() == 100000);
  CHECK(elapsed.count() < 5.0);
  fs::remove(path);
}

}  // TEST_SUITE
