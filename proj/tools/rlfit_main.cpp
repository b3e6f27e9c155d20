#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rlfit/agent.hpp"
#include "rlfit/benchmark.hpp"
#include "rlfit/bundle.hpp"
#include "rlfit/parallel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json load_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& err) {
    throw std::runtime_error(path.string() + ": " + err.what());
  }
  return doc;
}

struct ConfigBundle {
  json raw;
  rlfit::ExperimentConfig cfg;
};

ConfigBundle load_config(const std::string& path, const std::optional<std::uint64_t>& seed) {
  ConfigBundle out;
  out.raw = load_json_file(path);
  if (seed) out.raw["seed"] = *seed;  // the override is part of the effective config
  out.cfg = rlfit::parse_experiment_config(out.raw);
  return out;
}

const rlfit::CaseSpec& find_case(const rlfit::ExperimentConfig& cfg, const std::string& id) {
  for (const auto& spec : cfg.cases)
    if (spec.id == id) return spec;
  throw std::runtime_error("case '" + id + "' not found in config");
}

fs::path store_path(const fs::path& dir, const std::string& case_id) {
  return dir / (case_id + ".episodes.jsonl");
}

rlfit::Vec parse_point(const std::string& text) {
  rlfit::Vec x;
  std::stringstream ss(text);
  std::string field;
  while (std::getline(ss, field, ',')) {
    std::size_t used = 0;
    x.push_back(std::stod(field, &used));
    if (used != field.size()) throw std::runtime_error("bad coordinate '" + field + "'");
  }
  if (x.empty()) throw std::runtime_error("--init needs at least one coordinate");
  return x;
}

rlfit::TrainOptions train_options(const rlfit::ExperimentConfig& cfg,
                                  const std::string& hold_out) {
  rlfit::TrainOptions opts;
  opts.n_states = cfg.n_states;
  opts.gamma = cfg.gamma;
  opts.epsilon = cfg.epsilon;
  opts.vi_tolerance = cfg.vi_tolerance;
  opts.vi_max_sweeps = cfg.vi_max_sweeps;
  opts.seed = rlfit::substream_seed(cfg.seed, rlfit::fnv1a64("train"),
                                    rlfit::fnv1a64(hold_out.empty() ? "all" : hold_out));
  return opts;
}

int cmd_explore(const std::string& config_path, const std::optional<std::uint64_t>& seed,
                const std::string& out_dir, std::size_t jobs) {
  const auto [raw, cfg] = load_config(config_path, seed);
  if (!cfg.seed_set) throw std::runtime_error("explore: a seed is required");
  fs::create_directories(out_dir);
  rlfit::parallel_for(cfg.cases.size(), jobs, [&](std::size_t i) {
    const auto& spec = cfg.cases[i];
    const auto kase = rlfit::make_model_case(cfg.model, spec.config, spec.id, cfg.psi);
    const auto store = rlfit::explore_case(kase, cfg.action_multipliers, cfg.episodes_per_case,
                                           cfg.n_steps, cfg.seed);
    rlfit::save_store(store, store_path(out_dir, spec.id));
  });
  std::cout << "wrote " << cfg.cases.size() << " episode stores to " << out_dir << "\n";
  return 0;
}

int cmd_train(const std::string& config_path, const std::optional<std::uint64_t>& seed,
              const std::string& stores_dir, const std::string& hold_out,
              const std::string& out_file) {
  const auto [raw, cfg] = load_config(config_path, seed);
  if (!cfg.seed_set) throw std::runtime_error("train: a seed is required");
  if (!hold_out.empty()) find_case(cfg, hold_out);  // fail fast on unknown id
  std::vector<rlfit::EpisodeStore> stores;
  for (const auto& spec : cfg.cases) {
    if (spec.id == hold_out) continue;
    stores.push_back(rlfit::load_store(store_path(stores_dir, spec.id)));
  }
  if (stores.empty()) throw std::runtime_error("train: no training cases left");
  const auto bundle = rlfit::train_bundle(stores, train_options(cfg, hold_out));
  rlfit::save_bundle(bundle, out_file);
  std::cout << "wrote policy bundle " << out_file << " (" << bundle.states.n_states()
            << " states, " << bundle.actions().size() << " actions)\n";
  return 0;
}

int cmd_personalize(const std::string& config_path, const std::optional<std::uint64_t>& seed,
                    const std::string& bundle_path, const std::string& case_id,
                    const std::string& init_text, std::optional<std::size_t> max_iterations,
                    const std::string& out_file) {
  const auto [raw, cfg] = load_config(config_path, seed);
  if (!cfg.seed_set) throw std::runtime_error("personalize: a seed is required");
  const auto& spec = find_case(cfg, case_id);
  const auto kase = rlfit::make_model_case(cfg.model, spec.config, spec.id, cfg.psi);
  const auto bundle = rlfit::load_bundle(bundle_path);
  if (bundle.model != cfg.model)
    throw std::runtime_error("personalize: bundle was trained for model '" + bundle.model + "'");
  if (bundle.spec.psi.psi != kase.spec.psi.psi)
    throw std::runtime_error("personalize: bundle and case use different convergence criteria");
  bool same_domain = bundle.spec.domain.size() == kase.spec.domain.size();
  for (std::size_t i = 0; same_domain && i < kase.spec.domain.size(); ++i)
    same_domain = bundle.spec.domain[i].lo == kase.spec.domain[i].lo &&
                  bundle.spec.domain[i].hi == kase.spec.domain[i].hi;
  if (!same_domain || bundle.spec.reference_increments != kase.spec.reference_increments)
    throw std::runtime_error("personalize: bundle and case describe different parameter spaces");

  rlfit::PersonalizationConfig pcfg;
  pcfg.max_iterations = max_iterations.value_or(cfg.max_iterations);
  pcfg.epsilon = cfg.epsilon;

  rlfit::InitCandidates candidates;
  if (!init_text.empty()) {
    // A forced start point runs the bare policy: no data-driven candidates,
    // no re-initialization on oscillation.
    pcfg.initial_point = parse_point(init_text);
    pcfg.use_candidates = false;
    pcfg.oscillation_detection = false;
  } else {
    rlfit::Rng rng(
        rlfit::substream_seed(cfg.seed, rlfit::fnv1a64("init"), rlfit::fnv1a64(case_id)));
    candidates =
        rlfit::init_candidates(kase.target, bundle.clustering, kase.spec.domain, rng);
  }

  rlfit::Rng rng(rlfit::substream_seed(cfg.seed, rlfit::fnv1a64("run:" + case_id), 0));
  const auto result =
      rlfit::personalize(*kase.model, kase.target, kase.spec, bundle.actions(), bundle.states,
                         bundle.policy, candidates, pcfg, rng);

  json doc = rlfit::result_to_json(result);
  doc["case_id"] = case_id;
  doc["seed"] = cfg.seed;
  std::ofstream out(out_file, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + out_file);
  out << doc.dump(2) << '\n';
  std::cout << (result.success ? "success" : "failure") << " after " << result.iterations_used
            << " forward runs; result written to " << out_file << "\n";
  return 0;
}

int cmd_benchmark(const std::string& config_path, const std::optional<std::uint64_t>& seed,
                  const std::string& out_dir, std::size_t jobs) {
  const auto [raw, cfg] = load_config(config_path, seed);
  const auto result = rlfit::run_benchmark(cfg, raw, jobs);
  rlfit::write_reports(result, out_dir);
  const auto agg = rlfit::aggregate(result.agent);
  std::cout << "agent: " << agg.n_rows << " runs, success rate "
            << rlfit::format_double(agg.success_rate) << ", mean iterations "
            << rlfit::format_double(agg.mean_iterations) << "\n";
  if (!result.baseline.empty()) {
    const auto base = rlfit::aggregate(result.baseline);
    std::cout << "baseline: success rate " << rlfit::format_double(base.success_rate)
              << ", mean iterations " << rlfit::format_double(base.mean_iterations) << "\n";
  }
  std::cout << "reports written to " << out_dir << "\n";
  if (!result.all_runs_ok) {
    std::cerr << "some runs failed to execute; see nan markers in report.csv\n";
    return 1;
  }
  return 0;
}

int cmd_report(const std::string& in_dir) {
  const auto rows = rlfit::read_report_csv(fs::path(in_dir) / "report.csv");
  const auto agg = rlfit::aggregate(rows);
  json out;
  out["success_rate"] = agg.success_rate;
  out["mean_iterations"] = agg.mean_iterations;
  out["std_iterations"] = agg.std_iterations;
  out["n_rows"] = agg.n_rows;
  std::cout << out.dump(2) << "\n";

  const fs::path summary_path = fs::path(in_dir) / "summary.json";
  if (fs::exists(summary_path)) {
    const json summary = load_json_file(summary_path);
    for (const char* key : {"success_rate", "mean_iterations", "std_iterations"}) {
      if (summary.at(key).get<double>() != out.at(key).get<double>()) {
        std::cerr << "summary.json disagrees with report.csv on '" << key << "'\n";
        return 1;
      }
    }
    std::cout << "summary.json matches the recomputed aggregates\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reinforcement-learning parameter estimation for black-box forward models"};
  app.require_subcommand(1);

  std::string config_path, out_path, stores_dir, hold_out, bundle_path, case_id, init_text,
      in_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> max_iterations;
  std::size_t jobs = 1;

  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Master seed (overrides the config)");
  };

  auto* explore = app.add_subcommand("explore", "Generate exploration episodes for every case");
  explore->add_option("--config", config_path, "Experiment config JSON")->required();
  explore->add_option("--out", out_path, "Output directory")->required();
  explore->add_option("--jobs", jobs, "Worker threads");
  add_seed(explore);

  auto* train = app.add_subcommand("train", "Quantize, estimate transitions and value-iterate");
  train->add_option("--config", config_path, "Experiment config JSON")->required();
  train->add_option("--stores", stores_dir, "Directory with .episodes.jsonl files")->required();
  train->add_option("--hold-out", hold_out, "Case id to exclude (leave-one-out)");
  train->add_option("--out", out_path, "Bundle file to write")->required();
  add_seed(train);

  auto* personalize = app.add_subcommand("personalize", "Run the agent on one case");
  personalize->add_option("--config", config_path, "Experiment config JSON")->required();
  personalize->add_option("--bundle", bundle_path, "Trained policy bundle")->required();
  personalize->add_option("--case", case_id, "Case id from the config")->required();
  personalize->add_option("--init", init_text,
                          "Comma-separated start point; disables data-driven init and re-init");
  personalize->add_option("--max-iterations", max_iterations, "Forward-run budget override");
  personalize->add_option("--out", out_path, "Result JSON file")->required();
  add_seed(personalize);

  auto* benchmark = app.add_subcommand("benchmark", "Full cross-validated benchmark");
  benchmark->add_option("--config", config_path, "Experiment config JSON")->required();
  benchmark->add_option("--out", out_path, "Report directory")->required();
  benchmark->add_option("--jobs", jobs, "Worker threads");
  add_seed(benchmark);

  auto* report = app.add_subcommand("report", "Recompute aggregates from report.csv");
  report->add_option("--in", in_dir, "Directory containing report.csv")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (explore->parsed()) return cmd_explore(config_path, seed, out_path, jobs);
    if (train->parsed()) return cmd_train(config_path, seed, stores_dir, hold_out, out_path);
    if (personalize->parsed())
      return cmd_personalize(config_path, seed, bundle_path, case_id, init_text, max_iterations,
                             out_path);
    if (benchmark->parsed()) return cmd_benchmark(config_path, seed, out_path, jobs);
    if (report->parsed()) return cmd_report(in_dir);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
