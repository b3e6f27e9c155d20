#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rlfit/bundle.hpp"

namespace rlfit {

struct CaseSpec {
  std::string id;
  nlohmann::json config;
};

/// One experiment: which model family and cases to run, how much
/// exploration and training to do, and how personalization runs are
/// initialized. Parsed strictly; unknown keys are rejected.
struct ExperimentConfig {
  std::string model;
  std::vector<CaseSpec> cases;
  std::optional<Vec> psi;  // convergence criteria for models without built-in ones
  std::size_t n_states = 100;
  std::uint32_t episodes_per_case = 10;
  std::uint32_t n_steps = 100;
  double gamma = 0.99;
  double epsilon = 0.8;
  std::size_t max_iterations = 100;
  std::vector<int> action_multipliers = {1, 10, 100};
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool leave_one_out = true;
  std::optional<std::size_t> init_grid;  // grid points per parameter dimension
  bool data_driven_init = true;
  bool reinit_on_oscillation = true;
  bool baseline = false;
  std::optional<std::size_t> baseline_budget;  // defaults to max_iterations
  double vi_tolerance = 1e-9;
  std::size_t vi_max_sweeps = 100000;
};

ExperimentConfig parse_experiment_config(const nlohmann::json& doc);

/// FNV-1a of the canonical (key-sorted, compact) dump, as fixed-width hex.
std::string config_hash_hex(const nlohmann::json& doc);

/// Uniform grid over the domain with `per_dim` points per dimension
/// (interval midpoints when per_dim is 1), last dimension varying fastest.
std::vector<Vec> make_init_grid(const Domain& omega, std::size_t per_dim);

struct RunRecord {
  std::string case_id;
  Vec init;                // initial parameter vector actually used
  bool success = false;
  std::size_t iterations = 0;
  Vec final_abs_c;         // absolute objective misfits at termination
  double param_l2_error = 0.0;  // NaN when the case has no ground truth
  std::string error;       // non-empty when the run raised an exception
};

struct Aggregates {
  double success_rate = 0.0;
  double mean_iterations = 0.0;
  double std_iterations = 0.0;  // population standard deviation
  std::size_t n_rows = 0;
};

Aggregates aggregate(const std::vector<RunRecord>& rows);

struct BenchmarkResult {
  std::vector<RunRecord> agent;     // case-major, grid-cell-minor order
  std::vector<RunRecord> baseline;  // empty unless the baseline was enabled
  std::vector<Vec> grid;            // empty when runs are not grid-initialized
  std::size_t n_cases = 0;
  std::size_t n_params = 0;
  std::size_t n_objectives = 0;
  std::size_t baseline_budget = 0;
  std::string config_hash;
  bool all_runs_ok = true;  // no run raised
};

/// Full pipeline: explore every case, train (leave-one-out when enabled),
/// then personalize from every requested initialization, with the simplex
/// baseline run from the identical start points and budget when enabled.
/// Work is spread over `jobs` threads; results are deterministic for a
/// given config and seed regardless of scheduling.
BenchmarkResult run_benchmark(const ExperimentConfig& cfg, const nlohmann::json& raw_config,
                              std::size_t jobs);

/// Writes report.csv and summary.json (and grid_map.csv, baseline_report.csv
/// plus comparison.json when applicable) into `out_dir`.
void write_reports(const BenchmarkResult& result, const std::filesystem::path& out_dir);

/// Reads back a report.csv produced by write_reports.
std::vector<RunRecord> read_report_csv(const std::filesystem::path& path);

}  // namespace rlfit
