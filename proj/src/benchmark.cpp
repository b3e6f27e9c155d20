#include "rlfit/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <set>
#include <sstream>

#include "rlfit/agent.hpp"
#include "rlfit/nelder_mead.hpp"
#include "rlfit/parallel.hpp"

namespace rlfit {

namespace {

void reject_unknown_keys(const nlohmann::json& doc, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, _] : doc.items())
    if (!allowed.count(key))
      throw std::invalid_argument(where + ": unknown key '" + key + "'");
}

}  // namespace

ExperimentConfig parse_experiment_config(const nlohmann::json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("experiment config: expected a JSON object");
  reject_unknown_keys(doc,
                      {"model", "cases", "psi", "n_states", "episodes_per_case", "n_steps",
                       "gamma", "epsilon", "max_iterations", "action_multipliers", "seed",
                       "leave_one_out", "init_grid", "data_driven_init",
                       "reinit_on_oscillation", "baseline", "baseline_budget", "vi_tolerance",
                       "vi_max_sweeps"},
                      "experiment config");

  ExperimentConfig cfg;
  cfg.model = doc.at("model").get<std::string>();
  if (!doc.contains("cases") || !doc.at("cases").is_array() || doc.at("cases").empty())
    throw std::invalid_argument("experiment config: 'cases' must be a non-empty array");
  std::set<std::string> ids;
  for (const auto& entry : doc.at("cases")) {
    reject_unknown_keys(entry, {"id", "config"}, "experiment config case");
    CaseSpec spec;
    spec.id = entry.at("id").get<std::string>();
    if (spec.id.empty() || spec.id.find_first_of(",\"\n") != std::string::npos)
      throw std::invalid_argument("experiment config: case id '" + spec.id +
                                  "' is empty or contains reserved characters");
    if (!ids.insert(spec.id).second)
      throw std::invalid_argument("experiment config: duplicate case id '" + spec.id + "'");
    spec.config = entry.at("config");
    cfg.cases.push_back(std::move(spec));
  }
  if (doc.contains("psi")) cfg.psi = doc.at("psi").get<Vec>();
  if (doc.contains("n_states")) cfg.n_states = doc.at("n_states").get<std::size_t>();
  if (doc.contains("episodes_per_case"))
    cfg.episodes_per_case = doc.at("episodes_per_case").get<std::uint32_t>();
  if (doc.contains("n_steps")) cfg.n_steps = doc.at("n_steps").get<std::uint32_t>();
  if (doc.contains("gamma")) cfg.gamma = doc.at("gamma").get<double>();
  if (doc.contains("epsilon")) cfg.epsilon = doc.at("epsilon").get<double>();
  if (doc.contains("max_iterations"))
    cfg.max_iterations = doc.at("max_iterations").get<std::size_t>();
  if (doc.contains("action_multipliers"))
    cfg.action_multipliers = doc.at("action_multipliers").get<std::vector<int>>();
  if (doc.contains("seed")) {
    cfg.seed = doc.at("seed").get<std::uint64_t>();
    cfg.seed_set = true;
  }
  if (doc.contains("leave_one_out")) cfg.leave_one_out = doc.at("leave_one_out").get<bool>();
  if (doc.contains("init_grid")) {
    const auto per_dim = doc.at("init_grid").get<std::size_t>();
    if (per_dim == 0)
      throw std::invalid_argument("experiment config: init_grid must be at least 1");
    cfg.init_grid = per_dim;
  }
  if (doc.contains("data_driven_init"))
    cfg.data_driven_init = doc.at("data_driven_init").get<bool>();
  if (doc.contains("reinit_on_oscillation"))
    cfg.reinit_on_oscillation = doc.at("reinit_on_oscillation").get<bool>();
  if (doc.contains("baseline")) cfg.baseline = doc.at("baseline").get<bool>();
  if (doc.contains("baseline_budget"))
    cfg.baseline_budget = doc.at("baseline_budget").get<std::size_t>();
  if (doc.contains("vi_tolerance")) cfg.vi_tolerance = doc.at("vi_tolerance").get<double>();
  if (doc.contains("vi_max_sweeps"))
    cfg.vi_max_sweeps = doc.at("vi_max_sweeps").get<std::size_t>();
  if (!(cfg.epsilon > 0.0 && cfg.epsilon <= 1.0))
    throw std::invalid_argument("experiment config: epsilon must be in (0, 1]");
  if (cfg.max_iterations == 0)
    throw std::invalid_argument("experiment config: max_iterations must be at least 1");
  return cfg;
}

std::string config_hash_hex(const nlohmann::json& doc) {
  const std::uint64_t h = fnv1a64(doc.dump());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

std::vector<Vec> make_init_grid(const Domain& omega, std::size_t per_dim) {
  if (per_dim == 0) throw std::invalid_argument("make_init_grid: per_dim must be at least 1");
  const std::size_t dim = omega.size();
  std::size_t total = 1;
  for (std::size_t i = 0; i < dim; ++i) {
    if (total > 1000000 / per_dim)
      throw std::invalid_argument("make_init_grid: grid too large");
    total *= per_dim;
  }
  std::vector<Vec> grid(total, Vec(dim, 0.0));
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    for (std::size_t i = dim; i-- > 0;) {
      const std::size_t k = rest % per_dim;
      rest /= per_dim;
      grid[idx][i] = per_dim == 1
                         ? 0.5 * (omega[i].lo + omega[i].hi)
                         : omega[i].lo + omega[i].width() * static_cast<double>(k) /
                                             static_cast<double>(per_dim - 1);
    }
  }
  return grid;
}

Aggregates aggregate(const std::vector<RunRecord>& rows) {
  Aggregates agg;
  agg.n_rows = rows.size();
  if (rows.empty()) return agg;
  std::size_t successes = 0;
  double sum = 0.0;
  for (const auto& row : rows) {
    successes += row.success ? 1 : 0;
    sum += static_cast<double>(row.iterations);
  }
  agg.success_rate = static_cast<double>(successes) / rows.size();
  agg.mean_iterations = sum / rows.size();
  double var = 0.0;
  for (const auto& row : rows) {
    const double d = static_cast<double>(row.iterations) - agg.mean_iterations;
    var += d * d;
  }
  agg.std_iterations = std::sqrt(var / rows.size());
  return agg;
}

namespace {

double l2_error(const Vec& x, const Vec& truth) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - truth[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

RunRecord make_record(const ModelCase& kase, const Vec& init, bool success,
                      std::size_t iterations, const Vec& final_c, const Vec& final_x) {
  RunRecord row;
  row.case_id = kase.case_id;
  row.init = init;
  row.success = success;
  row.iterations = iterations;
  row.final_abs_c.resize(final_c.size());
  for (std::size_t i = 0; i < final_c.size(); ++i) row.final_abs_c[i] = std::abs(final_c[i]);
  row.param_l2_error = kase.ground_truth ? l2_error(final_x, *kase.ground_truth)
                                         : std::numeric_limits<double>::quiet_NaN();
  return row;
}

}  // namespace

BenchmarkResult run_benchmark(const ExperimentConfig& cfg, const nlohmann::json& raw_config,
                              std::size_t jobs) {
  if (!cfg.seed_set)
    throw std::invalid_argument("benchmark: a seed is required (config key or --seed)");
  jobs = std::max<std::size_t>(1, jobs);

  std::vector<ModelCase> cases;
  cases.reserve(cfg.cases.size());
  for (const auto& spec : cfg.cases)
    cases.push_back(make_model_case(cfg.model, spec.config, spec.id, cfg.psi));
  const std::size_t n_cases = cases.size();

  BenchmarkResult result;
  result.n_cases = n_cases;
  result.n_params = cases.front().spec.n_params();
  result.n_objectives = cases.front().spec.n_objectives();
  result.config_hash = config_hash_hex(raw_config);

  // Off-line phase: exploration, then per-case training and initialization
  // candidates. Every stage draws from its own substream of the master seed.
  std::vector<EpisodeStore> stores(n_cases);
  parallel_for(n_cases, jobs, [&](std::size_t i) {
    stores[i] =
        explore_case(cases[i], cfg.action_multipliers, cfg.episodes_per_case, cfg.n_steps,
                     cfg.seed);
  });

  TrainOptions opts;
  opts.n_states = cfg.n_states;
  opts.gamma = cfg.gamma;
  opts.epsilon = cfg.epsilon;
  opts.vi_tolerance = cfg.vi_tolerance;
  opts.vi_max_sweeps = cfg.vi_max_sweeps;

  std::vector<std::shared_ptr<const PolicyBundle>> bundles(n_cases);
  if (cfg.leave_one_out && n_cases > 1) {
    parallel_for(n_cases, jobs, [&](std::size_t i) {
      std::vector<const EpisodeStore*> training;
      training.reserve(n_cases - 1);
      for (std::size_t k = 0; k < n_cases; ++k)
        if (k != i) training.push_back(&stores[k]);
      TrainOptions local = opts;
      local.seed = substream_seed(cfg.seed, fnv1a64("train"), fnv1a64(cases[i].case_id));
      bundles[i] = std::make_shared<const PolicyBundle>(train_bundle(training, local));
    });
  } else {
    std::vector<const EpisodeStore*> training;
    training.reserve(n_cases);
    for (const auto& s : stores) training.push_back(&s);
    TrainOptions local = opts;
    local.seed = substream_seed(cfg.seed, fnv1a64("train"), fnv1a64("all"));
    auto shared = std::make_shared<const PolicyBundle>(train_bundle(training, local));
    for (auto& b : bundles) b = shared;
  }

  std::vector<InitCandidates> candidates(n_cases);
  if (cfg.data_driven_init) {
    parallel_for(n_cases, jobs, [&](std::size_t i) {
      Rng rng(substream_seed(cfg.seed, fnv1a64("init"), fnv1a64(cases[i].case_id)));
      candidates[i] =
          init_candidates(cases[i].target, bundles[i]->clustering, cases[i].spec.domain, rng);
    });
  }

  std::vector<Vec> grid;
  if (cfg.init_grid) grid = make_init_grid(cases.front().spec.domain, *cfg.init_grid);
  result.grid = grid;
  const std::size_t cells = grid.empty() ? 1 : grid.size();
  const std::size_t total = n_cases * cells;
  result.agent.resize(total);
  if (cfg.baseline) result.baseline.resize(total);
  result.baseline_budget = cfg.baseline_budget.value_or(cfg.max_iterations);

  std::atomic<bool> all_ok{true};
  parallel_for(total, jobs, [&](std::size_t t) {
    const std::size_t i = t / cells;
    const std::size_t cell = t % cells;
    const ModelCase& kase = cases[i];
    const PolicyBundle& bundle = *bundles[i];
    const ActionSet actions = bundle.actions();

    PersonalizationConfig pcfg;
    pcfg.max_iterations = cfg.max_iterations;
    pcfg.epsilon = cfg.epsilon;
    pcfg.oscillation_detection = cfg.reinit_on_oscillation;
    pcfg.use_candidates = cfg.data_driven_init;
    if (!grid.empty()) pcfg.initial_point = grid[cell];

    try {
      Rng rng(substream_seed(cfg.seed, fnv1a64("run:" + kase.case_id), cell));
      const PersonalizationResult res =
          personalize(*kase.model, kase.target, kase.spec, actions, bundle.states, bundle.policy,
                      candidates[i], pcfg, rng);
      result.agent[t] = make_record(kase, res.trace.front().x, res.success, res.iterations_used,
                                    res.final_c, res.final_x);
    } catch (const std::exception& err) {
      result.agent[t].case_id = kase.case_id;
      result.agent[t].init = pcfg.initial_point.value_or(Vec{});
      result.agent[t].iterations = 0;
      result.agent[t].final_abs_c.assign(kase.spec.n_objectives(),
                                         std::numeric_limits<double>::quiet_NaN());
      result.agent[t].param_l2_error = std::numeric_limits<double>::quiet_NaN();
      result.agent[t].error = err.what();
      all_ok = false;
    }

    if (!cfg.baseline) return;
    try {
      // Same start point, same success predicate, same evaluation budget.
      const Vec x0 = result.agent[t].init;
      const Vec zero(kase.spec.n_objectives(), 0.0);
      Vec cached_x, cached_c;
      auto misfit = [&](const Vec& x) {
        cached_x = x;
        cached_c = objectives(kase.model->evaluate(x), kase.target);
        return psi_distance(cached_c, zero, kase.spec.psi);
      };
      auto succeeded = [&](const Vec& x) {
        const Vec& c =
            (x == cached_x) ? cached_c : objectives(kase.model->evaluate(x), kase.target);
        return is_success(c, kase.spec.psi);
      };
      const NelderMeadResult nm =
          nelder_mead(misfit, x0, kase.spec.domain, result.baseline_budget, succeeded);
      const Vec final_c = objectives(kase.model->evaluate(nm.x), kase.target);
      result.baseline[t] =
          make_record(kase, x0, nm.stopped_on_success, nm.evaluations, final_c, nm.x);
    } catch (const std::exception& err) {
      result.baseline[t].case_id = kase.case_id;
      result.baseline[t].init = result.agent[t].init;
      result.baseline[t].final_abs_c.assign(kase.spec.n_objectives(),
                                            std::numeric_limits<double>::quiet_NaN());
      result.baseline[t].param_l2_error = std::numeric_limits<double>::quiet_NaN();
      result.baseline[t].error = err.what();
      all_ok = false;
    }
  });
  result.all_runs_ok = all_ok;
  return result;
}

namespace {

void write_csv_rows(std::ostream& out, const std::vector<RunRecord>& rows,
                    std::size_t n_params, std::size_t n_objectives) {
  out << "case_id";
  for (std::size_t i = 1; i <= n_params; ++i) out << ",init_x" << i;
  out << ",success,iterations";
  for (std::size_t i = 1; i <= n_objectives; ++i) out << ",final_abs_c" << i;
  out << ",param_l2_error\n";
  for (const auto& row : rows) {
    out << row.case_id;
    for (std::size_t i = 0; i < n_params; ++i)
      out << ',' << (i < row.init.size() ? format_double(row.init[i]) : "nan");
    out << ',' << (row.success ? 1 : 0) << ',' << row.iterations;
    for (std::size_t i = 0; i < n_objectives; ++i)
      out << ',' << (i < row.final_abs_c.size() ? format_double(row.final_abs_c[i]) : "nan");
    out << ',' << format_double(row.param_l2_error) << '\n';
  }
}

nlohmann::json aggregates_to_json(const Aggregates& agg) {
  nlohmann::json j;
  j["success_rate"] = agg.success_rate;
  j["mean_iterations"] = agg.mean_iterations;
  j["std_iterations"] = agg.std_iterations;
  return j;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

void write_reports(const BenchmarkResult& result, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);

  {
    auto out = open_out(out_dir / "report.csv");
    write_csv_rows(out, result.agent, result.n_params, result.n_objectives);
  }
  {
    const Aggregates agg = aggregate(result.agent);
    nlohmann::json summary;
    summary["success_rate"] = agg.success_rate;
    summary["mean_iterations"] = agg.mean_iterations;
    summary["std_iterations"] = agg.std_iterations;
    summary["n_cases"] = result.n_cases;
    summary["config_hash"] = result.config_hash;
    auto out = open_out(out_dir / "summary.json");
    out << summary.dump(2) << '\n';
  }
  if (!result.grid.empty()) {
    auto out = open_out(out_dir / "grid_map.csv");
    const std::size_t cells = result.grid.size();
    for (std::size_t i = 1; i <= result.n_params; ++i) out << (i == 1 ? "" : ",") << "init_x" << i;
    out << ",max_param_l2_error,n_runs,n_failures\n";
    for (std::size_t cell = 0; cell < cells; ++cell) {
      double max_err = std::numeric_limits<double>::quiet_NaN();
      std::size_t n_runs = 0;
      std::size_t n_failures = 0;
      for (std::size_t t = cell; t < result.agent.size(); t += cells) {
        const auto& row = result.agent[t];
        ++n_runs;
        if (!row.success) ++n_failures;
        if (!std::isnan(row.param_l2_error) &&
            (std::isnan(max_err) || row.param_l2_error > max_err))
          max_err = row.param_l2_error;
      }
      for (std::size_t i = 0; i < result.n_params; ++i)
        out << (i == 0 ? "" : ",") << format_double(result.grid[cell][i]);
      out << ',' << format_double(max_err) << ',' << n_runs << ',' << n_failures << '\n';
    }
  }
  if (!result.baseline.empty()) {
    {
      auto out = open_out(out_dir / "baseline_report.csv");
      write_csv_rows(out, result.baseline, result.n_params, result.n_objectives);
    }
    nlohmann::json comparison;
    comparison["agent"] = aggregates_to_json(aggregate(result.agent));
    comparison["baseline"] = aggregates_to_json(aggregate(result.baseline));
    comparison["budget"] = result.baseline_budget;
    auto out = open_out(out_dir / "comparison.json");
    out << comparison.dump(2) << '\n';
  }
}

std::vector<RunRecord> read_report_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_report_csv: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("read_report_csv: " + path.string() + " is empty");

  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) header.push_back(field);
  }
  std::size_t n_params = 0;
  std::size_t n_objectives = 0;
  for (const auto& h : header) {
    if (h.rfind("init_x", 0) == 0) ++n_params;
    if (h.rfind("final_abs_c", 0) == 0) ++n_objectives;
  }
  const std::size_t expected = 1 + n_params + 2 + n_objectives + 1;
  if (header.size() != expected || header.front() != "case_id" ||
      header.back() != "param_l2_error")
    throw std::runtime_error("read_report_csv: unrecognized header in " + path.string());

  std::vector<RunRecord> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != expected)
      throw std::runtime_error("read_report_csv: " + path.string() + ": line " +
                               std::to_string(line_no) + ": wrong field count");
    RunRecord row;
    std::size_t f = 0;
    row.case_id = fields[f++];
    for (std::size_t i = 0; i < n_params; ++i) row.init.push_back(std::stod(fields[f++]));
    row.success = fields[f++] == "1";
    row.iterations = static_cast<std::size_t>(std::stoull(fields[f++]));
    for (std::size_t i = 0; i < n_objectives; ++i)
      row.final_abs_c.push_back(std::stod(fields[f++]));
    row.param_l2_error = std::stod(fields[f++]);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace rlfit
