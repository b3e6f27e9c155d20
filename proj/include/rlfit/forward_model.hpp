#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rlfit/common.hpp"
#include "rlfit/quantizer.hpp"

namespace rlfit {

/// Static description of an estimation problem: admissible parameter domain,
/// per-parameter reference increments for the action set, and the
/// convergence criteria of the matched objectives.
struct ModelSpec {
  Domain domain;
  Vec reference_increments;
  ConvergenceCriteria psi;

  std::size_t n_params() const { return domain.size(); }
  std::size_t n_objectives() const { return psi.size(); }
  void validate() const;
};

/// One discrete parameter edit: add multiplier * reference_increment to a
/// single parameter. The multiplier carries the sign.
struct Action {
  std::size_t param_index = 0;
  int multiplier = 0;
};

struct ActionSet {
  std::vector<Action> actions;

  std::size_t size() const { return actions.size(); }
};

/// +-m for every parameter and every magnitude in `multipliers`
/// (deterministic order: per parameter, +m then -m per magnitude).
ActionSet make_action_set(std::size_t n_params, const std::vector<int>& multipliers);

/// Target values the model outputs are matched against.
struct Measurement {
  Vec z;
};

/// Deterministic map from parameters to matched output values.
class ForwardModel {
 public:
  virtual ~ForwardModel() = default;
  virtual Vec evaluate(const Vec& x) const = 0;
  virtual std::size_t n_params() const = 0;
  virtual std::size_t n_objectives() const = 0;
};

/// Componentwise misfit y - z.
Vec objectives(const Vec& y, const Measurement& z);

/// Applies the action and clamps the touched parameter to its interval.
Vec apply_action(Vec x, const Action& action, const ModelSpec& spec);

/// Two-output benchmark family: evaluate(x) = (alpha - x1, x2 - x1^2).
/// Both outputs vanish exactly at the minimum (alpha, alpha^2) of
/// (alpha - x1)^2 + 100 (x2 - x1^2)^2.
class RosenbrockModel final : public ForwardModel {
 public:
  explicit RosenbrockModel(double alpha) : alpha_(alpha) {}

  Vec evaluate(const Vec& x) const override;
  std::size_t n_params() const override { return 2; }
  std::size_t n_objectives() const override { return 2; }
  double alpha() const { return alpha_; }

 private:
  double alpha_;
};

/// Canonical setup for the Rosenbrock family: Omega = [-5,5]^2, increments
/// 0.01 (0.1% of the domain width), criteria 0.05 per objective.
ModelSpec rosenbrock_spec();

/// Two-element RC circulation toy. Parameters x = (R, C) with R in
/// mmHg*s/mL and C in mL/mmHg. A square-wave inflow of 300 mL/s during the
/// first 0.3 s of a 1 s cycle drives C*dP/dt = Q_in - P/R; evaluate returns
/// (mean pressure, peak pressure) of the periodic steady state, both in
/// mmHg, from the closed-form piecewise-exponential solution.
class WindkesselModel final : public ForwardModel {
 public:
  static constexpr double kInflow = 300.0;     // mL/s during systole
  static constexpr double kSystole = 0.3;      // s
  static constexpr double kCycle = 1.0;        // s

  Vec evaluate(const Vec& x) const override;
  std::size_t n_params() const override { return 2; }
  std::size_t n_objectives() const override { return 2; }
};

/// Windkessel setup: R in [0.5, 2.5], C in [0.5, 4.0], increments
/// (0.01, 0.02); the convergence criteria are experiment-specific.
ModelSpec windkessel_spec(ConvergenceCriteria psi);

/// A concrete estimation case: model instance, problem spec, target
/// measurement, and (for synthetic cases) the generating parameters.
struct ModelCase {
  std::string case_id;
  std::string model_name;  // registry key this case was built from
  std::shared_ptr<const ForwardModel> model;
  ModelSpec spec;
  Measurement target;
  std::optional<Vec> ground_truth;
  nlohmann::json config;  // the registry config this case was built from
};

std::vector<std::string> registered_models();

/// Builds a case from a registry name and its JSON config.
///   "rosenbrock": {"alpha": a}; target is (0, 0), truth (a, a^2).
///   "windkessel": {"r_true": R, "c_true": C} (target computed by the
///     model) or {"z": [mean, peak]}; requires `psi_override`.
ModelCase make_model_case(const std::string& model_name, const nlohmann::json& config,
                          const std::string& case_id,
                          const std::optional<Vec>& psi_override = std::nullopt);

}  // namespace rlfit
