#include "rlfit/forward_model.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>

namespace rlfit {

void ModelSpec::validate() const {
  if (domain.empty()) throw std::invalid_argument("ModelSpec: empty domain");
  if (reference_increments.size() != domain.size())
    throw std::invalid_argument("ModelSpec: reference increment count must match domain");
  for (const auto& iv : domain)
    if (!(iv.lo < iv.hi)) throw std::invalid_argument("ModelSpec: interval must have lo < hi");
  for (double d : reference_increments)
    if (!(d > 0.0)) throw std::invalid_argument("ModelSpec: increments must be positive");
  psi.validate();
}

ActionSet make_action_set(std::size_t n_params, const std::vector<int>& multipliers) {
  if (n_params == 0) throw std::invalid_argument("make_action_set: n_params must be positive");
  if (multipliers.empty()) throw std::invalid_argument("make_action_set: no multipliers");
  std::set<int> seen;
  for (int m : multipliers) {
    if (m <= 0) throw std::invalid_argument("make_action_set: magnitudes must be positive");
    if (!seen.insert(m).second)
      throw std::invalid_argument("make_action_set: duplicate magnitude");
  }
  ActionSet set;
  for (std::size_t p = 0; p < n_params; ++p) {
    for (int m : multipliers) {
      set.actions.push_back({p, m});
      set.actions.push_back({p, -m});
    }
  }
  return set;
}

Vec objectives(const Vec& y, const Measurement& z) {
  if (y.size() != z.z.size()) throw std::invalid_argument("objectives: dimension mismatch");
  Vec c(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) c[i] = y[i] - z.z[i];
  return c;
}

Vec apply_action(Vec x, const Action& action, const ModelSpec& spec) {
  if (action.param_index >= x.size())
    throw std::invalid_argument("apply_action: parameter index out of range");
  const std::size_t i = action.param_index;
  x[i] = spec.domain[i].clamp(x[i] + action.multiplier * spec.reference_increments[i]);
  return x;
}

Vec RosenbrockModel::evaluate(const Vec& x) const {
  if (x.size() != 2) throw std::invalid_argument("RosenbrockModel: expects 2 parameters");
  return {alpha_ - x[0], x[1] - x[0] * x[0]};
}

ModelSpec rosenbrock_spec() {
  ModelSpec spec;
  spec.domain = {{-5.0, 5.0}, {-5.0, 5.0}};
  spec.reference_increments = {0.01, 0.01};
  spec.psi.psi = {0.05, 0.05};
  return spec;
}

Vec WindkesselModel::evaluate(const Vec& x) const {
  if (x.size() != 2) throw std::invalid_argument("WindkesselModel: expects 2 parameters");
  const double r = x[0];
  const double c = x[1];
  if (!(r > 0.0) || !(c > 0.0))
    throw std::invalid_argument("WindkesselModel: resistance and compliance must be positive");

  // Periodic steady state of C dP/dt = Q_in - P/R with square-wave inflow.
  // Systole: P(t) = Q0 R + (P0 - Q0 R) e^(-t/tau); diastole decays to P0.
  const double tau = r * c;
  const double a = std::exp(-kSystole / tau);
  const double b = std::exp(-(kCycle - kSystole) / tau);
  const double full = kInflow * r;  // asymptote during systole
  const double p0 = full * (1.0 - a) * b / (1.0 - a * b);
  const double peak = full * (1.0 - a) + p0 * a;  // end of systole

  // Mean over one cycle from the piecewise exponentials.
  const double systole_area = full * kSystole + (p0 - full) * tau * (1.0 - a);
  const double diastole_area = peak * tau * (1.0 - b);
  const double mean = (systole_area + diastole_area) / kCycle;
  return {mean, peak};
}

ModelSpec windkessel_spec(ConvergenceCriteria psi) {
  psi.validate();
  if (psi.size() != 2)
    throw std::invalid_argument("windkessel_spec: expects 2 convergence criteria");
  ModelSpec spec;
  spec.domain = {{0.5, 2.5}, {0.5, 4.0}};
  spec.reference_increments = {0.01, 0.02};
  spec.psi = std::move(psi);
  return spec;
}

namespace {

void require_keys(const nlohmann::json& config, const std::set<std::string>& allowed,
                  const std::string& model_name) {
  for (const auto& [key, _] : config.items())
    if (!allowed.count(key))
      throw std::invalid_argument("model config for '" + model_name + "': unknown key '" + key +
                                  "'");
}

ModelCase make_rosenbrock_case(const nlohmann::json& config, const std::string& case_id) {
  require_keys(config, {"alpha"}, "rosenbrock");
  const double alpha = config.at("alpha").get<double>();
  ModelCase kase;
  kase.case_id = case_id;
  kase.model = std::make_shared<RosenbrockModel>(alpha);
  kase.spec = rosenbrock_spec();
  kase.target.z = {0.0, 0.0};
  kase.ground_truth = Vec{alpha, alpha * alpha};
  kase.config = config;
  return kase;
}

ModelCase make_windkessel_case(const nlohmann::json& config, const std::string& case_id,
                               const std::optional<Vec>& psi_override) {
  require_keys(config, {"r_true", "c_true", "z"}, "windkessel");
  if (!psi_override)
    throw std::invalid_argument("windkessel cases require convergence criteria (psi)");
  ModelCase kase;
  kase.case_id = case_id;
  auto model = std::make_shared<WindkesselModel>();
  kase.model = model;
  kase.spec = windkessel_spec(ConvergenceCriteria{*psi_override});
  if (config.contains("z")) {
    kase.target.z = config.at("z").get<Vec>();
    if (kase.target.z.size() != 2)
      throw std::invalid_argument("windkessel case: z must have 2 entries");
  } else {
    const Vec truth = {config.at("r_true").get<double>(), config.at("c_true").get<double>()};
    if (!in_domain(truth, kase.spec.domain))
      throw std::invalid_argument("windkessel case: generating parameters outside the domain");
    kase.target.z = model->evaluate(truth);
    kase.ground_truth = truth;
  }
  kase.config = config;
  return kase;
}

using CaseFactory = std::function<ModelCase(const nlohmann::json&, const std::string&,
                                            const std::optional<Vec>&)>;

const std::map<std::string, CaseFactory>& registry() {
  static const std::map<std::string, CaseFactory> reg = {
      {"rosenbrock",
       [](const nlohmann::json& cfg, const std::string& id, const std::optional<Vec>&) {
         return make_rosenbrock_case(cfg, id);
       }},
      {"windkessel",
       [](const nlohmann::json& cfg, const std::string& id, const std::optional<Vec>& psi) {
         return make_windkessel_case(cfg, id, psi);
       }},
  };
  return reg;
}

}  // namespace

std::vector<std::string> registered_models() {
  std::vector<std::string> names;
  for (const auto& [name, _] : registry()) names.push_back(name);
  return names;
}

ModelCase make_model_case(const std::string& model_name, const nlohmann::json& config,
                          const std::string& case_id, const std::optional<Vec>& psi_override) {
  const auto& reg = registry();
  auto it = reg.find(model_name);
  if (it == reg.end())
    throw std::invalid_argument("make_model_case: unknown model '" + model_name + "'");
  ModelCase kase = it->second(config, case_id, psi_override);
  kase.model_name = model_name;
  kase.spec.validate();
  return kase;
}

}  // namespace rlfit
