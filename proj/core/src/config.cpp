#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "dgw/errors.hpp"
#include "dgw/experiments.hpp"

#ifndef DGW_VERSION_STRING
#define DGW_VERSION_STRING "v0.0.0"
#endif

namespace dgw {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Entry {
  Experiment id;
  const char* name;
  const char* regime;
  const char* summary;
};

const Entry kEntries[] = {
    {Experiment::FIG1, "FIG1", "gamma=0", "conditional mean profile and Z(t) histogram against c(k) and the series law"},
    {Experiment::PROP1A, "PROP1A", "gamma>0", "f(t,s) - q against (s-q) H(s) gamma^t; functional equation of H"},
    {Experiment::PROP1B, "PROP1B", "gamma=0", "f(t,1) against p_l^{-1/(l-1)} rho^{l^t}; functional equation of R"},
    {Experiment::THM22, "THM22", "gamma>0, 0<q<1", "limit laws q_{k,j}, kernels Q^(k), Monte Carlo joint law"},
    {Experiment::THM23, "THM23", "gamma=0", "c(k) monotone above 1; conditional variance decay"},
    {Experiment::TAILS, "TAILS", "any", "exact survival tail against its asymptotic form"},
    {Experiment::PROP41, "PROP41", "schedule", "positive theta schedule: survival and conditional Laplace transform"},
    {Experiment::PROP42, "PROP42", "schedule", "gamma-power schedule: survival and conditional CDF"},
    {Experiment::PROP43, "PROP43", "schedule", "negative theta schedule: survival and conditional CDF"},
    {Experiment::QPROCESS, "QPROCESS", "gamma>0, 0<q<1", "Q^(k) rows against the Q-process kernel"},
    {Experiment::SAMPLER_EQUIV, "SAMPLER_EQUIV", "any", "direct against controlled sampler, chi-square"},
};

const char* kind_name(ScheduleKind k) {
  switch (k) {
    case ScheduleKind::PROP41: return "PROP41";
    case ScheduleKind::PROP42: return "PROP42";
    case ScheduleKind::PROP43: return "PROP43";
  }
  return "?";
}

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
  return s;
}

json real_or_inf(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

// Collects type errors instead of stopping at the first one.
class Reader {
 public:
  explicit Reader(std::vector<FieldError>& errors) : errors_(errors) {}

  template <class T>
  void get(const json& j, const char* key, const std::string& path, T& out) {
    if (!j.contains(key)) return;
    try {
      out = j.at(key).get<T>();
    } catch (const json::exception&) {
      errors_.push_back({path, std::string("wrong type: ") + j.at(key).type_name()});
    }
  }

  void real(const json& j, const char* key, const std::string& path, double& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (v.is_number()) {
      out = v.get<double>();
    } else if (v.is_string() && (v == "inf" || v == "-inf")) {
      out = v == "inf" ? kInf : -kInf;
    } else {
      errors_.push_back({path, std::string("expected a number, got ") + v.type_name()});
    }
  }

  void count(const json& j, const char* key, const std::string& path, std::uint64_t& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (v.is_number_unsigned()) {
      out = v.get<std::uint64_t>();
    } else if (v.is_number_integer() || v.is_number_float()) {
      errors_.push_back({path, "must be a nonnegative integer"});
    } else {
      errors_.push_back({path, std::string("expected an integer, got ") + v.type_name()});
    }
  }

  void size(const json& j, const char* key, const std::string& path, std::size_t& out) {
    std::uint64_t v = out;
    count(j, key, path, v);
    out = static_cast<std::size_t>(v);
  }

  void unknown_keys(const json& j, const std::string& prefix, std::initializer_list<const char*> allowed) {
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j.items()) {
      if (!ok.count(k)) errors_.push_back({prefix + k, "unknown key"});
    }
  }

  std::vector<FieldError>& errors_;
};

}  // namespace

std::string to_string(Experiment e) {
  for (const auto& entry : kEntries) {
    if (entry.id == e) return entry.name;
  }
  return "?";
}

Experiment experiment_from_string(const std::string& name) {
  const std::string key = upper(name);
  for (const auto& entry : kEntries) {
    if (key == entry.name) return entry.id;
  }
  throw std::invalid_argument("unknown experiment: " + name);
}

const std::vector<ExperimentInfo>& experiment_catalog() {
  static const std::vector<ExperimentInfo> catalog = [] {
    std::vector<ExperimentInfo> out;
    for (const auto& e : kEntries) out.push_back({e.id, e.regime, e.summary});
    return out;
  }();
  return catalog;
}

const char* version_string() noexcept { return DGW_VERSION_STRING; }

namespace {
std::string join_errors(const std::vector<FieldError>& errors) {
  std::string msg = "invalid config:";
  for (const auto& e : errors) msg += "\n  " + e.field + ": " + e.message;
  return msg;
}
}  // namespace

ConfigError::ConfigError(std::vector<FieldError> errors)
    : std::runtime_error(join_errors(errors)), errors_(std::move(errors)) {}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("JSON syntax error: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("<root>", "expected a JSON object");

  std::vector<FieldError> errors;
  Reader rd(errors);
  ExperimentConfig cfg;
  rd.unknown_keys(j, "", {"experiment", "law", "schedule", "horizon", "n_paths", "seed", "N", "tolerances",
                          "output_path", "sampler", "threads"});

  if (!j.contains("experiment")) {
    errors.push_back({"experiment", "required"});
  } else if (!j["experiment"].is_string()) {
    errors.push_back({"experiment", "expected a string"});
  } else {
    try {
      cfg.experiment = experiment_from_string(j["experiment"].get<std::string>());
    } catch (const std::invalid_argument& e) {
      errors.push_back({"experiment", e.what()});
    }
  }

  if (j.contains("law")) {
    const json& law = j["law"];
    if (!law.is_object()) {
      errors.push_back({"law", "expected an object with \"pmf\" or \"theta\""});
    } else {
      rd.unknown_keys(law, "law.", {"pmf", "theta"});
      if (law.contains("pmf") && law.contains("theta")) errors.push_back({"law", "give either pmf or theta, not both"});
      if (law.contains("pmf")) {
        std::vector<double> pmf;
        rd.get(law, "pmf", "law.pmf", pmf);
        cfg.pmf = pmf;
      }
      if (law.contains("theta")) {
        try {
          cfg.theta_law = ThetaLaw::from_json(law["theta"].dump());
        } catch (const std::exception& e) {
          errors.push_back({"law.theta", e.what()});
        }
      }
    }
  }

  if (j.contains("schedule")) {
    const json& s = j["schedule"];
    if (!s.is_object()) {
      errors.push_back({"schedule", "expected an object"});
    } else {
      rd.unknown_keys(s, "schedule.", {"kind", "theta", "q", "gamma", "x", "y", "a", "ns", "lambda", "u", "k", "use_uhat"});
      ScheduleConfig sc;
      std::string kind = "PROP41";
      rd.get(s, "kind", "schedule.kind", kind);
      kind = upper(kind);
      if (kind == "PROP41") {
        sc.kind = ScheduleKind::PROP41;
      } else if (kind == "PROP42") {
        sc.kind = ScheduleKind::PROP42;
      } else if (kind == "PROP43") {
        sc.kind = ScheduleKind::PROP43;
      } else {
        errors.push_back({"schedule.kind", "unknown schedule kind: " + kind});
      }
      rd.real(s, "theta", "schedule.theta", sc.theta);
      rd.real(s, "q", "schedule.q", sc.q);
      rd.real(s, "gamma", "schedule.gamma", sc.gamma);
      rd.real(s, "x", "schedule.x", sc.x_or_y);
      rd.real(s, "y", "schedule.y", sc.x_or_y);
      rd.real(s, "a", "schedule.a", sc.a);
      rd.real(s, "lambda", "schedule.lambda", sc.lambda);
      rd.real(s, "u", "schedule.u", sc.u);
      rd.size(s, "k", "schedule.k", sc.k);
      rd.get(s, "use_uhat", "schedule.use_uhat", sc.use_uhat);
      rd.get(s, "ns", "schedule.ns", sc.ns);
      cfg.schedule = sc;
    }
  }

  rd.size(j, "horizon", "horizon", cfg.horizon);
  rd.count(j, "n_paths", "n_paths", cfg.n_paths);
  rd.count(j, "seed", "seed", cfg.seed);
  rd.size(j, "N", "N", cfg.N);
  rd.size(j, "threads", "threads", cfg.threads);
  rd.get(j, "output_path", "output_path", cfg.output_path);
  if (j.contains("sampler")) {
    std::string name;
    rd.get(j, "sampler", "sampler", name);
    try {
      if (!name.empty()) cfg.sampler = sampler_from_string(name);
    } catch (const std::invalid_argument& e) {
      errors.push_back({"sampler", e.what()});
    }
  }
  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    if (!t.is_object()) {
      errors.push_back({"tolerances", "expected an object"});
    } else {
      rd.unknown_keys(t, "tolerances.", {"analytic", "mc_se", "asymptotic"});
      rd.real(t, "analytic", "tolerances.analytic", cfg.tolerances.analytic);
      rd.real(t, "mc_se", "tolerances.mc_se", cfg.tolerances.mc_se);
      rd.real(t, "asymptotic", "tolerances.asymptotic", cfg.tolerances.asymptotic);
    }
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = to_string(c.experiment);
  if (c.pmf) j["law"]["pmf"] = *c.pmf;
  if (c.theta_law) j["law"]["theta"] = json::parse(c.theta_law->to_json());
  if (c.schedule) {
    const auto& s = *c.schedule;
    json sj;
    sj["kind"] = kind_name(s.kind);
    sj["theta"] = s.theta;
    sj["q"] = s.q;
    sj["gamma"] = s.gamma;
    sj[s.kind == ScheduleKind::PROP41 ? "x" : "y"] = s.x_or_y;
    if (s.kind == ScheduleKind::PROP43) sj["a"] = real_or_inf(s.a);
    sj["ns"] = s.ns;
    if (s.kind == ScheduleKind::PROP41) {
      sj["lambda"] = s.lambda;
    } else {
      sj["u"] = s.u;
    }
    sj["k"] = s.k;
    if (s.kind == ScheduleKind::PROP43) sj["use_uhat"] = s.use_uhat;
    j["schedule"] = sj;
  }
  j["horizon"] = c.horizon;
  j["n_paths"] = c.n_paths;
  j["seed"] = c.seed;
  j["N"] = c.N;
  j["tolerances"] = {{"analytic", c.tolerances.analytic},
                     {"mc_se", c.tolerances.mc_se},
                     {"asymptotic", c.tolerances.asymptotic}};
  j["output_path"] = c.output_path;
  j["sampler"] = to_string(c.sampler);
  j["threads"] = c.threads;
  return j.dump(2);
}

// ---------------------------------------------------------------- validation

namespace {

bool uses_mc(Experiment e) {
  return e == Experiment::FIG1 || e == Experiment::THM22 || e == Experiment::SAMPLER_EQUIV;
}

bool uses_schedule(Experiment e) {
  return e == Experiment::PROP41 || e == Experiment::PROP42 || e == Experiment::PROP43;
}

void check_pmf(const std::vector<double>& pmf, std::vector<FieldError>& errors) {
  double total = 0.0;
  bool ok = true;
  for (std::size_t k = 0; k < pmf.size(); ++k) {
    if (!std::isfinite(pmf[k]) || pmf[k] < 0.0) {
      errors.push_back({"law.pmf[" + std::to_string(k) + "]", "must be finite and >= 0"});
      ok = false;
    } else {
      total += pmf[k];
    }
  }
  if (!ok) return;
  if (total > 1.0 + 1e-12) errors.push_back({"law.pmf", "probabilities sum to more than 1"});
  std::size_t last = pmf.size();
  while (last > 0 && pmf[last - 1] == 0.0) --last;
  if (last < 2) errors.push_back({"law.pmf", "needs p_k > 0 for some k >= 1 (non-constant generating function)"});
}

}  // namespace

std::vector<FieldError> validate(const ExperimentConfig& c) {
  std::vector<FieldError> errors;
  const auto& tol = c.tolerances;
  if (!(tol.analytic > 0.0) || !std::isfinite(tol.analytic)) errors.push_back({"tolerances.analytic", "must be positive"});
  if (!(tol.mc_se > 0.0) || !std::isfinite(tol.mc_se)) errors.push_back({"tolerances.mc_se", "must be positive"});
  if (!(tol.asymptotic > 0.0) || !std::isfinite(tol.asymptotic)) {
    errors.push_back({"tolerances.asymptotic", "must be positive"});
  }
  if (c.N < 1) errors.push_back({"N", "must be >= 1"});
  if (c.output_path.empty()) errors.push_back({"output_path", "must not be empty"});
  if (uses_mc(c.experiment) && c.n_paths < 1) errors.push_back({"n_paths", "must be >= 1"});

  const std::string regime = [&] {
    for (const auto& info : experiment_catalog()) {
      if (info.id == c.experiment) return std::string(info.regime);
    }
    return std::string("any");
  }();

  if (uses_schedule(c.experiment)) {
    if (!c.schedule) {
      errors.push_back({"schedule", "required for " + to_string(c.experiment)});
      return errors;
    }
    const auto& s = *c.schedule;
    const ScheduleKind want = c.experiment == Experiment::PROP41   ? ScheduleKind::PROP41
                              : c.experiment == Experiment::PROP42 ? ScheduleKind::PROP42
                                                                   : ScheduleKind::PROP43;
    if (s.kind != want) errors.push_back({"schedule.kind", "does not match the experiment"});
    if (!(s.q >= 0.0 && s.q < 1.0)) errors.push_back({"schedule.q", "must lie in [0, 1)"});
    if (!(s.gamma > 0.0 && s.gamma < 1.0)) errors.push_back({"schedule.gamma", "must lie in (0, 1)"});
    if (!(s.x_or_y > 0.0) || !std::isfinite(s.x_or_y)) errors.push_back({"schedule.x", "must be positive"});
    if (s.kind == ScheduleKind::PROP41 && !(s.theta > 0.0 && s.theta <= 1.0)) {
      errors.push_back({"schedule.theta", "must lie in (0, 1]"});
    }
    if (s.kind == ScheduleKind::PROP41 && !(s.lambda > 0.0)) errors.push_back({"schedule.lambda", "must be positive"});
    if (s.kind == ScheduleKind::PROP43 && !(s.a > 0.0)) errors.push_back({"schedule.a", "must be positive (or \"inf\")"});
    if (s.kind != ScheduleKind::PROP41 && !(s.u >= 0.0)) errors.push_back({"schedule.u", "must be >= 0"});
    if (s.ns.empty()) errors.push_back({"schedule.ns", "must list at least one n"});
    if (!std::is_sorted(s.ns.begin(), s.ns.end()) ||
        std::adjacent_find(s.ns.begin(), s.ns.end()) != s.ns.end()) {
      errors.push_back({"schedule.ns", "must be strictly increasing"});
    }
    if (!s.ns.empty() && s.k > s.ns.front()) errors.push_back({"schedule.k", "must not exceed the smallest n"});
    return errors;
  }

  if (c.experiment == Experiment::TAILS && c.theta_law) {
    try {
      c.theta_law->validate();
    } catch (const std::exception& e) {
      errors.push_back({"law.theta", e.what()});
    }
    return errors;
  }
  if (c.theta_law) errors.push_back({"law.theta", "theta laws are only accepted by TAILS"});
  if (!c.pmf) {
    errors.push_back({"law.pmf", "required for " + to_string(c.experiment)});
    return errors;
  }
  const std::size_t before = errors.size();
  check_pmf(*c.pmf, errors);
  if (errors.size() != before) return errors;

  const auto& p = *c.pmf;
  const double p0 = p.empty() ? 0.0 : p[0];
  const double p1 = p.size() > 1 ? p[1] : 0.0;
  const bool gamma_zero = p0 == 0.0 && p1 == 0.0;
  if (regime == "gamma=0" && !gamma_zero) {
    errors.push_back({"law.pmf", to_string(c.experiment) + " requires gamma = 0 (p_0 = p_1 = 0)"});
  }
  if (regime.rfind("gamma>0", 0) == 0 && gamma_zero) {
    errors.push_back({"law.pmf", to_string(c.experiment) + " requires gamma > 0 (p_0 + p_1 > 0)"});
  }
  if (regime == "gamma>0, 0<q<1" && p0 == 0.0) {
    errors.push_back({"law.pmf", to_string(c.experiment) + " requires 0 < q < 1 (p_0 > 0)"});
  }
  double total = 0.0;
  for (double v : p) total += v;
  if (regime == "gamma>0, 0<q<1" && total >= 1.0 - 1e-15) {
    errors.push_back({"law.pmf", to_string(c.experiment) + " requires a defective law (sum < 1)"});
  }
  if (c.sampler == Sampler::CONDITIONED && p0 != 0.0) {
    errors.push_back({"sampler", "the conditioned sampler requires p_0 = 0"});
  }
  if (c.experiment == Experiment::SAMPLER_EQUIV && c.horizon < 3) {
    errors.push_back({"horizon", "SAMPLER_EQUIV compares Z(3); horizon must be >= 3"});
  }
  return errors;
}

}  // namespace dgw
