#include "gtdyn/report_io.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "gtdyn/errors.hpp"

namespace gtdyn {

namespace {

json vec_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

json opt_json(const std::optional<double>& x) {
  return x.has_value() ? json(*x) : json(nullptr);
}

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw ParseError(std::string("report is missing field '") + key + "'");
  }
  return j.at(key);
}

void expect_tag(const json& j, const std::string& tag) {
  const json& t = field(j, "report");
  if (!t.is_string() || t.get<std::string>() != tag) {
    throw ParseError("expected a '" + tag + "' report");
  }
}

double real_of(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number()) throw ParseError(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

std::optional<double> opt_real_of(const json& j, const char* key) {
  const json& v = field(j, key);
  if (v.is_null()) return std::nullopt;
  if (!v.is_number()) throw ParseError(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

bool bool_of(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_boolean()) throw ParseError(std::string("field '") + key + "' must be a boolean");
  return v.get<bool>();
}

std::size_t count_of(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number_unsigned()) {
    throw ParseError(std::string("field '") + key + "' must be a nonnegative integer");
  }
  return v.get<std::size_t>();
}

std::string string_of(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_string()) throw ParseError(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

Vector vec_of(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_array()) throw ParseError(std::string("field '") + key + "' must be an array");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) {
      throw ParseError(std::string("field '") + key + "' must hold numbers");
    }
    out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
  }
  return out;
}

std::vector<int> ints_of(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_array()) throw ParseError(std::string("field '") + key + "' must be an array");
  std::vector<int> out;
  for (const json& x : v) {
    if (!x.is_number_integer()) {
      throw ParseError(std::string("field '") + key + "' must hold integers");
    }
    out.push_back(x.get<int>());
  }
  return out;
}

json residual_json(const GradientResidualReport& g) {
  return {{"energy_fitness", vec_json(g.energy_fitness)},
          {"engine_fitness", vec_json(g.engine_fitness)},
          {"residual", vec_json(g.residual)},
          {"predicted", vec_json(g.predicted)},
          {"max_residual", g.max_residual},
          {"max_prediction_gap", g.max_prediction_gap}};
}

GradientResidualReport residual_from_json(const json& j, const GradcheckReport& parent) {
  GradientResidualReport g;
  g.family = parent.family;
  g.cost = parent.cost;
  g.energy_fitness = vec_of(j, "energy_fitness");
  g.engine_fitness = vec_of(j, "engine_fitness");
  g.residual = vec_of(j, "residual");
  g.predicted = vec_of(j, "predicted");
  g.max_residual = real_of(j, "max_residual");
  g.max_prediction_gap = real_of(j, "max_prediction_gap");
  return g;
}

}  // namespace

std::string format_real(double x) { return fmt::format("{:.17g}", x); }

std::string dump(const json& j) { return j.dump(2) + "\n"; }

SimulateReport make_simulate_report(const std::string& family, const Trajectory& traj) {
  SimulateReport r;
  r.family = family;
  r.converged = traj.converged;
  r.residual = traj.residual;
  r.t_end = traj.final_state.t;
  r.steps = traj.steps;
  r.halvings = traj.halvings;
  r.samples = traj.samples.size();
  r.final_state = traj.final_state.p;
  r.mean_fitness = traj.final_state.mean_fitness;
  if (!std::isnan(traj.final_state.energy)) r.energy = traj.final_state.energy;
  return r;
}

json to_json(const SimulateReport& r) {
  return {{"report", "simulate"},
          {"family", r.family},
          {"converged", r.converged},
          {"residual", r.residual},
          {"t_end", r.t_end},
          {"steps", r.steps},
          {"halvings", r.halvings},
          {"samples", r.samples},
          {"final_state", vec_json(r.final_state)},
          {"mean_fitness", r.mean_fitness},
          {"energy", opt_json(r.energy)}};
}

SimulateReport simulate_report_from_json(const json& j) {
  expect_tag(j, "simulate");
  SimulateReport r;
  r.family = string_of(j, "family");
  r.converged = bool_of(j, "converged");
  r.residual = real_of(j, "residual");
  r.t_end = real_of(j, "t_end");
  r.steps = count_of(j, "steps");
  r.halvings = count_of(j, "halvings");
  r.samples = count_of(j, "samples");
  r.final_state = vec_of(j, "final_state");
  r.mean_fitness = real_of(j, "mean_fitness");
  r.energy = opt_real_of(j, "energy");
  return r;
}

json to_json(const CompareReport& r) {
  json points = json::array();
  for (const ComparePoint& p : r.points) {
    points.push_back({{"point", vec_json(p.point)},
                      {"max_diff", p.max_diff},
                      {"collinearity", opt_json(p.collinearity)},
                      {"scale", opt_json(p.scale)},
                      {"expected_scale", opt_json(p.expected_scale)}});
  }
  return {{"report", "compare"},       {"family", r.family},
          {"tolerance", r.tolerance},  {"max_diff", r.max_diff},
          {"max_scale_error", r.max_scale_error},
          {"passed", r.passed},        {"points", points}};
}

CompareReport compare_report_from_json(const json& j) {
  expect_tag(j, "compare");
  CompareReport r;
  r.family = string_of(j, "family");
  r.tolerance = real_of(j, "tolerance");
  r.max_diff = real_of(j, "max_diff");
  r.max_scale_error = real_of(j, "max_scale_error");
  r.passed = bool_of(j, "passed");
  const json& points = field(j, "points");
  if (!points.is_array()) throw ParseError("field 'points' must be an array");
  for (const json& p : points) {
    ComparePoint cp;
    cp.point = vec_of(p, "point");
    cp.max_diff = real_of(p, "max_diff");
    cp.collinearity = opt_real_of(p, "collinearity");
    cp.scale = opt_real_of(p, "scale");
    cp.expected_scale = opt_real_of(p, "expected_scale");
    r.points.push_back(std::move(cp));
  }
  return r;
}

json to_json(const GradcheckReport& r) {
  json details = json::array();
  for (const auto& g : r.details) details.push_back(residual_json(g));
  return {{"report", "gradcheck"},
          {"family", r.family},
          {"cost", r.cost},
          {"bound", r.bound},
          {"points", r.points},
          {"max_residual", r.max_residual},
          {"max_prediction_gap", r.max_prediction_gap},
          {"compares_prediction", r.compares_prediction},
          {"passed", r.passed},
          {"details", details}};
}

GradcheckReport gradcheck_report_from_json(const json& j) {
  expect_tag(j, "gradcheck");
  GradcheckReport r;
  r.family = string_of(j, "family");
  r.cost = string_of(j, "cost");
  r.bound = real_of(j, "bound");
  r.points = count_of(j, "points");
  r.max_residual = real_of(j, "max_residual");
  r.max_prediction_gap = real_of(j, "max_prediction_gap");
  r.compares_prediction = bool_of(j, "compares_prediction");
  r.passed = bool_of(j, "passed");
  const json& details = field(j, "details");
  if (!details.is_array()) throw ParseError("field 'details' must be an array");
  for (const json& d : details) r.details.push_back(residual_from_json(d, r));
  return r;
}

json to_json(const EquilibriumOutput& out) {
  const EquilibriumReport& r = out.report;
  json support = json::array();
  for (Eigen::Index i : r.support) support.push_back(i);
  json spectrum = json::array();
  for (const auto& z : r.spectrum) spectrum.push_back({z.real(), z.imag()});
  json ess = nullptr;
  if (r.ess) {
    ess = {{"verdict", r.ess->verdict},
           {"samples", r.ess->samples},
           {"tested", r.ess->tested},
           {"radius", r.ess->radius}};
  }
  json curvature = nullptr;
  if (out.curvature) {
    curvature = {{"class", to_string(out.curvature->cls)},
                 {"tangent_eigenvalues", vec_json(out.curvature->tangent_eigenvalues)}};
  }
  return {{"report", "equilibrium"},
          {"family", r.family},
          {"point", vec_json(r.point)},
          {"residual", r.residual},
          {"support", support},
          {"nash", r.nash ? json(*r.nash) : json(nullptr)},
          {"excess", vec_json(r.excess)},
          {"ess", ess},
          {"spectrum", spectrum},
          {"stability", to_string(r.stability)},
          {"curvature", curvature},
          {"converged", r.converged},
          {"t_end", r.t_end},
          {"flags", r.flags}};
}

EquilibriumOutput equilibrium_output_from_json(const json& j) {
  expect_tag(j, "equilibrium");
  EquilibriumOutput out;
  EquilibriumReport& r = out.report;
  r.family = string_of(j, "family");
  r.point = vec_of(j, "point");
  r.residual = real_of(j, "residual");
  for (int i : ints_of(j, "support")) r.support.push_back(i);
  const json& nash = field(j, "nash");
  if (nash.is_boolean()) {
    r.nash = nash.get<bool>();
  } else if (!nash.is_null()) {
    throw ParseError("field 'nash' must be a boolean or null");
  }
  r.excess = vec_of(j, "excess");
  const json& ess = field(j, "ess");
  if (!ess.is_null()) {
    r.ess = EssVerdict{bool_of(ess, "verdict"), count_of(ess, "samples"),
                       count_of(ess, "tested"), real_of(ess, "radius")};
  }
  const json& spectrum = field(j, "spectrum");
  if (!spectrum.is_array()) throw ParseError("field 'spectrum' must be an array");
  for (const json& z : spectrum) {
    if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number()) {
      throw ParseError("spectrum entries must be [re, im] pairs");
    }
    r.spectrum.emplace_back(z[0].get<double>(), z[1].get<double>());
  }
  const auto stability = stability_from_string(string_of(j, "stability"));
  if (!stability) throw ParseError("unknown stability class");
  r.stability = *stability;
  const json& curvature = field(j, "curvature");
  if (!curvature.is_null()) {
    const auto cls = curvature_from_string(string_of(curvature, "class"));
    if (!cls) throw ParseError("unknown curvature class");
    out.curvature = CurvatureReport{*cls, vec_of(curvature, "tangent_eigenvalues")};
  }
  r.converged = bool_of(j, "converged");
  r.t_end = real_of(j, "t_end");
  const json& flags = field(j, "flags");
  if (!flags.is_array()) throw ParseError("field 'flags' must be an array");
  for (const json& f : flags) {
    if (!f.is_string()) throw ParseError("flags must be strings");
    r.flags.push_back(f.get<std::string>());
  }
  return out;
}

json to_json(const CliqueReport& r) {
  return {{"report", "clique"},
          {"omega", r.omega_estimate},
          {"value", r.best_value},
          {"clique", r.support},
          {"raw_support", r.raw_support},
          {"best_point", vec_json(r.best_point)}};
}

CliqueReport clique_report_from_json(const json& j) {
  expect_tag(j, "clique");
  CliqueReport r;
  const json& omega = field(j, "omega");
  if (!omega.is_number_integer()) throw ParseError("field 'omega' must be an integer");
  r.omega_estimate = omega.get<int>();
  r.best_value = real_of(j, "value");
  r.support = ints_of(j, "clique");
  r.raw_support = ints_of(j, "raw_support");
  r.best_point = vec_of(j, "best_point");
  return r;
}

std::string validate_report(const json& j) {
  const std::string tag = string_of(j, "report");
  if (tag == "simulate") {
    simulate_report_from_json(j);
  } else if (tag == "compare") {
    compare_report_from_json(j);
  } else if (tag == "gradcheck") {
    gradcheck_report_from_json(j);
  } else if (tag == "equilibrium") {
    equilibrium_output_from_json(j);
  } else if (tag == "clique") {
    clique_report_from_json(j);
  } else {
    throw ParseError("unknown report kind '" + tag + "'");
  }
  return tag;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const Eigen::Index n = traj.final_state.p.size();
  out << "t";
  for (Eigen::Index i = 1; i <= n; ++i) out << ",p_" << i;
  out << ",mean_fitness,energy,sum_drift\n";
  for (const TrajectorySample& s : traj.samples) {
    out << format_real(s.t);
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << format_real(s.p[i]);
    out << ',' << format_real(s.mean_fitness) << ','
        << (std::isnan(s.energy) ? std::string("nan") : format_real(s.energy)) << ','
        << format_real(s.sum_drift) << '\n';
  }
}

void write_plot_csv(std::ostream& out, const Trajectory& traj) {
  const Eigen::Index n = traj.final_state.p.size();
  Vector vx(n);
  Vector vy(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double angle = std::numbers::pi / 2.0 + 2.0 * std::numbers::pi *
                                                      static_cast<double>(i) /
                                                      static_cast<double>(n);
    vx[i] = std::cos(angle);
    vy[i] = std::sin(angle);
  }
  out << "t";
  for (Eigen::Index i = 1; i <= n; ++i) out << ",p_" << i;
  out << ",x,y\n";
  for (const TrajectorySample& s : traj.samples) {
    out << format_real(s.t);
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << format_real(s.p[i]);
    out << ',' << format_real(vx.dot(s.p)) << ',' << format_real(vy.dot(s.p)) << '\n';
  }
}

}  // namespace gtdyn
