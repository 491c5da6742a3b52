#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gtdyn/clique.hpp"
#include "gtdyn/energy.hpp"
#include "gtdyn/equilibrium.hpp"

namespace gtdyn {

using nlohmann::json;

// 17 significant digits, the form used in every CSV cell.
std::string format_real(double x);

struct SimulateReport {
  std::string family;
  bool converged = false;
  double residual = 0.0;
  double t_end = 0.0;
  std::size_t steps = 0;
  std::size_t halvings = 0;
  std::size_t samples = 0;
  Vector final_state;
  double mean_fitness = 0.0;
  std::optional<double> energy;
};

SimulateReport make_simulate_report(const std::string& family, const Trajectory& traj);

struct ComparePoint {
  Vector point;
  double max_diff = 0.0;  // ||engine - named||_inf / (1 + ||named||_inf)
  std::optional<double> collinearity;  // logit: normalized-field gap
  std::optional<double> scale;         // logit: fitted engine / named factor
  std::optional<double> expected_scale;  // logit: sum_i exp(f_i / eta)
};

struct CompareReport {
  std::string family;
  double tolerance = 1e-10;
  std::vector<ComparePoint> points;
  double max_diff = 0.0;
  double max_scale_error = 0.0;  // logit: max relative |scale - expected|
  bool passed = false;
};

struct GradcheckReport {
  std::string family;
  std::string cost;
  double bound = 0.0;
  std::size_t points = 0;
  double max_residual = 0.0;
  double max_prediction_gap = 0.0;
  bool compares_prediction = false;  // mutation families
  std::vector<GradientResidualReport> details;
  bool passed = false;
};

struct EquilibriumOutput {
  EquilibriumReport report;
  std::optional<CurvatureReport> curvature;
};

// Every report carries a "report" tag naming its kind.
json to_json(const SimulateReport& r);
json to_json(const CompareReport& r);
json to_json(const GradcheckReport& r);
json to_json(const EquilibriumOutput& r);
json to_json(const CliqueReport& r);

// Parsers for the emitted reports; ParseError on schema violations.
SimulateReport simulate_report_from_json(const json& j);
CompareReport compare_report_from_json(const json& j);
GradcheckReport gradcheck_report_from_json(const json& j);
EquilibriumOutput equilibrium_output_from_json(const json& j);
CliqueReport clique_report_from_json(const json& j);

// Validates any emitted report by its tag; returns the tag.
std::string validate_report(const json& j);

// Header t,p_1,...,p_N,mean_fitness,energy,sum_drift; undefined energy is
// written as "nan".
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

// Header t,p_1,...,p_N,x,y where (x, y) places the state inside the regular
// N-gon whose vertices are the pure strategies.
void write_plot_csv(std::ostream& out, const Trajectory& traj);

// Serialized JSON text with a trailing newline.
std::string dump(const json& j);

}  // namespace gtdyn
