#pragma once

#include <optional>
#include <string>
#include <variant>

#include "gtdyn/dynamics.hpp"

namespace gtdyn {

// Population energies H(p) whose minimizers are the rest points of the
// growth-transform dynamics. Integral forms integrate each strategy's fitness
// along its own coordinate, from c up to p_i, with the other coordinates held
// at p.

// H = -p'Ap - lambda sum(p)
struct QuadraticPayoffCost {
  PayoffMatrix a;
  double lambda = 0.0;
};

// H = -sum_i int_c^{p_i} f_i(z) dz_i - lambda sum(p)
struct ReplicatorIntegralCost {
  FitnessModel model;
  double lambda = 0.0;
  double c = 0.5;
};

// H = -sum_i log(p_i) sum_j p_j f_j m_ji - lambda sum(p)
struct QuasispeciesLogCost {
  Vector fitness;
  MutationMatrix mutation;
  double lambda = 0.0;
};

// H = -sum_i int_c^{p_i} exp(f_i(z) / eta) / z_i dz_i
struct LogitIntegralCost {
  FitnessModel model;
  double eta = 1.0;
  double c = 0.5;
};

// H = -sum_i int_c^{p_i} k_i(z) / z_i dz_i
struct BnnIntegralCost {
  PayoffMatrix a;
  double epsilon = 0.0;
  double c = 0.5;
};

using CostFunction = std::variant<QuadraticPayoffCost, ReplicatorIntegralCost,
                                  QuasispeciesLogCost, LogitIntegralCost,
                                  BnnIntegralCost>;

inline constexpr double kQuadratureAbsTol = 1e-10;
inline constexpr double kDefaultGradientStep = 1e-6;

std::string cost_name(const CostFunction& h);

// Closed forms where available (quadratic payoff, replicator integral over
// constant/linear/quadratic fitness, quasispecies log); adaptive
// Gauss-Kronrod quadrature otherwise. Integral and log forms need p > 0.
double evaluate_H(const CostFunction& h, const Vector& p);

// Same value computed by quadrature for every integral form, bypassing any
// closed form. Non-integral forms fall back to evaluate_H.
double evaluate_H_by_quadrature(const CostFunction& h, const Vector& p);

// Central finite differences with the given step. Quadratic and log forms
// are differenced in each raw coordinate. Integral forms are differenced
// through the upper limit of their own term, integrand arguments frozen at
// p, which is the partial derivative the dummy-variable notation denotes.
Vector numerical_gradient(const CostFunction& h, const Vector& p,
                          double step = kDefaultGradientStep);

// The family's stated energy. Replicator uses the integral form, mutation
// families the log form (fitness frozen at p for replicator-mutator), logit
// and BNN their integral forms. Best-response and selector-weighted specs have
// no cataloged energy and raise UnsupportedFamily.
CostFunction cost_for_spec(const DynamicsSpec& spec, const Vector& p);

// Engine fitness in the unified field, i.e. the w_i / p_i of
// instantiate_engine. Requires p interior.
Vector engine_fitness(const DynamicsSpec& spec, const Vector& p);

struct GradientResidualReport {
  std::string family;
  std::string cost;
  Vector energy_fitness;  // -dH/dp_i from finite differences
  Vector engine_fitness;  // engine surrogate
  Vector residual;        // |energy_fitness - engine_fitness|
  Vector predicted;       // analytic extra term (zero where none is expected)
  double max_residual = 0.0;
  double max_prediction_gap = 0.0;  // max_i |residual_i - |predicted_i||
};

GradientResidualReport gradient_residual_report(
    const DynamicsSpec& spec, const Vector& p,
    double step = kDefaultGradientStep);

enum class CurvatureClass {
  kStrictlyConvex,
  kConvex,
  kStrictlyConcave,
  kConcave,
  kIndefinite,
  kFlat,
};

std::string to_string(CurvatureClass c);
std::optional<CurvatureClass> curvature_from_string(const std::string& s);

struct CurvatureReport {
  CurvatureClass cls = CurvatureClass::kFlat;
  Vector tangent_eigenvalues;
};

inline constexpr double kCurvatureTol = 1e-10;

// Curvature of -p'Ap - lambda sum(p) restricted to the tangent space of the
// simplex: spectrum of B'(-(A + A'))B for an orthonormal tangent basis B.
CurvatureReport curvature_class(const PayoffMatrix& a, double lambda = 0.0);

// Energy tracked along trajectories: the quadratic payoff form for linear
// replicator specs, the log form for quasispecies at interior points.
std::optional<double> trajectory_energy(const DynamicsSpec& spec,
                                        const Vector& p);

}  // namespace gtdyn
