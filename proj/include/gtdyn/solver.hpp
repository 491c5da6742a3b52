#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "gtdyn/dynamics.hpp"

namespace gtdyn {

// Which code path supplies the velocity: the family's own formula or the
// instantiated growth-transform engine.
enum class FieldRoute { kNamed, kEngine };

struct IntegratorConfig {
  double dt = 1e-3;
  double t_max = 100.0;
  std::size_t record_every = 1;
  double conv_tol = 1e-8;
  std::size_t conv_window = 10;
  bool positivity_guard = true;
  FieldRoute route = FieldRoute::kNamed;
};

void validate(const IntegratorConfig& cfg);

// Coordinates below this after a Runge-Kutta step trigger step halving.
inline constexpr double kNegativityTrigger = 1e-12;
inline constexpr int kMaxHalvings = 40;

struct TrajectorySample {
  double t = 0.0;
  Vector p;
  double mean_fitness = 0.0;
  double energy = std::numeric_limits<double>::quiet_NaN();  // NaN: undefined
  double sum_drift = 0.0;
  double min_coordinate = 0.0;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;  // every record_every-th step, from 0
  TrajectorySample final_state;
  bool converged = false;
  double residual = 0.0;  // ||pdot||_inf at the final state
  std::size_t steps = 0;
  std::size_t halvings = 0;
};

// Fixed-step classical RK4 on the chosen field. Stops at t_max or once the
// velocity norm stays below conv_tol for conv_window consecutive steps.
Trajectory integrate(const DynamicsSpec& spec, const Vector& p0,
                     const IntegratorConfig& cfg = {});

// One Baum-Eagon growth-transform step p_i (f_i + lambda) / sum_j p_j (f_j + lambda).
Vector discrete_growth_step(const FitnessModel& model, double lambda,
                            const Vector& p);

struct DiscreteConfig {
  std::size_t max_iters = 1000;
  double conv_tol = 1e-12;
  std::size_t record_every = 1;
};

// Iterates the growth-transform map until ||p' - p||_inf < conv_tol. Sample
// times are iteration counts; mean_fitness is p'Ap for linear models and the
// energy is -p'Ap - lambda.
Trajectory discrete_iterate(const FitnessModel& model, double lambda,
                            const Vector& p0, const DiscreteConfig& cfg = {});

// Largest per-step decrease of the mean fitness (p'Ap for linear models)
// along a recorded discrete run; 0 when the sequence never decreases.
double max_objective_decrease(const Trajectory& run);

}  // namespace gtdyn
