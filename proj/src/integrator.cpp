#include "gtdyn/solver.hpp"

#include <cmath>
#include <functional>
#include <memory>
#include <string>

#include "gtdyn/energy.hpp"
#include "gtdyn/errors.hpp"

namespace gtdyn {

namespace {

using Field = std::function<Vector(const Vector&)>;

Field make_field(const DynamicsSpec& spec, FieldRoute route) {
  if (route == FieldRoute::kEngine) {
    auto engine = std::make_shared<GrowthTransformField>(instantiate_engine(spec));
    return [engine](const Vector& p) { return growth_transform_velocity(*engine, p); };
  }
  return [spec](const Vector& p) { return velocity(spec, p); };
}

Vector rk4_step(const Field& field, const Vector& p, const Vector& k1, double h) {
  const Vector k2 = field(p + 0.5 * h * k1);
  const Vector k3 = field(p + 0.5 * h * k2);
  const Vector k4 = field(p + h * k3);
  return p + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Advances by h, splitting into halves whenever a coordinate would drop below
// -kNegativityTrigger.
Vector guarded_advance(const Field& field, const Vector& p, const Vector& k1,
                       double h, int depth, std::size_t& halvings) {
  Vector next = rk4_step(field, p, k1, h);
  if (next.minCoeff() >= -kNegativityTrigger) return next;
  if (depth >= kMaxHalvings) {
    throw StepFailure("positivity guard exhausted " +
                      std::to_string(kMaxHalvings) + " step halvings");
  }
  ++halvings;
  const Vector mid = guarded_advance(field, p, k1, 0.5 * h, depth + 1, halvings);
  return guarded_advance(field, mid, field(mid), 0.5 * h, depth + 1, halvings);
}

TrajectorySample make_sample(const DynamicsSpec& spec, const FitnessModel& model,
                             double t, const Vector& p) {
  TrajectorySample s;
  s.t = t;
  s.p = p;
  s.mean_fitness = mean_fitness(model, p);
  if (auto e = trajectory_energy(spec, p)) s.energy = *e;
  s.sum_drift = std::abs(p.sum() - 1.0);
  s.min_coordinate = p.minCoeff();
  return s;
}

void require_state(Eigen::Index n, const Vector& p0) {
  if (p0.size() != n) {
    throw DimensionError("initial state has " + std::to_string(p0.size()) +
                         " entries but the dynamics has " + std::to_string(n) +
                         " strategies");
  }
}

}  // namespace

void validate(const IntegratorConfig& cfg) {
  if (!(cfg.dt > 0.0) || !(cfg.t_max > 0.0) || cfg.dt > cfg.t_max) {
    throw ParameterError("integrator needs 0 < dt <= t_max");
  }
  if (cfg.record_every < 1) throw ParameterError("record_every must be >= 1");
  if (!(cfg.conv_tol > 0.0)) throw ParameterError("conv_tol must be > 0");
  if (cfg.conv_window < 1) throw ParameterError("conv_window must be >= 1");
}

Trajectory integrate(const DynamicsSpec& spec, const Vector& p0,
                     const IntegratorConfig& cfg) {
  validate(spec);
  validate(cfg);
  require_state(dimension(spec), p0);

  const Field field = make_field(spec, cfg.route);
  const FitnessModel model = underlying_model(spec);
  const auto total_steps =
      static_cast<std::size_t>(std::llround(std::floor(cfg.t_max / cfg.dt + 1e-9)));

  Trajectory traj;
  Vector p = p0;
  Vector v = field(p);
  std::size_t quiet_steps = 0;
  traj.samples.push_back(make_sample(spec, model, 0.0, p));

  std::size_t n = 0;
  while (n < total_steps) {
    Vector next = cfg.positivity_guard
                      ? guarded_advance(field, p, v, cfg.dt, 0, traj.halvings)
                      : rk4_step(field, p, v, cfg.dt);
    if (!next.allFinite()) {
      throw StepFailure("integration produced a non-finite state at t = " +
                        std::to_string(static_cast<double>(n + 1) * cfg.dt));
    }
    if (cfg.positivity_guard) next = renormalize(next.cwiseMax(0.0)).values();
    p = std::move(next);
    ++n;
    v = field(p);

    const double t = static_cast<double>(n) * cfg.dt;
    if (n % cfg.record_every == 0) traj.samples.push_back(make_sample(spec, model, t, p));

    quiet_steps = v.lpNorm<Eigen::Infinity>() < cfg.conv_tol ? quiet_steps + 1 : 0;
    if (quiet_steps >= cfg.conv_window) {
      traj.converged = true;
      break;
    }
  }

  traj.steps = n;
  traj.residual = v.lpNorm<Eigen::Infinity>();
  traj.final_state = make_sample(spec, model, static_cast<double>(n) * cfg.dt, p);
  return traj;
}

Vector discrete_growth_step(const FitnessModel& model, double lambda,
                            const Vector& p) {
  const Vector shifted = fitness(model, p).array() + lambda;
  for (Eigen::Index i = 0; i < shifted.size(); ++i) {
    if (!(shifted[i] > 0.0)) {
      throw PositivityError("shifted fitness f_" + std::to_string(i) +
                            " + lambda is not positive");
    }
  }
  return renormalize(p.cwiseProduct(shifted)).values();
}

Trajectory discrete_iterate(const FitnessModel& model, double lambda,
                            const Vector& p0, const DiscreteConfig& cfg) {
  if (!(lambda >= 0.0)) throw ParameterError("lambda must be >= 0");
  if (cfg.max_iters < 1) throw ParameterError("max_iters must be >= 1");
  if (!(cfg.conv_tol > 0.0)) throw ParameterError("conv_tol must be > 0");
  if (cfg.record_every < 1) throw ParameterError("record_every must be >= 1");
  require_state(dimension(model), p0);

  const PayoffMatrix* a = linear_payoff(model);
  auto sample = [&](std::size_t iter, const Vector& p) {
    TrajectorySample s;
    s.t = static_cast<double>(iter);
    s.p = p;
    s.mean_fitness = mean_fitness(model, p);
    if (a != nullptr) s.energy = -s.mean_fitness - lambda * p.sum();
    s.sum_drift = std::abs(p.sum() - 1.0);
    s.min_coordinate = p.minCoeff();
    return s;
  };

  Trajectory traj;
  Vector p = p0;
  traj.samples.push_back(sample(0, p));
  double change = 0.0;
  std::size_t iter = 0;
  while (iter < cfg.max_iters) {
    Vector next = discrete_growth_step(model, lambda, p);
    change = (next - p).lpNorm<Eigen::Infinity>();
    p = std::move(next);
    ++iter;
    if (iter % cfg.record_every == 0) traj.samples.push_back(sample(iter, p));
    if (change < cfg.conv_tol) {
      traj.converged = true;
      break;
    }
  }
  traj.steps = iter;
  traj.residual = change;
  traj.final_state = sample(iter, p);
  return traj;
}

double max_objective_decrease(const Trajectory& run) {
  double worst = 0.0;
  for (std::size_t k = 1; k < run.samples.size(); ++k) {
    worst = std::max(worst, run.samples[k - 1].mean_fitness - run.samples[k].mean_fitness);
  }
  return worst;
}

}  // namespace gtdyn
