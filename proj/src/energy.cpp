#include "gtdyn/energy.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

#include "gtdyn/detail/overloaded.hpp"
#include "gtdyn/errors.hpp"

namespace gtdyn {

namespace {

using detail::overloaded;

void require_interior(const Vector& p, const char* what) {
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (!(p[i] > 0.0)) {
      throw DomainError(std::string(what) + " needs p_i > 0 for all i (p_" +
                        std::to_string(i) + " = " + std::to_string(p[i]) + ")");
    }
  }
}

void require_size(Eigen::Index expected, const Vector& p) {
  if (p.size() != expected) {
    throw DimensionError("expected a point with " + std::to_string(expected) +
                         " entries, got " + std::to_string(p.size()));
  }
}

void require_offset(double c) {
  if (!(c > 0.0 && c < 1.0)) {
    throw ParameterError("integration offset c must lie in (0, 1)");
  }
}

// int_a^b fn(z) dz by adaptive Gauss-Kronrod 15/31 (7/15 is too coarse near
// the 1/z factor). Boost's stopping rule is relative to the L1 norm and keeps
// splitting, summing inflated estimates, once the target drops below the
// rule's round-off floor; the absolute target is therefore converted into a
// relative one from a first unrefined pass.
double integrate(const std::function<double(double)>& fn, double a, double b) {
  if (a == b) return 0.0;
  using gk = boost::math::quadrature::gauss_kronrod<double, 31>;
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  double error = 0.0;
  double l1 = 0.0;
  double value = gk::integrate(fn, lo, hi, 0, 0.0, &error, &l1);
  if (error > 0.5 * kQuadratureAbsTol) {
    const double rel = std::max(0.5 * kQuadratureAbsTol / l1, 1e-12);
    value = gk::integrate(fn, lo, hi, 15, rel, &error);
  }
  if (!std::isfinite(value) || error > kQuadratureAbsTol) {
    throw QuadratureError(fmt::format(
        "quadrature error estimate {:.3g} exceeds 1e-10 on [{}, {}]", error, lo, hi));
  }
  return a < b ? value : -value;
}

// Fitness component i with coordinate i replaced by z.
double partial_fitness(const FitnessModel& model, const Vector& p,
                       Eigen::Index i, double z) {
  Vector q = p;
  q[i] = z;
  return fitness(model, q)[i];
}

double bnn_partial_excess(const PayoffMatrix& a, double epsilon, const Vector& p,
                          Eigen::Index i, double z) {
  Vector q = p;
  q[i] = z;
  const Vector aq = a.matrix() * q;
  return aq[i] - q.dot(aq) + epsilon;
}

// int_lo^hi of max(0, e(z)) / z for the quadratic excess e, split at its
// vertex and at the roots located by bisection on each monotone piece.
double integrate_positive_part(const std::function<double(double)>& excess,
                               double lo, double hi) {
  const double e0 = excess(0.0);
  const double e_plus = excess(1.0);
  const double e_minus = excess(-1.0);
  const double alpha = 0.5 * (e_plus + e_minus) - e0;
  const double beta = 0.5 * (e_plus - e_minus);

  std::vector<double> cuts{lo, hi};
  if (std::abs(alpha) > 1e-300) {
    const double vertex = -beta / (2.0 * alpha);
    if (vertex > lo && vertex < hi) cuts.push_back(vertex);
  }
  std::sort(cuts.begin(), cuts.end());

  std::vector<double> nodes;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    double a = cuts[k];
    double b = cuts[k + 1];
    nodes.push_back(a);
    double ea = excess(a);
    const double eb = excess(b);
    if ((ea > 0.0) != (eb > 0.0)) {
      for (int iter = 0; iter < 200 && b - a > 1e-15 * std::max(1.0, b); ++iter) {
        const double mid = 0.5 * (a + b);
        const double em = excess(mid);
        if ((em > 0.0) == (ea > 0.0)) {
          a = mid;
          ea = em;
        } else {
          b = mid;
        }
      }
      nodes.push_back(0.5 * (a + b));
    }
  }
  nodes.push_back(hi);

  double total = 0.0;
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
    const double a = nodes[k];
    const double b = nodes[k + 1];
    if (b <= a) continue;
    if (excess(0.5 * (a + b)) <= 0.0) continue;
    total += integrate(
        [&](double z) { return std::max(0.0, excess(z)) / z; }, a, b);
  }
  return total;
}

// Signed int_c^u of the strategy-i integrand of an integral cost, with the
// integrand's other coordinates frozen at p.
double integral_term(const CostFunction& h, const Vector& p, Eigen::Index i,
                     double c, double u, bool force_quadrature) {
  return std::visit(
      overloaded{
          [&](const ReplicatorIntegralCost& r) -> double {
            if (!force_quadrature) {
              if (const auto* cst = std::get_if<ConstantFitness>(&r.model)) {
                return cst->values[i] * (u - c);
              }
              const PayoffMatrix* a = nullptr;
              double q = 0.0;
              if (const auto* lin = std::get_if<LinearFitness>(&r.model)) {
                a = &lin->a;
              } else if (const auto* quad = std::get_if<QuadraticFitness>(&r.model)) {
                a = &quad->a;
                q = quad->q[i];
              }
              if (a != nullptr) {
                const double aii = (*a)(i, i);
                const double rest = a->matrix().row(i).dot(p) - aii * p[i];
                return rest * (u - c) + 0.5 * aii * (u * u - c * c) +
                       q * (u * u * u - c * c * c) / 3.0;
              }
            }
            return integrate(
                [&](double z) { return partial_fitness(r.model, p, i, z); }, c, u);
          },
          [&](const LogitIntegralCost& l) -> double {
            return integrate(
                [&](double z) {
                  return std::exp(partial_fitness(l.model, p, i, z) / l.eta) / z;
                },
                c, u);
          },
          [&](const BnnIntegralCost& b) -> double {
            auto excess = [&](double z) {
              return bnn_partial_excess(b.a, b.epsilon, p, i, z);
            };
            if (u >= c) return integrate_positive_part(excess, c, u);
            return -integrate_positive_part(excess, u, c);
          },
          [](const auto&) -> double {
            throw ParameterError("cost function has no integral terms");
          }},
      h);
}

double integral_origin(const CostFunction& h) {
  return std::visit(overloaded{[](const ReplicatorIntegralCost& r) { return r.c; },
                               [](const LogitIntegralCost& l) { return l.c; },
                               [](const BnnIntegralCost& b) { return b.c; },
                               [](const auto&) -> double {
                                 throw ParameterError("cost function has no integral terms");
                               }},
                    h);
}

bool is_integral_form(const CostFunction& h) {
  return std::holds_alternative<ReplicatorIntegralCost>(h) ||
         std::holds_alternative<LogitIntegralCost>(h) ||
         std::holds_alternative<BnnIntegralCost>(h);
}

double integral_lambda(const CostFunction& h) {
  if (const auto* r = std::get_if<ReplicatorIntegralCost>(&h)) return r->lambda;
  return 0.0;
}

Eigen::Index cost_dimension(const CostFunction& h) {
  return std::visit(
      overloaded{[](const QuadraticPayoffCost& c) { return c.a.size(); },
                 [](const ReplicatorIntegralCost& c) { return dimension(c.model); },
                 [](const QuasispeciesLogCost& c) { return c.fitness.size(); },
                 [](const LogitIntegralCost& c) { return dimension(c.model); },
                 [](const BnnIntegralCost& c) { return c.a.size(); }},
      h);
}

void validate_cost(const CostFunction& h, const Vector& p) {
  require_size(cost_dimension(h), p);
  std::visit(
      overloaded{
          [](const QuadraticPayoffCost& c) {
            if (!(c.lambda >= 0.0)) throw ParameterError("lambda must be >= 0");
          },
          [&](const ReplicatorIntegralCost& c) {
            if (!(c.lambda >= 0.0)) throw ParameterError("lambda must be >= 0");
            require_offset(c.c);
            require_interior(p, "replicator integral energy");
          },
          [&](const QuasispeciesLogCost& c) {
            if (c.mutation.size() != c.fitness.size()) {
              throw DimensionError("fitness and mutation matrix sizes differ");
            }
            require_interior(p, "quasispecies log energy");
          },
          [&](const LogitIntegralCost& c) {
            if (!(c.eta > 0.0)) throw ParameterError("eta must be > 0");
            require_offset(c.c);
            require_interior(p, "logit integral energy");
          },
          [&](const BnnIntegralCost& c) {
            require_offset(c.c);
            require_interior(p, "BNN integral energy");
          }},
      h);
}

double evaluate(const CostFunction& h, const Vector& p, bool force_quadrature) {
  validate_cost(h, p);
  if (const auto* q = std::get_if<QuadraticPayoffCost>(&h)) {
    return -p.dot(q->a.matrix() * p) - q->lambda * p.sum();
  }
  if (const auto* q = std::get_if<QuasispeciesLogCost>(&h)) {
    const Vector inflow = q->mutation.matrix().transpose() * p.cwiseProduct(q->fitness);
    return -p.array().log().matrix().dot(inflow) - q->lambda * p.sum();
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    total += integral_term(h, p, i, integral_origin(h), p[i], force_quadrature);
  }
  return -total - integral_lambda(h) * p.sum();
}

}  // namespace

std::string cost_name(const CostFunction& h) {
  return std::visit(
      overloaded{[](const QuadraticPayoffCost&) { return "quadratic_payoff"; },
                 [](const ReplicatorIntegralCost&) { return "replicator_integral"; },
                 [](const QuasispeciesLogCost&) { return "quasispecies_log"; },
                 [](const LogitIntegralCost&) { return "logit_integral"; },
                 [](const BnnIntegralCost&) { return "bnn_integral"; }},
      h);
}

double evaluate_H(const CostFunction& h, const Vector& p) {
  return evaluate(h, p, false);
}

double evaluate_H_by_quadrature(const CostFunction& h, const Vector& p) {
  return evaluate(h, p, true);
}

Vector numerical_gradient(const CostFunction& h, const Vector& p, double step) {
  if (!(step >= 1e-8 && step <= 1e-4)) {
    throw ParameterError("finite-difference step must lie in [1e-8, 1e-4]");
  }
  validate_cost(h, p);
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (!(p[i] - step > 0.0)) {
      throw DomainError("finite-difference stencil leaves the interior at p_" +
                        std::to_string(i));
    }
  }

  Vector grad(p.size());
  if (is_integral_form(h)) {
    const double lambda = integral_lambda(h);
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      // The difference of the two terms is the integral across the stencil.
      const double span = integral_term(h, p, i, p[i] - step, p[i] + step, false);
      grad[i] = -span / (2.0 * step) - lambda;
    }
    return grad;
  }
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    Vector plus = p;
    Vector minus = p;
    plus[i] += step;
    minus[i] -= step;
    grad[i] = (evaluate_H(h, plus) - evaluate_H(h, minus)) / (2.0 * step);
  }
  return grad;
}

CostFunction cost_for_spec(const DynamicsSpec& spec, const Vector& p) {
  return std::visit(
      overloaded{
          [](const Replicator& s) -> CostFunction {
            return ReplicatorIntegralCost{s.model, s.lambda, 0.5};
          },
          [](const Quasispecies& s) -> CostFunction {
            return QuasispeciesLogCost{s.fitness, s.mutation, s.lambda};
          },
          [&](const ReplicatorMutator& s) -> CostFunction {
            return QuasispeciesLogCost{fitness(s.model, p), s.mutation, s.lambda};
          },
          [](const Logit& s) -> CostFunction {
            return LogitIntegralCost{s.model, s.eta, 0.5};
          },
          [](const Bnn& s) -> CostFunction {
            return BnnIntegralCost{s.a, s.epsilon, 0.5};
          },
          [&](const auto&) -> CostFunction {
            throw UnsupportedFamily("no cataloged energy for the " +
                                    family_name(spec) + " family");
          }},
      spec);
}

Vector engine_fitness(const DynamicsSpec& spec, const Vector& p) {
  validate(spec);
  require_size(dimension(spec), p);
  require_interior(p, "engine fitness");
  return std::visit(
      overloaded{
          [&](const Replicator& s) -> Vector {
            return fitness(s.model, p).array() + s.lambda;
          },
          [&](const Quasispecies& s) -> Vector {
            const Vector inflow =
                s.mutation.matrix().transpose() * p.cwiseProduct(s.fitness);
            return inflow.cwiseQuotient(p).array() + s.lambda;
          },
          [&](const ReplicatorMutator& s) -> Vector {
            const Vector inflow =
                s.mutation.matrix().transpose() * p.cwiseProduct(fitness(s.model, p));
            return inflow.cwiseQuotient(p).array() + s.lambda;
          },
          [&](const Logit& s) -> Vector {
            return (fitness(s.model, p) / s.eta).array().exp() / p.array();
          },
          [&](const Bnn& s) -> Vector {
            return bnn_excess(s.a, s.epsilon, p).cwiseQuotient(p);
          },
          [&](const SelectorWeighted& s) -> Vector {
            Vector f = fitness(s.model, p).array() + s.lambda;
            for (Eigen::Index i = 0; i < p.size(); ++i) {
              f[i] *= selector_eval(s.selector, p[i]);
            }
            return f;
          },
          [](const BestResponse&) -> Vector {
            throw UnsupportedFamily("best-response dynamics has no engine fitness");
          }},
      spec);
}

GradientResidualReport gradient_residual_report(const DynamicsSpec& spec,
                                                const Vector& p, double step) {
  const CostFunction h = cost_for_spec(spec, p);
  GradientResidualReport report;
  report.family = family_name(spec);
  report.cost = cost_name(h);
  report.energy_fitness = -numerical_gradient(h, p, step);
  report.engine_fitness = engine_fitness(spec, p);
  report.residual = (report.energy_fitness - report.engine_fitness).cwiseAbs();
  report.predicted = Vector::Zero(p.size());

  // The log form's derivative carries f_i sum_k m_ik log(p_k) on top of the
  // engine fitness.
  if (const auto* q = std::get_if<QuasispeciesLogCost>(&h)) {
    const Vector logp = p.array().log();
    report.predicted = q->fitness.cwiseProduct(q->mutation.matrix() * logp);
  }
  report.max_residual = report.residual.maxCoeff();
  report.max_prediction_gap =
      (report.residual - report.predicted.cwiseAbs()).cwiseAbs().maxCoeff();
  return report;
}

std::string to_string(CurvatureClass c) {
  switch (c) {
    case CurvatureClass::kStrictlyConvex: return "StrictlyConvex";
    case CurvatureClass::kConvex: return "Convex";
    case CurvatureClass::kStrictlyConcave: return "StrictlyConcave";
    case CurvatureClass::kConcave: return "Concave";
    case CurvatureClass::kIndefinite: return "Indefinite";
    case CurvatureClass::kFlat: return "Flat";
  }
  return "Flat";
}

std::optional<CurvatureClass> curvature_from_string(const std::string& s) {
  for (auto c : {CurvatureClass::kStrictlyConvex, CurvatureClass::kConvex,
                 CurvatureClass::kStrictlyConcave, CurvatureClass::kConcave,
                 CurvatureClass::kIndefinite, CurvatureClass::kFlat}) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

CurvatureReport curvature_class(const PayoffMatrix& a, double lambda) {
  if (a.size() < 2) throw DimensionError("curvature needs N >= 2");
  if (!(lambda >= 0.0)) throw ParameterError("lambda must be >= 0");
  const Matrix hessian = -(a.matrix() + a.matrix().transpose());
  const Matrix basis = tangent_basis(a.size());
  const Matrix restricted = basis.transpose() * hessian * basis;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(restricted, Eigen::EigenvaluesOnly);

  CurvatureReport report;
  report.tangent_eigenvalues = solver.eigenvalues();
  const Vector& ev = report.tangent_eigenvalues;
  const double lo = ev.minCoeff();
  const double hi = ev.maxCoeff();
  if (lo >= -kCurvatureTol && hi <= kCurvatureTol) {
    report.cls = CurvatureClass::kFlat;
  } else if (lo > kCurvatureTol) {
    report.cls = CurvatureClass::kStrictlyConvex;
  } else if (lo >= -kCurvatureTol) {
    report.cls = CurvatureClass::kConvex;
  } else if (hi < -kCurvatureTol) {
    report.cls = CurvatureClass::kStrictlyConcave;
  } else if (hi <= kCurvatureTol) {
    report.cls = CurvatureClass::kConcave;
  } else {
    report.cls = CurvatureClass::kIndefinite;
  }
  return report;
}

std::optional<double> trajectory_energy(const DynamicsSpec& spec, const Vector& p) {
  if (const auto* r = std::get_if<Replicator>(&spec)) {
    if (const PayoffMatrix* a = linear_payoff(r->model)) {
      return evaluate_H(QuadraticPayoffCost{*a, r->lambda}, p);
    }
    return std::nullopt;
  }
  if (const auto* q = std::get_if<Quasispecies>(&spec)) {
    if ((p.array() > 0.0).all()) {
      return evaluate_H(QuasispeciesLogCost{q->fitness, q->mutation, q->lambda}, p);
    }
  }
  return std::nullopt;
}

}  // namespace gtdyn
