#include "gtdyn/equilibrium.hpp"

#include <algorithm>
#include <cmath>

#include "gtdyn/errors.hpp"

namespace gtdyn {

std::string to_string(StabilityClass s) {
  switch (s) {
    case StabilityClass::kAsymptoticallyStable: return "asymptotically stable";
    case StabilityClass::kNeutrallyStable: return "neutrally stable";
    case StabilityClass::kUnstable: return "unstable";
    case StabilityClass::kSaddle: return "saddle";
    case StabilityClass::kInconclusive: return "inconclusive";
  }
  return "inconclusive";
}

std::optional<StabilityClass> stability_from_string(const std::string& s) {
  for (auto c : {StabilityClass::kAsymptoticallyStable, StabilityClass::kNeutrallyStable,
                 StabilityClass::kUnstable, StabilityClass::kSaddle,
                 StabilityClass::kInconclusive}) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

Matrix velocity_jacobian(const DynamicsSpec& spec, const Vector& p, double step) {
  if (!(step > 0.0)) throw ParameterError("Jacobian step must be > 0");
  const Eigen::Index n = p.size();
  Matrix jac(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Vector plus = p;
    Vector minus = p;
    plus[j] += step;
    minus[j] -= step;
    jac.col(j) = (velocity(spec, plus) - velocity(spec, minus)) / (2.0 * step);
  }
  return jac;
}

std::vector<std::complex<double>> tangent_spectrum(const DynamicsSpec& spec,
                                                   const Vector& p, double step) {
  const Matrix basis = tangent_basis(p.size());
  const Matrix restricted = basis.transpose() * velocity_jacobian(spec, p, step) * basis;
  Eigen::EigenSolver<Matrix> solver(restricted, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw DegenerateError("eigenvalue computation did not converge");
  }
  std::vector<std::complex<double>> out;
  for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k) {
    out.push_back(solver.eigenvalues()[k]);
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
  });
  return out;
}

StabilityClass classify_spectrum(const std::vector<std::complex<double>>& spectrum,
                                 double tol) {
  if (spectrum.empty()) return StabilityClass::kInconclusive;
  double lo = spectrum.front().real();
  double hi = lo;
  double max_imag = 0.0;
  for (const auto& z : spectrum) {
    lo = std::min(lo, z.real());
    hi = std::max(hi, z.real());
    max_imag = std::max(max_imag, std::abs(z.imag()));
  }
  if (hi < -tol) return StabilityClass::kAsymptoticallyStable;
  if (lo < -tol && hi > tol) return StabilityClass::kSaddle;
  if (hi > tol) return StabilityClass::kUnstable;
  if (lo >= -tol && max_imag > tol) return StabilityClass::kNeutrallyStable;
  return StabilityClass::kInconclusive;
}

EssVerdict ess_test(const PayoffMatrix& a, const Vector& p_star,
                    const EquilibriumOptions& opts) {
  const Matrix& m = a.matrix();
  const Eigen::Index n = p_star.size();
  const double base = p_star.dot(m * p_star);

  EssVerdict out;
  out.samples = opts.ess_samples;
  out.radius = opts.ess_radius;
  out.verdict = true;
  for (std::size_t k = 0; k < opts.ess_samples; ++k) {
    // Moving toward a uniform sample keeps q on the simplex.
    const Vector target = sample_uniform(n, opts.seed * 1000003ULL + k).values();
    const Vector dir = target - p_star;
    const double len = dir.norm();
    if (len == 0.0) continue;
    const Vector q = p_star + std::min(opts.ess_radius, len) / len * dir;

    if (std::abs(base - q.dot(m * p_star)) > opts.nash_tol) continue;
    ++out.tested;
    const double gap = p_star.dot(m * q) - q.dot(m * q);
    if (!(gap > opts.ess_strictness * (q - p_star).squaredNorm())) {
      out.verdict = false;
    }
  }
  return out;
}

EquilibriumReport classify_point(const DynamicsSpec& spec, const Vector& p,
                                 double conv_tol, const EquilibriumOptions& opts) {
  validate(spec);
  if (p.size() != dimension(spec)) {
    throw DimensionError("point dimension does not match the dynamics");
  }
  EquilibriumReport report;
  report.family = family_name(spec);
  report.point = p;
  report.residual = velocity(spec, p).lpNorm<Eigen::Infinity>();
  report.converged = report.residual < conv_tol;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] > opts.support_tol) report.support.push_back(i);
  }

  const FitnessModel model = underlying_model(spec);
  const Vector f = fitness(model, p);
  report.excess = f.array() - p.dot(f);

  const auto* bnn = std::get_if<Bnn>(&spec);
  if (bnn != nullptr && bnn->epsilon > 0.0) {
    report.flags.push_back("margin_displaced");
  } else {
    bool nash = (report.excess.array() <= opts.nash_tol).all();
    for (Eigen::Index i : report.support) {
      nash = nash && std::abs(report.excess[i]) <= opts.nash_tol;
    }
    report.nash = nash;
  }

  if (const PayoffMatrix* a = linear_payoff(model)) {
    EssVerdict ess = ess_test(*a, p, opts);
    if (report.nash.has_value() && !*report.nash) ess.verdict = false;
    report.ess = ess;
  }

  report.spectrum = tangent_spectrum(spec, p, opts.jacobian_step);
  report.stability = classify_spectrum(report.spectrum, opts.stability_tol);
  return report;
}

EquilibriumReport find_equilibrium(const DynamicsSpec& spec, const Vector& p0,
                                   const IntegratorConfig& cfg,
                                   const EquilibriumOptions& opts) {
  const Trajectory traj = integrate(spec, p0, cfg);
  EquilibriumReport report = classify_point(spec, traj.final_state.p, cfg.conv_tol, opts);
  report.converged = traj.converged;
  report.t_end = traj.final_state.t;
  if (!traj.converged) report.flags.insert(report.flags.begin(), "not_converged");
  return report;
}

}  // namespace gtdyn
