#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gtdyn/solver.hpp"

namespace gtdyn {

enum class StabilityClass {
  kAsymptoticallyStable,
  kNeutrallyStable,
  kUnstable,
  kSaddle,
  kInconclusive,
};

std::string to_string(StabilityClass s);
std::optional<StabilityClass> stability_from_string(const std::string& s);

struct EquilibriumOptions {
  double nash_tol = 1e-6;
  double support_tol = 1e-6;
  std::size_t ess_samples = 200;
  double ess_radius = 0.01;
  // Invasion test demands p*'Aq - q'Aq > ess_strictness * |q - p*|^2, which
  // separates strict superiority from payoff ties at round-off level.
  double ess_strictness = 1e-8;
  double jacobian_step = 1e-6;
  double stability_tol = 1e-6;
  std::uint64_t seed = 0;
};

struct EssVerdict {
  bool verdict = false;
  std::size_t samples = 0;  // directions drawn
  std::size_t tested = 0;   // directions passing the alternative-best-reply filter
  double radius = 0.0;
};

struct EquilibriumReport {
  std::string family;
  Vector point;
  double residual = 0.0;
  std::vector<Eigen::Index> support;
  std::optional<bool> nash;  // empty when not asserted (BNN with margin)
  Vector excess;             // f_i(p*) - fbar(p*)
  std::optional<EssVerdict> ess;  // linear games only
  std::vector<std::complex<double>> spectrum;
  StabilityClass stability = StabilityClass::kInconclusive;
  bool converged = false;
  double t_end = 0.0;
  std::vector<std::string> flags;  // e.g. "not_converged", "margin_displaced"
};

// Central-difference Jacobian of the named field at p (N x N).
Matrix velocity_jacobian(const DynamicsSpec& spec, const Vector& p, double step = 1e-6);

// Eigenvalues of B' J B for an orthonormal tangent basis B.
std::vector<std::complex<double>> tangent_spectrum(const DynamicsSpec& spec,
                                                   const Vector& p,
                                                   double step = 1e-6);

StabilityClass classify_spectrum(const std::vector<std::complex<double>>& spectrum,
                                 double tol = 1e-6);

// Sampled local-invasion test for a linear game at p*.
EssVerdict ess_test(const PayoffMatrix& a, const Vector& p_star,
                    const EquilibriumOptions& opts = {});

// Classifies a given point without integrating; converged reports whether the
// velocity norm there is below conv_tol.
EquilibriumReport classify_point(const DynamicsSpec& spec, const Vector& p,
                                 double conv_tol = 1e-8,
                                 const EquilibriumOptions& opts = {});

// Integrates from p0 and classifies the final state. A run that does not
// converge still yields a report, flagged "not_converged".
EquilibriumReport find_equilibrium(const DynamicsSpec& spec, const Vector& p0,
                                   const IntegratorConfig& cfg = {},
                                   const EquilibriumOptions& opts = {});

}  // namespace gtdyn
