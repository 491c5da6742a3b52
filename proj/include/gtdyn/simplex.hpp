#pragma once

#include <cstdint>
#include <span>

#include <Eigen/Dense>

namespace gtdyn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct Tolerance {
  double sum_tol = 1e-9;   // accepted slack on the unit sum of raw input
  double pos_tol = 1e-12;  // accepted negativity before an entry is an error
  double conv_tol = 1e-8;  // velocity-norm convergence threshold
};

// A population state on the probability simplex: nonnegative relative
// abundances with unit sum. Immutable once built; only the factory functions
// below can produce one.
class SimplexPoint {
 public:
  SimplexPoint() = delete;

  Eigen::Index size() const { return p_.size(); }
  double operator[](Eigen::Index i) const { return p_[i]; }
  const Vector& values() const { return p_; }
  operator const Vector&() const { return p_; }  // NOLINT: deliberate view

  bool is_interior() const { return (p_.array() > 0.0).all(); }

  static SimplexPoint vertex(Eigen::Index n, Eigen::Index i);
  static SimplexPoint centroid(Eigen::Index n);

 private:
  explicit SimplexPoint(Vector p) : p_(std::move(p)) {}

  Vector p_;

  friend SimplexPoint renormalize(const Vector& p);
};

// Validates raw input, clamps entries in [-pos_tol, 0) to zero and rescales to
// exact unit sum.
SimplexPoint make_simplex_point(const Vector& raw, const Tolerance& tol = {});
SimplexPoint make_simplex_point(std::span<const double> raw,
                                const Tolerance& tol = {});

// Divides by the sum. Throws DegenerateError only when the sum is exactly 0
// (or not finite); subnormal but positive sums still normalize. The result has
// a floating-point sum of exactly 1 whenever the final correction succeeds,
// which makes the operation idempotent.
SimplexPoint renormalize(const Vector& p);

// Uniform sample on the simplex by normalized exponential spacings.
SimplexPoint sample_uniform(Eigen::Index n, std::uint64_t seed);

// Uniform sample pulled toward the centroid: (1 - shrink) * u + shrink / n.
// Keeps every coordinate at least shrink / n away from the boundary.
SimplexPoint sample_interior(Eigen::Index n, std::uint64_t seed,
                             double shrink = 0.1);

// Orthonormal basis (n x (n-1)) of the tangent space {x : sum(x) = 0}.
Matrix tangent_basis(Eigen::Index n);

}  // namespace gtdyn
