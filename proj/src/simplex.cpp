#include "gtdyn/simplex.hpp"

#include <cmath>
#include <random>
#include <string>

#include "gtdyn/errors.hpp"

namespace gtdyn {

namespace {

// Sum of every entry except the first largest one, in index order.
double sum_without(const Vector& v, Eigen::Index skip) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i != skip) s += v[i];
  }
  return s;
}

Eigen::Index first_max(const Vector& v) {
  Eigen::Index k = 0;
  v.maxCoeff(&k);
  return k;
}

// Canonical floating-point sum: the largest entry is added last. Setting that
// entry to 1 - (sum of the rest) then makes this sum exactly 1, because the
// rest is at most 1 - 1/n and the final rounding error stays below half an ulp
// of 1.
double canonical_sum(const Vector& v) {
  const Eigen::Index k = first_max(v);
  return sum_without(v, k) + v[k];
}

}  // namespace

SimplexPoint SimplexPoint::vertex(Eigen::Index n, Eigen::Index i) {
  if (n < 2) throw DimensionError("simplex dimension must be at least 2");
  if (i < 0 || i >= n) throw DimensionError("vertex index out of range");
  Vector p = Vector::Zero(n);
  p[i] = 1.0;
  return SimplexPoint(std::move(p));
}

SimplexPoint SimplexPoint::centroid(Eigen::Index n) {
  if (n < 2) throw DimensionError("simplex dimension must be at least 2");
  return renormalize(Vector::Constant(n, 1.0));
}

SimplexPoint make_simplex_point(const Vector& raw, const Tolerance& tol) {
  if (raw.size() < 2) {
    throw DimensionError("simplex point needs at least 2 entries, got " +
                         std::to_string(raw.size()));
  }
  for (Eigen::Index i = 0; i < raw.size(); ++i) {
    if (!std::isfinite(raw[i])) {
      throw ConstraintError("entry " + std::to_string(i) + " is not finite");
    }
    if (raw[i] < -tol.pos_tol) {
      throw ConstraintError("entry " + std::to_string(i) +
                            " is negative: " + std::to_string(raw[i]));
    }
  }
  const double s = canonical_sum(raw);
  if (std::abs(s - 1.0) > tol.sum_tol) {
    throw ConstraintError("entries sum to " + std::to_string(s) +
                          ", expected 1");
  }
  return renormalize(raw.cwiseMax(0.0));
}

SimplexPoint make_simplex_point(std::span<const double> raw,
                                const Tolerance& tol) {
  Vector v(static_cast<Eigen::Index>(raw.size()));
  for (std::size_t i = 0; i < raw.size(); ++i) v[i] = raw[i];
  return make_simplex_point(v, tol);
}

SimplexPoint renormalize(const Vector& p) {
  if (p.size() < 2) throw DimensionError("simplex dimension must be at least 2");
  if ((p.array() < 0.0).any()) {
    throw ConstraintError("renormalize needs nonnegative entries");
  }
  const double s = canonical_sum(p);
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw DegenerateError("cannot renormalize a vector with zero sum");
  }
  if (s == 1.0) return SimplexPoint(p);

  Vector q = p / s;
  // Ties for the largest entry can move the argmax after the correction;
  // repeat until the canonical sum settles.
  for (int iter = 0; iter < 8; ++iter) {
    const Eigen::Index k = first_max(q);
    q[k] = 1.0 - sum_without(q, k);
    if (canonical_sum(q) == 1.0) break;
  }
  return SimplexPoint(std::move(q));
}

SimplexPoint sample_uniform(Eigen::Index n, std::uint64_t seed) {
  if (n < 2) throw DimensionError("simplex dimension must be at least 2");
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> exp1(1.0);
  Vector e(n);
  for (Eigen::Index i = 0; i < n; ++i) e[i] = exp1(rng);
  return renormalize(e);
}

SimplexPoint sample_interior(Eigen::Index n, std::uint64_t seed,
                             double shrink) {
  if (!(shrink > 0.0 && shrink <= 1.0)) {
    throw ParameterError("shrink must lie in (0, 1]");
  }
  const Vector u = sample_uniform(n, seed).values();
  return renormalize((1.0 - shrink) * u +
                     Vector::Constant(n, shrink / static_cast<double>(n)));
}

Matrix tangent_basis(Eigen::Index n) {
  if (n < 2) throw DimensionError("simplex dimension must be at least 2");
  // The first Householder column spans the all-ones direction; the remaining
  // columns span its orthogonal complement.
  const Matrix ones = Matrix::Constant(n, 1, 1.0);
  Eigen::HouseholderQR<Matrix> qr(ones);
  const Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  return q.rightCols(n - 1);
}

}  // namespace gtdyn
