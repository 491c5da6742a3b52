#pragma once

#include <string_view>
#include <variant>

#include "gtdyn/simplex.hpp"

namespace gtdyn {

// Square matrix of finite payoffs; entry (i, j) is the payoff of strategy i
// against strategy j.
class PayoffMatrix {
 public:
  explicit PayoffMatrix(Matrix a);

  const Matrix& matrix() const { return a_; }
  Eigen::Index size() const { return a_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return a_(i, j); }

 private:
  Matrix a_;
};

struct ConstantFitness {
  Vector values;
};

struct LinearFitness {
  PayoffMatrix a;
};

// f_i(p) = (Ap)_i + q_i p_i^2
struct QuadraticFitness {
  PayoffMatrix a;
  Vector q;
};

// f_i(p) = tanh((Ap)_i) + c
struct SaturatingFitness {
  PayoffMatrix a;
  double c = 0.0;
};

using FitnessModel =
    std::variant<ConstantFitness, LinearFitness, QuadraticFitness,
                 SaturatingFitness>;

FitnessModel make_constant_fitness(Vector values);
FitnessModel make_quadratic_fitness(PayoffMatrix a, Vector q);
FitnessModel make_saturating_fitness(PayoffMatrix a, double c);

Eigen::Index dimension(const FitnessModel& model);

// Payoff matrix of a Linear model; nullptr for every other variant.
const PayoffMatrix* linear_payoff(const FitnessModel& model);

// Fitness evaluated at an arbitrary point of R^N. The formulas are polynomial
// or analytic, so points slightly off the simplex (Runge-Kutta stages,
// finite-difference stencils, integration dummies) are fine.
Vector fitness(const FitnessModel& model, const Vector& p);
double mean_fitness(const FitnessModel& model, const Vector& p);

// Canonical linear games: rps, prisoners_dilemma, hawk_dove (V=2, C=4),
// coordination.
FitnessModel standard_game(std::string_view name);

// Symmetric doubly stochastic matrix; entry (j, i) is the probability that
// strategy j mutates into strategy i.
class MutationMatrix {
 public:
  explicit MutationMatrix(Matrix m);

  const Matrix& matrix() const { return m_; }
  Eigen::Index size() const { return m_.rows(); }

 private:
  Matrix m_;
};

struct IdentityMutation {
  Eigen::Index n = 0;
};

// (1 - mu) I + (mu / n) J
struct UniformNoiseMutation {
  Eigen::Index n = 0;
  double mu = 0.0;
};

using MutationSpec = std::variant<IdentityMutation, UniformNoiseMutation>;

MutationMatrix make_mutation_matrix(const MutationSpec& spec);

struct SechSquared {};

// h(x) = k s(kx)(1 - s(kx)), s the standard logistic function
struct LogisticDerivative {
  double k = 1.0;
};

struct IdentitySelector {};

using Selector = std::variant<SechSquared, LogisticDerivative, IdentitySelector>;

double selector_eval(const Selector& h, double x);

}  // namespace gtdyn
