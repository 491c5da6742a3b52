#include "gtdyn/game_models.hpp"

#include <cmath>
#include <string>

#include "gtdyn/detail/overloaded.hpp"
#include "gtdyn/errors.hpp"

namespace gtdyn {

namespace {

using detail::overloaded;

void require_dimension(const FitnessModel& model, const Vector& p) {
  if (dimension(model) != p.size()) {
    throw DimensionError("fitness model has " +
                         std::to_string(dimension(model)) +
                         " strategies but the state has " +
                         std::to_string(p.size()));
  }
}

}  // namespace

PayoffMatrix::PayoffMatrix(Matrix a) : a_(std::move(a)) {
  if (a_.rows() != a_.cols()) {
    throw DimensionError("payoff matrix must be square");
  }
  if (a_.rows() < 1) throw DimensionError("payoff matrix is empty");
  if (!a_.allFinite()) throw ParameterError("payoff matrix has non-finite entries");
}

FitnessModel make_constant_fitness(Vector values) {
  if (values.size() < 1) throw DimensionError("constant fitness is empty");
  if (!values.allFinite()) {
    throw ParameterError("constant fitness has non-finite entries");
  }
  return ConstantFitness{std::move(values)};
}

FitnessModel make_quadratic_fitness(PayoffMatrix a, Vector q) {
  if (q.size() != a.size()) {
    throw DimensionError("quadratic coefficient vector length " +
                         std::to_string(q.size()) + " does not match matrix size " +
                         std::to_string(a.size()));
  }
  if (!q.allFinite()) throw ParameterError("quadratic coefficients not finite");
  return QuadraticFitness{std::move(a), std::move(q)};
}

FitnessModel make_saturating_fitness(PayoffMatrix a, double c) {
  if (!(c >= 0.0) || !std::isfinite(c)) {
    throw ParameterError("saturating offset c must be finite and >= 0");
  }
  return SaturatingFitness{std::move(a), c};
}

Eigen::Index dimension(const FitnessModel& model) {
  return std::visit(
      overloaded{[](const ConstantFitness& m) { return m.values.size(); },
                 [](const auto& m) { return m.a.size(); }},
      model);
}

const PayoffMatrix* linear_payoff(const FitnessModel& model) {
  if (const auto* lin = std::get_if<LinearFitness>(&model)) return &lin->a;
  return nullptr;
}

Vector fitness(const FitnessModel& model, const Vector& p) {
  require_dimension(model, p);
  return std::visit(
      overloaded{
          [](const ConstantFitness& m) -> Vector { return m.values; },
          [&](const LinearFitness& m) -> Vector { return m.a.matrix() * p; },
          [&](const QuadraticFitness& m) -> Vector {
            return m.a.matrix() * p +
                   Vector(m.q.array() * p.array().square());
          },
          [&](const SaturatingFitness& m) -> Vector {
            return (m.a.matrix() * p).array().tanh() + m.c;
          }},
      model);
}

double mean_fitness(const FitnessModel& model, const Vector& p) {
  return p.dot(fitness(model, p));
}

FitnessModel standard_game(std::string_view name) {
  Matrix a;
  if (name == "rps") {
    a.resize(3, 3);
    a << 0, -1, 1,
         1, 0, -1,
         -1, 1, 0;
  } else if (name == "prisoners_dilemma") {
    a.resize(2, 2);
    a << 3, 0,
         5, 1;
  } else if (name == "hawk_dove") {
    constexpr double kValue = 2.0;
    constexpr double kCost = 4.0;
    a.resize(2, 2);
    a << (kValue - kCost) / 2.0, kValue,
         0.0, kValue / 2.0;
  } else if (name == "coordination") {
    a.resize(2, 2);
    a << 2, 0,
         0, 1;
  } else {
    throw UnknownGameError("unknown standard game '" + std::string(name) + "'");
  }
  return LinearFitness{PayoffMatrix(std::move(a))};
}

MutationMatrix::MutationMatrix(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() < 2) {
    throw DimensionError("mutation matrix must be square with n >= 2");
  }
  if ((m_.array() < 0.0).any() || (m_.array() > 1.0).any()) {
    throw ParameterError("mutation probabilities must lie in [0, 1]");
  }
  if ((m_ - m_.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw ParameterError("mutation matrix must be symmetric");
  }
  const double row_err = (m_.rowwise().sum().array() - 1.0).abs().maxCoeff();
  const double col_err = (m_.colwise().sum().array() - 1.0).abs().maxCoeff();
  if (row_err > 1e-10 || col_err > 1e-10) {
    throw ParameterError("mutation matrix must be doubly stochastic");
  }
}

MutationMatrix make_mutation_matrix(const MutationSpec& spec) {
  return std::visit(
      overloaded{
          [](const IdentityMutation& s) {
            if (s.n < 2) throw DimensionError("mutation matrix needs n >= 2");
            return MutationMatrix(Matrix::Identity(s.n, s.n));
          },
          [](const UniformNoiseMutation& s) {
            if (s.n < 2) throw DimensionError("mutation matrix needs n >= 2");
            if (!(s.mu >= 0.0 && s.mu <= 1.0)) {
              throw ParameterError("mutation rate mu must lie in [0, 1]");
            }
            const double n = static_cast<double>(s.n);
            Matrix m = (1.0 - s.mu) * Matrix::Identity(s.n, s.n) +
                       Matrix::Constant(s.n, s.n, s.mu / n);
            return MutationMatrix(std::move(m));
          }},
      spec);
}

double selector_eval(const Selector& h, double x) {
  return std::visit(
      overloaded{[x](const SechSquared&) {
                   const double s = 1.0 / std::cosh(x);
                   return s * s;
                 },
                 [x](const LogisticDerivative& l) {
                   const double s = 1.0 / (1.0 + std::exp(-l.k * x));
                   return l.k * s * (1.0 - s);
                 },
                 [](const IdentitySelector&) { return 1.0; }},
      h);
}

}  // namespace gtdyn
