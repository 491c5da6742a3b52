#include <doctest.h>

#include <cmath>
#include <random>

#include "gtdyn/dynamics.hpp"
#include "gtdyn/errors.hpp"

using namespace gtdyn;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Matrix rps() {
  Matrix a(3, 3);
  a << 0, -1, 1, 1, 0, -1, -1, 1, 0;
  return a;
}

FitnessModel linear(const Matrix& a) { return LinearFitness{PayoffMatrix(a)}; }

double inf_norm(const Vector& v) { return v.lpNorm<Eigen::Infinity>(); }

// Direct substitution p_i (f_i - sum_j p_j f_j) with plain loops.
Vector replicator_oracle(const Vector& f, const Vector& p) {
  double fbar = 0.0;
  for (Eigen::Index j = 0; j < p.size(); ++j) fbar += p[j] * f[j];
  Vector out(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) out[i] = p[i] * (f[i] - fbar);
  return out;
}

// sum_j p_j f_j m_ji - p_i fbar with plain loops.
Vector mutation_oracle(const Vector& f, const Matrix& m, const Vector& p) {
  double fbar = 0.0;
  for (Eigen::Index j = 0; j < p.size(); ++j) fbar += p[j] * f[j];
  Vector out(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    double inflow = 0.0;
    for (Eigen::Index j = 0; j < p.size(); ++j) inflow += p[j] * f[j] * m(j, i);
    out[i] = inflow - p[i] * fbar;
  }
  return out;
}

std::vector<DynamicsSpec> sample_specs(Eigen::Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = 2.0 * u(rng) - 1.0;
  Vector f(n);
  for (Eigen::Index i = 0; i < n; ++i) f[i] = 0.1 + 2.0 * u(rng);
  Vector q(n);
  for (Eigen::Index i = 0; i < n; ++i) q[i] = u(rng) - 0.5;
  const PayoffMatrix pa(a);
  const MutationMatrix m = make_mutation_matrix(UniformNoiseMutation{n, 0.4 * u(rng)});
  const double lambda = 3.0;
  return {Replicator{LinearFitness{pa}, lambda},
          Replicator{make_quadratic_fitness(pa, q), lambda},
          Replicator{make_saturating_fitness(pa, 0.5), lambda},
          Quasispecies{f, m, 0.5},
          ReplicatorMutator{LinearFitness{pa}, m, lambda},
          Logit{LinearFitness{pa}, 0.3 + u(rng)},
          BestResponse{LinearFitness{pa}},
          Bnn{pa, 0.0},
          Bnn{pa, 0.2},
          SelectorWeighted{LinearFitness{pa}, SechSquared{}, lambda, MeanShiftedFitness{}},
          SelectorWeighted{make_saturating_fitness(pa, 0.5), LogisticDerivative{2.0}, lambda,
                           SumExp{1.0}},
          SelectorWeighted{LinearFitness{pa}, SechSquared{}, lambda, ConstantGbar{2.0}}};
}

}  // namespace

TEST_CASE("growth transform velocity examples") {
  const FitnessModel m = linear(rps());
  const double lambda = 2.0;
  const Vector p = vec({0.5, 0.25, 0.25});
  const GrowthTransformField field = GrowthTransformField::from_fitness(
      [&](const Vector& x) { return Vector(fitness(m, x).array() + lambda); },
      [&](const Vector& x) { return x.dot(fitness(m, x)) + lambda * x.sum(); });
  const Vector v = growth_transform_velocity(field, p);
  CHECK(inf_norm(v - vec({0, 1.0 / 16, -1.0 / 16})) <= 1e-15);

  // Equal fitness everywhere gives the zero field.
  const GrowthTransformField flat = GrowthTransformField::from_fitness(
      [](const Vector& x) { return Vector(Vector::Constant(x.size(), 1.7)); },
      [](const Vector&) { return 3.0; });
  CHECK(inf_norm(growth_transform_velocity(flat, sample_uniform(4, 1).values())) <= 1e-15);

  // Vertices are fixed points.
  CHECK(inf_norm(growth_transform_velocity(field, vec({1, 0, 0}))) == 0.0);
}

TEST_CASE("growth transform errors") {
  const GrowthTransformField negative = GrowthTransformField::from_fitness(
      [](const Vector& x) { return Vector(Vector::Constant(x.size(), -1.0)); },
      [](const Vector&) { return 1.0; });
  CHECK_THROWS_AS(growth_transform_velocity(negative, vec({0.5, 0.5})), PositivityError);
  const GrowthTransformField bad_gbar = GrowthTransformField::from_fitness(
      [](const Vector& x) { return Vector(Vector::Constant(x.size(), 1.0)); },
      [](const Vector&) { return 0.0; });
  CHECK_THROWS_AS(growth_transform_velocity(bad_gbar, vec({0.5, 0.5})), DegenerateError);
}

TEST_CASE("replicator examples") {
  CHECK(inf_norm(replicator_velocity(linear(rps()), Vector::Constant(3, 1.0 / 3))) <= 1e-16);
  CHECK(inf_norm(replicator_velocity(linear(rps()), vec({0.5, 0.25, 0.25})) -
                 vec({0, 1.0 / 16, -1.0 / 16})) <= 1e-16);
  CHECK(inf_norm(replicator_velocity(standard_game("prisoners_dilemma"), vec({1, 0}))) == 0.0);
  CHECK_THROWS_AS(replicator_velocity(linear(rps()), vec({0.5, 0.5})), DimensionError);
}

TEST_CASE("quasispecies examples") {
  const Vector f = vec({1, 2, 3});
  const Vector p = sample_uniform(3, 11).values();
  CHECK(inf_norm(quasispecies_velocity(f, make_mutation_matrix(IdentityMutation{3}), p) -
                 replicator_velocity(make_constant_fitness(f), p)) <= 1e-15);
  CHECK(inf_norm(quasispecies_velocity(vec({1, 1}),
                                       make_mutation_matrix(UniformNoiseMutation{2, 1.0}),
                                       vec({0.9, 0.1})) -
                 vec({-0.4, 0.4})) <= 1e-15);
  CHECK(inf_norm(quasispecies_velocity(Vector::Constant(4, 2.5),
                                       make_mutation_matrix(UniformNoiseMutation{4, 0.3}),
                                       Vector::Constant(4, 0.25))) <= 1e-15);
}

TEST_CASE("replicator-mutator examples") {
  const MutationMatrix id = make_mutation_matrix(IdentityMutation{3});
  const MutationMatrix noisy = make_mutation_matrix(UniformNoiseMutation{3, 0.3});
  const Vector p = vec({0.5, 0.25, 0.25});
  const FitnessModel shifted = linear(rps().array() + 2.0);
  CHECK(inf_norm(replicator_mutator_velocity(shifted, id, p) - replicator_velocity(shifted, p)) <=
        1e-15);
  const Vector f = vec({1, 2, 3});
  CHECK(inf_norm(replicator_mutator_velocity(make_constant_fitness(f), noisy, p) -
                 quasispecies_velocity(f, noisy, p)) <= 1e-15);
  const Vector v = replicator_mutator_velocity(shifted, noisy, p);
  CHECK(inf_norm(v - mutation_oracle(fitness(shifted, p), noisy.matrix(), p)) <= 1e-15);
  CHECK(std::abs(v.sum()) <= 1e-15);
}

TEST_CASE("logit examples") {
  const FitnessModel pd = standard_game("prisoners_dilemma");
  const Vector v = logit_velocity(pd, 1.0, vec({0.5, 0.5}));
  const double e15 = std::exp(1.5), e3 = std::exp(3.0);
  CHECK(v[0] == doctest::Approx(e15 / (e15 + e3) - 0.5).epsilon(1e-14));
  CHECK(v[1] == doctest::Approx(e3 / (e15 + e3) - 0.5).epsilon(1e-14));
  CHECK(v[1] == doctest::Approx(0.3176).epsilon(1e-3));

  const Vector wide = logit_velocity(pd, 1e6, vec({0.9, 0.1}));
  CHECK(inf_norm(wide - vec({-0.4, 0.4})) <= 1e-5);

  const FitnessModel equal = make_constant_fitness(Vector::Constant(3, 4.0));
  CHECK(inf_norm(logit_velocity(equal, 0.1, Vector::Constant(3, 1.0 / 3))) <= 1e-16);

  // Max subtraction keeps huge payoff ratios finite.
  const Vector sharp = logit_velocity(pd, 1e-3, vec({0.5, 0.5}));
  CHECK(sharp.allFinite());
  CHECK(sharp[1] == doctest::Approx(0.5));
  CHECK_THROWS_AS(validate(DynamicsSpec{Logit{pd, 1e-13}}), ParameterError);
  CHECK_THROWS_AS(validate(DynamicsSpec{Logit{pd, -1.0}}), ParameterError);
}

TEST_CASE("best response examples") {
  const FitnessModel pd = standard_game("prisoners_dilemma");
  CHECK(inf_norm(best_response_velocity(pd, vec({0.5, 0.5})) - vec({-0.5, 0.5})) == 0.0);
  const FitnessModel equal = make_constant_fitness(Vector::Constant(3, 1.0));
  const Vector p = vec({0.2, 0.3, 0.5});
  CHECK(inf_norm(best_response_velocity(equal, p) - (Vector::Constant(3, 1.0 / 3) - p)) <= 1e-16);
  const Vector v = best_response_velocity(standard_game("coordination"), vec({0.2, 0.8}));
  CHECK(inf_norm(v - vec({-0.2, 0.2})) <= 1e-16);
  // Payoffs within the tie tolerance split the target.
  const Vector near = best_response_target(make_constant_fitness(vec({1.0, 1.0 + 1e-10, 0.0})),
                                           vec({0.3, 0.3, 0.4}));
  CHECK(inf_norm(near - vec({0.5, 0.5, 0})) == 0.0);
}

TEST_CASE("bnn examples") {
  const PayoffMatrix r(rps());
  CHECK(inf_norm(bnn_velocity(r, 0.0, Vector::Constant(3, 1.0 / 3))) <= 1e-16);
  const PayoffMatrix pd = *linear_payoff(standard_game("prisoners_dilemma"));
  CHECK(inf_norm(bnn_excess(pd, 0.0, vec({1, 0})) - vec({0, 2})) == 0.0);
  CHECK(inf_norm(bnn_velocity(pd, 0.0, vec({1, 0})) - vec({-2, 2})) == 0.0);
  const PayoffMatrix equal(Matrix::Constant(3, 3, 1.0));
  CHECK(inf_norm(bnn_excess(equal, 0.25, Vector::Constant(3, 1.0 / 3)) -
                 Vector::Constant(3, 0.25)) <= 1e-15);
  CHECK(inf_norm(bnn_velocity(equal, 0.25, Vector::Constant(3, 1.0 / 3))) <= 1e-15);
}

TEST_CASE("selector-weighted examples") {
  const FitnessModel m = linear(rps());
  const Vector p = vec({0.5, 0.25, 0.25});
  const double lambda = 2.0;
  // h = 1 reduces to the plain growth transform with f + lambda.
  const Vector plain = selector_weighted_velocity(m, IdentitySelector{}, lambda,
                                                  MeanShiftedFitness{}, p);
  CHECK(inf_norm(plain - replicator_velocity(m, p)) <= 1e-16);

  // Substitution oracle with h = sech^2 and gbar = sum_i p_i (f_i + lambda).
  const Vector f = fitness(m, p);
  Vector fprime(3);
  for (Eigen::Index i = 0; i < 3; ++i) {
    const double s = 1.0 / std::cosh(p[i]);
    fprime[i] = s * s * (f[i] + lambda);
  }
  const double fbar_prime = p.dot(fprime);
  const double gbar = (p.array() * (f.array() + lambda)).sum();
  Vector oracle(3);
  for (Eigen::Index i = 0; i < 3; ++i) oracle[i] = p[i] * (fprime[i] / fbar_prime * gbar - gbar);
  const Vector v = selector_weighted_velocity(m, SechSquared{}, lambda, MeanShiftedFitness{}, p);
  CHECK(inf_norm(v - oracle) <= 1e-15);
  CHECK(inf_norm(v - plain) > 1e-3);

  const FitnessModel equal = make_constant_fitness(Vector::Constant(4, 1.0));
  CHECK(inf_norm(selector_weighted_velocity(equal, SechSquared{}, 1.0, SumExp{0.5},
                                            Vector::Constant(4, 0.25))) <= 1e-16);
  CHECK_THROWS_AS(selector_weighted_velocity(m, SechSquared{}, 0.0, MeanShiftedFitness{}, p),
                  PositivityError);
}

TEST_CASE("engine instantiation examples") {
  const Vector p = vec({0.5, 0.25, 0.25});
  const DynamicsSpec rep = Replicator{linear(rps()), 2.0};
  CHECK(inf_norm(engine_velocity(rep, p) - velocity(rep, p)) <= 1e-16);

  const PayoffMatrix pd = *linear_payoff(standard_game("prisoners_dilemma"));
  const DynamicsSpec bnn = Bnn{pd, 0.0};
  CHECK(inf_norm(engine_velocity(bnn, vec({0.6, 0.4})) - bnn_velocity(pd, 0.0, vec({0.6, 0.4}))) <=
        1e-12);

  const DynamicsSpec logit = Logit{standard_game("prisoners_dilemma"), 1.0};
  const double gbar = std::exp(1.5) + std::exp(3.0);
  CHECK(inf_norm(engine_velocity(logit, vec({0.5, 0.5})) - gbar * velocity(logit, vec({0.5, 0.5}))) <=
        1e-12);

  CHECK_THROWS_AS(instantiate_engine(BestResponse{standard_game("rps")}), UnsupportedFamily);
  // RPS payoffs are not positive without a shift.
  CHECK_THROWS_AS(engine_velocity(DynamicsSpec{Replicator{linear(rps()), 0.0}}, p),
                  PositivityError);
}

TEST_CASE("every field conserves the unit sum") {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 1000; ++k) {
    const Eigen::Index n = 2 + k % 5;
    const Vector p = sample_uniform(n, static_cast<std::uint64_t>(k)).values();
    for (const DynamicsSpec& spec : sample_specs(n, rng)) {
      REQUIRE(std::abs(velocity(spec, p).sum()) <= 1e-12);
    }
  }
}

TEST_CASE("multiplicative fields keep boundary faces") {
  std::mt19937_64 rng(23);
  for (int k = 0; k < 200; ++k) {
    const Eigen::Index n = 3 + k % 4;
    Vector p = sample_uniform(n, static_cast<std::uint64_t>(k)).values();
    const Eigen::Index zero = k % n;
    p[zero] = 0.0;
    p /= p.sum();
    for (const DynamicsSpec& spec : sample_specs(n, rng)) {
      if (!std::holds_alternative<Replicator>(spec) &&
          !std::holds_alternative<SelectorWeighted>(spec)) {
        continue;
      }
      REQUIRE(velocity(spec, p)[zero] == 0.0);
      REQUIRE(engine_velocity(spec, p)[zero] == 0.0);
    }
  }
}

TEST_CASE("engine matches the named field at interior points") {
  std::mt19937_64 rng(29);
  for (int k = 0; k < 300; ++k) {
    const Eigen::Index n = 2 + k % 5;
    const Vector p = sample_interior(n, static_cast<std::uint64_t>(k)).values();
    for (const DynamicsSpec& spec : sample_specs(n, rng)) {
      if (std::holds_alternative<BestResponse>(spec)) continue;
      const Vector named = velocity(spec, p);
      const Vector engine = engine_velocity(spec, p);
      if (const auto* l = std::get_if<Logit>(&spec)) {
        const Vector f = fitness(l->model, p) / l->eta;
        const double scale = f.array().exp().sum();
        REQUIRE(inf_norm(engine - scale * named) / (1.0 + scale * inf_norm(named)) <= 1e-12);
      } else {
        REQUIRE(inf_norm(engine - named) / (1.0 + inf_norm(named)) <= 1e-12);
      }
    }
  }
}

TEST_CASE("named fields agree with loop oracles") {
  std::mt19937_64 rng(31);
  for (int k = 0; k < 200; ++k) {
    const Eigen::Index n = 2 + k % 5;
    const Vector p = sample_uniform(n, static_cast<std::uint64_t>(k)).values();
    for (const DynamicsSpec& spec : sample_specs(n, rng)) {
      if (const auto* r = std::get_if<Replicator>(&spec)) {
        REQUIRE(inf_norm(velocity(spec, p) - replicator_oracle(fitness(r->model, p), p)) <= 1e-14);
      } else if (const auto* q = std::get_if<Quasispecies>(&spec)) {
        REQUIRE(inf_norm(velocity(spec, p) -
                         mutation_oracle(q->fitness, q->mutation.matrix(), p)) <= 1e-14);
      } else if (const auto* rm = std::get_if<ReplicatorMutator>(&spec)) {
        REQUIRE(inf_norm(velocity(spec, p) -
                         mutation_oracle(fitness(rm->model, p), rm->mutation.matrix(), p)) <=
                1e-14);
      }
    }
  }
}

TEST_CASE("reductions") {
  std::mt19937_64 rng(37);
  for (int k = 0; k < 200; ++k) {
    const Eigen::Index n = 2 + k % 5;
    const Vector p = sample_uniform(n, static_cast<std::uint64_t>(k)).values();
    const MutationMatrix id = make_mutation_matrix(IdentityMutation{n});
    for (const DynamicsSpec& spec : sample_specs(n, rng)) {
      if (const auto* r = std::get_if<Replicator>(&spec)) {
        REQUIRE(inf_norm(replicator_mutator_velocity(r->model, id, p) -
                         replicator_velocity(r->model, p)) <= 1e-14);
        REQUIRE(inf_norm(selector_weighted_velocity(r->model, IdentitySelector{}, r->lambda,
                                                    MeanShiftedFitness{}, p) -
                         replicator_velocity(r->model, p)) <= 1e-14);
      } else if (const auto* q = std::get_if<Quasispecies>(&spec)) {
        REQUIRE(inf_norm(quasispecies_velocity(q->fitness, id, p) -
                         replicator_velocity(make_constant_fitness(q->fitness), p)) <= 1e-14);
      }
    }
  }
}

TEST_CASE("spec validation") {
  const FitnessModel m = linear(rps());
  CHECK_THROWS_AS(validate(DynamicsSpec{Replicator{m, -1.0}}), ParameterError);
  CHECK_THROWS_AS(validate(DynamicsSpec{Bnn{PayoffMatrix(rps()), -0.1}}), ParameterError);
  CHECK_THROWS_AS(
      validate(DynamicsSpec{ReplicatorMutator{m, make_mutation_matrix(IdentityMutation{2}), 0.0}}),
      DimensionError);
  CHECK_THROWS_AS(validate(DynamicsSpec{Quasispecies{vec({1, -1}),
                                                     make_mutation_matrix(IdentityMutation{2}),
                                                     0.0}}),
                  ParameterError);
  CHECK(family_name(DynamicsSpec{Logit{m, 1.0}}) == "logit");
  CHECK(dimension(DynamicsSpec{Bnn{PayoffMatrix(rps()), 0.0}}) == 3);
}
