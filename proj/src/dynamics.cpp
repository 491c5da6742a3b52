#include "gtdyn/dynamics.hpp"

#include <cmath>
#include <string>

#include "gtdyn/detail/overloaded.hpp"
#include "gtdyn/errors.hpp"

namespace gtdyn {

namespace {

using detail::overloaded;

void require_size(Eigen::Index expected, const Vector& p) {
  if (p.size() != expected) {
    throw DimensionError("expected a state with " + std::to_string(expected) +
                         " strategies, got " + std::to_string(p.size()));
  }
}

void require_lambda(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ParameterError("lambda must be finite and >= 0");
  }
}

void require_eta(double eta) {
  if (!(eta >= kMinLogitEta) || !std::isfinite(eta)) {
    throw ParameterError("logit noise eta must be >= 1e-12");
  }
}

void validate_selector(const Selector& h) {
  if (const auto* l = std::get_if<LogisticDerivative>(&h)) {
    if (!(l->k > 0.0) || !std::isfinite(l->k)) {
      throw ParameterError("logistic selector slope k must be > 0");
    }
  }
}

void validate_gbar(const GbarSpec& g) {
  std::visit(overloaded{[](const SumExp& s) { require_eta(s.eta); },
                        [](const ConstantGbar& c) {
                          if (!(c.value > 0.0) || !std::isfinite(c.value)) {
                            throw ParameterError("constant gbar must be > 0");
                          }
                        },
                        [](const auto&) {}},
             g);
}

// Numerically stable log(sum_i exp(x_i)).
double log_sum_exp(const Vector& x) {
  const double m = x.maxCoeff();
  return m + std::log((x.array() - m).exp().sum());
}

}  // namespace

void validate(const DynamicsSpec& spec) {
  std::visit(
      overloaded{
          [](const Replicator& s) {
            require_lambda(s.lambda);
            if (dimension(s.model) < 2) throw DimensionError("need N >= 2");
          },
          [](const Quasispecies& s) {
            require_lambda(s.lambda);
            if (s.fitness.size() != s.mutation.size()) {
              throw DimensionError("fitness and mutation matrix sizes differ");
            }
            if ((s.fitness.array() < 0.0).any() || !s.fitness.allFinite()) {
              throw ParameterError("quasispecies fitness must be finite and >= 0");
            }
          },
          [](const ReplicatorMutator& s) {
            require_lambda(s.lambda);
            if (dimension(s.model) != s.mutation.size()) {
              throw DimensionError("fitness model and mutation matrix sizes differ");
            }
          },
          [](const Logit& s) {
            require_eta(s.eta);
            if (dimension(s.model) < 2) throw DimensionError("need N >= 2");
          },
          [](const BestResponse& s) {
            if (dimension(s.model) < 2) throw DimensionError("need N >= 2");
          },
          [](const Bnn& s) {
            if (!(s.epsilon >= 0.0) || !std::isfinite(s.epsilon)) {
              throw ParameterError("BNN margin epsilon must be >= 0");
            }
            if (s.a.size() < 2) throw DimensionError("need N >= 2");
          },
          [](const SelectorWeighted& s) {
            require_lambda(s.lambda);
            validate_selector(s.selector);
            validate_gbar(s.gbar);
            if (dimension(s.model) < 2) throw DimensionError("need N >= 2");
          }},
      spec);
}

Eigen::Index dimension(const DynamicsSpec& spec) {
  return std::visit(
      overloaded{[](const Quasispecies& s) { return s.fitness.size(); },
                 [](const Bnn& s) { return s.a.size(); },
                 [](const auto& s) { return dimension(s.model); }},
      spec);
}

std::string family_name(const DynamicsSpec& spec) {
  return std::visit(
      overloaded{[](const Replicator&) { return "replicator"; },
                 [](const Quasispecies&) { return "quasispecies"; },
                 [](const ReplicatorMutator&) { return "replicator_mutator"; },
                 [](const Logit&) { return "logit"; },
                 [](const BestResponse&) { return "best_response"; },
                 [](const Bnn&) { return "bnn"; },
                 [](const SelectorWeighted&) { return "selector"; }},
      spec);
}

FitnessModel underlying_model(const DynamicsSpec& spec) {
  return std::visit(
      overloaded{
          [](const Quasispecies& s) -> FitnessModel {
            return ConstantFitness{s.fitness};
          },
          [](const Bnn& s) -> FitnessModel { return LinearFitness{s.a}; },
          [](const auto& s) -> FitnessModel { return s.model; }},
      spec);
}

Vector replicator_velocity(const FitnessModel& model, const Vector& p) {
  const Vector f = fitness(model, p);
  const double fbar = p.dot(f);
  return p.array() * (f.array() - fbar);
}

Vector quasispecies_velocity(const Vector& f, const MutationMatrix& m,
                             const Vector& p) {
  require_size(m.size(), p);
  require_size(f.size(), p);
  const Vector weighted = p.cwiseProduct(f);
  // inflow_i = sum_j p_j f_j m_ji
  const Vector inflow = m.matrix().transpose() * weighted;
  return inflow - p * weighted.sum();
}

Vector replicator_mutator_velocity(const FitnessModel& model,
                                   const MutationMatrix& m, const Vector& p) {
  require_size(m.size(), p);
  const Vector weighted = p.cwiseProduct(fitness(model, p));
  const Vector inflow = m.matrix().transpose() * weighted;
  return inflow - p * weighted.sum();
}

Vector logit_choice(const FitnessModel& model, double eta, const Vector& p) {
  require_eta(eta);
  const Vector x = fitness(model, p) / eta;
  const Vector e = (x.array() - x.maxCoeff()).exp();
  return e / e.sum();
}

Vector logit_velocity(const FitnessModel& model, double eta, const Vector& p) {
  return logit_choice(model, eta, p) - p;
}

Vector best_response_target(const FitnessModel& model, const Vector& p) {
  const Vector f = fitness(model, p);
  const double best = f.maxCoeff();
  Vector b = (f.array() >= best - kBestResponseTieTol).cast<double>();
  return b / b.sum();
}

Vector best_response_velocity(const FitnessModel& model, const Vector& p) {
  return best_response_target(model, p) - p;
}

Vector bnn_excess(const PayoffMatrix& a, double epsilon, const Vector& p) {
  require_size(a.size(), p);
  const Vector ap = a.matrix() * p;
  const double mean = p.dot(ap);
  return (ap.array() - mean + epsilon).max(0.0);
}

Vector bnn_velocity(const PayoffMatrix& a, double epsilon, const Vector& p) {
  const Vector k = bnn_excess(a, epsilon, p);
  return k - p * k.sum();
}

double evaluate_gbar(const GbarSpec& gbar, const FitnessModel& model,
                     double lambda, const Vector& p) {
  return std::visit(
      overloaded{
          [&](const MeanShiftedFitness&) {
            return p.dot((fitness(model, p).array() + lambda).matrix());
          },
          [&](const SumExp& s) {
            return std::exp(log_sum_exp(fitness(model, p) / s.eta));
          },
          [&](const SumExcess&) {
            const Vector f = fitness(model, p);
            return (f.array() - p.dot(f)).max(0.0).sum();
          },
          [](const ConstantGbar& c) { return c.value; }},
      gbar);
}

Vector selector_weighted_velocity(const FitnessModel& model, const Selector& h,
                                  double lambda, const GbarSpec& gbar,
                                  const Vector& p) {
  const Vector shifted = fitness(model, p).array() + lambda;
  Vector selected(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    selected[i] = selector_eval(h, p[i]) * shifted[i];
    if (!(selected[i] > 0.0)) {
      throw PositivityError("selector-weighted fitness of strategy " +
                            std::to_string(i) + " is not positive");
    }
  }
  const double selected_mean = p.dot(selected);
  if (!(selected_mean > 0.0)) {
    throw DegenerateError("selector-weighted mean fitness is not positive");
  }
  const double g = evaluate_gbar(gbar, model, lambda, p);
  if (!(g > 0.0)) throw DegenerateError("gbar is not positive");
  return p.array() * ((selected.array() / selected_mean) * g - g);
}

Vector velocity(const DynamicsSpec& spec, const Vector& p) {
  require_size(dimension(spec), p);
  return std::visit(
      overloaded{
          [&](const Replicator& s) { return replicator_velocity(s.model, p); },
          [&](const Quasispecies& s) {
            return quasispecies_velocity(s.fitness, s.mutation, p);
          },
          [&](const ReplicatorMutator& s) {
            return replicator_mutator_velocity(s.model, s.mutation, p);
          },
          [&](const Logit& s) { return logit_velocity(s.model, s.eta, p); },
          [&](const BestResponse& s) {
            return best_response_velocity(s.model, p);
          },
          [&](const Bnn& s) { return bnn_velocity(s.a, s.epsilon, p); },
          [&](const SelectorWeighted& s) {
            return selector_weighted_velocity(s.model, s.selector, s.lambda,
                                              s.gbar, p);
          }},
      spec);
}

GrowthTransformField GrowthTransformField::from_fitness(FitnessFn gt_fitness,
                                                        GbarFn gbar) {
  WeightFn weights = [fit = std::move(gt_fitness)](const Vector& p) -> Vector {
    const Vector f = fit(p);
    for (Eigen::Index i = 0; i < f.size(); ++i) {
      if (!(f[i] > 0.0)) {
        throw PositivityError("growth-transform fitness of strategy " +
                              std::to_string(i) + " is not positive");
      }
    }
    return p.cwiseProduct(f);
  };
  return GrowthTransformField(std::move(weights), std::move(gbar), false);
}

GrowthTransformField GrowthTransformField::from_weights(WeightFn weights,
                                                        GbarFn gbar,
                                                        bool allow_zero) {
  return GrowthTransformField(std::move(weights), std::move(gbar), allow_zero);
}

Vector GrowthTransformField::weights(const Vector& p) const {
  Vector w = weights_(p);
  if (w.size() != p.size()) {
    throw DimensionError("weight function returned the wrong dimension");
  }
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (!std::isfinite(w[i])) {
      throw PositivityError("growth-transform weight " + std::to_string(i) +
                            " is not finite");
    }
    if (p[i] > 0.0 && (allow_zero_ ? w[i] < 0.0 : !(w[i] > 0.0))) {
      throw PositivityError("growth-transform fitness of strategy " +
                            std::to_string(i) + " is not positive");
    }
  }
  return w;
}

Vector growth_transform_velocity(const GrowthTransformField& field,
                                 const Vector& p) {
  const Vector w = field.weights(p);
  const double total = w.sum();
  if (field.allows_zero() && total == 0.0 && (w.array() == 0.0).all()) {
    return Vector::Zero(p.size());
  }
  if (!(total > 0.0)) {
    throw DegenerateError("growth-transform mean fitness is not positive");
  }
  const double g = field.gbar(p);
  if (!(g > 0.0)) throw DegenerateError("gbar is not positive");
  // p_i [ (f_i / fbar) g - g ] with p_i f_i = w_i and fbar = sum(w).
  return (g / total) * w - g * p;
}

GrowthTransformField instantiate_engine(const DynamicsSpec& spec) {
  validate(spec);
  return std::visit(
      overloaded{
          [](const Replicator& s) {
            return GrowthTransformField::from_fitness(
                [model = s.model, lambda = s.lambda](const Vector& p) -> Vector {
                  return fitness(model, p).array() + lambda;
                },
                [model = s.model, lambda = s.lambda](const Vector& p) {
                  return evaluate_gbar(MeanShiftedFitness{}, model, lambda, p);
                });
          },
          [](const Quasispecies& s) {
            const FitnessModel model = ConstantFitness{s.fitness};
            // p_i gt_i = sum_j p_j f_j m_ji + lambda p_i
            return GrowthTransformField::from_weights(
                [s](const Vector& p) -> Vector {
                  return s.mutation.matrix().transpose() *
                             p.cwiseProduct(s.fitness) +
                         s.lambda * p;
                },
                [model, lambda = s.lambda](const Vector& p) {
                  return evaluate_gbar(MeanShiftedFitness{}, model, lambda, p);
                });
          },
          [](const ReplicatorMutator& s) {
            return GrowthTransformField::from_weights(
                [s](const Vector& p) -> Vector {
                  return s.mutation.matrix().transpose() *
                             p.cwiseProduct(fitness(s.model, p)) +
                         s.lambda * p;
                },
                [model = s.model, lambda = s.lambda](const Vector& p) {
                  return evaluate_gbar(MeanShiftedFitness{}, model, lambda, p);
                });
          },
          [](const Logit& s) {
            // p_i gt_i = exp(f_i / eta), rescaled by exp(-max / eta).
            return GrowthTransformField::from_weights(
                [s](const Vector& p) -> Vector {
                  const Vector x = fitness(s.model, p) / s.eta;
                  return (x.array() - x.maxCoeff()).exp();
                },
                [s](const Vector& p) {
                  return evaluate_gbar(SumExp{s.eta}, s.model, 0.0, p);
                });
          },
          [](const BestResponse&) -> GrowthTransformField {
            throw UnsupportedFamily(
                "best-response dynamics cannot be instantiated through the "
                "growth-transform engine (discontinuous argmax)");
          },
          [](const Bnn& s) {
            // p_i gt_i = k_i(p); gbar = sum_i k_i(p)
            return GrowthTransformField::from_weights(
                [s](const Vector& p) -> Vector {
                  return bnn_excess(s.a, s.epsilon, p);
                },
                [s](const Vector& p) {
                  return bnn_excess(s.a, s.epsilon, p).sum();
                },
                /*allow_zero=*/true);
          },
          [](const SelectorWeighted& s) {
            return GrowthTransformField::from_fitness(
                [s](const Vector& p) -> Vector {
                  Vector f = fitness(s.model, p).array() + s.lambda;
                  for (Eigen::Index i = 0; i < p.size(); ++i) {
                    f[i] *= selector_eval(s.selector, p[i]);
                  }
                  return f;
                },
                [s](const Vector& p) {
                  return evaluate_gbar(s.gbar, s.model, s.lambda, p);
                });
          }},
      spec);
}

Vector engine_velocity(const DynamicsSpec& spec, const Vector& p) {
  require_size(dimension(spec), p);
  return growth_transform_velocity(instantiate_engine(spec), p);
}

}  // namespace gtdyn
