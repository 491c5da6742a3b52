#pragma once

#include <functional>
#include <string>
#include <variant>

#include "gtdyn/game_models.hpp"

namespace gtdyn {

// Reciprocal time constant gbar(p) = 1 / tau(p) of the growth-transform field.
struct MeanShiftedFitness {};  // sum_i p_i (f_i(p) + lambda)
struct SumExp {                // sum_i exp(f_i(p) / eta)
  double eta = 1.0;
};
struct SumExcess {};           // sum_i max(0, f_i(p) - fbar(p))
struct ConstantGbar {
  double value = 1.0;
};

using GbarSpec = std::variant<MeanShiftedFitness, SumExp, SumExcess, ConstantGbar>;

struct Replicator {
  FitnessModel model;
  double lambda = 0.0;
};

struct Quasispecies {
  Vector fitness;  // constant, nonnegative
  MutationMatrix mutation;
  double lambda = 0.0;
};

struct ReplicatorMutator {
  FitnessModel model;
  MutationMatrix mutation;
  double lambda = 0.0;
};

struct Logit {
  FitnessModel model;
  double eta = 1.0;
};

struct BestResponse {
  FitnessModel model;
};

struct Bnn {
  PayoffMatrix a;
  double epsilon = 0.0;
};

struct SelectorWeighted {
  FitnessModel model;
  Selector selector;
  double lambda = 0.0;
  GbarSpec gbar = MeanShiftedFitness{};
};

using DynamicsSpec = std::variant<Replicator, Quasispecies, ReplicatorMutator,
                                  Logit, BestResponse, Bnn, SelectorWeighted>;

// Smallest accepted logit noise level; anything below should use BestResponse.
inline constexpr double kMinLogitEta = 1e-12;
// Payoff slack inside which strategies count as tied for the best response.
inline constexpr double kBestResponseTieTol = 1e-9;

void validate(const DynamicsSpec& spec);
Eigen::Index dimension(const DynamicsSpec& spec);
std::string family_name(const DynamicsSpec& spec);

// Fitness model underlying a spec (Quasispecies and Bnn are converted to the
// equivalent Constant and Linear models).
FitnessModel underlying_model(const DynamicsSpec& spec);

// ---------------------------------------------------------------------------
// Named family fields. All accept any point of R^N with matching dimension.

Vector replicator_velocity(const FitnessModel& model, const Vector& p);
Vector quasispecies_velocity(const Vector& f, const MutationMatrix& m,
                             const Vector& p);
Vector replicator_mutator_velocity(const FitnessModel& model,
                                   const MutationMatrix& m, const Vector& p);
// Softmax of f(p) / eta with max subtraction.
Vector logit_choice(const FitnessModel& model, double eta, const Vector& p);
Vector logit_velocity(const FitnessModel& model, double eta, const Vector& p);
// Uniform distribution over argmax_i f_i(p), ties within kBestResponseTieTol.
Vector best_response_target(const FitnessModel& model, const Vector& p);
Vector best_response_velocity(const FitnessModel& model, const Vector& p);
// k_i(p) = max(0, (Ap)_i - p'Ap + epsilon)
Vector bnn_excess(const PayoffMatrix& a, double epsilon, const Vector& p);
Vector bnn_velocity(const PayoffMatrix& a, double epsilon, const Vector& p);
Vector selector_weighted_velocity(const FitnessModel& model, const Selector& h,
                                  double lambda, const GbarSpec& gbar,
                                  const Vector& p);

double evaluate_gbar(const GbarSpec& gbar, const FitnessModel& model,
                     double lambda, const Vector& p);

// Dispatches to the named field of the spec's family.
Vector velocity(const DynamicsSpec& spec, const Vector& p);

// ---------------------------------------------------------------------------
// The unified growth-transform field
//
//   pdot_i = p_i [ (f_i(p) / fbar) gbar(p) - gbar(p) ],  fbar = sum_j p_j f_j(p)
//
// is stored through its weights w_i proportional to p_i f_i(p). In that form
// the field is gbar (w / sum(w) - p), which keeps boundary points exact for
// families whose engine fitness carries a 1 / p_i factor.
class GrowthTransformField {
 public:
  using FitnessFn = std::function<Vector(const Vector&)>;
  using WeightFn = std::function<Vector(const Vector&)>;
  using GbarFn = std::function<double(const Vector&)>;

  // Engine fitness defined everywhere; every component must be > 0.
  static GrowthTransformField from_fitness(FitnessFn gt_fitness, GbarFn gbar);

  // Weights w (any common positive scale). Components with p_i > 0 must be
  // > 0, or >= 0 when allow_zero is set; an all-zero weight vector then gives
  // the zero field.
  static GrowthTransformField from_weights(WeightFn weights, GbarFn gbar,
                                           bool allow_zero = false);

  Vector weights(const Vector& p) const;
  double gbar(const Vector& p) const { return gbar_(p); }
  bool allows_zero() const { return allow_zero_; }

 private:
  GrowthTransformField(WeightFn w, GbarFn g, bool allow_zero)
      : weights_(std::move(w)), gbar_(std::move(g)), allow_zero_(allow_zero) {}

  WeightFn weights_;
  GbarFn gbar_;
  bool allow_zero_ = false;
};

Vector growth_transform_velocity(const GrowthTransformField& field,
                                 const Vector& p);

// Engine parameters that reproduce the family's named field. Throws
// UnsupportedFamily for BestResponse.
GrowthTransformField instantiate_engine(const DynamicsSpec& spec);

Vector engine_velocity(const DynamicsSpec& spec, const Vector& p);

}  // namespace gtdyn
