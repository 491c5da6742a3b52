#include "gtdyn/config.hpp"

#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "gtdyn/errors.hpp"

namespace gtdyn {

namespace {

using nlohmann::json;

std::string child(const std::string& ptr, const std::string& key) {
  return ptr + "/" + key;
}

std::string child(const std::string& ptr, std::size_t index) {
  return ptr + "/" + std::to_string(index);
}

void require_object(const json& j, const std::string& ptr) {
  if (!j.is_object()) throw ConfigError(ptr.empty() ? "/" : ptr, "expected an object");
}

void reject_unknown_keys(const json& j, const std::string& ptr,
                         const std::set<std::string>& allowed) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError(child(ptr, key), "unknown key");
  }
}

const json& required(const json& j, const std::string& ptr, const std::string& key) {
  if (!j.contains(key)) throw ConfigError(child(ptr, key), "missing required field");
  return j.at(key);
}

double as_number(const json& j, const std::string& ptr) {
  if (!j.is_number()) throw ConfigError(ptr, "expected a number");
  return j.get<double>();
}

double number_or(const json& j, const std::string& ptr, const std::string& key,
                 double fallback) {
  return j.contains(key) ? as_number(j.at(key), child(ptr, key)) : fallback;
}

std::uint64_t as_count(const json& j, const std::string& ptr) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw ConfigError(ptr, "expected a nonnegative integer");
  }
  return j.get<std::uint64_t>();
}

std::string as_string(const json& j, const std::string& ptr) {
  if (!j.is_string()) throw ConfigError(ptr, "expected a string");
  return j.get<std::string>();
}

Vector as_vector(const json& j, const std::string& ptr) {
  if (!j.is_array() || j.empty()) throw ConfigError(ptr, "expected a nonempty array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = as_number(j[i], child(ptr, i));
  }
  return v;
}

Matrix as_matrix(const json& j, const std::string& ptr) {
  if (!j.is_array() || j.empty()) throw ConfigError(ptr, "expected a nonempty array of rows");
  const std::size_t n = j.size();
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    const std::string row_ptr = child(ptr, r);
    if (!j[r].is_array() || j[r].size() != n) {
      throw ConfigError(row_ptr, "expected a row of " + std::to_string(n) +
                                     " numbers (matrix must be square)");
    }
    for (std::size_t c = 0; c < n; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          as_number(j[r][c], child(row_ptr, c));
    }
  }
  return m;
}

// Runs a library constructor and re-labels its error with a field pointer.
template <class F>
auto at_field(const std::string& ptr, F&& make) -> decltype(make()) {
  try {
    return make();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(ptr, e.what());
  }
}

FitnessModel parse_game(const json& j, const std::string& ptr) {
  require_object(j, ptr);
  const std::string type = as_string(required(j, ptr, "type"), child(ptr, "type"));
  if (type == "constant") {
    reject_unknown_keys(j, ptr, {"type", "values"});
    const Vector values = as_vector(required(j, ptr, "values"), child(ptr, "values"));
    if (values.size() < 2) throw ConfigError(child(ptr, "values"), "need at least 2 strategies");
    return at_field(child(ptr, "values"), [&] { return make_constant_fitness(values); });
  }
  if (type == "linear" || type == "quadratic" || type == "saturating") {
    const std::string mptr = child(ptr, "matrix");
    const Matrix m = as_matrix(required(j, ptr, "matrix"), mptr);
    if (m.rows() < 2) throw ConfigError(mptr, "need at least 2 strategies");
    PayoffMatrix a = at_field(mptr, [&] { return PayoffMatrix(m); });
    if (type == "linear") {
      reject_unknown_keys(j, ptr, {"type", "matrix"});
      return LinearFitness{std::move(a)};
    }
    if (type == "quadratic") {
      reject_unknown_keys(j, ptr, {"type", "matrix", "q"});
      const Vector q = as_vector(required(j, ptr, "q"), child(ptr, "q"));
      if (q.size() != m.rows()) {
        throw ConfigError(child(ptr, "q"),
                          "has " + std::to_string(q.size()) + " entries but " + mptr +
                              " is " + std::to_string(m.rows()) + "x" +
                              std::to_string(m.rows()));
      }
      return at_field(child(ptr, "q"), [&] { return make_quadratic_fitness(a, q); });
    }
    reject_unknown_keys(j, ptr, {"type", "matrix", "c"});
    const double c = as_number(required(j, ptr, "c"), child(ptr, "c"));
    return at_field(child(ptr, "c"), [&] { return make_saturating_fitness(a, c); });
  }
  throw ConfigError(child(ptr, "type"),
                    "unknown game type '" + type +
                        "' (expected linear, constant, quadratic or saturating)");
}

MutationMatrix parse_mutation(const json& j, const std::string& ptr, Eigen::Index n) {
  require_object(j, ptr);
  reject_unknown_keys(j, ptr, {"kind", "mu"});
  const std::string kind = as_string(required(j, ptr, "kind"), child(ptr, "kind"));
  if (kind == "identity") {
    return at_field(ptr, [&] { return make_mutation_matrix(IdentityMutation{n}); });
  }
  if (kind == "uniform_noise") {
    const double mu = as_number(required(j, ptr, "mu"), child(ptr, "mu"));
    return at_field(child(ptr, "mu"),
                    [&] { return make_mutation_matrix(UniformNoiseMutation{n, mu}); });
  }
  throw ConfigError(child(ptr, "kind"),
                    "unknown mutation kind '" + kind + "' (expected identity or uniform_noise)");
}

Selector parse_selector(const json& j, const std::string& ptr) {
  require_object(j, ptr);
  reject_unknown_keys(j, ptr, {"kind", "k"});
  const std::string kind = as_string(required(j, ptr, "kind"), child(ptr, "kind"));
  if (kind == "sech2") return SechSquared{};
  if (kind == "identity") return IdentitySelector{};
  if (kind == "logistic") {
    return LogisticDerivative{as_number(required(j, ptr, "k"), child(ptr, "k"))};
  }
  throw ConfigError(child(ptr, "kind"),
                    "unknown selector '" + kind + "' (expected sech2, logistic or identity)");
}

GbarSpec parse_gbar(const json& j, const std::string& ptr) {
  require_object(j, ptr);
  reject_unknown_keys(j, ptr, {"kind", "eta", "value"});
  const std::string kind = as_string(required(j, ptr, "kind"), child(ptr, "kind"));
  if (kind == "mean_shifted") return MeanShiftedFitness{};
  if (kind == "sum_excess") return SumExcess{};
  if (kind == "sum_exp") return SumExp{as_number(required(j, ptr, "eta"), child(ptr, "eta"))};
  if (kind == "constant") {
    return ConstantGbar{as_number(required(j, ptr, "value"), child(ptr, "value"))};
  }
  throw ConfigError(child(ptr, "kind"), "unknown gbar kind '" + kind + "'");
}

void parse_dynamics(const json& j, const std::string& ptr, ExperimentConfig& cfg) {
  require_object(j, ptr);
  cfg.family = as_string(required(j, ptr, "family"), child(ptr, "family"));
  const Eigen::Index n = dimension(cfg.game);
  const FitnessModel& game = cfg.game;
  // Scalar ranges are checked here so the error names the parameter itself.
  const auto nonnegative = [&](const char* key) {
    const double v = number_or(j, ptr, key, 0.0);
    if (!(v >= 0.0)) throw ConfigError(child(ptr, key), std::string(key) + " must be >= 0");
    return v;
  };
  const auto lambda = [&] { return nonnegative("lambda"); };

  if (cfg.family == "replicator") {
    reject_unknown_keys(j, ptr, {"family", "lambda"});
    cfg.dynamics = Replicator{game, lambda()};
  } else if (cfg.family == "quasispecies") {
    reject_unknown_keys(j, ptr, {"family", "lambda", "mutation"});
    const auto* constant = std::get_if<ConstantFitness>(&game);
    if (constant == nullptr) {
      throw ConfigError("/game/type", "quasispecies dynamics needs a constant game");
    }
    cfg.dynamics = Quasispecies{constant->values,
                                parse_mutation(required(j, ptr, "mutation"),
                                               child(ptr, "mutation"), n),
                                lambda()};
  } else if (cfg.family == "replicator_mutator") {
    reject_unknown_keys(j, ptr, {"family", "lambda", "mutation"});
    cfg.dynamics = ReplicatorMutator{
        game, parse_mutation(required(j, ptr, "mutation"), child(ptr, "mutation"), n),
        lambda()};
  } else if (cfg.family == "logit") {
    reject_unknown_keys(j, ptr, {"family", "eta"});
    const double eta = as_number(required(j, ptr, "eta"), child(ptr, "eta"));
    if (!(eta >= kMinLogitEta)) {
      throw ConfigError(child(ptr, "eta"), "eta must be >= 1e-12 (use best_response below that)");
    }
    cfg.dynamics = Logit{game, eta};
  } else if (cfg.family == "best_response") {
    reject_unknown_keys(j, ptr, {"family"});
    cfg.dynamics = BestResponse{game};
  } else if (cfg.family == "bnn") {
    reject_unknown_keys(j, ptr, {"family", "epsilon"});
    const PayoffMatrix* a = linear_payoff(game);
    if (a == nullptr) throw ConfigError("/game/type", "BNN dynamics needs a linear game");
    cfg.dynamics = Bnn{*a, nonnegative("epsilon")};
  } else if (cfg.family == "selector") {
    reject_unknown_keys(j, ptr, {"family", "lambda", "selector", "gbar"});
    GbarSpec gbar = MeanShiftedFitness{};
    if (j.contains("gbar")) gbar = parse_gbar(j.at("gbar"), child(ptr, "gbar"));
    cfg.dynamics = SelectorWeighted{
        game, parse_selector(required(j, ptr, "selector"), child(ptr, "selector")),
        lambda(), gbar};
  } else if (cfg.family == "discrete") {
    reject_unknown_keys(j, ptr, {"family", "lambda"});
    cfg.discrete_lambda = lambda();
    return;
  } else {
    throw ConfigError(child(ptr, "family"), "unknown dynamics family '" + cfg.family + "'");
  }
  at_field(ptr, [&] {
    validate(*cfg.dynamics);
    return 0;
  });
}

InitialCondition parse_initial(const json& j, const std::string& ptr, Eigen::Index n) {
  InitialCondition init;
  if (j.is_array()) {
    init.kind = InitialCondition::Kind::kExplicit;
    init.values = as_vector(j, ptr);
    if (init.values.size() != n) {
      throw ConfigError(ptr, "has " + std::to_string(init.values.size()) +
                                 " entries but /game defines " + std::to_string(n) +
                                 " strategies");
    }
    at_field(ptr, [&] { return make_simplex_point(init.values); });
    return init;
  }
  require_object(j, ptr);
  if (j.size() != 1) {
    throw ConfigError(ptr, "exactly one of an array, {\"uniform\": true} or "
                           "{\"random\": {\"seed\": s}} is required");
  }
  if (j.contains("uniform")) {
    if (!j.at("uniform").is_boolean() || !j.at("uniform").get<bool>()) {
      throw ConfigError(child(ptr, "uniform"), "expected true");
    }
    init.kind = InitialCondition::Kind::kUniform;
    return init;
  }
  if (j.contains("random")) {
    const std::string rptr = child(ptr, "random");
    const json& r = j.at("random");
    require_object(r, rptr);
    reject_unknown_keys(r, rptr, {"seed"});
    init.kind = InitialCondition::Kind::kRandom;
    init.seed = r.contains("seed") ? as_count(r.at("seed"), child(rptr, "seed")) : 0;
    return init;
  }
  reject_unknown_keys(j, ptr, {"uniform", "random"});
  return init;
}

void parse_integrator(const json& j, const std::string& ptr, ExperimentConfig& cfg) {
  require_object(j, ptr);
  reject_unknown_keys(j, ptr, {"dt", "t_max", "record_every", "conv_tol", "conv_window",
                               "positivity_guard", "route", "max_iters"});
  IntegratorConfig& ic = cfg.integrator;
  ic.dt = number_or(j, ptr, "dt", ic.dt);
  ic.t_max = number_or(j, ptr, "t_max", ic.t_max);
  ic.conv_tol = number_or(j, ptr, "conv_tol", ic.conv_tol);
  if (j.contains("record_every")) {
    ic.record_every = as_count(j.at("record_every"), child(ptr, "record_every"));
    cfg.discrete.record_every = ic.record_every;
  }
  if (j.contains("conv_window")) {
    ic.conv_window = as_count(j.at("conv_window"), child(ptr, "conv_window"));
  }
  if (j.contains("positivity_guard")) {
    if (!j.at("positivity_guard").is_boolean()) {
      throw ConfigError(child(ptr, "positivity_guard"), "expected a boolean");
    }
    ic.positivity_guard = j.at("positivity_guard").get<bool>();
  }
  if (j.contains("route")) {
    const std::string route = as_string(j.at("route"), child(ptr, "route"));
    if (route == "named") {
      ic.route = FieldRoute::kNamed;
    } else if (route == "engine") {
      ic.route = FieldRoute::kEngine;
    } else {
      throw ConfigError(child(ptr, "route"), "expected 'named' or 'engine'");
    }
  }
  if (j.contains("max_iters")) {
    cfg.discrete.max_iters = as_count(j.at("max_iters"), child(ptr, "max_iters"));
  }
  if (j.contains("conv_tol")) cfg.discrete.conv_tol = ic.conv_tol;
  if (!cfg.is_discrete()) {
    at_field(ptr, [&] {
      validate(ic);
      return 0;
    });
  } else if (cfg.discrete.max_iters < 1 || cfg.discrete.record_every < 1 ||
             !(cfg.discrete.conv_tol > 0.0)) {
    throw ConfigError(ptr, "discrete runs need max_iters >= 1, record_every >= 1, conv_tol > 0");
  }
}

OutputPaths parse_outputs(const json& j, const std::string& ptr) {
  require_object(j, ptr);
  reject_unknown_keys(j, ptr, {"trajectory_csv", "report_json", "plot_csv"});
  OutputPaths out;
  auto path = [&](const char* key) -> std::optional<std::string> {
    if (!j.contains(key)) return std::nullopt;
    return as_string(j.at(key), child(ptr, key));
  };
  out.trajectory_csv = path("trajectory_csv");
  out.report_json = path("report_json");
  out.plot_csv = path("plot_csv");
  return out;
}

AnalysisConfig parse_analysis(const json& j, const std::string& ptr) {
  require_object(j, ptr);
  reject_unknown_keys(j, ptr, {"samples", "seed"});
  AnalysisConfig a;
  if (j.contains("samples")) a.samples = as_count(j.at("samples"), child(ptr, "samples"));
  if (a.samples < 1) throw ConfigError(child(ptr, "samples"), "must be >= 1");
  if (j.contains("seed")) a.seed = as_count(j.at("seed"), child(ptr, "seed"));
  return a;
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  require_object(doc, "");
  reject_unknown_keys(doc, "",
                      {"game", "dynamics", "initial", "integrator", "outputs", "analysis"});
  ExperimentConfig cfg;
  cfg.game = parse_game(required(doc, "", "game"), "/game");
  parse_dynamics(required(doc, "", "dynamics"), "/dynamics", cfg);
  if (doc.contains("initial")) {
    cfg.initial = parse_initial(doc.at("initial"), "/initial", cfg.dimension());
  }
  if (doc.contains("integrator")) parse_integrator(doc.at("integrator"), "/integrator", cfg);
  if (doc.contains("outputs")) cfg.outputs = parse_outputs(doc.at("outputs"), "/outputs");
  if (doc.contains("analysis")) cfg.analysis = parse_analysis(doc.at("analysis"), "/analysis");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("/", "cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("/", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(doc);
}

Vector initial_state(const ExperimentConfig& cfg,
                     std::optional<std::uint64_t> seed_override) {
  const Eigen::Index n = cfg.dimension();
  switch (cfg.initial.kind) {
    case InitialCondition::Kind::kExplicit:
      return make_simplex_point(cfg.initial.values).values();
    case InitialCondition::Kind::kUniform:
      return SimplexPoint::centroid(n).values();
    case InitialCondition::Kind::kRandom:
      return sample_uniform(n, seed_override.value_or(cfg.initial.seed)).values();
  }
  return SimplexPoint::centroid(n).values();
}

}  // namespace gtdyn
