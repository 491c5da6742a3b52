#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "gtdyn/dynamics.hpp"
#include "gtdyn/solver.hpp"

namespace gtdyn {

struct InitialCondition {
  enum class Kind { kExplicit, kUniform, kRandom };
  Kind kind = Kind::kUniform;
  Vector values;           // kExplicit
  std::uint64_t seed = 0;  // kRandom
};

struct OutputPaths {
  std::optional<std::string> trajectory_csv;
  std::optional<std::string> report_json;
  std::optional<std::string> plot_csv;
};

// Settings for the sampled checks of `compare` and `gradcheck`.
struct AnalysisConfig {
  std::size_t samples = 100;
  std::uint64_t seed = 0;
};

struct ExperimentConfig {
  FitnessModel game;
  std::string family;
  std::optional<DynamicsSpec> dynamics;  // empty for the discrete family
  double discrete_lambda = 0.0;          // discrete family only
  InitialCondition initial;
  IntegratorConfig integrator;
  DiscreteConfig discrete;
  OutputPaths outputs;
  AnalysisConfig analysis;

  bool is_discrete() const { return !dynamics.has_value(); }
  Eigen::Index dimension() const { return gtdyn::dimension(game); }
};

// Parses and validates an experiment configuration. Every failure is a
// ConfigError whose pointer names the offending field.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);

// Resolves the initial state (the seed override replaces a random seed).
Vector initial_state(const ExperimentConfig& cfg,
                     std::optional<std::uint64_t> seed_override = std::nullopt);

}  // namespace gtdyn
