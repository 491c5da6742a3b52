#include "gtdyn/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <CLI11.hpp>

#include "gtdyn/errors.hpp"

namespace gtdyn {

namespace {

namespace fs = std::filesystem;

std::optional<std::string> resolve(const std::optional<std::string>& configured,
                                   const CommandOptions& opts, const char* fallback) {
  if (configured) {
    const fs::path path(*configured);
    if (opts.out_dir && path.is_relative()) return (fs::path(*opts.out_dir) / path).string();
    return *configured;
  }
  if (opts.out_dir) return (fs::path(*opts.out_dir) / fallback).string();
  return std::nullopt;
}

std::ofstream open_output(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write '" + path + "'");
  return f;
}

void emit_report(const json& report, const std::optional<std::string>& path,
                 std::ostream& out) {
  const std::string text = dump(report);
  if (path) open_output(*path) << text;
  out << text;
}

std::uint64_t analysis_seed(const ExperimentConfig& cfg, const CommandOptions& opts) {
  return opts.seed.value_or(cfg.analysis.seed);
}

// Evaluation points are drawn away from the boundary so every engine fitness
// (with its 1/p_i factor) is finite.
Vector analysis_point(Eigen::Index n, std::uint64_t seed, std::size_t k) {
  return sample_interior(n, seed * 1000003ULL + k).values();
}

double sum_exp(const Vector& f, double eta) {
  const double top = (f / eta).maxCoeff();
  return std::exp(top) * ((f / eta).array() - top).exp().sum();
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace

CompareReport compare_fields(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (cfg.is_discrete()) throw UnsupportedFamily("the discrete map has no continuous field");
  const DynamicsSpec& spec = *cfg.dynamics;
  const GrowthTransformField engine = instantiate_engine(spec);
  const auto* logit = std::get_if<Logit>(&spec);

  CompareReport report;
  report.family = family_name(spec);
  for (std::size_t k = 0; k < cfg.analysis.samples; ++k) {
    ComparePoint cp;
    cp.point = analysis_point(cfg.dimension(), seed, k);
    const Vector named = velocity(spec, cp.point);
    const Vector eng = growth_transform_velocity(engine, cp.point);
    if (logit == nullptr) {
      cp.max_diff = (eng - named).lpNorm<Eigen::Infinity>() /
                    (1.0 + named.lpNorm<Eigen::Infinity>());
    } else {
      const double expected = sum_exp(fitness(logit->model, cp.point), logit->eta);
      cp.expected_scale = expected;
      cp.max_diff = (eng - expected * named).lpNorm<Eigen::Infinity>() /
                    (1.0 + expected * named.lpNorm<Eigen::Infinity>());
      // Direction and scale are only meaningful away from rest points.
      if (named.norm() > 1e-8 && eng.norm() > 0.0) {
        cp.collinearity =
            (eng / eng.norm() - named / named.norm()).lpNorm<Eigen::Infinity>();
        cp.scale = eng.dot(named) / named.squaredNorm();
        report.max_scale_error =
            std::max(report.max_scale_error, std::abs(*cp.scale - expected) / expected);
      }
    }
    report.max_diff = std::max(report.max_diff, cp.collinearity.value_or(cp.max_diff));
    report.points.push_back(std::move(cp));
  }
  report.passed = report.max_diff <= report.tolerance &&
                  report.max_scale_error <= report.tolerance;
  return report;
}

double gradcheck_bound(const std::string& family) {
  if (family == "replicator") return 1e-5;
  if (family == "quasispecies" || family == "replicator_mutator") return 1e-5;
  if (family == "logit" || family == "bnn") return 1e-4;
  throw UnsupportedFamily("no energy is cataloged for the '" + family + "' family");
}

GradcheckReport run_gradcheck(const ExperimentConfig& cfg, std::uint64_t seed) {
  GradcheckReport report;
  report.family = cfg.family;
  report.bound = gradcheck_bound(cfg.family);
  if (cfg.is_discrete()) throw UnsupportedFamily("the discrete map has no gradient check");
  const DynamicsSpec& spec = *cfg.dynamics;
  report.compares_prediction =
      std::holds_alternative<Quasispecies>(spec) || std::holds_alternative<ReplicatorMutator>(spec);
  report.points = cfg.analysis.samples;
  for (std::size_t k = 0; k < cfg.analysis.samples; ++k) {
    GradientResidualReport g =
        gradient_residual_report(spec, analysis_point(cfg.dimension(), seed, k));
    report.cost = g.cost;
    report.max_residual = std::max(report.max_residual, g.max_residual);
    report.max_prediction_gap = std::max(report.max_prediction_gap, g.max_prediction_gap);
    report.details.push_back(std::move(g));
  }
  const double measured =
      report.compares_prediction ? report.max_prediction_gap : report.max_residual;
  report.passed = measured <= report.bound;
  return report;
}

int cmd_simulate(const std::string& config_path, const CommandOptions& opts,
                 std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig cfg = load_config(config_path);
    const Vector p0 = initial_state(cfg, opts.seed);
    const Trajectory traj =
        cfg.is_discrete() ? discrete_iterate(cfg.game, cfg.discrete_lambda, p0, cfg.discrete)
                          : integrate(*cfg.dynamics, p0, cfg.integrator);

    if (const auto path = resolve(cfg.outputs.trajectory_csv, opts, "trajectory.csv")) {
      std::ofstream f = open_output(*path);
      write_trajectory_csv(f, traj);
    }
    if (cfg.outputs.plot_csv) {
      std::ofstream f = open_output(*resolve(cfg.outputs.plot_csv, opts, "plot.csv"));
      write_plot_csv(f, traj);
    }
    emit_report(to_json(make_simulate_report(cfg.family, traj)),
                resolve(cfg.outputs.report_json, opts, "report.json"), out);
    if (!traj.converged) {
      err << "not converged: residual " << format_real(traj.residual) << " at t = "
          << format_real(traj.final_state.t) << '\n';
      return kExitNotConverged;
    }
    return kExitOk;
  });
}

int cmd_compare(const std::string& config_path, const CommandOptions& opts,
                std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig cfg = load_config(config_path);
    const CompareReport report = compare_fields(cfg, analysis_seed(cfg, opts));
    emit_report(to_json(report), resolve(cfg.outputs.report_json, opts, "compare.json"), out);
    if (!report.passed) {
      err << "engine and named fields differ by " << format_real(report.max_diff)
          << " (tolerance " << format_real(report.tolerance) << ")\n";
      return kExitTolerance;
    }
    return kExitOk;
  });
}

int cmd_equilibrium(const std::string& config_path, const CommandOptions& opts,
                    std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig cfg = load_config(config_path);
    if (cfg.is_discrete()) {
      throw UnsupportedFamily("equilibrium analysis needs a continuous family");
    }
    EquilibriumOptions eq;
    eq.seed = analysis_seed(cfg, opts);
    EquilibriumOutput result;
    result.report =
        find_equilibrium(*cfg.dynamics, initial_state(cfg, opts.seed), cfg.integrator, eq);
    const FitnessModel model = underlying_model(*cfg.dynamics);
    if (const PayoffMatrix* a = linear_payoff(model)) {
      double lambda = 0.0;
      if (const auto* r = std::get_if<Replicator>(&*cfg.dynamics)) lambda = r->lambda;
      result.curvature = curvature_class(*a, lambda);
    }
    emit_report(to_json(result), resolve(cfg.outputs.report_json, opts, "equilibrium.json"),
                out);
    if (!result.report.converged) {
      err << "not converged: residual " << format_real(result.report.residual) << '\n';
      return kExitNotConverged;
    }
    return kExitOk;
  });
}

int cmd_clique(const std::string& graph_path, int restarts, double lambda,
               const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const GraphSpec g = read_edge_list(graph_path);
    const CliqueReport report = motzkin_straus_clique(g, restarts, lambda, opts.seed.value_or(0));
    emit_report(to_json(report), resolve(std::nullopt, opts, "clique.json"), out);
    return kExitOk;
  });
}

int cmd_gradcheck(const std::string& config_path, const CommandOptions& opts,
                  std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig cfg = load_config(config_path);
    const GradcheckReport report = run_gradcheck(cfg, analysis_seed(cfg, opts));
    emit_report(to_json(report), resolve(cfg.outputs.report_json, opts, "gradcheck.json"),
                out);
    err << report.family << " (" << report.cost << "): max residual "
        << format_real(report.max_residual);
    if (report.compares_prediction) {
      err << ", predicted log term gap " << format_real(report.max_prediction_gap);
    }
    err << ", bound " << format_real(report.bound) << '\n';
    return report.passed ? kExitOk : kExitTolerance;
  });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Growth-transform evolutionary game dynamics"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string out_dir;
  std::uint64_t seed = 0;
  auto* out_dir_opt = app.add_option("--out-dir", out_dir, "Directory for output files");
  auto* seed_opt = app.add_option("--seed", seed, "Seed for random starts and samples");

  std::string config_path;
  std::string graph_path;
  int restarts = 50;
  double lambda = 0.5;

  auto* simulate = app.add_subcommand("simulate", "Integrate a configured experiment");
  auto* compare = app.add_subcommand("compare", "Named field against the engine field");
  auto* equilibrium = app.add_subcommand("equilibrium", "Find and classify a rest point");
  auto* gradcheck = app.add_subcommand("gradcheck", "Energy gradient against engine fitness");
  for (auto* sub : {simulate, compare, equilibrium, gradcheck}) {
    sub->add_option("config", config_path, "Experiment config (JSON)")->required();
  }
  auto* clique = app.add_subcommand("clique", "Motzkin-Straus clique search");
  clique->add_option("graph", graph_path, "Edge-list file")->required();
  clique->add_option("--restarts", restarts, "Random starts")->check(CLI::PositiveNumber);
  clique->add_option("--lambda", lambda, "Payoff shift")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitError;
  }

  CommandOptions opts;
  if (*out_dir_opt) opts.out_dir = out_dir;
  if (*seed_opt) opts.seed = seed;

  if (*simulate) return cmd_simulate(config_path, opts, out, err);
  if (*compare) return cmd_compare(config_path, opts, out, err);
  if (*equilibrium) return cmd_equilibrium(config_path, opts, out, err);
  if (*gradcheck) return cmd_gradcheck(config_path, opts, out, err);
  return cmd_clique(graph_path, restarts, lambda, opts, out, err);
}

}  // namespace gtdyn
