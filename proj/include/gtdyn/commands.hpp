#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "gtdyn/config.hpp"
#include "gtdyn/report_io.hpp"

namespace gtdyn {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNotConverged = 2;
inline constexpr int kExitTolerance = 3;

struct CommandOptions {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
};

// Named field against the instantiated engine at cfg.analysis.samples interior
// points. Throws UnsupportedFamily for best response and the discrete map.
CompareReport compare_fields(const ExperimentConfig& cfg, std::uint64_t seed);

// Bound on the gradient check for a family; UnsupportedFamily if none.
double gradcheck_bound(const std::string& family);

GradcheckReport run_gradcheck(const ExperimentConfig& cfg, std::uint64_t seed);

// Subcommands. Reports go to `out` (and to files when configured), diagnostics
// to `err`. Return values follow the kExit* codes.
int cmd_simulate(const std::string& config_path, const CommandOptions& opts,
                 std::ostream& out, std::ostream& err);
int cmd_compare(const std::string& config_path, const CommandOptions& opts,
                std::ostream& out, std::ostream& err);
int cmd_equilibrium(const std::string& config_path, const CommandOptions& opts,
                    std::ostream& out, std::ostream& err);
int cmd_clique(const std::string& graph_path, int restarts, double lambda,
               const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_gradcheck(const std::string& config_path, const CommandOptions& opts,
                  std::ostream& out, std::ostream& err);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gtdyn
