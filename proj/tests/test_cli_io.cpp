#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gtdyn/commands.hpp"
#include "gtdyn/errors.hpp"

using namespace gtdyn;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("gtdyn_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& text) const {
    const fs::path p = path / name;
    std::ofstream(p) << text;
    return p.string();
  }
};

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "gtdyn");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

const char* kPd =
    R"({"game": {"type": "linear", "matrix": [[3, 0], [5, 1]]},
        "dynamics": {"family": "replicator", "lambda": 6},
        "initial": [0.5, 0.5],
        "integrator": {"dt": 0.01, "t_max": 200, "record_every": 100}})";

const char* kRps =
    R"({"game": {"type": "linear", "matrix": [[0, -1, 1], [1, 0, -1], [-1, 1, 0]]},
        "dynamics": {"family": "replicator"},
        "initial": [0.5, 0.25, 0.25],
        "integrator": {"dt": 0.001, "t_max": 100, "record_every": 1000},
        "outputs": {"trajectory_csv": "traj.csv", "report_json": "report.json",
                    "plot_csv": "plot.csv"}})";

const char* kHawkDove =
    R"({"game": {"type": "linear", "matrix": [[-1, 2], [0, 1]]},
        "dynamics": {"family": "replicator"},
        "initial": [0.2, 0.8],
        "integrator": {"dt": 0.01, "t_max": 500, "conv_tol": 1e-10}})";

std::string game_config(const std::string& game, const std::string& dynamics,
                        const std::string& extra = "") {
  return R"({"game": )" + game + R"(, "dynamics": )" + dynamics +
         R"(, "initial": {"uniform": true})" + extra + "}";
}

const std::string kLinear3 = R"({"type": "linear", "matrix": [[1, 2, 0.5], [0.3, 1, 2], [2, 0.1, 1]]})";

ConfigError config_error(const std::string& text) {
  try {
    parse_config(nlohmann::json::parse(text));
  } catch (const ConfigError& e) {
    return e;
  }
  FAIL("expected a ConfigError for " << text);
  return ConfigError("", "");
}

}  // namespace

TEST_CASE("simulate prisoners dilemma") {
  TempDir dir;
  const Run r = cli({"simulate", dir.file("pd.json", kPd)});
  CHECK(r.code == kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(validate_report(j) == "simulate");
  CHECK(j["converged"] == true);
  CHECK(j["final_state"][0].get<double>() <= 1e-7);
  CHECK(j["final_state"][1].get<double>() >= 1 - 1e-7);
}

TEST_CASE("simulate rps writes the full trajectory and exits 2") {
  TempDir dir;
  const Run r = cli({"--out-dir", dir.path.string(), "simulate", dir.file("rps.json", kRps)});
  CHECK(r.code == kExitNotConverged);
  CHECK_FALSE(r.err.empty());
  const auto rows = lines_of(slurp(dir.path / "traj.csv"));
  REQUIRE_FALSE(rows.empty());
  CHECK(rows[0] == "t,p_1,p_2,p_3,mean_fitness,energy,sum_drift");
  // floor(t_end / (dt * record_every)) + 1 data rows.
  CHECK(rows.size() == 1 + 101);
  const auto report = nlohmann::json::parse(slurp(dir.path / "report.json"));
  CHECK(report["converged"] == false);
  CHECK(report["t_end"].get<double>() == doctest::Approx(100.0));
  const auto plot = lines_of(slurp(dir.path / "plot.csv"));
  CHECK(plot[0] == "t,p_1,p_2,p_3,x,y");
  CHECK(plot.size() == rows.size());
}

TEST_CASE("csv row count follows the formula for early convergence") {
  TempDir dir;
  const std::string cfg =
      R"({"game": {"type": "linear", "matrix": [[3, 0], [5, 1]]},
          "dynamics": {"family": "replicator"}, "initial": [0.5, 0.5],
          "integrator": {"dt": 0.01, "t_max": 1000, "record_every": 7},
          "outputs": {"trajectory_csv": "t.csv", "report_json": "r.json"}})";
  const Run r = cli({"--out-dir", dir.path.string(), "simulate", dir.file("c.json", cfg)});
  REQUIRE(r.code == kExitOk);
  const auto report = nlohmann::json::parse(slurp(dir.path / "r.json"));
  const double t_end = report["t_end"].get<double>();
  const auto expected = static_cast<std::size_t>(std::floor(t_end / (0.01 * 7) + 1e-9)) + 1;
  CHECK(lines_of(slurp(dir.path / "t.csv")).size() == expected + 1);
}

TEST_CASE("discrete simulate") {
  TempDir dir;
  const std::string cfg =
      R"({"game": {"type": "linear", "matrix": [[2, 0], [0, 1]]},
          "dynamics": {"family": "discrete", "lambda": 0}, "initial": [0.5, 0.5],
          "integrator": {"max_iters": 10000, "conv_tol": 1e-12}})";
  const Run r = cli({"simulate", dir.file("d.json", cfg)});
  CHECK(r.code == kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["final_state"][0].get<double>() == doctest::Approx(1.0));
  CHECK(j["mean_fitness"].get<double>() == doctest::Approx(2.0));
}

TEST_CASE("malformed configs exit 1 with field paths") {
  TempDir dir;
  const Run dim = cli({"simulate", dir.file("bad.json", R"({"game": {"type": "linear",
      "matrix": [[0, -1, 1], [1, 0, -1], [-1, 1, 0]]}, "dynamics": {"family": "replicator"},
      "initial": [0.5, 0.5]})")});
  CHECK(dim.code == kExitError);
  CHECK(dim.err.find("/initial") != std::string::npos);
  CHECK(dim.err.find("/game") != std::string::npos);

  const Run syntax = cli({"simulate", dir.file("syntax.json", "{ not json")});
  CHECK(syntax.code == kExitError);
  CHECK(syntax.err.find("invalid JSON") != std::string::npos);

  CHECK(cli({"simulate", (dir.path / "missing.json").string()}).code == kExitError);
  CHECK(cli({"frobnicate"}).code == kExitError);
  CHECK(cli({}).code == kExitError);
  CHECK(cli({"--help"}).code == kExitOk);
}

TEST_CASE("config errors carry json pointers") {
  const std::string game = kLinear3;
  CHECK(config_error(game_config(game, R"({"family": "replicator", "lambda": -1})")).pointer() ==
        "/dynamics/lambda");
  CHECK(config_error(game_config(game, R"({"family": "wobble"})")).pointer() == "/dynamics/family");
  CHECK(config_error(game_config(game, R"({"family": "logit", "eta": 0})")).pointer() == "/dynamics/eta");
  CHECK(config_error(game_config(game, R"({"family": "bnn", "epsilon": -0.1})")).pointer() ==
        "/dynamics/epsilon");
  CHECK(config_error(game_config(game, R"({"family": "discrete", "lambda": -2})")).pointer() ==
        "/dynamics/lambda");
  CHECK(config_error(game_config(game, R"({"family": "replicator", "extra": 1})")).pointer() ==
        "/dynamics/extra");
  CHECK(config_error(game_config(game, R"({"family": "logit", "eta": "big"})")).pointer() ==
        "/dynamics/eta");
  CHECK(config_error(game_config(game, R"({"family": "quasispecies"})")).pointer() == "/game/type");
  CHECK(config_error(game_config(R"({"type": "linear", "matrix": [[1, 2], [3]]})",
                                 R"({"family": "replicator"})"))
            .pointer() == "/game/matrix/1");
  CHECK(config_error(game_config(game, R"({"family": "replicator"})",
                                 R"(, "integrator": {"dt": 0})"))
            .pointer()
            .rfind("/integrator", 0) == 0);
  CHECK(config_error(game_config(game, R"({"family": "replicator_mutator",
      "mutation": {"kind": "uniform_noise", "mu": 2}})"))
            .pointer()
            .rfind("/dynamics/mutation", 0) == 0);
  CHECK(config_error(R"({"game": {"type": "constant", "values": [1, 2]},
      "dynamics": {"family": "replicator"}, "initial": {"uniform": true, "random": {"seed": 1}}})")
            .pointer() == "/initial");
  CHECK(config_error(R"({"dynamics": {"family": "replicator"}})").pointer() == "/game");
  CHECK(config_error(game_config(game, R"({"family": "replicator"})", R"(, "bogus": 1)"))
            .pointer() == "/bogus");
}

TEST_CASE("compare exit codes") {
  TempDir dir;
  const Run rep = cli({"compare", dir.file("r.json", game_config(kLinear3, R"({"family": "replicator", "lambda": 1})"))});
  CHECK(rep.code == kExitOk);
  const auto j = nlohmann::json::parse(rep.out);
  CHECK(validate_report(j) == "compare");
  CHECK(j["max_diff"].get<double>() <= 1e-10);
  CHECK(j["points"].size() == 100);

  const Run logit = cli({"compare", dir.file("l.json", game_config(kLinear3, R"({"family": "logit", "eta": 0.5})"))});
  CHECK(logit.code == kExitOk);
  const auto lj = nlohmann::json::parse(logit.out);
  for (const auto& p : lj["points"]) {
    REQUIRE(p["scale"].get<double>() ==
            doctest::Approx(p["expected_scale"].get<double>()).epsilon(1e-10));
    Vector point(3);
    for (int i = 0; i < 3; ++i) point[i] = p["point"][i].get<double>();
    // Scale is sum_i exp(f_i / eta) for f = Ap.
    Matrix a(3, 3);
    a << 1, 2, 0.5, 0.3, 1, 2, 2, 0.1, 1;
    const double expected = ((a * point) / 0.5).array().exp().sum();
    REQUIRE(p["expected_scale"].get<double>() == doctest::Approx(expected).epsilon(1e-12));
  }

  const Run br = cli({"compare", dir.file("b.json", game_config(kLinear3, R"({"family": "best_response"})"))});
  CHECK(br.code == kExitError);
  CHECK_FALSE(br.err.empty());
}

TEST_CASE("equilibrium reports") {
  TempDir dir;
  const Run hd = cli({"equilibrium", dir.file("hd.json", kHawkDove)});
  CHECK(hd.code == kExitOk);
  const auto j = nlohmann::json::parse(hd.out);
  CHECK(validate_report(j) == "equilibrium");
  CHECK(j["nash"] == true);
  CHECK(j["ess"]["verdict"] == true);
  CHECK(j["curvature"]["class"] == "StrictlyConvex");
  CHECK(j["point"][0].get<double>() == doctest::Approx(0.5).epsilon(1e-6));

  const Run rps = cli({"equilibrium", dir.file("rps.json", game_config(
      R"({"type": "linear", "matrix": [[0, -1, 1], [1, 0, -1], [-1, 1, 0]]})",
      R"({"family": "replicator"})"))});
  CHECK(rps.code == kExitOk);
  const auto rj = nlohmann::json::parse(rps.out);
  CHECK(rj["curvature"]["class"] == to_string(CurvatureClass::kFlat));
  CHECK(rj["stability"] == to_string(StabilityClass::kNeutrallyStable));

  const Run co = cli({"equilibrium", dir.file("co.json", R"({"game": {"type": "linear",
      "matrix": [[2, 0], [0, 1]]}, "dynamics": {"family": "replicator"}, "initial": [0.8, 0.2],
      "integrator": {"dt": 0.01, "t_max": 500}})")});
  CHECK(co.code == kExitOk);
  const auto cj = nlohmann::json::parse(co.out);
  CHECK(cj["point"][0].get<double>() >= 1 - 1e-8);
  CHECK(cj["nash"] == true);
  CHECK(cj["stability"] == to_string(StabilityClass::kAsymptoticallyStable));

  const Run cyc = cli({"equilibrium", dir.file("cyc.json", R"({"game": {"type": "linear",
      "matrix": [[0, -1, 1], [1, 0, -1], [-1, 1, 0]]}, "dynamics": {"family": "replicator"},
      "initial": [0.5, 0.25, 0.25], "integrator": {"t_max": 10}})")});
  CHECK(cyc.code == kExitNotConverged);
  CHECK(nlohmann::json::parse(cyc.out)["flags"][0] == "not_converged");
}

TEST_CASE("clique command") {
  TempDir dir;
  const Run k3 = cli({"clique", dir.file("k3.txt", "0 1\n1 2\n0 2\n")});
  CHECK(k3.code == kExitOk);
  const auto j = nlohmann::json::parse(k3.out);
  CHECK(validate_report(j) == "clique");
  CHECK(j["omega"] == 3);
  CHECK(j["value"].get<double>() == doctest::Approx(2.0 / 3).epsilon(1e-10));
  CHECK(j["clique"] == nlohmann::json::array({0, 1, 2}));

  const Run empty = cli({"clique", dir.file("e.txt", "p 3 0\n")});
  CHECK(empty.code == kExitOk);
  const auto ej = nlohmann::json::parse(empty.out);
  CHECK(ej["omega"] == 1);
  CHECK(ej["value"].get<double>() == 0.0);

  const Run bad = cli({"clique", dir.file("bad.txt", "0 1\na b c\n")});
  CHECK(bad.code == kExitError);
  CHECK(bad.err.find("line 2") != std::string::npos);

  const Run a = cli({"--seed", "5", "clique", dir.file("c5.txt", "0 1\n1 2\n2 3\n3 4\n4 0\n"), "--restarts", "10"});
  const Run b = cli({"--seed", "5", "clique", dir.file("c5.txt", "0 1\n1 2\n2 3\n3 4\n4 0\n"), "--restarts", "10"});
  CHECK(a.code == kExitOk);
  CHECK(a.out == b.out);
  CHECK(nlohmann::json::parse(a.out)["omega"] == 2);
}

TEST_CASE("gradcheck command") {
  TempDir dir;
  const Run rep = cli({"gradcheck", dir.file("r.json", game_config(kLinear3, R"({"family": "replicator", "lambda": 1})", R"(, "analysis": {"samples": 20})"))});
  CHECK(rep.code == kExitOk);
  const auto j = nlohmann::json::parse(rep.out);
  CHECK(validate_report(j) == "gradcheck");
  CHECK(j["max_residual"].get<double>() <= 1e-5);
  CHECK(j["points"] == 20);

  const Run qs = cli({"gradcheck", dir.file("q.json", game_config(R"({"type": "constant", "values": [1, 2, 3]})",
      R"({"family": "quasispecies", "lambda": 1, "mutation": {"kind": "uniform_noise", "mu": 0.3}})",
      R"(, "analysis": {"samples": 20})"))});
  CHECK(qs.code == kExitOk);
  const auto qj = nlohmann::json::parse(qs.out);
  CHECK(qj["compares_prediction"] == true);
  CHECK(qj["max_residual"].get<double>() > 1e-3);
  CHECK(qj["max_prediction_gap"].get<double>() <= 1e-5);

  const Run lg = cli({"gradcheck", dir.file("l.json", game_config(kLinear3, R"({"family": "logit", "eta": 0.7})", R"(, "analysis": {"samples": 10})"))});
  CHECK(lg.code == kExitOk);
  CHECK(nlohmann::json::parse(lg.out)["max_residual"].get<double>() <= 1e-4);

  const Run br = cli({"gradcheck", dir.file("b.json", game_config(kLinear3, R"({"family": "best_response"})"))});
  CHECK(br.code == kExitError);
}

TEST_CASE("reports round-trip through their parsers") {
  TempDir dir;
  const std::vector<Run> runs = {
      cli({"simulate", dir.file("pd.json", kPd)}),
      cli({"equilibrium", dir.file("hd.json", kHawkDove)}),
      cli({"compare", dir.file("l.json", game_config(kLinear3, R"({"family": "logit", "eta": 0.5})", R"(, "analysis": {"samples": 5})"))}),
      cli({"gradcheck", dir.file("q.json", game_config(R"({"type": "constant", "values": [1, 2, 3]})",
          R"({"family": "quasispecies", "lambda": 1, "mutation": {"kind": "uniform_noise", "mu": 0.3}})",
          R"(, "analysis": {"samples": 5})"))}),
      cli({"clique", dir.file("k3.txt", "0 1\n1 2\n0 2\n")})};
  for (const Run& r : runs) {
    REQUIRE(r.code == kExitOk);
    const auto j = nlohmann::json::parse(r.out);
    const std::string tag = validate_report(j);
    nlohmann::json again;
    if (tag == "simulate") again = to_json(simulate_report_from_json(j));
    if (tag == "equilibrium") again = to_json(equilibrium_output_from_json(j));
    if (tag == "compare") again = to_json(compare_report_from_json(j));
    if (tag == "gradcheck") again = to_json(gradcheck_report_from_json(j));
    if (tag == "clique") again = to_json(clique_report_from_json(j));
    CHECK(dump(again) == r.out);
  }
  CHECK_THROWS_AS(validate_report(nlohmann::json{{"report", "mystery"}}), ParseError);
  CHECK_THROWS_AS(simulate_report_from_json(nlohmann::json{{"report", "simulate"}}), ParseError);
}

TEST_CASE("repeated runs are byte-identical") {
  TempDir a, b;
  const std::string cfg =
      R"({"game": {"type": "linear", "matrix": [[1, 2, 0.5], [0.3, 1, 2], [2, 0.1, 1]]},
          "dynamics": {"family": "logit", "eta": 0.4}, "initial": {"random": {"seed": 3}},
          "integrator": {"dt": 0.01, "t_max": 20, "record_every": 5},
          "outputs": {"trajectory_csv": "t.csv", "report_json": "r.json", "plot_csv": "p.csv"}})";
  const Run ra = cli({"--seed", "11", "--out-dir", a.path.string(), "simulate", a.file("c.json", cfg)});
  const Run rb = cli({"--seed", "11", "--out-dir", b.path.string(), "simulate", b.file("c.json", cfg)});
  CHECK(ra.code == rb.code);
  CHECK(ra.out == rb.out);
  for (const char* name : {"t.csv", "r.json", "p.csv"}) {
    CHECK(slurp(a.path / name) == slurp(b.path / name));
    CHECK_FALSE(slurp(a.path / name).empty());
  }
  // A different seed moves the random start.
  TempDir c;
  const Run rc = cli({"--seed", "12", "--out-dir", c.path.string(), "simulate", c.file("c.json", cfg)});
  CHECK(rc.out != ra.out);

  const std::string cmp = game_config(kLinear3, R"({"family": "bnn"})", R"(, "analysis": {"samples": 10})");
  CHECK(cli({"--seed", "4", "compare", a.file("cmp.json", cmp)}).out ==
        cli({"--seed", "4", "compare", a.file("cmp.json", cmp)}).out);
}

TEST_CASE("built binary follows the exit-code contract") {
  TempDir dir;
  const std::string exe = GTDYN_CLI_PATH;
  auto status = [&](const std::string& args) {
    const std::string cmd = "\"" + exe + "\" " + args + " > \"" + (dir.path / "out.txt").string() +
                            "\" 2> \"" + (dir.path / "err.txt").string() + "\"";
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  CHECK(status("simulate \"" + dir.file("pd.json", kPd) + "\"") == 0);
  CHECK(nlohmann::json::parse(slurp(dir.path / "out.txt"))["converged"] == true);
  CHECK(status("simulate \"" + dir.file("syntax.json", "{") + "\"") == 1);
  CHECK(slurp(dir.path / "err.txt").find("error") != std::string::npos);
  CHECK(status("--out-dir \"" + dir.path.string() + "\" simulate \"" + dir.file("rps.json", kRps) + "\"") == 2);
  CHECK(fs::exists(dir.path / "traj.csv"));
}
