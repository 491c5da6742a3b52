#include "gtdyn/clique.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cctype>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "gtdyn/errors.hpp"
#include "gtdyn/game_models.hpp"
#include "gtdyn/solver.hpp"

namespace gtdyn {

namespace {

struct StartResult {
  double value = 0.0;
  Vector point;
  std::vector<int> raw_support;
  std::vector<int> support;
};

std::vector<int> prune_to_clique(const Matrix& adj, const Vector& p,
                                 std::vector<int> candidates) {
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](int a, int b) { return p[a] > p[b]; });
  std::vector<int> chosen;
  for (int v : candidates) {
    const bool joins = std::all_of(chosen.begin(), chosen.end(),
                                   [&](int u) { return adj(u, v) != 0.0; });
    if (joins) chosen.push_back(v);
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

bool is_integer_token(const std::string& s) {
  if (s.empty()) return false;
  std::size_t start = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (start == s.size()) return false;
  return std::all_of(s.begin() + static_cast<long>(start), s.end(),
                     [](unsigned char ch) { return std::isdigit(ch) != 0; });
}

int to_int(const std::string& s, int line) {
  if (!is_integer_token(s)) {
    throw ParseError("line " + std::to_string(line) + ": '" + s +
                     "' is not an integer");
  }
  try {
    return std::stoi(s);
  } catch (const std::out_of_range&) {
    throw ParseError("line " + std::to_string(line) + ": '" + s + "' is out of range");
  }
}

}  // namespace

GraphSpec make_graph(int n, const std::vector<std::pair<int, int>>& edges) {
  if (n < 0) throw DimensionError("graph node count must be >= 0");
  GraphSpec g;
  g.n = n;
  std::set<std::pair<int, int>> seen;
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n) {
      throw DimensionError("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                           ") has an endpoint outside [0, " + std::to_string(n) + ")");
    }
    if (u == v) throw DimensionError("self-loop at node " + std::to_string(u));
    const auto e = std::minmax(u, v);
    if (!seen.insert(e).second) {
      throw DimensionError("duplicate edge (" + std::to_string(e.first) + ", " +
                           std::to_string(e.second) + ")");
    }
    g.edges.emplace_back(e.first, e.second);
  }
  return g;
}

Matrix adjacency_matrix(const GraphSpec& g) {
  Matrix a = Matrix::Zero(g.n, g.n);
  for (auto [u, v] : g.edges) {
    a(u, v) = 1.0;
    a(v, u) = 1.0;
  }
  return a;
}

GraphSpec parse_edge_list(std::istream& in) {
  std::string raw;
  int line_no = 0;
  int declared_n = -1;
  int max_index = -1;
  std::vector<std::pair<int, int>> edges;
  std::vector<int> edge_lines;

  while (std::getline(in, raw)) {
    ++line_no;
    std::istringstream ls(raw);
    std::vector<std::string> tokens;
    for (std::string t; ls >> t;) tokens.push_back(t);
    if (tokens.empty() || tokens[0][0] == 'c' || tokens[0][0] == '#') continue;

    if (tokens[0] == "p") {
      if (declared_n >= 0) {
        throw ParseError("line " + std::to_string(line_no) + ": repeated header");
      }
      std::size_t k = 1;
      if (k < tokens.size() && !is_integer_token(tokens[k])) ++k;  // "p edge n m"
      if (tokens.size() != k + 2) {
        throw ParseError("line " + std::to_string(line_no) +
                         ": header must read 'p n m'");
      }
      declared_n = to_int(tokens[k], line_no);
      to_int(tokens[k + 1], line_no);
      if (declared_n < 0) {
        throw ParseError("line " + std::to_string(line_no) + ": negative node count");
      }
      continue;
    }
    if (tokens.size() != 2) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected 'u v', got " + std::to_string(tokens.size()) +
                       " fields");
    }
    const int u = to_int(tokens[0], line_no);
    const int v = to_int(tokens[1], line_no);
    if (u < 0 || v < 0) {
      throw ParseError("line " + std::to_string(line_no) + ": negative node index");
    }
    if (u == v) {
      throw ParseError("line " + std::to_string(line_no) + ": self-loop");
    }
    max_index = std::max({max_index, u, v});
    edges.emplace_back(u, v);
    edge_lines.push_back(line_no);
  }

  const int n = declared_n >= 0 ? declared_n : max_index + 1;
  std::set<std::pair<int, int>> seen;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto [u, v] = edges[k];
    if (u >= n || v >= n) {
      throw ParseError("line " + std::to_string(edge_lines[k]) +
                       ": node index exceeds declared count " + std::to_string(n));
    }
    if (!seen.insert(std::minmax(u, v)).second) {
      throw ParseError("line " + std::to_string(edge_lines[k]) + ": duplicate edge");
    }
  }
  return make_graph(n, edges);
}

GraphSpec read_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open graph file '" + path + "'");
  return parse_edge_list(in);
}

int brute_force_clique_number(const GraphSpec& g) {
  if (g.n > kBruteForceMaxNodes) {
    throw SizeError("brute-force clique number supports at most 20 nodes");
  }
  if (g.n == 0) return 0;
  std::vector<std::uint32_t> neighbours(static_cast<std::size_t>(g.n), 0);
  for (auto [u, v] : g.edges) {
    neighbours[static_cast<std::size_t>(u)] |= 1u << v;
    neighbours[static_cast<std::size_t>(v)] |= 1u << u;
  }
  // clique[mask]: mask minus its lowest node is a clique and that node is
  // adjacent to all of it.
  const std::uint32_t full = 1u << g.n;
  std::vector<char> clique(full, 0);
  clique[0] = 1;
  int best = 0;
  for (std::uint32_t mask = 1; mask < full; ++mask) {
    const int low = std::countr_zero(mask);
    const std::uint32_t rest = mask & (mask - 1);
    if (clique[rest] && (neighbours[static_cast<std::size_t>(low)] & rest) == rest) {
      clique[mask] = 1;
      best = std::max(best, std::popcount(mask));
    }
  }
  return best;
}

bool is_clique(const GraphSpec& g, const std::vector<int>& nodes) {
  const Matrix a = adjacency_matrix(g);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      if (a(nodes[i], nodes[j]) == 0.0) return false;
    }
  }
  return true;
}

CliqueReport motzkin_straus_clique(const GraphSpec& g, int restarts, double lambda,
                                   std::uint64_t seed, const CliqueOptions& opts) {
  if (restarts < 1) throw ParameterError("restarts must be >= 1");
  if (!(lambda > 0.0)) throw ParameterError("lambda must be > 0");
  if (g.n < 1) throw DimensionError("graph must have at least one node");

  CliqueReport report;
  if (g.n == 1) {
    report.omega_estimate = 1;
    report.support = report.raw_support = {0};
    report.best_point = Vector::Ones(1);
    return report;
  }

  const Matrix adj = adjacency_matrix(g);
  const FitnessModel model = LinearFitness{PayoffMatrix(adj)};
  const double threshold = 1.0 / (2.0 * g.n);

  std::mt19937_64 seeder(seed);
  std::vector<std::uint64_t> start_seeds(static_cast<std::size_t>(restarts));
  for (auto& s : start_seeds) s = seeder();

  std::vector<StartResult> results(start_seeds.size());
  auto run_start = [&](std::size_t k) {
    const Vector p0 = sample_uniform(g.n, start_seeds[k]).values();
    DiscreteConfig cfg;
    cfg.max_iters = opts.max_iters;
    cfg.conv_tol = opts.conv_tol;
    cfg.record_every = opts.max_iters;
    const Trajectory run = discrete_iterate(model, lambda, p0, cfg);
    StartResult r;
    r.point = run.final_state.p;
    r.value = r.point.dot(adj * r.point);
    for (int i = 0; i < g.n; ++i) {
      if (r.point[i] > threshold) r.raw_support.push_back(i);
    }
    r.support = prune_to_clique(adj, r.point, r.raw_support);
    results[k] = std::move(r);
  };

  unsigned threads = opts.threads != 0 ? opts.threads : std::thread::hardware_concurrency();
  threads = std::clamp(threads, 1u, static_cast<unsigned>(results.size()));
  if (threads == 1) {
    for (std::size_t k = 0; k < results.size(); ++k) run_start(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < results.size(); k = next++) run_start(k);
      });
    }
  }

  // Deterministic reduction: highest value, then lexicographically smallest
  // support among values tied within 1e-12.
  const StartResult* best = &results.front();
  for (const StartResult& r : results) {
    if (r.value > best->value + 1e-12 ||
        (std::abs(r.value - best->value) <= 1e-12 && r.support < best->support)) {
      best = &r;
    }
  }

  report.best_value = best->value;
  report.best_point = best->point;
  report.raw_support = best->raw_support;
  report.support = best->support;
  const double estimate = 1.0 / (1.0 - std::min(best->value, 1.0 - 1e-15));
  report.omega_estimate = std::clamp(static_cast<int>(std::lround(estimate)), 1, g.n);
  return report;
}

}  // namespace gtdyn
