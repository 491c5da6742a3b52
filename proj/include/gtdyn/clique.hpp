#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <utility>
#include <vector>

#include "gtdyn/simplex.hpp"

namespace gtdyn {

// Undirected simple graph on nodes 0..n-1.
struct GraphSpec {
  int n = 0;
  std::vector<std::pair<int, int>> edges;  // stored with first < second
};

// Validates endpoints, rejects self-loops and duplicate edges, and orders each
// pair.
GraphSpec make_graph(int n, const std::vector<std::pair<int, int>>& edges);

// 0/1 adjacency matrix with zero diagonal.
Matrix adjacency_matrix(const GraphSpec& g);

// Edge-list text: one "u v" pair per line, 0-indexed. An optional
// "p [format] n m" header fixes the node count; otherwise it is one past the
// largest index. Blank lines and lines starting with 'c' or '#' are ignored.
// Throws ParseError carrying the offending line number.
GraphSpec parse_edge_list(std::istream& in);
GraphSpec read_edge_list(const std::string& path);

inline constexpr int kBruteForceMaxNodes = 20;

// Exact clique number by subset enumeration (n <= 20).
int brute_force_clique_number(const GraphSpec& g);

bool is_clique(const GraphSpec& g, const std::vector<int>& nodes);

struct CliqueReport {
  int omega_estimate = 0;
  double best_value = 0.0;  // max p'Ap over restarts
  std::vector<int> support;  // pruned to a clique
  std::vector<int> raw_support;  // {i : p_i > 1/(2n)} before pruning
  Vector best_point;
};

struct CliqueOptions {
  std::size_t max_iters = 20000;
  double conv_tol = 1e-13;
  unsigned threads = 0;  // 0: hardware concurrency
};

// Motzkin-Straus search: discrete growth-transform iterations on the
// adjacency matrix from uniform random starts; omega = round(1 / (1 - value)).
CliqueReport motzkin_straus_clique(const GraphSpec& g, int restarts, double lambda,
                                   std::uint64_t seed, const CliqueOptions& opts = {});

}  // namespace gtdyn
