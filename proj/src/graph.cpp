#include "netchoice/graph.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "netchoice/csv.hpp"
#include "netchoice/errors.hpp"
#include "netchoice/rng.hpp"

namespace netchoice {

namespace {

bool is_connected(int n, const std::vector<std::vector<int>>& adj) {
  if (n == 0) return false;
  std::vector<char> seen(n, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int w : adj[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        ++count;
        stack.push_back(w);
      }
    }
  }
  return count == n;
}

}  // namespace

SocialGraph::SocialGraph(int n, std::vector<std::pair<int, int>> edges)
    : n_(n) {
  if (n < 1) throw Error(ErrorCode::Argument, "graph needs at least one node");
  std::set<std::pair<int, int>> canonical;
  for (auto [a, b] : edges) {
    if (a < 0 || a >= n || b < 0 || b >= n) {
      throw Error(ErrorCode::Argument, "edge endpoint out of range");
    }
    if (a == b) throw Error(ErrorCode::Argument, "self-loops are not allowed");
    canonical.insert({std::min(a, b), std::max(a, b)});
  }
  edges_.assign(canonical.begin(), canonical.end());
  adj_.assign(n, {});
  for (auto [a, b] : edges_) {
    adj_[a].push_back(b);
    adj_[b].push_back(a);
  }
  for (auto& nbrs : adj_) std::sort(nbrs.begin(), nbrs.end());
  if (n > 1 && !is_connected(n_, adj_)) {
    throw Error(ErrorCode::Argument, "graph is not connected");
  }
}

bool SocialGraph::has_edge(int a, int b) const {
  if (a == b) return false;
  const auto& nbrs = adj_[a];
  return std::binary_search(nbrs.begin(), nbrs.end(), b);
}

Eigen::MatrixXd laplacian(const SocialGraph& g) {
  const int n = g.node_count();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (auto [a, b] : g.edges()) {
    l(a, a) += 1.0;
    l(b, b) += 1.0;
    l(a, b) -= 1.0;
    l(b, a) -= 1.0;
  }
  return l;
}

double quadratic_form(const SocialGraph& g, const Eigen::VectorXd& alpha) {
  if (alpha.size() != g.node_count()) {
    throw Error(ErrorCode::Argument, "quadratic_form: dimension mismatch");
  }
  double sum = 0.0;
  for (auto [a, b] : g.edges()) {
    const double d = alpha[a] - alpha[b];
    sum += d * d;
  }
  return sum;
}

void add_laplacian_product(const SocialGraph& g, double lambda,
                           const Eigen::VectorXd& alpha,
                           Eigen::VectorXd& out) {
  for (int v = 0; v < g.node_count(); ++v) {
    double acc = g.degree(v) * alpha[v];
    for (int w : g.neighbors(v)) acc -= alpha[w];
    out[v] += lambda * acc;
  }
}

Eigen::MatrixXd normalized_adjacency(const SocialGraph& g,
                                     bool with_self_loops) {
  const int n = g.node_count();
  Eigen::VectorXd scale(n);
  for (int v = 0; v < n; ++v) {
    const double d = with_self_loops ? g.degree(v) + 2.0 : g.degree(v);
    if (d == 0.0) {
      throw Error(ErrorCode::Argument, "isolated node in normalized adjacency");
    }
    scale[v] = 1.0 / std::sqrt(d);
  }
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (auto [a, b] : g.edges()) {
    const double w = scale[a] * scale[b];
    m(a, b) = w;
    m(b, a) = w;
  }
  if (with_self_loops) {
    for (int v = 0; v < n; ++v) m(v, v) = scale[v] * scale[v];
  }
  return m;
}

Eigen::MatrixXd apply_normalized_adjacency(const SocialGraph& g,
                                           const Eigen::MatrixXd& x,
                                           bool with_self_loops) {
  const int n = g.node_count();
  if (x.rows() != n) {
    throw Error(ErrorCode::Argument, "apply_normalized_adjacency: row mismatch");
  }
  Eigen::VectorXd scale(n);
  for (int v = 0; v < n; ++v) {
    const double d = with_self_loops ? g.degree(v) + 2.0 : g.degree(v);
    if (d == 0.0) {
      throw Error(ErrorCode::Argument, "isolated node in normalized adjacency");
    }
    scale[v] = 1.0 / std::sqrt(d);
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, x.cols());
  if (with_self_loops) {
    for (int v = 0; v < n; ++v) out.row(v) = scale[v] * scale[v] * x.row(v);
  }
  for (auto [a, b] : g.edges()) {
    const double w = scale[a] * scale[b];
    out.row(a) += w * x.row(b);
    out.row(b) += w * x.row(a);
  }
  return out;
}

namespace {

SocialGraph sample_until_connected(
    int n, std::uint64_t seed,
    const std::function<std::vector<std::pair<int, int>>(Rng&)>& draw_edges) {
  constexpr int kMaxAttempts = 1000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(attempt)));
    auto edges = draw_edges(rng);
    std::vector<std::vector<int>> adj(n);
    for (auto [a, b] : edges) {
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
    if (is_connected(n, adj)) return SocialGraph(n, std::move(edges));
  }
  throw Error(ErrorCode::Generation,
              "no connected graph found in 1000 attempts");
}

}  // namespace

SocialGraph erdos_renyi(int n, double p, std::uint64_t seed) {
  if (n < 2) throw Error(ErrorCode::Argument, "erdos_renyi: n must be >= 2");
  if (p <= 0.0 || p > 1.0) {
    throw Error(ErrorCode::Argument, "erdos_renyi: p must be in (0, 1]");
  }
  return sample_until_connected(n, seed, [&](Rng& rng) {
    std::vector<std::pair<int, int>> edges;
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        if (rng.bernoulli(p)) edges.push_back({a, b});
      }
    }
    return edges;
  });
}

SocialGraph planted_partition(int size0, int size1, double p_in, double p_out,
                              std::uint64_t seed) {
  const int n = size0 + size1;
  if (size0 < 1 || size1 < 1) {
    throw Error(ErrorCode::Argument, "planted_partition: empty block");
  }
  return sample_until_connected(n, seed, [&](Rng& rng) {
    std::vector<std::pair<int, int>> edges;
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        const bool same = (a < size0) == (b < size0);
        if (rng.bernoulli(same ? p_in : p_out)) edges.push_back({a, b});
      }
    }
    return edges;
  });
}

PriorSample sample_prior_utilities(const SocialGraph& g, double lambda, int k,
                                   std::uint64_t seed) {
  if (lambda <= 0.0) {
    throw Error(ErrorCode::Argument, "prior sampling needs lambda > 0");
  }
  if (k < 1) throw Error(ErrorCode::Argument, "prior sampling needs k >= 1");
  const int n = g.node_count();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(laplacian(g));
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::Generation, "Laplacian eigendecomposition failed");
  }
  const Eigen::VectorXd& mu = eig.eigenvalues();
  const Eigen::MatrixXd& q = eig.eigenvectors();
  // Connected graph: exactly one zero eigenvalue. Anything below the cutoff
  // is treated as the nullspace and carries no noise.
  const double cutoff = 1e-9 * std::max(1.0, mu[n - 1]);

  Rng rng(seed);
  PriorSample sample;
  sample.lambda = lambda;
  sample.utilities = Eigen::MatrixXd::Zero(n, k);
  for (int item = 0; item < k; ++item) {
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < n; ++j) {
      if (mu[j] <= cutoff) continue;
      alpha += (rng.normal() / std::sqrt(lambda * mu[j])) * q.col(j);
    }
    // Project out any numerical drift along the all-ones direction.
    alpha.array() -= alpha.mean();
    sample.utilities.col(item) = alpha;
  }
  return sample;
}

double partial_correlation(const SocialGraph& g, int i, int j) {
  if (i == j) {
    throw Error(ErrorCode::Argument, "partial_correlation: i and j must differ");
  }
  if (!g.has_edge(i, j)) return 0.0;
  return 1.0 / std::sqrt(static_cast<double>(g.degree(i)) * g.degree(j));
}

double group_edge_density(const SocialGraph& g, const std::vector<int>& s1,
                          const std::vector<int>& s2) {
  if (s1.empty() || s2.empty()) {
    throw Error(ErrorCode::Argument, "group_edge_density: empty group");
  }
  std::set<std::pair<int, int>> pairs;
  for (int a : s1) {
    for (int b : s2) {
      if (a == b) continue;
      pairs.insert({std::min(a, b), std::max(a, b)});
    }
  }
  if (pairs.empty()) return 0.0;
  int present = 0;
  for (auto [a, b] : pairs) {
    if (g.has_edge(a, b)) ++present;
  }
  return static_cast<double>(present) / static_cast<double>(pairs.size());
}

SocialGraph load_edges(
    const std::string& path,
    const std::unordered_map<std::string, int>& node_index) {
  const csv::Table table = csv::read_file(path);
  if (table.header.size() < 2) {
    throw Error(ErrorCode::Schema, path + ": expected two id columns");
  }
  std::vector<std::pair<int, int>> edges;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = path + " row " + std::to_string(r);
    if (row.size() < 2) throw Error(ErrorCode::Schema, where + ": missing column");
    auto lookup = [&](const std::string& id) {
      auto it = node_index.find(id);
      if (it == node_index.end()) {
        throw Error(ErrorCode::Schema, where + ": unknown node id '" + id + "'");
      }
      return it->second;
    };
    const int a = lookup(row[0]);
    const int b = lookup(row[1]);
    if (a == b) {
      throw Error(ErrorCode::Schema,
                  where + ": self-loop on node '" + row[0] + "'");
    }
    edges.push_back({a, b});
  }
  return SocialGraph(static_cast<int>(node_index.size()), std::move(edges));
}

}  // namespace netchoice
