#ifndef NETCHOICE_GRAPH_HPP
#define NETCHOICE_GRAPH_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace netchoice {

// Undirected connected graph over choosers. Edges are stored once with
// endpoints ordered (a < b); adjacency lists back all sparse operations so
// that the Laplacian, the propagation operator and the GCN aggregation never
// need a dense n x n matrix (dense forms are provided for small-n uses such
// as prior sampling and test oracles).
class SocialGraph {
 public:
  SocialGraph(int n, std::vector<std::pair<int, int>> edges);

  int node_count() const { return n_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<int>& neighbors(int v) const { return adj_[v]; }
  int degree(int v) const { return static_cast<int>(adj_[v].size()); }
  bool has_edge(int a, int b) const;

 private:
  int n_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> adj_;
};

// One draw per item from the utility prior: column i of `utilities` is an
// n-vector of per-chooser utilities for item i, sampled from the zero-mean
// Gaussian with covariance pinv(L)/lambda on the subspace orthogonal to 1.
struct PriorSample {
  Eigen::MatrixXd utilities;  // n x k
  double lambda = 1.0;
};

// L = D - A, dense.
Eigen::MatrixXd laplacian(const SocialGraph& g);

// alpha' L alpha computed as the sum of squared differences across edges.
double quadratic_form(const SocialGraph& g, const Eigen::VectorXd& alpha);

// In-place accumulation of lambda * L * alpha into `out` (sparse apply).
void add_laplacian_product(const SocialGraph& g, double lambda,
                           const Eigen::VectorXd& alpha, Eigen::VectorXd& out);

// With self-loops: (D+2I)^{-1/2} (A+I) (D+2I)^{-1/2}; without: D^{-1/2} A D^{-1/2}.
Eigen::MatrixXd normalized_adjacency(const SocialGraph& g, bool with_self_loops);

// Row-wise sparse application of the matrices above to x (n x c).
Eigen::MatrixXd apply_normalized_adjacency(const SocialGraph& g,
                                           const Eigen::MatrixXd& x,
                                           bool with_self_loops);

// G(n, p) conditioned on connectivity: whole graphs are resampled (fresh
// substream per attempt) until connected, capped at 1000 attempts.
SocialGraph erdos_renyi(int n, double p, std::uint64_t seed);

// Two-block planted partition: probability p_in within each block, p_out
// across, resampled until connected. Block 0 is nodes [0, size0).
SocialGraph planted_partition(int size0, int size1, double p_in, double p_out,
                              std::uint64_t seed);

PriorSample sample_prior_utilities(const SocialGraph& g, double lambda, int k,
                                   std::uint64_t seed);

// A_ij / sqrt(d_i d_j); zero for non-adjacent pairs; i == j is an error.
double partial_correlation(const SocialGraph& g, int i, int j);

// Fraction of present edges among unordered pairs {a in s1, b in s2, a != b}.
double group_edge_density(const SocialGraph& g, const std::vector<int>& s1,
                          const std::vector<int>& s2);

// edges.csv: header plus two id columns per row; duplicates and reversed
// rows are deduplicated, self-loops and unknown ids are schema errors.
SocialGraph load_edges(const std::string& path,
                       const std::unordered_map<std::string, int>& node_index);

}  // namespace netchoice

#endif  // NETCHOICE_GRAPH_HPP
