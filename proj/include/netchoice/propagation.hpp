#ifndef NETCHOICE_PROPAGATION_HPP
#define NETCHOICE_PROPAGATION_HPP

#include <Eigen/Dense>
#include <vector>

#include "netchoice/graph.hpp"

namespace netchoice {

struct PropagationConfig {
  double rho = 0.5;          // smoothing strength in [0, 1]
  int max_iterations = 256;
  double tolerance = 1e-8;   // sum of squared differences between iterates
};

struct PropagationResult {
  Eigen::MatrixXd z;
  int iterations = 0;
  bool converged = false;
};

// Iterates Z <- (1-rho) Z0 + rho * D^{-1/2} A D^{-1/2} Z until the squared
// change between iterates drops below the tolerance or the iteration cap is
// hit (the last iterate is returned either way; rho = 1 on bipartite graphs
// oscillates and simply reports converged = false). For rho < 1 the limit is
// the unique solution of (I - rho*S) Z = (1-rho) Z0.
PropagationResult propagate(const Eigen::MatrixXd& z0, const SocialGraph& g,
                            const PropagationConfig& cfg);

// Argmax of z_row over the items in C; ties broken by ascending item index.
int predict_choice(const Eigen::VectorXd& z_row, const std::vector<int>& items);

// C sorted by descending z value, ties broken by ascending item index.
std::vector<int> rank_choices(const Eigen::VectorXd& z_row,
                              const std::vector<int>& items);

}  // namespace netchoice

#endif  // NETCHOICE_PROPAGATION_HPP
