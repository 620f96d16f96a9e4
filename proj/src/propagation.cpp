#include "netchoice/propagation.hpp"

#include <algorithm>
#include <numeric>

#include "netchoice/errors.hpp"

namespace netchoice {

PropagationResult propagate(const Eigen::MatrixXd& z0, const SocialGraph& g,
                            const PropagationConfig& cfg) {
  if (z0.rows() != g.node_count()) {
    throw Error(ErrorCode::Argument, "propagate: row count must match nodes");
  }
  if (cfg.rho < 0.0 || cfg.rho > 1.0) {
    throw Error(ErrorCode::Argument, "propagate: rho must be in [0, 1]");
  }
  PropagationResult result;
  if (cfg.rho == 0.0) {
    result.z = z0;
    result.converged = true;
    return result;
  }
  Eigen::MatrixXd z = z0;
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    Eigen::MatrixXd next =
        (1.0 - cfg.rho) * z0 +
        cfg.rho * apply_normalized_adjacency(g, z, /*with_self_loops=*/false);
    const double change = (next - z).squaredNorm();
    z = std::move(next);
    result.iterations = it;
    if (change < cfg.tolerance) {
      result.converged = true;
      break;
    }
  }
  result.z = std::move(z);
  return result;
}

int predict_choice(const Eigen::VectorXd& z_row, const std::vector<int>& items) {
  if (items.empty()) {
    throw Error(ErrorCode::Argument, "predict_choice: empty choice set");
  }
  int best = items[0];
  for (int item : items) {
    if (z_row[item] > z_row[best] || (z_row[item] == z_row[best] && item < best)) {
      best = item;
    }
  }
  return best;
}

std::vector<int> rank_choices(const Eigen::VectorXd& z_row,
                              const std::vector<int>& items) {
  if (items.empty()) {
    throw Error(ErrorCode::Argument, "rank_choices: empty choice set");
  }
  std::vector<int> ranked = items;
  std::stable_sort(ranked.begin(), ranked.end(), [&](int a, int b) {
    if (z_row[a] != z_row[b]) return z_row[a] > z_row[b];
    return a < b;
  });
  return ranked;
}

}  // namespace netchoice
