#ifndef NETCHOICE_OPTIMIZER_HPP
#define NETCHOICE_OPTIMIZER_HPP

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "netchoice/choice_data.hpp"
#include "netchoice/choice_models.hpp"
#include "netchoice/graph.hpp"

namespace netchoice {

enum class Method { LogitFamily, Laplacian, Gcn, Propagation };

Method method_from_string(const std::string& name);
const char* method_name(Method method);

// Sign-based resilient propagation. On a sign flip the step shrinks, the
// parameter is not moved, and the stored sign resets to zero.
struct RpropConfig {
  double eta_plus = 1.2;
  double eta_minus = 0.5;
  double step_min = 1e-6;
  double step_max = 50.0;
};

struct RpropState {
  Eigen::VectorXd step_sizes;
  Eigen::VectorXd previous_sign;  // entries in {-1, 0, +1}
  RpropConfig config;

  static RpropState init(int size, double initial_step, RpropConfig cfg = {});
};

void rprop_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads,
                RpropState& state);

inline constexpr double kGradientTolerance = 1e-8;  // squared norm
inline constexpr int kDefaultMaxEpochs = 100;

struct FlatTrainResult {
  Eigen::VectorXd params;
  int epochs_run = 0;
  double final_objective = 0.0;
  double final_gradient_sq_norm = 0.0;
  bool converged = false;
};

// Full-batch Rprop over a flat parameter vector. `eval` maps (params, epoch)
// to (objective, gradient); the epoch index lets stochastic objectives reseed
// per epoch. Stops when the squared gradient norm falls below 1e-8 or after
// max_epochs steps; a non-finite objective raises a divergence error naming
// the epoch.
FlatTrainResult train_flat(
    const std::function<std::pair<double, Eigen::VectorXd>(
        const Eigen::VectorXd&, int)>& eval,
    Eigen::VectorXd x0, double learning_rate, int max_epochs);

struct TrainReport {
  ModelParams final_params;
  int epochs_run = 0;
  double final_objective = 0.0;
  double final_gradient_sq_norm = 0.0;
  bool converged = false;
};

// Full-batch training: likelihood terms over the split's training choosers,
// Laplacian penalty over every chooser's intercept columns. Parameters start
// at zero; utilities frozen by the spec's identification switches never move.
TrainReport train(const ModelSpec& spec, const ChoiceDataset& dataset,
                  const ChooserSplit& split, const Objective& objective,
                  double learning_rate, int max_epochs = kDefaultMaxEpochs);

struct HyperGrid {
  std::vector<double> learning_rates{1e-3, 1e-2, 1e-1};
  std::vector<double> l2_strengths{1e-5, 1e-4, 1e-3, 1e-2, 1e-1};
  std::vector<double> lambdas{1e-5, 1e-4, 1e-3, 1e-2};
  std::vector<double> rhos{0.1, 0.25, 0.5, 0.75, 1.0};
};

struct Hyperparams {
  double learning_rate = 0.0;
  double l2 = 0.0;
  double lambda = 0.0;
  double rho = 0.0;
};

struct GridSearchResult {
  Hyperparams best;
  TrainReport report;
  double validation_score = 0.0;  // NLL for likelihood methods, MRR otherwise
  Eigen::MatrixXd propagated;     // Z-infinity for the propagation method
};

// Trains one model per grid point (cross-product in declared order) and keeps
// the first minimum of the validation score: NLL for likelihood methods, MRR
// for propagation. `l2_on_intercepts` extends the ridge term to v.
GridSearchResult grid_search(Method method, const ModelSpec& spec,
                             const ChoiceDataset& dataset,
                             const ChooserSplit& split, const HyperGrid& grid,
                             const SocialGraph* graph,
                             int max_epochs = kDefaultMaxEpochs,
                             int workers = 1, bool l2_on_intercepts = false);

// Runs fn(0..count-1) on up to `workers` threads; results are collected by
// index so the outcome does not depend on scheduling.
void parallel_for(int count, int workers, const std::function<void(int)>& fn);

}  // namespace netchoice

#endif  // NETCHOICE_OPTIMIZER_HPP
