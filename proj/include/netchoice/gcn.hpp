#ifndef NETCHOICE_GCN_HPP
#define NETCHOICE_GCN_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "netchoice/choice_data.hpp"
#include "netchoice/choice_models.hpp"
#include "netchoice/graph.hpp"
#include "netchoice/optimizer.hpp"

namespace netchoice {

enum class GcnMode { Train, Eval };

// Two rectifier layers H^{i+1} = relu(A' H^i W^i) over the self-loop
// normalized adjacency, dropout on layer inputs (train mode only, inverted
// scaling), embeddings fed to an MNL/CML head as chooser features.
struct GcnConfig {
  int layer1_dim = 16;
  int layer2_dim = 16;
  int input_dim = 16;  // d_x when features exist, learned-table width otherwise
  double dropout_rate = 0.5;
  bool concatenate_layers = true;  // H = [H1 H2]; otherwise H = H2
  bool concat_input = false;       // additionally prepend H0

  int embedding_dim() const {
    int dim = layer2_dim;
    if (concatenate_layers) dim += layer1_dim;
    if (concat_input) dim += input_dim;
    return dim;
  }
  void validate() const;
};

struct GcnParams {
  Eigen::MatrixXd w0;           // input_dim x layer1_dim
  Eigen::MatrixXd w1;           // layer1_dim x layer2_dim
  Eigen::MatrixXd input_table;  // n x input_dim when inputs are learned, else 0x0
  Eigen::VectorXd head_u;       // k
  Eigen::MatrixXd head_gamma;   // k x embedding_dim
  Eigen::VectorXd head_theta;   // d_y

  // Glorot-uniform W and input table (seeded); zero head.
  static GcnParams init(const GcnConfig& cfg, int n, int k, int d_y,
                        bool learned_input, std::uint64_t seed);
  int flat_size() const;
  Eigen::VectorXd flatten() const;
  static GcnParams unflatten(const GcnConfig& cfg, int n, int k, int d_y,
                             bool learned_input, const Eigen::VectorXd& x);
};

// Node embeddings (n x embedding_dim). `features` must be null when the input
// table is learned; `seed` drives the dropout masks in train mode.
Eigen::MatrixXd gcn_forward(const SocialGraph& g, const GcnParams& params,
                            const GcnConfig& cfg,
                            const Eigen::MatrixXd* features, GcnMode mode,
                            std::uint64_t seed = 0);

// Weighted NLL with the embeddings as chooser features plus (l2/2) times the
// squared norm of every GCN and head parameter.
double gcn_choice_objective(const GcnParams& params, const GcnConfig& cfg,
                            const SocialGraph& g, const ChoiceDataset& dataset,
                            const std::vector<int>& choosers, double l2,
                            GcnMode mode = GcnMode::Eval,
                            std::uint64_t seed = 0);

// Exact gradient of gcn_choice_objective via reverse-mode accumulation
// through the two-layer composition.
GcnParams gcn_gradient(const GcnParams& params, const GcnConfig& cfg,
                       const SocialGraph& g, const ChoiceDataset& dataset,
                       const std::vector<int>& choosers, double l2,
                       GcnMode mode = GcnMode::Eval, std::uint64_t seed = 0);

struct GcnTrainReport {
  GcnParams params;
  GcnConfig config;
  int epochs_run = 0;
  double final_objective = 0.0;
  double final_gradient_sq_norm = 0.0;
  bool converged = false;
  double learning_rate = 0.0;
  double l2 = 0.0;
  double validation_nll = 0.0;
};

// End-to-end Rprop training with a (learning rate x L2) validation grid.
// Weight init and the per-epoch dropout streams derive from `seed`.
GcnTrainReport train_gcn(const SocialGraph& g, const ChoiceDataset& dataset,
                         const ChooserSplit& split, const GcnConfig& cfg,
                         const HyperGrid& grid, std::uint64_t seed,
                         int max_epochs = kDefaultMaxEpochs, int workers = 1);

// The fitted head viewed as an MNL/CML over embedding features: returns the
// model spec/params and a dataset copy whose chooser features are the
// eval-mode embeddings, so the shared metrics apply unchanged.
struct GcnAsChoiceModel {
  ModelSpec spec;
  ModelParams params;
  ChoiceDataset dataset;
};
GcnAsChoiceModel gcn_as_choice_model(const SocialGraph& g,
                                     const GcnParams& params,
                                     const GcnConfig& cfg,
                                     const ChoiceDataset& dataset);

}  // namespace netchoice

#endif  // NETCHOICE_GCN_HPP
