#ifndef NETCHOICE_CHOICE_MODELS_HPP
#define NETCHOICE_CHOICE_MODELS_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "netchoice/choice_data.hpp"
#include "netchoice/graph.hpp"

namespace netchoice {

// The four utility families:
//   Logit: u_i                      CL:  u_i + theta'y_i
//   MNL:   u_i + gamma_i'x_a        CML: u_i + gamma_i'x_a + theta'y_i
// Per-chooser intercepts v_ia can be added to any of them; they are the
// parameters the Laplacian penalty smooths over the graph.
enum class Family { Logit, CL, MNL, CML };

Family family_from_string(const std::string& name);
const char* family_name(Family family);

struct ModelSpec {
  Family family = Family::Logit;
  bool per_chooser_intercepts = false;
  int n = 0;    // choosers
  int k = 0;    // items
  int d_x = 0;  // chooser feature dim
  int d_y = 0;  // item feature dim

  // Training-time identification switches: freeze all global utilities at 0
  // (per-chooser-only model) or just the reference item's.
  bool fix_global_utilities = false;
  bool fix_reference_item = false;

  bool uses_chooser_features() const {
    return family == Family::MNL || family == Family::CML;
  }
  bool uses_item_features() const {
    return family == Family::CL || family == Family::CML;
  }
  void validate() const;
};

struct ModelParams {
  Eigen::VectorXd u;      // k global item utilities
  Eigen::MatrixXd gamma;  // k x d_x chooser-feature coefficients per item
  Eigen::VectorXd theta;  // d_y item-feature coefficients
  Eigen::MatrixXd v;      // k x n per-chooser intercepts (empty when off)

  static ModelParams zeros(const ModelSpec& spec);
  int flat_size() const;
  Eigen::VectorXd flatten() const;
  static ModelParams unflatten(const ModelSpec& spec, const Eigen::VectorXd& x);
  bool all_finite() const;
};

// Objective configuration: weighted NLL + (lambda/2) sum_i v_i'L v_i +
// (l2/2) * sum of squared global parameters (intercepts included only when
// l2_on_intercepts is set; their default regularizer is the graph prior).
struct Objective {
  double lambda = 0.0;
  double l2 = 0.0;
  bool l2_on_intercepts = false;
  const SocialGraph* graph = nullptr;  // required when lambda > 0
  void validate(const ModelSpec& spec) const;
};

// Utility of each item in the observation's choice set. `x_a` must point to
// the chooser's feature vector for MNL/CML and may be null otherwise.
Eigen::VectorXd utilities(const ModelParams& params, const ModelSpec& spec,
                          const ChoiceObservation& obs,
                          const Eigen::VectorXd* x_a);

// Softmax through a max-shifted log-sum-exp.
Eigen::VectorXd choice_probabilities(const Eigen::VectorXd& util);

double log_sum_exp(const Eigen::VectorXd& util);

// Weighted negative log-likelihood over the observations of the given
// choosers (empty set -> 0).
double negative_log_likelihood(const ModelParams& params, const ModelSpec& spec,
                               const ChoiceDataset& dataset,
                               const std::vector<int>& choosers);

double laplacian_penalty(const ModelParams& params, const ModelSpec& spec,
                         const Objective& objective);

double l2_penalty(const ModelParams& params, const Objective& objective);

double objective_value(const ModelParams& params, const ModelSpec& spec,
                       const ChoiceDataset& dataset,
                       const std::vector<int>& choosers,
                       const Objective& objective);

// Exact gradient of objective_value. The likelihood part sums softmax
// residuals times design entries over the given choosers' observations; the
// Laplacian part contributes lambda*L*v_i for every item row regardless of
// the chooser set (held-out intercepts are trained through the penalty only).
ModelParams gradient(const ModelParams& params, const ModelSpec& spec,
                     const ChoiceDataset& dataset,
                     const std::vector<int>& choosers,
                     const Objective& objective);

// Items sorted by decreasing utility, ties broken by ascending item index.
std::vector<int> predict_ranking(const ModelParams& params,
                                 const ModelSpec& spec, int chooser,
                                 const std::vector<int>& items,
                                 const Eigen::VectorXd* x_a,
                                 const Eigen::MatrixXd* item_features);

}  // namespace netchoice

#endif  // NETCHOICE_CHOICE_MODELS_HPP
