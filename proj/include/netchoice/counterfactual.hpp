#ifndef NETCHOICE_COUNTERFACTUAL_HPP
#define NETCHOICE_COUNTERFACTUAL_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "netchoice/choice_models.hpp"

namespace netchoice {

// Prediction-time edit of every chooser's choice set. Training data is never
// rewritten; scenarios apply only when computing counterfactual predictions.
struct Scenario {
  enum class Kind { ReplaceAllSets, IntersectSets, AddItem };
  Kind kind = Kind::ReplaceAllSets;
  std::vector<int> items;  // slate, intersection set, or the single added item
};

// Returns the edited per-chooser sets, normalized ascending. An edit that
// empties a set is a scenario error naming the chooser.
std::vector<std::vector<int>> apply_scenario(
    const std::vector<std::vector<int>>& base_sets, const Scenario& scenario);

struct GroupMap {
  std::vector<int> group_of;            // chooser index -> group index
  std::vector<std::string> group_ids;   // group index -> external id
};

// count(group, item) = sum over the group's choosers of
// weight_a * Pr(item | a, set_a). Families with item features are not
// supported at prediction time (no per-instance features exist for
// counterfactual sets).
Eigen::MatrixXd aggregate_predictions(const ModelParams& params,
                                      const ModelSpec& spec,
                                      const Eigen::MatrixXd* chooser_features,
                                      const std::vector<std::vector<int>>& sets,
                                      const std::vector<double>& weights,
                                      const GroupMap& groups);

struct EnsembleCounts {
  Eigen::MatrixXd mean;        // groups x items
  Eigen::MatrixXd std_error;   // across models, 0 for a single model
};

// Arithmetic mean of aggregate_predictions over the fitted models, with the
// per-entry standard error across models.
EnsembleCounts ensemble_counts(const std::vector<ModelParams>& models,
                               const ModelSpec& spec,
                               const Eigen::MatrixXd* chooser_features,
                               const std::vector<std::vector<int>>& sets,
                               const std::vector<double>& weights,
                               const GroupMap& groups);

struct PluralityWinner {
  int item = 0;
  bool tied = false;
};

// Argmax count per group; exact ties go to the lower item index and are
// flagged.
std::vector<PluralityWinner> plurality_winners(const Eigen::MatrixXd& counts);

}  // namespace netchoice

#endif  // NETCHOICE_COUNTERFACTUAL_HPP
