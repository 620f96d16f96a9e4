#include "netchoice/counterfactual.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "netchoice/errors.hpp"

namespace netchoice {

std::vector<std::vector<int>> apply_scenario(
    const std::vector<std::vector<int>>& base_sets, const Scenario& scenario) {
  if (scenario.items.empty()) {
    throw Error(ErrorCode::Scenario, "scenario has no items");
  }
  std::vector<std::vector<int>> out(base_sets.size());
  for (size_t a = 0; a < base_sets.size(); ++a) {
    std::set<int> result;
    switch (scenario.kind) {
      case Scenario::Kind::ReplaceAllSets:
        result.insert(scenario.items.begin(), scenario.items.end());
        break;
      case Scenario::Kind::IntersectSets: {
        const std::set<int> keep(scenario.items.begin(), scenario.items.end());
        for (int item : base_sets[a]) {
          if (keep.count(item)) result.insert(item);
        }
        break;
      }
      case Scenario::Kind::AddItem:
        result.insert(base_sets[a].begin(), base_sets[a].end());
        result.insert(scenario.items[0]);
        break;
    }
    if (result.empty()) {
      throw Error(ErrorCode::Scenario,
                  "scenario empties the choice set of chooser " +
                      std::to_string(a));
    }
    out[a].assign(result.begin(), result.end());
  }
  return out;
}

Eigen::MatrixXd aggregate_predictions(const ModelParams& params,
                                      const ModelSpec& spec,
                                      const Eigen::MatrixXd* chooser_features,
                                      const std::vector<std::vector<int>>& sets,
                                      const std::vector<double>& weights,
                                      const GroupMap& groups) {
  if (spec.uses_item_features()) {
    throw Error(ErrorCode::Config,
                "counterfactual prediction does not support item-feature "
                "families (no per-instance features exist for edited sets)");
  }
  if (sets.size() != static_cast<size_t>(spec.n) ||
      weights.size() != sets.size() || groups.group_of.size() != sets.size()) {
    throw Error(ErrorCode::Argument, "aggregate_predictions: size mismatch");
  }
  const int n_groups = static_cast<int>(groups.group_ids.size());
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(n_groups, spec.k);
  Eigen::VectorXd group_weight = Eigen::VectorXd::Zero(n_groups);
  Eigen::VectorXd x_storage;
  for (int a = 0; a < spec.n; ++a) {
    if (!(weights[a] >= 0.0)) {
      throw Error(ErrorCode::Argument, "negative chooser weight");
    }
    const int group = groups.group_of[a];
    if (group < 0 || group >= n_groups) {
      throw Error(ErrorCode::Argument, "group index out of range");
    }
    group_weight[group] += weights[a];
    for (int item : sets[a]) {
      if (item < 0 || item >= spec.k) {
        throw Error(ErrorCode::Argument, "scenario item out of range");
      }
    }
    ChoiceObservation obs;
    obs.chooser = a;
    obs.choice_set = sets[a];
    obs.chosen_index = 0;
    const Eigen::VectorXd* x_a = nullptr;
    if (spec.uses_chooser_features()) {
      if (chooser_features == nullptr) {
        throw Error(ErrorCode::Config, "chooser features required");
      }
      x_storage = chooser_features->row(a);
      x_a = &x_storage;
    }
    const Eigen::VectorXd probs =
        choice_probabilities(utilities(params, spec, obs, x_a));
    for (size_t j = 0; j < sets[a].size(); ++j) {
      counts(group, sets[a][j]) += weights[a] * probs[static_cast<int>(j)];
    }
  }
  for (int grp = 0; grp < n_groups; ++grp) {
    if (!(group_weight[grp] > 0.0)) {
      throw Error(ErrorCode::Argument, "group '" + groups.group_ids[grp] +
                                           "' has zero total weight");
    }
  }
  return counts;
}

EnsembleCounts ensemble_counts(const std::vector<ModelParams>& models,
                               const ModelSpec& spec,
                               const Eigen::MatrixXd* chooser_features,
                               const std::vector<std::vector<int>>& sets,
                               const std::vector<double>& weights,
                               const GroupMap& groups) {
  if (models.empty()) {
    throw Error(ErrorCode::Argument, "ensemble_counts: no models");
  }
  std::vector<Eigen::MatrixXd> per_model;
  per_model.reserve(models.size());
  for (const auto& params : models) {
    per_model.push_back(aggregate_predictions(params, spec, chooser_features,
                                              sets, weights, groups));
  }
  EnsembleCounts out;
  out.mean = Eigen::MatrixXd::Zero(per_model[0].rows(), per_model[0].cols());
  for (const auto& counts : per_model) out.mean += counts;
  out.mean /= static_cast<double>(per_model.size());

  out.std_error = Eigen::MatrixXd::Zero(out.mean.rows(), out.mean.cols());
  if (per_model.size() > 1) {
    for (const auto& counts : per_model) {
      out.std_error += (counts - out.mean).cwiseAbs2();
    }
    out.std_error = (out.std_error / (per_model.size() - 1.0) /
                     static_cast<double>(per_model.size()))
                        .cwiseSqrt();
  }
  return out;
}

std::vector<PluralityWinner> plurality_winners(const Eigen::MatrixXd& counts) {
  std::vector<PluralityWinner> winners(counts.rows());
  for (Eigen::Index grp = 0; grp < counts.rows(); ++grp) {
    int best = 0;
    bool tied = false;
    for (int item = 1; item < counts.cols(); ++item) {
      if (counts(grp, item) > counts(grp, best)) {
        best = item;
        tied = false;
      } else if (counts(grp, item) == counts(grp, best) && item != best) {
        tied = true;
      }
    }
    winners[grp] = {best, tied};
  }
  return winners;
}

}  // namespace netchoice
