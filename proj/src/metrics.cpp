#include "netchoice/metrics.hpp"

#include <algorithm>
#include <functional>

#include "netchoice/errors.hpp"
#include "netchoice/propagation.hpp"

namespace netchoice {

namespace {

double accumulate_mrr(
    const ChoiceDataset& dataset, const std::vector<int>& choosers,
    const std::function<std::vector<int>(size_t, const ChoiceObservation&)>&
        ranking_of) {
  std::vector<char> mask(dataset.n_choosers, 0);
  for (int a : choosers) mask[a] = 1;

  double numerator = 0.0;
  double total_weight = 0.0;
  for (size_t idx = 0; idx < dataset.observations.size(); ++idx) {
    const auto& obs = dataset.observations[idx];
    if (!mask[obs.chooser]) continue;
    total_weight += obs.weight;
    const int set_size = static_cast<int>(obs.choice_set.size());
    if (set_size < 2) continue;  // singleton sets contribute rank 0
    const std::vector<int> ranking = ranking_of(idx, obs);
    const int truth = obs.chosen_item();
    const auto it = std::find(ranking.begin(), ranking.end(), truth);
    if (it == ranking.end()) {
      throw Error(ErrorCode::Argument,
                  "ranking does not contain the chosen item (observation " +
                      std::to_string(obs.observation_id) + ")");
    }
    const int rank = static_cast<int>(it - ranking.begin());
    numerator += obs.weight * static_cast<double>(rank) / (set_size - 1);
  }
  if (!(total_weight > 0.0)) {
    throw Error(ErrorCode::Argument, "mean_relative_rank: empty evaluation set");
  }
  return numerator / total_weight;
}

}  // namespace

double mean_relative_rank(const std::vector<std::vector<int>>& rankings,
                          const ChoiceDataset& dataset,
                          const std::vector<int>& choosers) {
  return accumulate_mrr(dataset, choosers,
                        [&](size_t idx, const ChoiceObservation&) {
                          return rankings.at(idx);
                        });
}

double model_mean_relative_rank(const ModelParams& params,
                                const ModelSpec& spec,
                                const ChoiceDataset& dataset,
                                const std::vector<int>& choosers) {
  return accumulate_mrr(
      dataset, choosers, [&](size_t, const ChoiceObservation& obs) {
        Eigen::VectorXd x_storage;
        const Eigen::VectorXd* x_a = nullptr;
        if (spec.uses_chooser_features()) {
          x_storage = dataset.chooser_features.row(obs.chooser);
          x_a = &x_storage;
        }
        const Eigen::MatrixXd* y =
            obs.item_features.size() > 0 ? &obs.item_features : nullptr;
        return predict_ranking(params, spec, obs.chooser, obs.choice_set, x_a, y);
      });
}

double propagation_mean_relative_rank(const Eigen::MatrixXd& z,
                                      const ChoiceDataset& dataset,
                                      const std::vector<int>& choosers) {
  return accumulate_mrr(dataset, choosers,
                        [&](size_t, const ChoiceObservation& obs) {
                          return rank_choices(z.row(obs.chooser), obs.choice_set);
                        });
}

double utility_mse(const Eigen::MatrixXd& inferred,
                   const Eigen::MatrixXd& truth,
                   const std::vector<int>& observed_items) {
  if (inferred.rows() != truth.rows() || inferred.cols() != truth.cols()) {
    throw Error(ErrorCode::Argument, "utility_mse: shape mismatch");
  }
  if (std::find(observed_items.begin(), observed_items.end(), 0) ==
      observed_items.end()) {
    throw Error(ErrorCode::Argument,
                "utility_mse: item 0 must be among the observed items");
  }
  double sum = 0.0;
  long count = 0;
  for (Eigen::Index a = 0; a < inferred.rows(); ++a) {
    const double shift_inf = inferred(a, 0);
    const double shift_tru = truth(a, 0);
    for (int item : observed_items) {
      const double d = (inferred(a, item) - shift_inf) -
                       (truth(a, item) - shift_tru);
      sum += d * d;
      ++count;
    }
  }
  return count > 0 ? sum / static_cast<double>(count) : 0.0;
}

}  // namespace netchoice
