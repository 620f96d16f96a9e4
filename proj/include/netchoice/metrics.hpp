#ifndef NETCHOICE_METRICS_HPP
#define NETCHOICE_METRICS_HPP

#include <Eigen/Dense>
#include <vector>

#include "netchoice/choice_data.hpp"
#include "netchoice/choice_models.hpp"

namespace netchoice {

// Mean relative rank over the given choosers' observations: the true choice's
// position in the predicted ranking, scaled so 0 is the front of the list and
// 1 the back; singleton sets contribute 0. `rankings` is indexed by position
// in dataset.observations (entries for other choosers are ignored). Weighted
// by observation weights; an empty evaluation set is an error.
double mean_relative_rank(const std::vector<std::vector<int>>& rankings,
                          const ChoiceDataset& dataset,
                          const std::vector<int>& choosers);

// MRR of a fitted likelihood model (rankings from predict_ranking).
double model_mean_relative_rank(const ModelParams& params,
                                const ModelSpec& spec,
                                const ChoiceDataset& dataset,
                                const std::vector<int>& choosers);

// MRR of a propagated choice-fraction matrix (rankings from rank_choices).
double propagation_mean_relative_rank(const Eigen::MatrixXd& z,
                                      const ChoiceDataset& dataset,
                                      const std::vector<int>& choosers);

// Mean squared error between utility matrices after re-centering each row so
// item 0's utility is 0, over (chooser, observed item) pairs. Item 0 must be
// in the observed set.
double utility_mse(const Eigen::MatrixXd& inferred,
                   const Eigen::MatrixXd& truth,
                   const std::vector<int>& observed_items);

}  // namespace netchoice

#endif  // NETCHOICE_METRICS_HPP
