#ifndef NETCHOICE_EVALUATION_HPP
#define NETCHOICE_EVALUATION_HPP

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "netchoice/choice_data.hpp"
#include "netchoice/choice_models.hpp"
#include "netchoice/gcn.hpp"
#include "netchoice/graph.hpp"
#include "netchoice/metrics.hpp"
#include "netchoice/optimizer.hpp"

namespace netchoice {

struct ExperimentResult {
  Method method = Method::LogitFamily;
  double train_fraction = 0.0;
  int trial = 0;
  std::optional<double> test_nll;  // absent for propagation
  double test_mrr = 0.0;
  Hyperparams hyperparams;
};

struct ExperimentPlan {
  std::vector<Method> methods{Method::LogitFamily, Method::Laplacian,
                              Method::Gcn, Method::Propagation};
  std::vector<double> fractions{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  int trials = 8;
  std::uint64_t base_seed = 0;
  HyperGrid grid;
  Family family = Family::Logit;
  bool l2_on_intercepts = false;
  GcnConfig gcn;
  int max_epochs = kDefaultMaxEpochs;
  int workers = 1;
};

// Semi-supervised protocol: per (fraction, trial) one split seeded with
// base_seed + trial is shared by every method; each method grid-searches on
// validation and is scored on the test choosers. Results are ordered by
// (method, fraction, trial).
std::vector<ExperimentResult> run_semi_supervised(const ChoiceDataset& dataset,
                                                  const SocialGraph& g,
                                                  const ExperimentPlan& plan);

// For each chooser and sample: a set size uniform over the inclusive range, a
// uniform set of that size, and a choice drawn from the softmax of the
// chooser's true utilities.
ChoiceDataset simulate_choices(const PriorSample& prior,
                               int samples_per_chooser,
                               std::pair<int, int> set_size_range,
                               std::uint64_t seed);

struct SampleComplexityCurve {
  double lambda = 1.0;
  bool regularized = true;
  std::vector<int> samples;
  std::vector<double> mse_mean;
  std::vector<double> mse_stderr;  // sample std / sqrt(trials)
};

struct SampleComplexityPlan {
  int n = 100;
  double p = 0.1;
  int k = 20;
  std::vector<double> lambdas{1.0};
  std::vector<int> samples{1, 3, 10, 32, 100, 316, 1000};
  int trials = 8;
  int epochs = kDefaultMaxEpochs;
  double learning_rate = 1e-2;
  std::uint64_t base_seed = 0;
  std::pair<int, int> set_size_range{2, 20};
  int workers = 1;
};

// Sample-complexity study: per (lambda, trial) draw a connected G(n, p) and
// prior utilities, simulate choices at each sample count, and fit the
// per-chooser intercept model twice (Laplacian-regularized at the generating
// lambda, and unregularized), recording utility MSE against the truth.
// Returns a regularized and an unregularized curve per lambda.
std::vector<SampleComplexityCurve> run_sample_complexity(
    const SampleComplexityPlan& plan);

// Per chooser, items ordered by u_i + v_ia descending (ties by index),
// truncated to k_top. Requires per-chooser intercepts.
std::vector<std::vector<int>> top_k_items(const ModelParams& params,
                                          const ModelSpec& spec, int k_top);

}  // namespace netchoice

#endif  // NETCHOICE_EVALUATION_HPP
