#include "netchoice/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "netchoice/errors.hpp"
#include "netchoice/propagation.hpp"
#include "netchoice/rng.hpp"

namespace netchoice {

namespace {

ExperimentResult evaluate_method(Method method, const ChoiceDataset& dataset,
                                 const SocialGraph& g,
                                 const ExperimentPlan& plan,
                                 const ChooserSplit& split, double fraction,
                                 int trial) {
  ExperimentResult result;
  result.method = method;
  result.train_fraction = fraction;
  result.trial = trial;

  ModelSpec spec;
  spec.family = plan.family;
  spec.n = dataset.n_choosers;
  spec.k = dataset.n_items;
  spec.d_x = dataset.d_x;
  spec.d_y = dataset.d_y;

  switch (method) {
    case Method::LogitFamily:
    case Method::Laplacian: {
      const GridSearchResult gs =
          grid_search(method, spec, dataset, split, plan.grid, &g,
                      plan.max_epochs, /*workers=*/1, plan.l2_on_intercepts);
      ModelSpec fitted = spec;
      fitted.per_chooser_intercepts = (method == Method::Laplacian);
      result.test_nll = negative_log_likelihood(gs.report.final_params, fitted,
                                                dataset, split.test);
      result.test_mrr = model_mean_relative_rank(gs.report.final_params, fitted,
                                                 dataset, split.test);
      result.hyperparams = gs.best;
      break;
    }
    case Method::Gcn: {
      const GcnTrainReport report =
          train_gcn(g, dataset, split, plan.gcn, plan.grid,
                    Rng::derive(plan.base_seed, 7000 + trial), plan.max_epochs,
                    /*workers=*/1);
      const GcnAsChoiceModel model =
          gcn_as_choice_model(g, report.params, report.config, dataset);
      result.test_nll = negative_log_likelihood(model.params, model.spec,
                                                model.dataset, split.test);
      result.test_mrr = model_mean_relative_rank(model.params, model.spec,
                                                 model.dataset, split.test);
      result.hyperparams.learning_rate = report.learning_rate;
      result.hyperparams.l2 = report.l2;
      break;
    }
    case Method::Propagation: {
      const GridSearchResult gs =
          grid_search(method, spec, dataset, split, plan.grid, &g,
                      plan.max_epochs, /*workers=*/1);
      result.test_mrr =
          propagation_mean_relative_rank(gs.propagated, dataset, split.test);
      result.hyperparams = gs.best;
      break;
    }
  }
  return result;
}

}  // namespace

std::vector<ExperimentResult> run_semi_supervised(const ChoiceDataset& dataset,
                                                  const SocialGraph& g,
                                                  const ExperimentPlan& plan) {
  if (plan.methods.empty() || plan.fractions.empty() || plan.trials < 1) {
    throw Error(ErrorCode::Config, "experiment plan is empty");
  }
  struct Cell {
    Method method;
    double fraction;
    int trial;
  };
  std::vector<Cell> cells;
  for (Method method : plan.methods) {
    for (double fraction : plan.fractions) {
      for (int trial = 0; trial < plan.trials; ++trial) {
        cells.push_back({method, fraction, trial});
      }
    }
  }
  std::vector<ExperimentResult> results(cells.size());
  parallel_for(static_cast<int>(cells.size()), plan.workers, [&](int i) {
    const Cell& cell = cells[i];
    // Splits depend on (fraction, trial) only, so methods share them.
    const ChooserSplit split = split_choosers(
        dataset, cell.fraction, plan.base_seed + static_cast<std::uint64_t>(cell.trial));
    results[i] = evaluate_method(cell.method, dataset, g, plan, split,
                                 cell.fraction, cell.trial);
  });
  return results;
}

ChoiceDataset simulate_choices(const PriorSample& prior,
                               int samples_per_chooser,
                               std::pair<int, int> set_size_range,
                               std::uint64_t seed) {
  const int n = static_cast<int>(prior.utilities.rows());
  const int k = static_cast<int>(prior.utilities.cols());
  auto [min_size, max_size] = set_size_range;
  if (min_size < 1 || max_size < min_size || max_size > k) {
    throw Error(ErrorCode::Argument,
                "set size range must satisfy 1 <= min <= max <= k");
  }
  if (samples_per_chooser < 1) {
    throw Error(ErrorCode::Argument, "samples_per_chooser must be >= 1");
  }

  ChoiceDataset ds;
  ds.n_choosers = n;
  ds.n_items = k;
  for (int a = 0; a < n; ++a) {
    ds.chooser_ids.push_back("c" + std::to_string(a));
    ds.chooser_index.emplace(ds.chooser_ids.back(), a);
  }
  for (int i = 0; i < k; ++i) {
    ds.item_ids.push_back("i" + std::to_string(i));
    ds.item_index.emplace(ds.item_ids.back(), i);
  }

  Rng rng(seed);
  std::vector<int> pool(k);
  long long next_id = 0;
  for (int a = 0; a < n; ++a) {
    for (int s = 0; s < samples_per_chooser; ++s) {
      const int size = rng.uniform_int(min_size, max_size);
      std::iota(pool.begin(), pool.end(), 0);
      for (int j = 0; j < size; ++j) {
        std::swap(pool[j], pool[rng.uniform_int(j, k - 1)]);
      }
      ChoiceObservation obs;
      obs.observation_id = next_id++;
      obs.chooser = a;
      obs.choice_set.assign(pool.begin(), pool.begin() + size);
      std::sort(obs.choice_set.begin(), obs.choice_set.end());

      Eigen::VectorXd util(size);
      for (int j = 0; j < size; ++j) {
        util[j] = prior.utilities(a, obs.choice_set[j]);
      }
      const Eigen::VectorXd probs = choice_probabilities(util);
      double r = rng.uniform();
      int chosen = size - 1;
      for (int j = 0; j < size; ++j) {
        r -= probs[j];
        if (r < 0.0) {
          chosen = j;
          break;
        }
      }
      obs.chosen_index = chosen;
      ds.observations.push_back(std::move(obs));
    }
  }
  ds.validate();
  return ds;
}

std::vector<SampleComplexityCurve> run_sample_complexity(
    const SampleComplexityPlan& plan) {
  if (plan.lambdas.empty() || plan.samples.empty() || plan.trials < 1) {
    throw Error(ErrorCode::Config, "sample complexity plan is empty");
  }
  struct Job {
    int lambda_index;
    int trial;
  };
  std::vector<Job> jobs;
  for (int li = 0; li < static_cast<int>(plan.lambdas.size()); ++li) {
    for (int t = 0; t < plan.trials; ++t) jobs.push_back({li, t});
  }
  // mse[lambda][sample][trial], regularized and not.
  const int n_samples = static_cast<int>(plan.samples.size());
  std::vector<std::vector<std::vector<double>>> mse_reg(
      plan.lambdas.size(),
      std::vector<std::vector<double>>(n_samples,
                                       std::vector<double>(plan.trials, 0.0)));
  auto mse_unreg = mse_reg;

  parallel_for(static_cast<int>(jobs.size()), plan.workers, [&](int ji) {
    const auto [li, trial] = jobs[ji];
    const double lambda = plan.lambdas[li];
    const std::uint64_t trial_seed =
        Rng::derive(plan.base_seed, 1000 * (li + 1) + trial);
    const SocialGraph g = erdos_renyi(plan.n, plan.p, trial_seed);
    const PriorSample prior =
        sample_prior_utilities(g, lambda, plan.k, Rng::derive(trial_seed, 1));

    ModelSpec spec;
    spec.family = Family::Logit;
    spec.per_chooser_intercepts = true;
    spec.n = plan.n;
    spec.k = plan.k;
    spec.fix_global_utilities = true;  // utilities live in the intercepts

    for (int si = 0; si < n_samples; ++si) {
      const ChoiceDataset data =
          simulate_choices(prior, plan.samples[si], plan.set_size_range,
                           Rng::derive(trial_seed, 100 + si));
      ChooserSplit split;
      split.train.resize(plan.n);
      std::iota(split.train.begin(), split.train.end(), 0);

      std::set<int> observed_set{0};
      for (const auto& obs : data.observations) {
        observed_set.insert(obs.choice_set.begin(), obs.choice_set.end());
      }
      const std::vector<int> observed(observed_set.begin(), observed_set.end());

      for (const bool regularized : {true, false}) {
        Objective objective;
        objective.lambda = regularized ? lambda : 0.0;
        objective.graph = regularized ? &g : nullptr;
        const TrainReport report = train(spec, data, split, objective,
                                         plan.learning_rate, plan.epochs);
        // v is k x n; compare as n x k chooser-utility matrices.
        const double mse =
            utility_mse(report.final_params.v.transpose(), prior.utilities,
                        observed);
        (regularized ? mse_reg : mse_unreg)[li][si][trial] = mse;
      }
    }
  });

  std::vector<SampleComplexityCurve> curves;
  for (int li = 0; li < static_cast<int>(plan.lambdas.size()); ++li) {
    for (const bool regularized : {true, false}) {
      SampleComplexityCurve curve;
      curve.lambda = plan.lambdas[li];
      curve.regularized = regularized;
      curve.samples = plan.samples;
      const auto& table = regularized ? mse_reg[li] : mse_unreg[li];
      for (int si = 0; si < n_samples; ++si) {
        const auto& xs = table[si];
        const double mean =
            std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
        double var = 0.0;
        for (double x : xs) var += (x - mean) * (x - mean);
        const double stderr_ =
            xs.size() > 1 ? std::sqrt(var / (xs.size() - 1) / xs.size()) : 0.0;
        curve.mse_mean.push_back(mean);
        curve.mse_stderr.push_back(stderr_);
      }
      curves.push_back(std::move(curve));
    }
  }
  return curves;
}

std::vector<std::vector<int>> top_k_items(const ModelParams& params,
                                          const ModelSpec& spec, int k_top) {
  if (!spec.per_chooser_intercepts || params.v.size() == 0) {
    throw Error(ErrorCode::Config, "top_k_items requires per-chooser intercepts");
  }
  if (k_top < 1) throw Error(ErrorCode::Argument, "k_top must be >= 1");
  std::vector<std::vector<int>> lists(spec.n);
  std::vector<int> order(spec.k);
  for (int a = 0; a < spec.n; ++a) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
      const double ui = params.u[i] + params.v(i, a);
      const double uj = params.u[j] + params.v(j, a);
      if (ui != uj) return ui > uj;
      return i < j;
    });
    lists[a].assign(order.begin(),
                    order.begin() + std::min(k_top, spec.k));
  }
  return lists;
}

}  // namespace netchoice
