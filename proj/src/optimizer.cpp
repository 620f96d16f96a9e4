#include "netchoice/optimizer.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "netchoice/errors.hpp"
#include "netchoice/metrics.hpp"
#include "netchoice/propagation.hpp"

namespace netchoice {

Method method_from_string(const std::string& name) {
  if (name == "logit") return Method::LogitFamily;
  if (name == "laplacian") return Method::Laplacian;
  if (name == "gcn") return Method::Gcn;
  if (name == "propagation") return Method::Propagation;
  throw Error(ErrorCode::Config, "unknown method '" + name + "'");
}

const char* method_name(Method method) {
  switch (method) {
    case Method::LogitFamily: return "logit";
    case Method::Laplacian: return "laplacian";
    case Method::Gcn: return "gcn";
    case Method::Propagation: return "propagation";
  }
  return "?";
}

RpropState RpropState::init(int size, double initial_step, RpropConfig cfg) {
  RpropState s;
  s.step_sizes = Eigen::VectorXd::Constant(size, initial_step);
  s.previous_sign = Eigen::VectorXd::Zero(size);
  s.config = cfg;
  return s;
}

namespace {
inline double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }
}  // namespace

void rprop_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads,
                RpropState& state) {
  if (params.size() != grads.size() || params.size() != state.step_sizes.size()) {
    throw Error(ErrorCode::Argument, "rprop_step: size mismatch");
  }
  const RpropConfig& cfg = state.config;
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    const double s = sign_of(g);
    const double product = s * state.previous_sign[i];
    if (product > 0.0) {
      state.step_sizes[i] = std::min(state.step_sizes[i] * cfg.eta_plus,
                                     cfg.step_max);
      params[i] -= s * state.step_sizes[i];
      state.previous_sign[i] = s;
    } else if (product < 0.0) {
      state.step_sizes[i] = std::max(state.step_sizes[i] * cfg.eta_minus,
                                     cfg.step_min);
      state.previous_sign[i] = 0.0;
    } else {
      params[i] -= s * state.step_sizes[i];
      state.previous_sign[i] = s;
    }
  }
}

FlatTrainResult train_flat(
    const std::function<std::pair<double, Eigen::VectorXd>(
        const Eigen::VectorXd&, int)>& eval,
    Eigen::VectorXd x0, double learning_rate, int max_epochs) {
  if (learning_rate <= 0.0) {
    throw Error(ErrorCode::Config, "learning rate must be positive");
  }
  FlatTrainResult result;
  result.params = std::move(x0);
  RpropState state = RpropState::init(static_cast<int>(result.params.size()),
                                      learning_rate);
  for (int epoch = 0;; ++epoch) {
    auto [objective, grad] = eval(result.params, epoch);
    if (!std::isfinite(objective)) {
      throw Error(ErrorCode::Divergence,
                  "non-finite objective at epoch " + std::to_string(epoch));
    }
    result.final_objective = objective;
    result.final_gradient_sq_norm = grad.squaredNorm();
    result.epochs_run = epoch;
    if (result.final_gradient_sq_norm < kGradientTolerance) {
      result.converged = true;
      break;
    }
    if (epoch == max_epochs) break;
    rprop_step(result.params, grad, state);
  }
  return result;
}

TrainReport train(const ModelSpec& spec, const ChoiceDataset& dataset,
                  const ChooserSplit& split, const Objective& objective,
                  double learning_rate, int max_epochs) {
  spec.validate();
  objective.validate(spec);

  double train_weight = 0.0;
  {
    std::vector<char> mask(dataset.n_choosers, 0);
    for (int a : split.train) mask[a] = 1;
    for (const auto& obs : dataset.observations) {
      if (mask[obs.chooser]) train_weight += obs.weight;
    }
  }
  if (!(train_weight > 0.0)) {
    throw Error(ErrorCode::Argument,
                "training choosers have no observations with positive weight");
  }

  auto eval = [&](const Eigen::VectorXd& x, int) {
    const ModelParams p = ModelParams::unflatten(spec, x);
    const double obj = objective_value(p, spec, dataset, split.train, objective);
    ModelParams g = gradient(p, spec, dataset, split.train, objective);
    if (spec.fix_global_utilities) {
      g.u.setZero();
    } else if (spec.fix_reference_item && g.u.size() > 0) {
      g.u[0] = 0.0;
    }
    return std::make_pair(obj, g.flatten());
  };

  const FlatTrainResult flat = train_flat(
      eval, ModelParams::zeros(spec).flatten(), learning_rate, max_epochs);

  TrainReport report;
  report.final_params = ModelParams::unflatten(spec, flat.params);
  report.epochs_run = flat.epochs_run;
  report.final_objective = flat.final_objective;
  report.final_gradient_sq_norm = flat.final_gradient_sq_norm;
  report.converged = flat.converged;
  return report;
}

void parallel_for(int count, int workers, const std::function<void(int)>& fn) {
  if (workers <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  const int n_threads = std::min(workers, count);
  threads.reserve(n_threads);
  for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

namespace {

GridSearchResult likelihood_grid_search(Method method, const ModelSpec& base,
                                        const ChoiceDataset& dataset,
                                        const ChooserSplit& split,
                                        const HyperGrid& grid,
                                        const SocialGraph* graph,
                                        int max_epochs, int workers,
                                        bool l2_on_intercepts) {
  ModelSpec spec = base;
  spec.per_chooser_intercepts = (method == Method::Laplacian);
  if (method == Method::Laplacian && graph == nullptr) {
    throw Error(ErrorCode::Config, "laplacian method requires a graph");
  }

  struct Point {
    Hyperparams hp;
    TrainReport report;
    double score = 0.0;
  };
  std::vector<Hyperparams> cells;
  const std::vector<double> lambdas =
      method == Method::Laplacian ? grid.lambdas : std::vector<double>{0.0};
  if (grid.learning_rates.empty() || grid.l2_strengths.empty() ||
      lambdas.empty()) {
    throw Error(ErrorCode::Config, "empty hyperparameter grid");
  }
  for (double lr : grid.learning_rates) {
    for (double l2 : grid.l2_strengths) {
      for (double lambda : lambdas) {
        cells.push_back(Hyperparams{lr, l2, lambda, 0.0});
      }
    }
  }

  std::vector<Point> points(cells.size());
  parallel_for(static_cast<int>(cells.size()), workers, [&](int i) {
    Objective objective;
    objective.lambda = cells[i].lambda;
    objective.l2 = cells[i].l2;
    objective.l2_on_intercepts = l2_on_intercepts;
    objective.graph = cells[i].lambda > 0.0 ? graph : nullptr;
    points[i].hp = cells[i];
    points[i].report = train(spec, dataset, split, objective,
                             cells[i].learning_rate, max_epochs);
    points[i].score = negative_log_likelihood(points[i].report.final_params,
                                              spec, dataset, split.validation);
  });

  int best = 0;
  for (size_t i = 1; i < points.size(); ++i) {
    if (points[i].score < points[best].score) best = static_cast<int>(i);
  }
  GridSearchResult result;
  result.best = points[best].hp;
  result.report = std::move(points[best].report);
  result.validation_score = points[best].score;
  return result;
}

GridSearchResult propagation_grid_search(const ChoiceDataset& dataset,
                                         const ChooserSplit& split,
                                         const HyperGrid& grid,
                                         const SocialGraph* graph,
                                         int workers) {
  if (graph == nullptr) {
    throw Error(ErrorCode::Config, "propagation requires a graph");
  }
  if (grid.rhos.empty()) {
    throw Error(ErrorCode::Config, "empty rho grid");
  }
  const Eigen::MatrixXd z0 = choice_fractions(dataset, split.train);

  struct Point {
    PropagationResult prop;
    double score = 0.0;
  };
  std::vector<Point> points(grid.rhos.size());
  parallel_for(static_cast<int>(grid.rhos.size()), workers, [&](int i) {
    PropagationConfig cfg;
    cfg.rho = grid.rhos[i];
    points[i].prop = propagate(z0, *graph, cfg);
    points[i].score = propagation_mean_relative_rank(points[i].prop.z, dataset,
                                                     split.validation);
  });

  int best = 0;
  for (size_t i = 1; i < points.size(); ++i) {
    if (points[i].score < points[best].score) best = static_cast<int>(i);
  }
  GridSearchResult result;
  result.best.rho = grid.rhos[best];
  result.validation_score = points[best].score;
  result.propagated = std::move(points[best].prop.z);
  result.report.epochs_run = points[best].prop.iterations;
  result.report.converged = points[best].prop.converged;
  result.report.final_objective = points[best].score;
  return result;
}

}  // namespace

GridSearchResult grid_search(Method method, const ModelSpec& spec,
                             const ChoiceDataset& dataset,
                             const ChooserSplit& split, const HyperGrid& grid,
                             const SocialGraph* graph, int max_epochs,
                             int workers, bool l2_on_intercepts) {
  switch (method) {
    case Method::LogitFamily:
    case Method::Laplacian:
      return likelihood_grid_search(method, spec, dataset, split, grid, graph,
                                    max_epochs, workers, l2_on_intercepts);
    case Method::Propagation:
      return propagation_grid_search(dataset, split, grid, graph, workers);
    case Method::Gcn:
      throw Error(ErrorCode::Config,
                  "GCN models are trained through train_gcn");
  }
  throw Error(ErrorCode::Config, "unknown method");
}

}  // namespace netchoice
