#include "netchoice/choice_models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "netchoice/errors.hpp"

namespace netchoice {

Family family_from_string(const std::string& name) {
  if (name == "logit") return Family::Logit;
  if (name == "cl") return Family::CL;
  if (name == "mnl") return Family::MNL;
  if (name == "cml") return Family::CML;
  throw Error(ErrorCode::Config, "unknown model family '" + name + "'");
}

const char* family_name(Family family) {
  switch (family) {
    case Family::Logit: return "logit";
    case Family::CL: return "cl";
    case Family::MNL: return "mnl";
    case Family::CML: return "cml";
  }
  return "?";
}

void ModelSpec::validate() const {
  if (n < 1 || k < 1) {
    throw Error(ErrorCode::Config, "model needs n >= 1 choosers and k >= 1 items");
  }
  if (uses_chooser_features() && d_x <= 0) {
    throw Error(ErrorCode::Config,
                std::string(family_name(family)) + " requires chooser features");
  }
  if (uses_item_features() && d_y <= 0) {
    throw Error(ErrorCode::Config,
                std::string(family_name(family)) + " requires item features");
  }
}

ModelParams ModelParams::zeros(const ModelSpec& spec) {
  ModelParams p;
  p.u = Eigen::VectorXd::Zero(spec.k);
  p.gamma = spec.uses_chooser_features()
                ? Eigen::MatrixXd::Zero(spec.k, spec.d_x)
                : Eigen::MatrixXd();
  p.theta = spec.uses_item_features() ? Eigen::VectorXd::Zero(spec.d_y)
                                      : Eigen::VectorXd();
  p.v = spec.per_chooser_intercepts ? Eigen::MatrixXd::Zero(spec.k, spec.n)
                                    : Eigen::MatrixXd();
  return p;
}

int ModelParams::flat_size() const {
  return static_cast<int>(u.size() + gamma.size() + theta.size() + v.size());
}

Eigen::VectorXd ModelParams::flatten() const {
  Eigen::VectorXd x(flat_size());
  int pos = 0;
  x.segment(pos, u.size()) = u;
  pos += static_cast<int>(u.size());
  for (int r = 0; r < gamma.rows(); ++r) {
    x.segment(pos, gamma.cols()) = gamma.row(r);
    pos += static_cast<int>(gamma.cols());
  }
  x.segment(pos, theta.size()) = theta;
  pos += static_cast<int>(theta.size());
  for (int r = 0; r < v.rows(); ++r) {
    x.segment(pos, v.cols()) = v.row(r);
    pos += static_cast<int>(v.cols());
  }
  return x;
}

ModelParams ModelParams::unflatten(const ModelSpec& spec,
                                   const Eigen::VectorXd& x) {
  ModelParams p = zeros(spec);
  int pos = 0;
  p.u = x.segment(pos, p.u.size());
  pos += static_cast<int>(p.u.size());
  for (int r = 0; r < p.gamma.rows(); ++r) {
    p.gamma.row(r) = x.segment(pos, p.gamma.cols());
    pos += static_cast<int>(p.gamma.cols());
  }
  p.theta = x.segment(pos, p.theta.size());
  pos += static_cast<int>(p.theta.size());
  for (int r = 0; r < p.v.rows(); ++r) {
    p.v.row(r) = x.segment(pos, p.v.cols());
    pos += static_cast<int>(p.v.cols());
  }
  return p;
}

bool ModelParams::all_finite() const {
  return u.allFinite() && gamma.allFinite() && theta.allFinite() &&
         v.allFinite();
}

void Objective::validate(const ModelSpec& spec) const {
  if (lambda < 0.0 || l2 < 0.0) {
    throw Error(ErrorCode::Config, "penalty strengths must be nonnegative");
  }
  if (lambda > 0.0 && !spec.per_chooser_intercepts) {
    throw Error(ErrorCode::Config,
                "Laplacian regularization requires per-chooser intercepts");
  }
  if (lambda > 0.0 && graph == nullptr) {
    throw Error(ErrorCode::Config, "Laplacian regularization requires a graph");
  }
  if (graph != nullptr && graph->node_count() != spec.n) {
    throw Error(ErrorCode::Config, "graph size does not match chooser count");
  }
}

Eigen::VectorXd utilities(const ModelParams& params, const ModelSpec& spec,
                          const ChoiceObservation& obs,
                          const Eigen::VectorXd* x_a) {
  const int set_size = static_cast<int>(obs.choice_set.size());
  if (spec.uses_chooser_features() && x_a == nullptr) {
    throw Error(ErrorCode::Config,
                "chooser features required for this model family");
  }
  if (spec.uses_item_features() && obs.item_features.size() == 0) {
    throw Error(ErrorCode::Config,
                "item features required for this model family (observation " +
                    std::to_string(obs.observation_id) + ")");
  }
  Eigen::VectorXd util(set_size);
  for (int j = 0; j < set_size; ++j) {
    const int item = obs.choice_set[j];
    double value = params.u[item];
    if (spec.uses_chooser_features()) value += params.gamma.row(item).dot(*x_a);
    if (spec.uses_item_features()) {
      value += params.theta.dot(obs.item_features.row(j));
    }
    if (spec.per_chooser_intercepts) value += params.v(item, obs.chooser);
    util[j] = value;
  }
  return util;
}

double log_sum_exp(const Eigen::VectorXd& util) {
  const double m = util.maxCoeff();
  return m + std::log((util.array() - m).exp().sum());
}

Eigen::VectorXd choice_probabilities(const Eigen::VectorXd& util) {
  const double lse = log_sum_exp(util);
  return (util.array() - lse).exp();
}

namespace {

void check_shapes(const ModelParams& params, const ModelSpec& spec,
                  const ChoiceDataset& dataset) {
  if (spec.n != dataset.n_choosers || spec.k != dataset.n_items) {
    throw Error(ErrorCode::Config,
                "model spec does not match the dataset shapes");
  }
  if (params.u.size() != spec.k ||
      (spec.per_chooser_intercepts &&
       (params.v.rows() != spec.k || params.v.cols() != spec.n))) {
    throw Error(ErrorCode::Config, "parameter shapes do not match the spec");
  }
}

std::vector<char> chooser_mask(int n, const std::vector<int>& choosers) {
  std::vector<char> mask(n, 0);
  for (int a : choosers) {
    if (a < 0 || a >= n) {
      throw Error(ErrorCode::Argument, "chooser index out of range");
    }
    mask[a] = 1;
  }
  return mask;
}

const Eigen::VectorXd* chooser_features_of(const ChoiceDataset& dataset,
                                           const ModelSpec& spec, int chooser,
                                           Eigen::VectorXd& storage) {
  if (!spec.uses_chooser_features()) return nullptr;
  if (dataset.chooser_features.size() == 0) {
    throw Error(ErrorCode::Config, "dataset has no chooser features");
  }
  storage = dataset.chooser_features.row(chooser);
  return &storage;
}

}  // namespace

double negative_log_likelihood(const ModelParams& params, const ModelSpec& spec,
                               const ChoiceDataset& dataset,
                               const std::vector<int>& choosers) {
  check_shapes(params, spec, dataset);
  const auto mask = chooser_mask(dataset.n_choosers, choosers);
  double nll = 0.0;
  Eigen::VectorXd x_storage;
  for (const auto& obs : dataset.observations) {
    if (!mask[obs.chooser]) continue;
    const auto* x_a = chooser_features_of(dataset, spec, obs.chooser, x_storage);
    const Eigen::VectorXd util = utilities(params, spec, obs, x_a);
    nll += obs.weight * (log_sum_exp(util) - util[obs.chosen_index]);
  }
  return nll;
}

double laplacian_penalty(const ModelParams& params, const ModelSpec& spec,
                         const Objective& objective) {
  objective.validate(spec);
  if (objective.lambda == 0.0) return 0.0;
  double sum = 0.0;
  for (int item = 0; item < spec.k; ++item) {
    sum += quadratic_form(*objective.graph, params.v.row(item).transpose());
  }
  return 0.5 * objective.lambda * sum;
}

double l2_penalty(const ModelParams& params, const Objective& objective) {
  double sum = params.u.squaredNorm() + params.gamma.squaredNorm() +
               params.theta.squaredNorm();
  if (objective.l2_on_intercepts) sum += params.v.squaredNorm();
  return 0.5 * objective.l2 * sum;
}

double objective_value(const ModelParams& params, const ModelSpec& spec,
                       const ChoiceDataset& dataset,
                       const std::vector<int>& choosers,
                       const Objective& objective) {
  objective.validate(spec);
  return negative_log_likelihood(params, spec, dataset, choosers) +
         laplacian_penalty(params, spec, objective) +
         l2_penalty(params, objective);
}

ModelParams gradient(const ModelParams& params, const ModelSpec& spec,
                     const ChoiceDataset& dataset,
                     const std::vector<int>& choosers,
                     const Objective& objective) {
  objective.validate(spec);
  check_shapes(params, spec, dataset);
  const auto mask = chooser_mask(dataset.n_choosers, choosers);
  ModelParams grad = ModelParams::zeros(spec);
  Eigen::VectorXd x_storage;

  for (const auto& obs : dataset.observations) {
    if (!mask[obs.chooser]) continue;
    const auto* x_a = chooser_features_of(dataset, spec, obs.chooser, x_storage);
    const Eigen::VectorXd util = utilities(params, spec, obs, x_a);
    const Eigen::VectorXd probs = choice_probabilities(util);
    for (int j = 0; j < static_cast<int>(obs.choice_set.size()); ++j) {
      const int item = obs.choice_set[j];
      const double residual =
          obs.weight * (probs[j] - (j == obs.chosen_index ? 1.0 : 0.0));
      grad.u[item] += residual;
      if (spec.uses_chooser_features()) grad.gamma.row(item) += residual * *x_a;
      if (spec.uses_item_features()) {
        grad.theta += residual * obs.item_features.row(j).transpose();
      }
      if (spec.per_chooser_intercepts) grad.v(item, obs.chooser) += residual;
    }
  }

  if (objective.lambda > 0.0) {
    for (int item = 0; item < spec.k; ++item) {
      Eigen::VectorXd row = grad.v.row(item);
      add_laplacian_product(*objective.graph, objective.lambda,
                            params.v.row(item).transpose(), row);
      grad.v.row(item) = row;
    }
  }
  if (objective.l2 > 0.0) {
    grad.u += objective.l2 * params.u;
    grad.gamma += objective.l2 * params.gamma;
    grad.theta += objective.l2 * params.theta;
    if (objective.l2_on_intercepts && params.v.size() > 0) {
      grad.v += objective.l2 * params.v;
    }
  }
  return grad;
}

std::vector<int> predict_ranking(const ModelParams& params,
                                 const ModelSpec& spec, int chooser,
                                 const std::vector<int>& items,
                                 const Eigen::VectorXd* x_a,
                                 const Eigen::MatrixXd* item_features) {
  if (items.empty()) {
    throw Error(ErrorCode::Argument, "predict_ranking: empty choice set");
  }
  ChoiceObservation obs;
  obs.chooser = chooser;
  obs.choice_set = items;
  obs.chosen_index = 0;
  if (item_features != nullptr) obs.item_features = *item_features;
  const Eigen::VectorXd util = utilities(params, spec, obs, x_a);

  std::vector<int> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (util[a] != util[b]) return util[a] > util[b];
    return items[a] < items[b];
  });
  std::vector<int> ranked(items.size());
  for (size_t i = 0; i < order.size(); ++i) ranked[i] = items[order[i]];
  return ranked;
}

}  // namespace netchoice
