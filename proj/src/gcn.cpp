#include "netchoice/gcn.hpp"

#include <cmath>

#include "netchoice/errors.hpp"
#include "netchoice/rng.hpp"

namespace netchoice {

void GcnConfig::validate() const {
  if (layer1_dim < 1 || layer2_dim < 1 || input_dim < 1) {
    throw Error(ErrorCode::Config, "GCN layer dimensions must be positive");
  }
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
    throw Error(ErrorCode::Config, "dropout rate must be in [0, 1)");
  }
}

namespace {

Eigen::MatrixXd glorot(int rows, int cols, int fan_in, int fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / (fan_in + fan_out));
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(-bound, bound);
  }
  return m;
}

Eigen::MatrixXd dropout_mask(int rows, int cols, double rate, GcnMode mode,
                             Rng& rng) {
  if (mode == GcnMode::Eval || rate == 0.0) {
    return Eigen::MatrixXd::Ones(rows, cols);
  }
  const double keep_scale = 1.0 / (1.0 - rate);
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      m(r, c) = rng.bernoulli(rate) ? 0.0 : keep_scale;
    }
  }
  return m;
}

// Everything the backward pass needs from one forward evaluation.
struct ForwardPass {
  const Eigen::MatrixXd* input = nullptr;  // X (raw layer-0 input)
  Eigen::MatrixXd mask0, mask1;
  Eigen::MatrixXd p1;  // A' (X . mask0)
  Eigen::MatrixXd z1, h1;
  Eigen::MatrixXd p2;  // A' (H1 . mask1)
  Eigen::MatrixXd z2, h2;
  Eigen::MatrixXd embeddings;
};

ForwardPass run_forward(const SocialGraph& g, const GcnParams& params,
                        const GcnConfig& cfg, const Eigen::MatrixXd* features,
                        GcnMode mode, std::uint64_t seed) {
  cfg.validate();
  const int n = g.node_count();
  const bool learned_input = params.input_table.size() > 0;
  if (learned_input == (features != nullptr)) {
    throw Error(ErrorCode::Config,
                "provide exactly one of node features or a learned input table");
  }
  ForwardPass fp;
  fp.input = learned_input ? &params.input_table : features;
  if (fp.input->rows() != n || fp.input->cols() != cfg.input_dim) {
    throw Error(ErrorCode::Config, "GCN input shape mismatch");
  }
  if (params.w0.rows() != cfg.input_dim || params.w0.cols() != cfg.layer1_dim ||
      params.w1.rows() != cfg.layer1_dim || params.w1.cols() != cfg.layer2_dim) {
    throw Error(ErrorCode::Config, "GCN weight shape mismatch");
  }

  Rng rng(seed);
  fp.mask0 = dropout_mask(n, cfg.input_dim, cfg.dropout_rate, mode, rng);
  fp.mask1 = dropout_mask(n, cfg.layer1_dim, cfg.dropout_rate, mode, rng);

  fp.p1 = apply_normalized_adjacency(g, fp.input->cwiseProduct(fp.mask0),
                                     /*with_self_loops=*/true);
  fp.z1 = fp.p1 * params.w0;
  fp.h1 = fp.z1.cwiseMax(0.0);
  fp.p2 = apply_normalized_adjacency(g, fp.h1.cwiseProduct(fp.mask1),
                                     /*with_self_loops=*/true);
  fp.z2 = fp.p2 * params.w1;
  fp.h2 = fp.z2.cwiseMax(0.0);

  fp.embeddings.resize(n, cfg.embedding_dim());
  int col = 0;
  if (cfg.concat_input) {
    fp.embeddings.middleCols(col, cfg.input_dim) = *fp.input;
    col += cfg.input_dim;
  }
  if (cfg.concatenate_layers) {
    fp.embeddings.middleCols(col, cfg.layer1_dim) = fp.h1;
    col += cfg.layer1_dim;
  }
  fp.embeddings.middleCols(col, cfg.layer2_dim) = fp.h2;
  return fp;
}

struct HeadResult {
  double nll = 0.0;
  Eigen::VectorXd grad_u;
  Eigen::MatrixXd grad_gamma;
  Eigen::VectorXd grad_theta;
  Eigen::MatrixXd grad_embeddings;
};

HeadResult head_nll_and_grads(const GcnParams& params,
                              const Eigen::MatrixXd& embeddings,
                              const ChoiceDataset& dataset,
                              const std::vector<int>& choosers,
                              bool want_grads) {
  const int k = static_cast<int>(params.head_u.size());
  std::vector<char> mask(dataset.n_choosers, 0);
  for (int a : choosers) mask[a] = 1;

  HeadResult res;
  if (want_grads) {
    res.grad_u = Eigen::VectorXd::Zero(k);
    res.grad_gamma =
        Eigen::MatrixXd::Zero(k, embeddings.cols());
    res.grad_theta = Eigen::VectorXd::Zero(params.head_theta.size());
    res.grad_embeddings =
        Eigen::MatrixXd::Zero(embeddings.rows(), embeddings.cols());
  }
  const bool use_theta = params.head_theta.size() > 0;

  for (const auto& obs : dataset.observations) {
    if (!mask[obs.chooser]) continue;
    const int set_size = static_cast<int>(obs.choice_set.size());
    if (use_theta && obs.item_features.size() == 0) {
      throw Error(ErrorCode::Config,
                  "item features required (observation " +
                      std::to_string(obs.observation_id) + ")");
    }
    Eigen::VectorXd util(set_size);
    for (int j = 0; j < set_size; ++j) {
      const int item = obs.choice_set[j];
      double value = params.head_u[item] +
                     params.head_gamma.row(item).dot(embeddings.row(obs.chooser));
      if (use_theta) value += params.head_theta.dot(obs.item_features.row(j));
      util[j] = value;
    }
    const double lse = log_sum_exp(util);
    res.nll += obs.weight * (lse - util[obs.chosen_index]);
    if (!want_grads) continue;
    const Eigen::VectorXd probs = (util.array() - lse).exp();
    for (int j = 0; j < set_size; ++j) {
      const int item = obs.choice_set[j];
      const double residual =
          obs.weight * (probs[j] - (j == obs.chosen_index ? 1.0 : 0.0));
      res.grad_u[item] += residual;
      res.grad_gamma.row(item) += residual * embeddings.row(obs.chooser);
      if (use_theta) {
        res.grad_theta += residual * obs.item_features.row(j).transpose();
      }
      res.grad_embeddings.row(obs.chooser) +=
          residual * params.head_gamma.row(item);
    }
  }
  return res;
}

std::pair<double, GcnParams> objective_and_gradient(
    const GcnParams& params, const GcnConfig& cfg, const SocialGraph& g,
    const ChoiceDataset& dataset, const std::vector<int>& choosers, double l2,
    GcnMode mode, std::uint64_t seed, bool want_grads) {
  const bool learned_input = params.input_table.size() > 0;
  const Eigen::MatrixXd* features =
      learned_input ? nullptr : &dataset.chooser_features;
  ForwardPass fp = run_forward(g, params, cfg, features, mode, seed);
  HeadResult head =
      head_nll_and_grads(params, fp.embeddings, dataset, choosers, want_grads);

  double objective = head.nll;
  objective += 0.5 * l2 *
               (params.w0.squaredNorm() + params.w1.squaredNorm() +
                params.input_table.squaredNorm() + params.head_u.squaredNorm() +
                params.head_gamma.squaredNorm() +
                params.head_theta.squaredNorm());
  if (!want_grads) return {objective, GcnParams{}};

  GcnParams grad;
  grad.head_u = head.grad_u + l2 * params.head_u;
  grad.head_gamma = head.grad_gamma + l2 * params.head_gamma;
  grad.head_theta = head.grad_theta + l2 * params.head_theta;

  // Split the embedding gradient back into the concatenated blocks.
  const int n = g.node_count();
  Eigen::MatrixXd d_input_head = Eigen::MatrixXd::Zero(n, cfg.input_dim);
  Eigen::MatrixXd d_h1 = Eigen::MatrixXd::Zero(n, cfg.layer1_dim);
  int col = 0;
  if (cfg.concat_input) {
    d_input_head = head.grad_embeddings.middleCols(col, cfg.input_dim);
    col += cfg.input_dim;
  }
  if (cfg.concatenate_layers) {
    d_h1 = head.grad_embeddings.middleCols(col, cfg.layer1_dim);
    col += cfg.layer1_dim;
  }
  Eigen::MatrixXd d_h2 = head.grad_embeddings.middleCols(col, cfg.layer2_dim);

  const Eigen::MatrixXd d_z2 =
      d_h2.cwiseProduct((fp.z2.array() > 0.0).cast<double>().matrix());
  grad.w1 = fp.p2.transpose() * d_z2 + l2 * params.w1;
  d_h1 += apply_normalized_adjacency(g, d_z2 * params.w1.transpose(),
                                     /*with_self_loops=*/true)
              .cwiseProduct(fp.mask1);
  const Eigen::MatrixXd d_z1 =
      d_h1.cwiseProduct((fp.z1.array() > 0.0).cast<double>().matrix());
  grad.w0 = fp.p1.transpose() * d_z1 + l2 * params.w0;
  if (learned_input) {
    grad.input_table =
        d_input_head +
        apply_normalized_adjacency(g, d_z1 * params.w0.transpose(),
                                   /*with_self_loops=*/true)
            .cwiseProduct(fp.mask0) +
        l2 * params.input_table;
  }
  return {objective, std::move(grad)};
}

}  // namespace

GcnParams GcnParams::init(const GcnConfig& cfg, int n, int k, int d_y,
                          bool learned_input, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  GcnParams p;
  p.w0 = glorot(cfg.input_dim, cfg.layer1_dim, cfg.input_dim, cfg.layer1_dim,
                rng);
  p.w1 = glorot(cfg.layer1_dim, cfg.layer2_dim, cfg.layer1_dim, cfg.layer2_dim,
                rng);
  if (learned_input) {
    p.input_table = glorot(n, cfg.input_dim, cfg.input_dim, cfg.layer1_dim, rng);
  }
  p.head_u = Eigen::VectorXd::Zero(k);
  p.head_gamma = Eigen::MatrixXd::Zero(k, cfg.embedding_dim());
  p.head_theta = Eigen::VectorXd::Zero(d_y);
  return p;
}

int GcnParams::flat_size() const {
  return static_cast<int>(w0.size() + w1.size() + input_table.size() +
                          head_u.size() + head_gamma.size() +
                          head_theta.size());
}

namespace {

void copy_out(const Eigen::MatrixXd& m, Eigen::VectorXd& x, int& pos) {
  for (int r = 0; r < m.rows(); ++r) {
    x.segment(pos, m.cols()) = m.row(r);
    pos += static_cast<int>(m.cols());
  }
}

void copy_in(Eigen::MatrixXd& m, const Eigen::VectorXd& x, int& pos) {
  for (int r = 0; r < m.rows(); ++r) {
    m.row(r) = x.segment(pos, m.cols());
    pos += static_cast<int>(m.cols());
  }
}

}  // namespace

Eigen::VectorXd GcnParams::flatten() const {
  Eigen::VectorXd x(flat_size());
  int pos = 0;
  copy_out(w0, x, pos);
  copy_out(w1, x, pos);
  copy_out(input_table, x, pos);
  x.segment(pos, head_u.size()) = head_u;
  pos += static_cast<int>(head_u.size());
  copy_out(head_gamma, x, pos);
  x.segment(pos, head_theta.size()) = head_theta;
  return x;
}

GcnParams GcnParams::unflatten(const GcnConfig& cfg, int n, int k, int d_y,
                               bool learned_input, const Eigen::VectorXd& x) {
  GcnParams p = init(cfg, n, k, d_y, learned_input, 0);
  int pos = 0;
  copy_in(p.w0, x, pos);
  copy_in(p.w1, x, pos);
  copy_in(p.input_table, x, pos);
  p.head_u = x.segment(pos, p.head_u.size());
  pos += static_cast<int>(p.head_u.size());
  copy_in(p.head_gamma, x, pos);
  p.head_theta = x.segment(pos, p.head_theta.size());
  return p;
}

Eigen::MatrixXd gcn_forward(const SocialGraph& g, const GcnParams& params,
                            const GcnConfig& cfg,
                            const Eigen::MatrixXd* features, GcnMode mode,
                            std::uint64_t seed) {
  return run_forward(g, params, cfg, features, mode, seed).embeddings;
}

double gcn_choice_objective(const GcnParams& params, const GcnConfig& cfg,
                            const SocialGraph& g, const ChoiceDataset& dataset,
                            const std::vector<int>& choosers, double l2,
                            GcnMode mode, std::uint64_t seed) {
  return objective_and_gradient(params, cfg, g, dataset, choosers, l2, mode,
                                seed, /*want_grads=*/false)
      .first;
}

GcnParams gcn_gradient(const GcnParams& params, const GcnConfig& cfg,
                       const SocialGraph& g, const ChoiceDataset& dataset,
                       const std::vector<int>& choosers, double l2,
                       GcnMode mode, std::uint64_t seed) {
  return objective_and_gradient(params, cfg, g, dataset, choosers, l2, mode,
                                seed, /*want_grads=*/true)
      .second;
}

GcnTrainReport train_gcn(const SocialGraph& g, const ChoiceDataset& dataset,
                         const ChooserSplit& split, const GcnConfig& cfg,
                         const HyperGrid& grid, std::uint64_t seed,
                         int max_epochs, int workers) {
  GcnConfig config = cfg;
  const bool learned_input = dataset.d_x == 0;
  if (!learned_input) config.input_dim = dataset.d_x;
  config.validate();
  if (grid.learning_rates.empty() || grid.l2_strengths.empty()) {
    throw Error(ErrorCode::Config, "empty hyperparameter grid");
  }

  struct Cell {
    double lr, l2;
  };
  std::vector<Cell> cells;
  for (double lr : grid.learning_rates) {
    for (double l2 : grid.l2_strengths) cells.push_back({lr, l2});
  }

  const int n = dataset.n_choosers;
  const int k = dataset.n_items;
  const int d_y = dataset.d_y;
  std::vector<GcnTrainReport> reports(cells.size());

  parallel_for(static_cast<int>(cells.size()), workers, [&](int i) {
    const std::uint64_t cell_seed = Rng::derive(seed, i + 1);
    const GcnParams start =
        GcnParams::init(config, n, k, d_y, learned_input, seed);
    auto eval = [&](const Eigen::VectorXd& x, int epoch) {
      const GcnParams p =
          GcnParams::unflatten(config, n, k, d_y, learned_input, x);
      auto [obj, grad] = objective_and_gradient(
          p, config, g, dataset, split.train, cells[i].l2, GcnMode::Train,
          Rng::derive(cell_seed, epoch), /*want_grads=*/true);
      return std::make_pair(obj, grad.flatten());
    };
    const FlatTrainResult flat =
        train_flat(eval, start.flatten(), cells[i].lr, max_epochs);
    GcnTrainReport& r = reports[i];
    r.params = GcnParams::unflatten(config, n, k, d_y, learned_input, flat.params);
    r.config = config;
    r.epochs_run = flat.epochs_run;
    r.final_objective = flat.final_objective;
    r.final_gradient_sq_norm = flat.final_gradient_sq_norm;
    r.converged = flat.converged;
    r.learning_rate = cells[i].lr;
    r.l2 = cells[i].l2;
    r.validation_nll = gcn_choice_objective(r.params, config, g, dataset,
                                            split.validation, 0.0);
  });

  int best = 0;
  for (size_t i = 1; i < reports.size(); ++i) {
    if (reports[i].validation_nll < reports[best].validation_nll) {
      best = static_cast<int>(i);
    }
  }
  return std::move(reports[best]);
}

GcnAsChoiceModel gcn_as_choice_model(const SocialGraph& g,
                                     const GcnParams& params,
                                     const GcnConfig& cfg,
                                     const ChoiceDataset& dataset) {
  GcnAsChoiceModel out;
  const bool learned_input = params.input_table.size() > 0;
  const Eigen::MatrixXd* features =
      learned_input ? nullptr : &dataset.chooser_features;
  const Eigen::MatrixXd embeddings =
      gcn_forward(g, params, cfg, features, GcnMode::Eval);

  out.spec.family = dataset.d_y > 0 ? Family::CML : Family::MNL;
  out.spec.per_chooser_intercepts = false;
  out.spec.n = dataset.n_choosers;
  out.spec.k = dataset.n_items;
  out.spec.d_x = static_cast<int>(embeddings.cols());
  out.spec.d_y = dataset.d_y;

  out.params.u = params.head_u;
  out.params.gamma = params.head_gamma;
  out.params.theta = params.head_theta;

  out.dataset = dataset;
  out.dataset.d_x = out.spec.d_x;
  out.dataset.chooser_features = embeddings;
  return out;
}

}  // namespace netchoice
