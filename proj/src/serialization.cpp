#include "netchoice/serialization.hpp"

#include <fstream>

#include <json.hpp>

#include "netchoice/csv.hpp"
#include "netchoice/errors.hpp"

namespace netchoice {

using nlohmann::json;

namespace {

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i];
  return v;
}

Eigen::MatrixXd matrix_from_json(const json& j, int rows, int cols) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c);
  }
  return m;
}

}  // namespace

std::string params_to_json(const ModelParams& params, const ModelSpec& spec) {
  json doc;
  doc["spec"] = {{"family", family_name(spec.family)},
                 {"per_chooser_intercepts", spec.per_chooser_intercepts},
                 {"n", spec.n},
                 {"k", spec.k},
                 {"d_x", spec.d_x},
                 {"d_y", spec.d_y}};
  doc["u"] = vector_to_json(params.u);
  doc["gamma"] = matrix_to_json(params.gamma);
  doc["theta"] = vector_to_json(params.theta);
  json triplets = json::array();
  for (Eigen::Index item = 0; item < params.v.rows(); ++item) {
    for (Eigen::Index chooser = 0; chooser < params.v.cols(); ++chooser) {
      const double value = params.v(item, chooser);
      if (value != 0.0) triplets.push_back({item, chooser, value});
    }
  }
  doc["v"] = triplets;
  return doc.dump(2) + "\n";
}

namespace {

std::pair<ModelParams, ModelSpec> params_from_parsed(const json& doc);

}  // namespace

std::pair<ModelParams, ModelSpec> params_from_json(const std::string& text) {
  try {
    return params_from_parsed(json::parse(text));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Schema, std::string("bad params JSON: ") + e.what());
  }
}

namespace {

std::pair<ModelParams, ModelSpec> params_from_parsed(const json& doc) {
  ModelSpec spec;
  const json& s = doc.at("spec");
  spec.family = family_from_string(s.at("family"));
  spec.per_chooser_intercepts = s.at("per_chooser_intercepts");
  spec.n = s.at("n");
  spec.k = s.at("k");
  spec.d_x = s.at("d_x");
  spec.d_y = s.at("d_y");
  spec.validate();

  ModelParams params = ModelParams::zeros(spec);
  params.u = vector_from_json(doc.at("u"));
  if (params.u.size() != spec.k) {
    throw Error(ErrorCode::Schema, "params JSON: u has wrong length");
  }
  if (spec.uses_chooser_features()) {
    params.gamma = matrix_from_json(doc.at("gamma"), spec.k, spec.d_x);
  }
  if (spec.uses_item_features()) {
    params.theta = vector_from_json(doc.at("theta"));
    if (params.theta.size() != spec.d_y) {
      throw Error(ErrorCode::Schema, "params JSON: theta has wrong length");
    }
  }
  if (spec.per_chooser_intercepts) {
    for (const auto& t : doc.at("v")) {
      const int item = t.at(0);
      const int chooser = t.at(1);
      if (item < 0 || item >= spec.k || chooser < 0 || chooser >= spec.n) {
        throw Error(ErrorCode::Schema, "params JSON: v triplet out of range");
      }
      params.v(item, chooser) = t.at(2);
    }
  }
  if (!params.all_finite()) {
    throw Error(ErrorCode::Schema, "params JSON: non-finite parameter value");
  }
  return {std::move(params), spec};
}

}  // namespace

std::string report_to_json(const TrainReport& report, const Hyperparams& hp) {
  json doc;
  doc["epochs_run"] = report.epochs_run;
  doc["final_objective"] = report.final_objective;
  doc["final_gradient_sq_norm"] = report.final_gradient_sq_norm;
  doc["converged"] = report.converged;
  doc["hyperparams"] = {{"learning_rate", hp.learning_rate},
                        {"l2", hp.l2},
                        {"lambda", hp.lambda},
                        {"rho", hp.rho}};
  return doc.dump(2) + "\n";
}

std::string gcn_params_to_json(const GcnParams& params, const GcnConfig& cfg) {
  json doc;
  doc["config"] = {{"layer1_dim", cfg.layer1_dim},
                   {"layer2_dim", cfg.layer2_dim},
                   {"input_dim", cfg.input_dim},
                   {"dropout_rate", cfg.dropout_rate},
                   {"concatenate_layers", cfg.concatenate_layers},
                   {"concat_input", cfg.concat_input}};
  doc["w0"] = matrix_to_json(params.w0);
  doc["w1"] = matrix_to_json(params.w1);
  doc["input_table"] = matrix_to_json(params.input_table);
  doc["head_u"] = vector_to_json(params.head_u);
  doc["head_gamma"] = matrix_to_json(params.head_gamma);
  doc["head_theta"] = vector_to_json(params.head_theta);
  return doc.dump(2) + "\n";
}

std::string gcn_report_to_json(const GcnTrainReport& report) {
  json doc;
  doc["epochs_run"] = report.epochs_run;
  doc["final_objective"] = report.final_objective;
  doc["final_gradient_sq_norm"] = report.final_gradient_sq_norm;
  doc["converged"] = report.converged;
  doc["hyperparams"] = {{"learning_rate", report.learning_rate},
                        {"l2", report.l2}};
  doc["validation_nll"] = report.validation_nll;
  return doc.dump(2) + "\n";
}

std::string hyperparams_to_json(Method method, const Hyperparams& hp) {
  json doc;
  switch (method) {
    case Method::Propagation:
      doc["rho"] = hp.rho;
      break;
    case Method::Gcn:
      doc["learning_rate"] = hp.learning_rate;
      doc["l2"] = hp.l2;
      break;
    case Method::Laplacian:
      doc["learning_rate"] = hp.learning_rate;
      doc["l2"] = hp.l2;
      doc["lambda"] = hp.lambda;
      break;
    case Method::LogitFamily:
      doc["learning_rate"] = hp.learning_rate;
      doc["l2"] = hp.l2;
      break;
  }
  return doc.dump();
}

void write_results_csv(const std::string& path,
                       const std::vector<ExperimentResult>& results) {
  csv::Writer w(path);
  w.write_row({"method", "train_fraction", "trial", "test_nll", "test_mrr",
               "hyperparams"});
  for (const auto& r : results) {
    w.write_row({method_name(r.method), csv::format_double(r.train_fraction),
                 csv::format_int(r.trial),
                 r.test_nll ? csv::format_double(*r.test_nll) : "",
                 csv::format_double(r.test_mrr),
                 hyperparams_to_json(r.method, r.hyperparams)});
  }
}

void write_curves_csv(const std::string& path,
                      const std::vector<SampleComplexityCurve>& curves) {
  csv::Writer w(path);
  w.write_row({"lambda", "regularized", "samples", "mse_mean", "mse_stderr"});
  for (const auto& curve : curves) {
    for (size_t i = 0; i < curve.samples.size(); ++i) {
      w.write_row({csv::format_double(curve.lambda),
                   curve.regularized ? "1" : "0",
                   csv::format_int(curve.samples[i]),
                   csv::format_double(curve.mse_mean[i]),
                   csv::format_double(curve.mse_stderr[i])});
    }
  }
}

void write_counts_csv(const std::string& path, const EnsembleCounts& counts,
                      const GroupMap& groups,
                      const std::vector<std::string>& item_ids) {
  csv::Writer w(path);
  w.write_row({"group", "item", "mean_count", "stderr"});
  for (Eigen::Index g = 0; g < counts.mean.rows(); ++g) {
    for (Eigen::Index i = 0; i < counts.mean.cols(); ++i) {
      w.write_row({groups.group_ids[g], item_ids[i],
                   csv::format_double(counts.mean(g, i)),
                   csv::format_double(counts.std_error(g, i))});
    }
  }
}

void write_winners_csv(const std::string& path,
                       const std::vector<PluralityWinner>& winners,
                       const GroupMap& groups,
                       const std::vector<std::string>& item_ids) {
  csv::Writer w(path);
  w.write_row({"group", "item", "tied"});
  for (size_t g = 0; g < winners.size(); ++g) {
    w.write_row({groups.group_ids[g], item_ids[winners[g].item],
                 winners[g].tied ? "1" : "0"});
  }
}

void write_fractions_csv(const std::string& path, const Eigen::MatrixXd& z,
                         const std::vector<std::string>& chooser_ids,
                         const std::vector<std::string>& item_ids) {
  csv::Writer w(path);
  std::vector<std::string> header{"chooser_id"};
  header.insert(header.end(), item_ids.begin(), item_ids.end());
  w.write_row(header);
  for (Eigen::Index a = 0; a < z.rows(); ++a) {
    std::vector<std::string> row{chooser_ids[a]};
    for (Eigen::Index i = 0; i < z.cols(); ++i) {
      row.push_back(csv::format_double(z(a, i)));
    }
    w.write_row(row);
  }
}

}  // namespace netchoice
