#ifndef NETCHOICE_SERIALIZATION_HPP
#define NETCHOICE_SERIALIZATION_HPP

#include <string>
#include <vector>

#include "netchoice/choice_models.hpp"
#include "netchoice/counterfactual.hpp"
#include "netchoice/evaluation.hpp"
#include "netchoice/gcn.hpp"
#include "netchoice/optimizer.hpp"

namespace netchoice {

// Fitted parameters as a JSON document: the spec fields, dense arrays for
// u/gamma/theta, and v as a sparse (item, chooser, value) triplet list.
std::string params_to_json(const ModelParams& params, const ModelSpec& spec);
std::pair<ModelParams, ModelSpec> params_from_json(const std::string& text);

std::string report_to_json(const TrainReport& report, const Hyperparams& hp);

std::string gcn_params_to_json(const GcnParams& params, const GcnConfig& cfg);
std::string gcn_report_to_json(const GcnTrainReport& report);

std::string hyperparams_to_json(Method method, const Hyperparams& hp);

void write_results_csv(const std::string& path,
                       const std::vector<ExperimentResult>& results);
void write_curves_csv(const std::string& path,
                      const std::vector<SampleComplexityCurve>& curves);
void write_counts_csv(const std::string& path, const EnsembleCounts& counts,
                      const GroupMap& groups,
                      const std::vector<std::string>& item_ids);
void write_winners_csv(const std::string& path,
                       const std::vector<PluralityWinner>& winners,
                       const GroupMap& groups,
                       const std::vector<std::string>& item_ids);
void write_fractions_csv(const std::string& path, const Eigen::MatrixXd& z,
                         const std::vector<std::string>& chooser_ids,
                         const std::vector<std::string>& item_ids);

}  // namespace netchoice

#endif  // NETCHOICE_SERIALIZATION_HPP
