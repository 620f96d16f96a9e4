#ifndef NETCHOICE_CHOICE_DATA_HPP
#define NETCHOICE_CHOICE_DATA_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace netchoice {

// One choice event: chooser `chooser` saw `choice_set` and picked the item at
// `chosen_index`. `weight` is a nonnegative multiplicity used for aggregated
// choosers (e.g. counties carrying full vote counts). `item_features` holds
// per-instance item features (|C| x d_y) and is 0x0 when absent.
struct ChoiceObservation {
  long long observation_id = 0;
  int chooser = 0;
  std::vector<int> choice_set;
  int chosen_index = 0;
  double weight = 1.0;
  Eigen::MatrixXd item_features;

  int chosen_item() const { return choice_set[chosen_index]; }
};

struct ChoiceDataset {
  int n_choosers = 0;
  int n_items = 0;
  int d_x = 0;
  int d_y = 0;
  std::vector<ChoiceObservation> observations;
  Eigen::MatrixXd chooser_features;  // n x d_x, 0x0 when absent

  // External id <-> dense index mapping, retained for output.
  std::vector<std::string> chooser_ids;
  std::vector<std::string> item_ids;
  std::unordered_map<std::string, int> chooser_index;
  std::unordered_map<std::string, int> item_index;

  void validate() const;
};

struct ChooserSplit {
  std::vector<int> train;
  std::vector<int> validation;
  std::vector<int> test;
  std::uint64_t seed = 0;
};

// observations.csv: observation_id, chooser_id, choice_set ("|"-joined),
// chosen_item, weight (optional column; defaults to 1).
// chooser_features.csv: chooser_id then d_x numeric columns.
// item_features.csv: observation_id, item_id, then d_y numeric columns, one
// row per (observation, set member). All files carry a header row.
ChoiceDataset load_dataset(const std::string& observation_file,
                           const std::string& chooser_feature_file = "",
                           const std::string& item_feature_file = "");

// Inverse of load_dataset on the same schemas. Empty paths skip that file.
void save_dataset(const ChoiceDataset& dataset,
                  const std::string& observation_file,
                  const std::string& chooser_feature_file = "",
                  const std::string& item_feature_file = "");

// Shuffles choosers under `seed`; first floor(n*f) are train, then ceil(rem/2)
// validation, remainder test. Requires at least one train and two remaining
// choosers.
ChooserSplit split_choosers(const ChoiceDataset& dataset, double train_fraction,
                            std::uint64_t seed);

// Z0: entry (a, i) is the weight-share of opportunities on which chooser a
// picked item i, restricted to the given choosers; all other entries are 0.
Eigen::MatrixXd choice_fractions(const ChoiceDataset& dataset,
                                 const std::vector<int>& choosers);

// Recency helper: 1/ln(s) with s clamped to >= 2; negative or non-finite
// input means "never used" and maps to 0.
double recency_feature(double seconds_since_last_use);

}  // namespace netchoice

#endif  // NETCHOICE_CHOICE_DATA_HPP
