#include "netchoice/choice_data.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "netchoice/csv.hpp"
#include "netchoice/errors.hpp"
#include "netchoice/rng.hpp"

namespace netchoice {

namespace {

std::vector<std::string> split_items(const std::string& joined) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : joined) {
    if (c == '|') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

int intern(const std::string& id, std::vector<std::string>& ids,
           std::unordered_map<std::string, int>& index) {
  auto it = index.find(id);
  if (it != index.end()) return it->second;
  const int idx = static_cast<int>(ids.size());
  ids.push_back(id);
  index.emplace(id, idx);
  return idx;
}

}  // namespace

void ChoiceDataset::validate() const {
  if ((d_x == 0) != (chooser_features.size() == 0)) {
    throw Error(ErrorCode::Schema, "d_x inconsistent with chooser_features");
  }
  if (d_x > 0 && (chooser_features.rows() != n_choosers ||
                  chooser_features.cols() != d_x)) {
    throw Error(ErrorCode::Schema, "chooser_features shape mismatch");
  }
  for (const auto& obs : observations) {
    const std::string where = "observation " + std::to_string(obs.observation_id);
    if (obs.chooser < 0 || obs.chooser >= n_choosers) {
      throw Error(ErrorCode::Schema, where + ": chooser out of range");
    }
    if (obs.choice_set.empty()) {
      throw Error(ErrorCode::Schema, where + ": empty choice set");
    }
    std::set<int> distinct(obs.choice_set.begin(), obs.choice_set.end());
    if (distinct.size() != obs.choice_set.size()) {
      throw Error(ErrorCode::Schema, where + ": duplicate items in choice set");
    }
    for (int item : obs.choice_set) {
      if (item < 0 || item >= n_items) {
        throw Error(ErrorCode::Schema, where + ": item out of range");
      }
    }
    if (obs.chosen_index < 0 ||
        obs.chosen_index >= static_cast<int>(obs.choice_set.size())) {
      throw Error(ErrorCode::Schema, where + ": chosen_index out of range");
    }
    if (!(obs.weight >= 0.0)) {
      throw Error(ErrorCode::Schema, where + ": negative weight");
    }
    if (obs.item_features.size() != 0 &&
        (obs.item_features.rows() != static_cast<int>(obs.choice_set.size()) ||
         obs.item_features.cols() != d_y)) {
      throw Error(ErrorCode::Schema, where + ": item feature shape mismatch");
    }
  }
}

ChoiceDataset load_dataset(const std::string& observation_file,
                           const std::string& chooser_feature_file,
                           const std::string& item_feature_file) {
  ChoiceDataset ds;

  // Chooser features first so their row order defines the chooser indexing.
  csv::Table features;
  if (!chooser_feature_file.empty()) {
    features = csv::read_file(chooser_feature_file);
    if (features.header.size() < 2) {
      throw Error(ErrorCode::Schema,
                  chooser_feature_file + ": expected chooser_id plus features");
    }
    ds.d_x = static_cast<int>(features.header.size()) - 1;
    for (size_t r = 0; r < features.rows.size(); ++r) {
      const std::string where =
          chooser_feature_file + " row " + std::to_string(r);
      if (features.rows[r].size() != features.header.size()) {
        throw Error(ErrorCode::Schema, where + ": wrong column count");
      }
      const std::string& id = features.rows[r][0];
      if (ds.chooser_index.count(id)) {
        throw Error(ErrorCode::Schema, where + ": duplicate chooser '" + id + "'");
      }
      intern(id, ds.chooser_ids, ds.chooser_index);
    }
  }

  const csv::Table obs_table = csv::read_file(observation_file);
  const int col_obs = obs_table.column("observation_id");
  const int col_chooser = obs_table.column("chooser_id");
  const int col_set = obs_table.column("choice_set");
  const int col_chosen = obs_table.column("chosen_item");
  const int col_weight = obs_table.column("weight");
  if (col_obs < 0 || col_chooser < 0 || col_set < 0 || col_chosen < 0) {
    throw Error(ErrorCode::Schema,
                observation_file +
                    ": header must contain observation_id, chooser_id, "
                    "choice_set, chosen_item");
  }

  for (size_t r = 0; r < obs_table.rows.size(); ++r) {
    const auto& row = obs_table.rows[r];
    const std::string where = observation_file + " row " + std::to_string(r);
    if (row.size() != obs_table.header.size()) {
      throw Error(ErrorCode::Schema, where + ": wrong column count");
    }
    ChoiceObservation obs;
    obs.observation_id = csv::parse_int(row[col_obs], where);
    if (!chooser_feature_file.empty() && !ds.chooser_index.count(row[col_chooser])) {
      throw Error(ErrorCode::Schema,
                  where + ": chooser '" + row[col_chooser] +
                      "' missing from chooser_features");
    }
    obs.chooser = intern(row[col_chooser], ds.chooser_ids, ds.chooser_index);

    const auto item_names = split_items(row[col_set]);
    std::set<int> seen;
    for (const auto& name : item_names) {
      if (name.empty()) {
        throw Error(ErrorCode::Schema, where + ": empty item in choice_set");
      }
      const int item = intern(name, ds.item_ids, ds.item_index);
      if (!seen.insert(item).second) {
        throw Error(ErrorCode::Schema,
                    where + ": duplicate item '" + name + "' in choice_set");
      }
      obs.choice_set.push_back(item);
    }
    const auto chosen_it = ds.item_index.find(row[col_chosen]);
    int chosen_pos = -1;
    if (chosen_it != ds.item_index.end()) {
      for (size_t i = 0; i < obs.choice_set.size(); ++i) {
        if (obs.choice_set[i] == chosen_it->second) {
          chosen_pos = static_cast<int>(i);
          break;
        }
      }
    }
    if (chosen_pos < 0) {
      throw Error(ErrorCode::Schema, where + ": chosen item '" +
                                         row[col_chosen] +
                                         "' not in its choice set");
    }
    obs.chosen_index = chosen_pos;
    if (col_weight >= 0) {
      obs.weight = csv::parse_double(row[col_weight], where);
      if (!(obs.weight >= 0.0)) {
        throw Error(ErrorCode::Schema, where + ": negative weight");
      }
    }
    ds.observations.push_back(std::move(obs));
  }

  ds.n_choosers = static_cast<int>(ds.chooser_ids.size());
  ds.n_items = static_cast<int>(ds.item_ids.size());

  if (!chooser_feature_file.empty()) {
    ds.chooser_features = Eigen::MatrixXd::Zero(ds.n_choosers, ds.d_x);
    for (size_t r = 0; r < features.rows.size(); ++r) {
      const std::string where =
          chooser_feature_file + " row " + std::to_string(r);
      const int chooser = ds.chooser_index.at(features.rows[r][0]);
      for (int c = 0; c < ds.d_x; ++c) {
        ds.chooser_features(chooser, c) =
            csv::parse_double(features.rows[r][c + 1], where);
      }
    }
  }

  if (!item_feature_file.empty()) {
    const csv::Table feats = csv::read_file(item_feature_file);
    if (feats.header.size() < 3) {
      throw Error(ErrorCode::Schema,
                  item_feature_file +
                      ": expected observation_id, item_id plus features");
    }
    ds.d_y = static_cast<int>(feats.header.size()) - 2;
    std::map<std::pair<long long, int>, Eigen::VectorXd> by_key;
    for (size_t r = 0; r < feats.rows.size(); ++r) {
      const auto& row = feats.rows[r];
      const std::string where = item_feature_file + " row " + std::to_string(r);
      if (row.size() != feats.header.size()) {
        throw Error(ErrorCode::Schema, where + ": wrong column count");
      }
      const long long obs_id = csv::parse_int(row[0], where);
      auto it = ds.item_index.find(row[1]);
      if (it == ds.item_index.end()) {
        throw Error(ErrorCode::Schema, where + ": unknown item '" + row[1] + "'");
      }
      Eigen::VectorXd y(ds.d_y);
      for (int c = 0; c < ds.d_y; ++c) {
        y[c] = csv::parse_double(row[c + 2], where);
      }
      if (!by_key.emplace(std::make_pair(obs_id, it->second), y).second) {
        throw Error(ErrorCode::Schema, where + ": duplicate (observation, item)");
      }
    }
    for (auto& obs : ds.observations) {
      obs.item_features =
          Eigen::MatrixXd::Zero(static_cast<int>(obs.choice_set.size()), ds.d_y);
      for (size_t i = 0; i < obs.choice_set.size(); ++i) {
        auto it = by_key.find({obs.observation_id, obs.choice_set[i]});
        if (it == by_key.end()) {
          throw Error(ErrorCode::Schema,
                      item_feature_file + ": missing features for observation " +
                          std::to_string(obs.observation_id) + ", item '" +
                          ds.item_ids[obs.choice_set[i]] + "'");
        }
        obs.item_features.row(static_cast<int>(i)) = it->second.transpose();
      }
    }
  }

  ds.validate();
  return ds;
}

void save_dataset(const ChoiceDataset& dataset,
                  const std::string& observation_file,
                  const std::string& chooser_feature_file,
                  const std::string& item_feature_file) {
  {
    csv::Writer w(observation_file);
    w.write_row({"observation_id", "chooser_id", "choice_set", "chosen_item",
                 "weight"});
    for (const auto& obs : dataset.observations) {
      std::string joined;
      for (size_t i = 0; i < obs.choice_set.size(); ++i) {
        if (i) joined.push_back('|');
        joined += dataset.item_ids[obs.choice_set[i]];
      }
      w.write_row({csv::format_int(obs.observation_id),
                   dataset.chooser_ids[obs.chooser], joined,
                   dataset.item_ids[obs.chosen_item()],
                   csv::format_double(obs.weight)});
    }
  }
  if (!chooser_feature_file.empty() && dataset.d_x > 0) {
    csv::Writer w(chooser_feature_file);
    std::vector<std::string> header{"chooser_id"};
    for (int c = 0; c < dataset.d_x; ++c) header.push_back("x" + std::to_string(c));
    w.write_row(header);
    for (int a = 0; a < dataset.n_choosers; ++a) {
      std::vector<std::string> row{dataset.chooser_ids[a]};
      for (int c = 0; c < dataset.d_x; ++c) {
        row.push_back(csv::format_double(dataset.chooser_features(a, c)));
      }
      w.write_row(row);
    }
  }
  if (!item_feature_file.empty() && dataset.d_y > 0) {
    csv::Writer w(item_feature_file);
    std::vector<std::string> header{"observation_id", "item_id"};
    for (int c = 0; c < dataset.d_y; ++c) header.push_back("y" + std::to_string(c));
    w.write_row(header);
    for (const auto& obs : dataset.observations) {
      if (obs.item_features.size() == 0) continue;
      for (size_t i = 0; i < obs.choice_set.size(); ++i) {
        std::vector<std::string> row{csv::format_int(obs.observation_id),
                                     dataset.item_ids[obs.choice_set[i]]};
        for (int c = 0; c < dataset.d_y; ++c) {
          row.push_back(
              csv::format_double(obs.item_features(static_cast<int>(i), c)));
        }
        w.write_row(row);
      }
    }
  }
}

ChooserSplit split_choosers(const ChoiceDataset& dataset, double train_fraction,
                            std::uint64_t seed) {
  const int n = dataset.n_choosers;
  if (train_fraction <= 0.0 || train_fraction >= 1.0) {
    throw Error(ErrorCode::Argument, "train_fraction must be in (0, 1)");
  }
  const int n_train =
      static_cast<int>(std::floor(n * train_fraction + 1e-9));
  const int remainder = n - n_train;
  if (n_train < 1) {
    throw Error(ErrorCode::Split, "train fraction leaves no training choosers");
  }
  if (remainder < 2) {
    throw Error(ErrorCode::Split,
                "cannot form validation and test sets: only " +
                    std::to_string(remainder) + " chooser(s) left");
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);

  const int n_validation = (remainder + 1) / 2;
  ChooserSplit split;
  split.seed = seed;
  split.train.assign(order.begin(), order.begin() + n_train);
  split.validation.assign(order.begin() + n_train,
                          order.begin() + n_train + n_validation);
  split.test.assign(order.begin() + n_train + n_validation, order.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.validation.begin(), split.validation.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

Eigen::MatrixXd choice_fractions(const ChoiceDataset& dataset,
                                 const std::vector<int>& choosers) {
  Eigen::MatrixXd chosen =
      Eigen::MatrixXd::Zero(dataset.n_choosers, dataset.n_items);
  Eigen::MatrixXd opportunities =
      Eigen::MatrixXd::Zero(dataset.n_choosers, dataset.n_items);
  std::vector<char> include(dataset.n_choosers, 0);
  for (int a : choosers) include[a] = 1;

  for (const auto& obs : dataset.observations) {
    if (!include[obs.chooser]) continue;
    for (int item : obs.choice_set) {
      opportunities(obs.chooser, item) += obs.weight;
    }
    chosen(obs.chooser, obs.chosen_item()) += obs.weight;
  }
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(dataset.n_choosers, dataset.n_items);
  for (int a = 0; a < dataset.n_choosers; ++a) {
    for (int i = 0; i < dataset.n_items; ++i) {
      if (opportunities(a, i) > 0.0) z(a, i) = chosen(a, i) / opportunities(a, i);
    }
  }
  return z;
}

double recency_feature(double seconds_since_last_use) {
  if (!(seconds_since_last_use >= 0.0)) return 0.0;
  return 1.0 / std::log(std::max(seconds_since_last_use, 2.0));
}

}  // namespace netchoice
