#ifndef NETCHOICE_TEST_HELPERS_HPP
#define NETCHOICE_TEST_HELPERS_HPP

#include <unistd.h>

#include <Eigen/Dense>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "netchoice/choice_data.hpp"
#include "netchoice/choice_models.hpp"
#include "netchoice/graph.hpp"
#include "netchoice/rng.hpp"

namespace testutil {

// Scratch directory that cleans up after itself.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    dir_ = std::filesystem::temp_directory_path() /
           ("netchoice_" + tag + "_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter_++));
    std::filesystem::create_directories(dir_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(dir_, ec);
  }
  std::string path(const std::string& name) const {
    return (dir_ / name).string();
  }

 private:
  static inline int counter_ = 0;
  std::filesystem::path dir_;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

// Central finite differences of a scalar function, independent of any
// analytic gradient code.
inline Eigen::VectorXd finite_difference_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd grad(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

inline double relative_error(const Eigen::VectorXd& a,
                             const Eigen::VectorXd& b) {
  const double denom = std::max(b.norm(), 1e-8);
  return (a - b).norm() / denom;
}

// Moore-Penrose pseudoinverse (oracle path, SVD-based).
inline Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m) {
  return m.completeOrthogonalDecomposition().pseudoInverse();
}

// Random dataset over n choosers and k items with optional feature blocks;
// used to drive gradient and objective checks.
inline netchoice::ChoiceDataset random_dataset(int n, int k, int d_x, int d_y,
                                               int n_observations,
                                               std::uint64_t seed,
                                               bool random_weights = false) {
  netchoice::Rng rng(seed);
  netchoice::ChoiceDataset ds;
  ds.n_choosers = n;
  ds.n_items = k;
  ds.d_x = d_x;
  ds.d_y = d_y;
  for (int a = 0; a < n; ++a) {
    ds.chooser_ids.push_back("c" + std::to_string(a));
    ds.chooser_index.emplace(ds.chooser_ids.back(), a);
  }
  for (int i = 0; i < k; ++i) {
    ds.item_ids.push_back("i" + std::to_string(i));
    ds.item_index.emplace(ds.item_ids.back(), i);
  }
  if (d_x > 0) {
    ds.chooser_features = Eigen::MatrixXd(n, d_x);
    for (int a = 0; a < n; ++a) {
      for (int c = 0; c < d_x; ++c) ds.chooser_features(a, c) = rng.normal();
    }
  }
  std::vector<int> pool(k);
  for (int o = 0; o < n_observations; ++o) {
    netchoice::ChoiceObservation obs;
    obs.observation_id = o;
    obs.chooser = rng.uniform_int(0, n - 1);
    const int size = rng.uniform_int(2, k);
    for (int i = 0; i < k; ++i) pool[i] = i;
    for (int j = 0; j < size; ++j) {
      std::swap(pool[j], pool[rng.uniform_int(j, k - 1)]);
    }
    obs.choice_set.assign(pool.begin(), pool.begin() + size);
    std::sort(obs.choice_set.begin(), obs.choice_set.end());
    obs.chosen_index = rng.uniform_int(0, size - 1);
    obs.weight = random_weights ? 0.5 + 2.0 * rng.uniform() : 1.0;
    if (d_y > 0) {
      obs.item_features = Eigen::MatrixXd(size, d_y);
      for (int r = 0; r < size; ++r) {
        for (int c = 0; c < d_y; ++c) obs.item_features(r, c) = rng.normal();
      }
    }
    ds.observations.push_back(std::move(obs));
  }
  ds.validate();
  return ds;
}

inline netchoice::ModelParams random_params(const netchoice::ModelSpec& spec,
                                            std::uint64_t seed,
                                            double scale = 0.5) {
  netchoice::Rng rng(seed);
  netchoice::ModelParams p = netchoice::ModelParams::zeros(spec);
  auto fill = [&](auto& block) {
    for (Eigen::Index i = 0; i < block.size(); ++i) {
      block.data()[i] = scale * rng.normal();
    }
  };
  fill(p.u);
  fill(p.gamma);
  fill(p.theta);
  fill(p.v);
  return p;
}

inline std::vector<int> all_choosers(int n) {
  std::vector<int> out(n);
  for (int i = 0; i < n; ++i) out[i] = i;
  return out;
}

}  // namespace testutil

#endif  // NETCHOICE_TEST_HELPERS_HPP
