#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "specest/estimators.hpp"
#include "specest/mixing.hpp"
#include "specest/rng.hpp"

namespace test_helpers {

inline double rel_err(double actual, double expected) {
  return std::abs(actual - expected) / std::abs(expected);
}

// The two-state chain used throughout: P = [[0.3, 0.7], [0.5, 0.5]],
// measurements {0, 1}.
inline specest::MarkovChainModel two_state_chain() {
  Eigen::MatrixXd transition(2, 2);
  transition << 0.3, 0.7, 0.5, 0.5;
  Eigen::VectorXd values(2);
  values << 0.0, 1.0;
  return specest::MarkovChainModel::create(transition, values);
}

inline specest::TimeSeries random_series(int dim, std::int64_t n,
                                         std::uint64_t seed) {
  specest::TimeSeries out;
  out.dim = dim;
  out.mean_shifted = true;
  specest::Rng rng(seed);
  out.data.resize(static_cast<std::size_t>(n) * dim);
  for (auto& v : out.data) {
    v = rng.normal();
  }
  return out;
}

// Constant-table profile with M_q = Gamma_{d,q} = value over a grid wide
// enough for b_q evaluations at 4q, q <= 8.
inline specest::MixingProfile constant_profile(double value) {
  std::vector<double> grid{1, 2, 4, 8, 16, 32, 40};
  std::vector<double> m(grid.size(), value);
  std::vector<double> g(grid.size(), value);
  return specest::table_profile(grid, m, g, {}, "constant");
}

}  // namespace test_helpers
