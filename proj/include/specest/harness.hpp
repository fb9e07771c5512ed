#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "specest/bounds.hpp"
#include "specest/estimators.hpp"
#include "specest/mixing.hpp"
#include "specest/models.hpp"

namespace specest {

/// Replicated experiment: simulate, estimate at the configured segment
/// counts, and compare the empirical deviation from the exact mean
/// against the theoretical radius.
struct ExperimentConfig {
  std::variant<MarkovChainModel, LinearProcessModel> model;
  Innovation innovation = Innovation::Gaussian;  // linear models only
  WindowSpec spec;
  double freq = 0.0;
  std::vector<std::int64_t> checkpoints;  // strictly increasing, each >= 4
  int replications = 1;
  double nu = 0.1;
  std::vector<double> q_grid{1.0, 2.0, 4.0, 8.0};
  std::uint64_t master_seed = 0;
  double tail_tol = 1e-12;
  int threads = 0;  // 0 = hardware concurrency
  // Replaces the model-derived mixing profile as the certificate source
  // (the data is still simulated from the model).
  std::optional<MixingProfile> profile_override;
};

struct CheckpointStats {
  std::int64_t k = 0;
  double median_err = 0.0;
  double quantile_err = 0.0;  // empirical (1 - nu)-quantile
  double max_err = 0.0;
  double epsilon = 0.0;       // theoretical radius at (k, nu)
  std::int64_t exceedances = 0;
};

struct ExperimentResult {
  std::vector<CheckpointStats> rows;
  double bias_bound = 0.0;
  Eigen::MatrixXcd expected;  // zbar, the exact E[Phi_k(s)]
  PowerLawFit fit;
  int replications = 1;
  double nu = 0.1;
  std::uint64_t seed = 0;
  double freq = 0.0;
  std::int64_t samples_per_replication = 0;
};

// Runs the configured number of replications. Replication r derives its
// random stream solely from (master_seed, r), so aggregates are identical
// regardless of execution order or thread count.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Least-squares slope of ln(median error) vs ln(k). Requires at least
// three checkpoints spanning two decades.
double slope_fit(const ExperimentResult& result);

// CSV with header
// k,median_err,quantile_err,max_err,epsilon,bias_bound,exceedances,R,nu,seed
// and one row per checkpoint; values round-trip to full precision.
void export_result(const ExperimentResult& result, const std::string& path);
ExperimentResult import_result(const std::string& path);

}  // namespace specest
