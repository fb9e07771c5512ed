#pragma once

#include <cstdint>
#include <functional>

#include <Eigen/Dense>

#include "specest/estimators.hpp"
#include "specest/mixing.hpp"

namespace specest {

enum class Innovation { Gaussian, Rademacher };

/// Matrix autocovariance sequence R[k] with a certified geometric
/// envelope ||R[k]||_2 <= envelope * decay_rate^|k|, used to truncate lag
/// sums with a known remainder. If `support` >= 0 the sequence is exactly
/// zero beyond that lag.
struct AutocovarianceSequence {
  std::function<Eigen::MatrixXd(std::int64_t)> values;
  double decay_rate = 0.0;
  double envelope = 0.0;
  std::int64_t support = -1;
  int dim = 1;
};

/// Power spectral density Phi(s) = sum_k e^{-j 2 pi s k} R[k], evaluated
/// from a truncated lag sum with remainder below the requested tolerance.
struct SpectralDensity {
  std::function<Eigen::MatrixXcd(double)> value;
  std::int64_t truncation_lag = 0;
  int dim = 1;
};

// Stationary-start simulation of the mean-shifted measurement sequence
// g(X_t) - mean. Deterministic given the seed.
TimeSeries simulate_markov(const MarkovChainModel& model,
                           std::int64_t n_samples, std::uint64_t seed);

// y[k] = sum_l h[l] zeta[k-l] with i.i.d. innovations of the chosen
// family scaled to sub-Gaussian parameter sigma (Gaussian: std dev sigma;
// Rademacher: +-sigma). A warm-up of taps-1 pre-samples makes y[0]
// already stationary.
TimeSeries simulate_linear_process(const LinearProcessModel& model,
                                   std::int64_t n_samples, std::uint64_t seed,
                                   Innovation innovation);

// Exact R[k] = sum_{i,j} mu_i (P^|k|)_{ij} (g_i - mean)(g_j - mean) via
// repeated matrix-vector products; decay_rate is the modulus of the
// second-largest eigenvalue of P.
AutocovarianceSequence markov_autocovariance(const MarkovChainModel& model);

// Exact R[k] = sigma^2 sum_b h[b+|k|] h[b]^T for the truncated filter;
// finite support taps-1.
AutocovarianceSequence linear_autocovariance(const LinearProcessModel& model);

// Two-sided lag sum truncated where the envelope remainder drops below
// tol; output is Hermitian-symmetrized. Requires decay_rate < 1.
SpectralDensity true_psd(const AutocovarianceSequence& autocov, double tol);

// E[Phi_k(s)] = sum_{k,l=0}^{M-1} w_k(s) conj(w_l(s)) R[k-l]; independent
// of the segment count by stationarity.
Eigen::MatrixXcd expected_estimate(const AutocovarianceSequence& autocov,
                                   const WindowSpec& spec, double s);

}  // namespace specest
