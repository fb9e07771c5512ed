#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace specest {

/// Upper bounds on the L-mixing statistics of a stationary process:
/// the sup-over-time L_q moment M_q, the summed dependence-decay
/// coefficients Gamma_{d,q}, and the per-lag coefficients gamma_q(tau).
/// Profiles are immutable and their evaluators are pure functions.
class MixingProfile {
 public:
  using MomentFn = std::function<double(double)>;
  using GammaSumFn = std::function<double(double)>;
  using GammaSeqFn = std::function<double(std::int64_t, double)>;

  MixingProfile(MomentFn moment, GammaSumFn gamma_sum, GammaSeqFn gamma_seq,
                std::string label)
      : moment_(std::move(moment)),
        gamma_sum_(std::move(gamma_sum)),
        gamma_seq_(std::move(gamma_seq)),
        label_(std::move(label)) {}

  double moment_bound(double q) const { return moment_(q); }       // M_q
  double gamma_sum(double q) const { return gamma_sum_(q); }       // Gamma_{d,q}
  double gamma_seq(std::int64_t tau, double q) const {             // gamma_q(tau)
    return gamma_seq_(tau, q);
  }
  const std::string& label() const { return label_; }

 private:
  MomentFn moment_;
  GammaSumFn gamma_sum_;
  GammaSeqFn gamma_seq_;
  std::string label_;
};

/// Finite-state chain with one real measurement per state. Measurements
/// are treated as shifted by the stationary mean, so g_max is the largest
/// deviation |g_i - mean|.
struct MarkovChainModel {
  Eigen::MatrixXd transition;   // P, row stochastic
  Eigen::VectorXd values;       // g
  Eigen::VectorXd stationary;   // mu
  double doeblin = 0.0;         // delta
  double mean = 0.0;            // sum_i mu_i g_i
  double g_max = 0.0;           // max_i |g_i - mean|

  // Computes mu (unless supplied), the Doeblin coefficient, the mean and
  // g_max. Throws std::invalid_argument on an invalid chain.
  static MarkovChainModel create(Eigen::MatrixXd transition,
                                 Eigen::VectorXd values);
  static MarkovChainModel create(Eigen::MatrixXd transition,
                                 Eigen::VectorXd values,
                                 Eigen::VectorXd stationary);

  int states() const { return static_cast<int>(values.size()); }
};

/// Causal FIR filter driven by i.i.d. sigma-sub-Gaussian innovations.
/// Infinite impulse responses are represented by a caller-supplied
/// truncation; the profile is exact for the truncated filter.
struct LinearProcessModel {
  std::vector<Eigen::MatrixXd> impulse;  // h[0..T], each n x m
  double sigma = 1.0;                    // sub-Gaussian parameter
  int input_dim = 1;                     // m
  int output_dim = 1;                    // n

  static LinearProcessModel scalar(const std::vector<double>& taps,
                                   double sigma);

  void validate() const;
  int taps() const { return static_cast<int>(impulse.size()); }
  double tap_norm_sum() const;           // sum_l ||h[l]||_2
  double weighted_tap_norm_sum() const;  // sum_l ||h[l]||_2 (l+1)
};

// Solves mu^T P = mu^T, sum(mu) = 1 for a row-stochastic P.
Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& transition);

// delta = min_{x,y} P(x,y)/mu(y), in (0, 1]. Throws if P is not
// stochastic, mu is not stationary for P, or the minimum is zero (the
// one-step minorization condition fails).
double doeblin_coefficient(const Eigen::MatrixXd& transition,
                           const Eigen::VectorXd& stationary);

// Profile of the mean-shifted measurement sequence of a uniformly
// ergodic chain: M_q <= g_max, Gamma_{d,q} <= 4 g_max / (1-(1-delta)^{1/q}),
// gamma_q(tau) <= min{2 g_max, 4 g_max (1-delta)^{tau/q}}.
MixingProfile markov_profile(const MarkovChainModel& model);

// Profile of a causal filter of sub-Gaussian noise:
// M_q <= 8 m sigma sqrt(q) sum ||h[l]||,
// Gamma_{d,q} <= 8 m sigma sqrt(q) sum ||h[l]|| (l+1),
// gamma_q(tau) <= 8 m sigma sqrt(q) sum_{p >= tau} ||h[p]||.
MixingProfile filter_profile(const LinearProcessModel& model);

// User-supplied tables over a q-grid. Queries between grid points use the
// next grid point >= q (bounds are nondecreasing in q, so rounding up is
// conservative); queries above the grid maximum throw std::out_of_range.
// gamma_rows[tau] holds gamma_q(tau) per grid point; lags beyond the last
// row evaluate to zero.
MixingProfile table_profile(std::vector<double> q_grid,
                            std::vector<double> moment_bounds,
                            std::vector<double> gamma_sums,
                            std::vector<std::vector<double>> gamma_rows,
                            std::string label = "table");

}  // namespace specest
