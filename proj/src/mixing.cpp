#include "specest/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include <Eigen/SVD>

namespace specest {

namespace {

void require_q(double q) {
  if (!(q >= 1.0) || !std::isfinite(q)) {
    throw std::invalid_argument("q must be a finite real >= 1");
  }
}

void require_tau(std::int64_t tau) {
  if (tau < 0) {
    throw std::invalid_argument("lag must be >= 0");
  }
}

void check_stochastic(const Eigen::MatrixXd& P) {
  if (P.rows() != P.cols() || P.rows() < 1) {
    throw std::invalid_argument("transition matrix must be square");
  }
  if (!P.allFinite() || (P.array() < 0.0).any()) {
    throw std::invalid_argument("transition probabilities must be >= 0");
  }
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    if (std::abs(P.row(i).sum() - 1.0) > 1e-12) {
      throw std::invalid_argument("transition matrix row " +
                                  std::to_string(i) +
                                  " does not sum to 1");
    }
  }
}

double spectral_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 1) {
    return std::abs(m(0, 0));
  }
  if (m.rows() == 1 || m.cols() == 1) {
    return m.norm();
  }
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

}  // namespace

Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& transition) {
  check_stochastic(transition);
  const Eigen::Index n = transition.rows();
  // mu^T P = mu^T with the normalization sum(mu) = 1 replacing one
  // (redundant) balance equation.
  Eigen::MatrixXd a = transition.transpose() - Eigen::MatrixXd::Identity(n, n);
  a.row(0).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(0) = 1.0;
  Eigen::VectorXd mu = a.fullPivLu().solve(b);
  if (!mu.allFinite() || (mu.array() < -1e-12).any()) {
    throw std::invalid_argument(
        "chain has no valid stationary distribution (is it irreducible?)");
  }
  return mu;
}

double doeblin_coefficient(const Eigen::MatrixXd& transition,
                           const Eigen::VectorXd& stationary) {
  check_stochastic(transition);
  const Eigen::Index n = transition.rows();
  if (stationary.size() != n) {
    throw std::invalid_argument("stationary distribution has wrong size");
  }
  if ((stationary.array() < 0.0).any() ||
      std::abs(stationary.sum() - 1.0) > 1e-12) {
    throw std::invalid_argument("stationary vector is not a distribution");
  }
  const double residual =
      (stationary.transpose() * transition - stationary.transpose())
          .lpNorm<Eigen::Infinity>();
  if (residual > 1e-9) {
    throw std::invalid_argument(
        "distribution is not stationary for the transition matrix "
        "(residual " + std::to_string(residual) + ")");
  }
  if ((stationary.array() <= 0.0).any()) {
    throw std::invalid_argument("stationary distribution must be positive");
  }
  double delta = std::numeric_limits<double>::infinity();
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index y = 0; y < n; ++y) {
      delta = std::min(delta, transition(x, y) / stationary(y));
    }
  }
  if (!(delta > 0.0)) {
    throw std::invalid_argument(
        "chain is not uniformly ergodic in one step: some transition "
        "probability is zero, so the Doeblin coefficient vanishes");
  }
  return std::min(delta, 1.0);
}

MarkovChainModel MarkovChainModel::create(Eigen::MatrixXd transition,
                                          Eigen::VectorXd values) {
  Eigen::VectorXd mu = stationary_distribution(transition);
  return create(std::move(transition), std::move(values), std::move(mu));
}

MarkovChainModel MarkovChainModel::create(Eigen::MatrixXd transition,
                                          Eigen::VectorXd values,
                                          Eigen::VectorXd stationary) {
  if (values.size() != transition.rows()) {
    throw std::invalid_argument("need one measurement value per state");
  }
  if (!values.allFinite()) {
    throw std::invalid_argument("measurement values must be finite");
  }
  MarkovChainModel model;
  model.doeblin = doeblin_coefficient(transition, stationary);
  model.transition = std::move(transition);
  model.values = std::move(values);
  model.stationary = std::move(stationary);
  model.mean = model.stationary.dot(model.values);
  model.g_max = (model.values.array() - model.mean).abs().maxCoeff();
  return model;
}

LinearProcessModel LinearProcessModel::scalar(const std::vector<double>& taps,
                                              double sigma) {
  LinearProcessModel model;
  model.impulse.reserve(taps.size());
  for (double t : taps) {
    model.impulse.push_back(Eigen::MatrixXd::Constant(1, 1, t));
  }
  model.sigma = sigma;
  model.input_dim = 1;
  model.output_dim = 1;
  model.validate();
  return model;
}

void LinearProcessModel::validate() const {
  if (impulse.empty()) {
    throw std::invalid_argument("impulse response must have at least one tap");
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("sub-Gaussian parameter must be positive");
  }
  if (input_dim < 1 || output_dim < 1) {
    throw std::invalid_argument("process dimensions must be >= 1");
  }
  for (const auto& h : impulse) {
    if (h.rows() != output_dim || h.cols() != input_dim) {
      throw std::invalid_argument("impulse response tap has wrong shape");
    }
    if (!h.allFinite()) {
      throw std::invalid_argument("impulse response must be finite");
    }
  }
}

double LinearProcessModel::tap_norm_sum() const {
  double s = 0.0;
  for (const auto& h : impulse) {
    s += spectral_norm(h);
  }
  return s;
}

double LinearProcessModel::weighted_tap_norm_sum() const {
  double s = 0.0;
  for (std::size_t l = 0; l < impulse.size(); ++l) {
    s += spectral_norm(impulse[l]) * static_cast<double>(l + 1);
  }
  return s;
}

MixingProfile markov_profile(const MarkovChainModel& model) {
  const double g = model.g_max;
  const double delta = model.doeblin;
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw std::invalid_argument("Doeblin coefficient must lie in (0, 1]");
  }
  auto moment = [g](double q) {
    require_q(q);
    return g;
  };
  auto gamma_sum = [g, delta](double q) {
    require_q(q);
    return 4.0 * g / (1.0 - std::pow(1.0 - delta, 1.0 / q));
  };
  // Per-lag form chosen so the geometric series sums exactly to the
  // bound above; capped at the always-valid 2 M_q.
  auto gamma_seq = [g, delta](std::int64_t tau, double q) {
    require_q(q);
    require_tau(tau);
    return std::min(2.0 * g, 4.0 * g * std::pow(1.0 - delta,
                                                static_cast<double>(tau) / q));
  };
  return MixingProfile(moment, gamma_sum, gamma_seq,
                       "markov(delta=" + std::to_string(delta) + ")");
}

MixingProfile filter_profile(const LinearProcessModel& model) {
  model.validate();
  const std::size_t taps = model.impulse.size();
  auto tails = std::make_shared<std::vector<double>>(taps + 1, 0.0);
  double weighted = 0.0;
  for (std::size_t l = taps; l-- > 0;) {
    const double norm = spectral_norm(model.impulse[l]);
    (*tails)[l] = (*tails)[l + 1] + norm;
    weighted += norm * static_cast<double>(l + 1);
  }
  const double base = 8.0 * model.input_dim * model.sigma;
  const double norm_sum = (*tails)[0];

  auto moment = [base, norm_sum](double q) {
    require_q(q);
    return base * std::sqrt(q) * norm_sum;
  };
  auto gamma_sum = [base, weighted](double q) {
    require_q(q);
    return base * std::sqrt(q) * weighted;
  };
  auto gamma_seq = [base, tails](std::int64_t tau, double q) {
    require_q(q);
    require_tau(tau);
    const std::size_t idx = static_cast<std::size_t>(
        std::min<std::int64_t>(tau, static_cast<std::int64_t>(tails->size()) - 1));
    return base * std::sqrt(q) * (*tails)[idx];
  };
  return MixingProfile(moment, gamma_sum, gamma_seq,
                       "filter(taps=" + std::to_string(taps) + ")");
}

MixingProfile table_profile(std::vector<double> q_grid,
                            std::vector<double> moment_bounds,
                            std::vector<double> gamma_sums,
                            std::vector<std::vector<double>> gamma_rows,
                            std::string label) {
  const std::size_t n = q_grid.size();
  if (n == 0) {
    throw std::invalid_argument("profile table must not be empty");
  }
  if (moment_bounds.size() != n || gamma_sums.size() != n) {
    throw std::invalid_argument("profile table columns have mismatched sizes");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(q_grid[i] >= 1.0)) {
      throw std::invalid_argument("profile q grid must start at q >= 1");
    }
    if (i > 0 && q_grid[i] <= q_grid[i - 1]) {
      throw std::invalid_argument("profile q grid must be strictly increasing");
    }
    if (!(moment_bounds[i] >= 0.0) || !(gamma_sums[i] >= 0.0)) {
      throw std::invalid_argument("profile bounds must be nonnegative");
    }
    if (i > 0 && (moment_bounds[i] < moment_bounds[i - 1] ||
                  gamma_sums[i] < gamma_sums[i - 1])) {
      throw std::invalid_argument("profile bounds must be nondecreasing in q");
    }
  }
  std::vector<double> column_sum(n, 0.0);
  for (std::size_t t = 0; t < gamma_rows.size(); ++t) {
    if (gamma_rows[t].size() != n) {
      throw std::invalid_argument("gamma table row has wrong width");
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double g = gamma_rows[t][i];
      if (!(g >= 0.0)) {
        throw std::invalid_argument("gamma table entries must be >= 0");
      }
      if (t > 0 && g > gamma_rows[t - 1][i]) {
        throw std::invalid_argument("gamma table must be nonincreasing in tau");
      }
      column_sum[i] += g;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!gamma_rows.empty() && gamma_rows[0][i] > 2.0 * moment_bounds[i]) {
      throw std::invalid_argument("gamma(0, q) must not exceed 2 M_q");
    }
    if (column_sum[i] > gamma_sums[i] * (1.0 + 1e-9)) {
      throw std::invalid_argument("gamma table sums exceed Gamma_{d,q}");
    }
  }

  auto grid = std::make_shared<std::vector<double>>(std::move(q_grid));
  auto lookup = [grid](double q) -> std::size_t {
    require_q(q);
    auto it = std::lower_bound(grid->begin(), grid->end(), q);
    if (it == grid->end()) {
      throw std::out_of_range("q=" + std::to_string(q) +
                              " exceeds the profile table maximum " +
                              std::to_string(grid->back()));
    }
    return static_cast<std::size_t>(it - grid->begin());
  };
  auto moments = std::make_shared<std::vector<double>>(std::move(moment_bounds));
  auto sums = std::make_shared<std::vector<double>>(std::move(gamma_sums));
  auto rows = std::make_shared<std::vector<std::vector<double>>>(
      std::move(gamma_rows));

  auto moment = [lookup, moments](double q) { return (*moments)[lookup(q)]; };
  auto gamma_sum = [lookup, sums](double q) { return (*sums)[lookup(q)]; };
  auto gamma_seq = [lookup, rows](std::int64_t tau, double q) {
    require_tau(tau);
    const std::size_t i = lookup(q);
    if (tau >= static_cast<std::int64_t>(rows->size())) {
      return 0.0;
    }
    return (*rows)[static_cast<std::size_t>(tau)][i];
  };
  return MixingProfile(moment, gamma_sum, gamma_seq, std::move(label));
}

}  // namespace specest
