#include "specest/models.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

#include <Eigen/Eigenvalues>

#include "specest/rng.hpp"

namespace specest {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

int sample_cdf(const Eigen::VectorXd& cumulative, double u) {
  const int n = static_cast<int>(cumulative.size());
  for (int j = 0; j < n; ++j) {
    if (u < cumulative(j)) {
      return j;
    }
  }
  return n - 1;
}

Eigen::MatrixXcd hermitize(const Eigen::MatrixXcd& m) {
  return 0.5 * (m + m.adjoint().eval());
}

}  // namespace

TimeSeries simulate_markov(const MarkovChainModel& model,
                           std::int64_t n_samples, std::uint64_t seed) {
  if (n_samples < 0) {
    throw std::invalid_argument("sample count must be >= 0");
  }
  const int states = model.states();
  TimeSeries out;
  out.dim = 1;
  out.mean_shifted = true;
  if (n_samples == 0) {
    return out;
  }
  out.data.reserve(static_cast<std::size_t>(n_samples));

  Eigen::VectorXd start_cdf(states);
  Eigen::MatrixXd row_cdf(states, states);
  double acc = 0.0;
  for (int j = 0; j < states; ++j) {
    acc += model.stationary(j);
    start_cdf(j) = acc;
  }
  for (int i = 0; i < states; ++i) {
    acc = 0.0;
    for (int j = 0; j < states; ++j) {
      acc += model.transition(i, j);
      row_cdf(i, j) = acc;
    }
  }
  const Eigen::VectorXd shifted = model.values.array() - model.mean;

  Rng rng(seed);
  int state = sample_cdf(start_cdf, rng.uniform());
  out.data.push_back(shifted(state));
  for (std::int64_t t = 1; t < n_samples; ++t) {
    state = sample_cdf(row_cdf.row(state), rng.uniform());
    out.data.push_back(shifted(state));
  }
  return out;
}

TimeSeries simulate_linear_process(const LinearProcessModel& model,
                                   std::int64_t n_samples, std::uint64_t seed,
                                   Innovation innovation) {
  model.validate();
  if (n_samples < 0) {
    throw std::invalid_argument("sample count must be >= 0");
  }
  const int taps = model.taps();
  const int m = model.input_dim;
  const int n = model.output_dim;
  TimeSeries out;
  out.dim = n;
  out.mean_shifted = true;
  if (n_samples == 0) {
    return out;
  }
  out.data.reserve(static_cast<std::size_t>(n_samples) * n);

  Rng rng(seed);
  auto draw = [&](Eigen::VectorXd& z) {
    for (int i = 0; i < m; ++i) {
      z(i) = innovation == Innovation::Gaussian
                 ? model.sigma * rng.normal()
                 : (rng.bit() ? model.sigma : -model.sigma);
    }
  };

  // Ring of the last `taps` innovations; slot t % taps holds zeta[t].
  std::vector<Eigen::VectorXd> ring(taps, Eigen::VectorXd(m));
  // Warm-up: zeta[-(taps-1)..-1] so y[0] is already stationary.
  for (int t = -(taps - 1); t < 0; ++t) {
    draw(ring[((t % taps) + taps) % taps]);
  }
  Eigen::VectorXd y(n);
  for (std::int64_t t = 0; t < n_samples; ++t) {
    draw(ring[t % taps]);
    y.setZero();
    for (int l = 0; l < taps; ++l) {
      const std::int64_t past = t - l;
      y += model.impulse[l] * ring[((past % taps) + taps) % taps];
    }
    for (int d = 0; d < n; ++d) {
      out.data.push_back(y(d));
    }
  }
  return out;
}

namespace {

struct MarkovLagCache {
  std::mutex mutex;
  std::vector<Eigen::VectorXd> powers;  // powers[k] = P^k (g - mean)
};

}  // namespace

AutocovarianceSequence markov_autocovariance(const MarkovChainModel& model) {
  const Eigen::VectorXd shifted = model.values.array() - model.mean;
  const Eigen::VectorXd weight = model.stationary.cwiseProduct(shifted);
  const Eigen::MatrixXd transition = model.transition;

  auto cache = std::make_shared<MarkovLagCache>();
  cache->powers.push_back(shifted);
  auto values = [cache, weight, transition](std::int64_t lag) {
    const std::int64_t a = lag < 0 ? -lag : lag;
    std::lock_guard<std::mutex> lock(cache->mutex);
    while (static_cast<std::int64_t>(cache->powers.size()) <= a) {
      cache->powers.push_back(transition * cache->powers.back());
    }
    Eigen::MatrixXd r(1, 1);
    r(0, 0) = weight.dot(cache->powers[static_cast<std::size_t>(a)]);
    return r;
  };

  // Second-largest eigenvalue modulus gives the geometric envelope rate.
  Eigen::EigenSolver<Eigen::MatrixXd> solver(transition);
  std::vector<double> moduli(static_cast<std::size_t>(transition.rows()));
  for (Eigen::Index i = 0; i < transition.rows(); ++i) {
    moduli[static_cast<std::size_t>(i)] = std::abs(solver.eigenvalues()(i));
  }
  std::sort(moduli.begin(), moduli.end(), std::greater<double>());
  double rate = moduli.size() > 1 ? moduli[1] : 0.0;
  rate = std::clamp(rate, 0.0, 1.0);

  AutocovarianceSequence seq;
  seq.dim = 1;
  seq.decay_rate = rate;
  seq.support = -1;
  double envelope = 0.0;
  double power = 1.0;
  for (int k = 0; k <= 160; ++k) {
    if (power < 1e-280) {
      break;
    }
    envelope = std::max(envelope, std::abs(values(k)(0, 0)) / power);
    power *= rate;
  }
  seq.envelope = envelope;
  seq.values = values;
  return seq;
}

AutocovarianceSequence linear_autocovariance(const LinearProcessModel& model) {
  model.validate();
  const int taps = model.taps();
  const int n = model.output_dim;
  const double var = model.sigma * model.sigma;
  auto lags = std::make_shared<std::vector<Eigen::MatrixXd>>();
  lags->reserve(static_cast<std::size_t>(taps));
  for (int k = 0; k < taps; ++k) {
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n, n);
    for (int b = 0; b + k < taps; ++b) {
      r += var * model.impulse[static_cast<std::size_t>(b + k)] *
           model.impulse[static_cast<std::size_t>(b)].transpose();
    }
    lags->push_back(std::move(r));
  }

  auto values = [lags, taps, n](std::int64_t lag) -> Eigen::MatrixXd {
    const std::int64_t a = lag < 0 ? -lag : lag;
    if (a >= taps) {
      return Eigen::MatrixXd::Zero(n, n);
    }
    const Eigen::MatrixXd& r = (*lags)[static_cast<std::size_t>(a)];
    return lag >= 0 ? r : Eigen::MatrixXd(r.transpose());
  };

  AutocovarianceSequence seq;
  seq.dim = n;
  seq.support = taps - 1;
  seq.decay_rate = 0.5;  // any rate < 1 works with a covering constant
  double envelope = 0.0;
  double power = 1.0;
  for (int k = 0; k < taps; ++k) {
    const Eigen::MatrixXd r = values(k);
    const double norm =
        n == 1 ? std::abs(r(0, 0))
               : Eigen::JacobiSVD<Eigen::MatrixXd>(r).singularValues()(0);
    envelope = std::max(envelope, norm / power);
    power *= seq.decay_rate;
  }
  seq.envelope = envelope;
  seq.values = values;
  return seq;
}

SpectralDensity true_psd(const AutocovarianceSequence& autocov, double tol) {
  if (!(tol > 0.0)) {
    throw std::invalid_argument("tolerance must be positive");
  }
  if (!(autocov.decay_rate >= 0.0 && autocov.decay_rate < 1.0)) {
    throw std::invalid_argument("autocovariance decay rate must be < 1");
  }
  std::int64_t truncation = 0;
  if (autocov.support >= 0) {
    truncation = autocov.support;
  } else if (autocov.envelope > 0.0) {
    const double rate = autocov.decay_rate;
    // Smallest T with 2 C rate^{T+1} / (1 - rate) < tol.
    double remainder = 2.0 * autocov.envelope * rate / (1.0 - rate);
    while (remainder >= tol) {
      ++truncation;
      remainder *= rate;
      if (truncation > 100000000) {
        throw std::runtime_error(
            "autocovariance envelope decays too slowly for the requested "
            "tolerance");
      }
    }
  }

  auto lags = std::make_shared<std::vector<Eigen::MatrixXd>>();
  lags->reserve(static_cast<std::size_t>(truncation) + 1);
  for (std::int64_t k = 0; k <= truncation; ++k) {
    lags->push_back(autocov.values(k));
  }

  const int dim = autocov.dim;
  auto value = [lags, dim](double s) {
    const double sr = reduce_frequency(s);
    Eigen::MatrixXcd acc = (*lags)[0].cast<std::complex<double>>();
    for (std::size_t k = 1; k < lags->size(); ++k) {
      const double phase = -kTwoPi * sr * static_cast<double>(k);
      const std::complex<double> ph(std::cos(phase), std::sin(phase));
      acc += ph * (*lags)[k] + std::conj(ph) * (*lags)[k].transpose();
    }
    return hermitize(acc);
  };
  return {value, truncation, dim};
}

Eigen::MatrixXcd expected_estimate(const AutocovarianceSequence& autocov,
                                   const WindowSpec& spec, double s) {
  spec.validate();
  const Eigen::VectorXcd w = make_window(spec, s);
  const int m = spec.segment_len;
  std::vector<Eigen::MatrixXd> lag(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    lag[static_cast<std::size_t>(k)] = autocov.values(k);
  }
  Eigen::MatrixXcd acc =
      Eigen::MatrixXcd::Zero(autocov.dim, autocov.dim);
  for (int k = 0; k < m; ++k) {
    for (int l = 0; l < m; ++l) {
      const std::complex<double> coeff = w(k) * std::conj(w(l));
      const int d = k - l;
      const Eigen::MatrixXd& r = lag[static_cast<std::size_t>(d < 0 ? -d : d)];
      if (d >= 0) {
        acc += coeff * r;
      } else {
        acc += coeff * r.transpose();
      }
    }
  }
  return hermitize(acc);
}

}  // namespace specest
