#include "specest/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace specest {

namespace {

void require_q(double q) {
  if (!(q >= 1.0) || !std::isfinite(q)) {
    throw std::invalid_argument("q must be a finite real >= 1");
  }
}

void require_segmenting(int segment_len, int hop) {
  if (segment_len < 1 || hop < 1) {
    throw std::invalid_argument("segment length and hop must be >= 1");
  }
}

void require_k(std::int64_t k) {
  if (k < 4) {
    throw std::invalid_argument(
        "the deviation bound is only asserted for k >= 4");
  }
}

double loglog2(std::int64_t k) {
  return std::log2(std::log2(static_cast<double>(k)));
}

}  // namespace

SegmentMixing segment_mixing(const MixingProfile& profile, double q,
                             int segment_len, int hop) {
  require_q(q);
  require_segmenting(segment_len, hop);
  const double qe = std::max(q, 2.0);
  const double moment = 2.0 * std::sqrt(2.0 * (qe - 1.0) *
                                        profile.moment_bound(qe) *
                                        profile.gamma_sum(qe));
  const double ratio = static_cast<double>(segment_len) / hop;
  // Continuous-time Gamma_q replaced by its discrete cover 2 Gamma_{d,q}.
  const double gamma = 2.0 * ratio * moment + 2.0 * profile.gamma_sum(q);
  return {moment, gamma};
}

OuterProductMixing outer_product_mixing(const MixingProfile& profile, double q,
                                        int segment_len, int hop) {
  require_q(q);
  require_segmenting(segment_len, hop);
  const double m2 = profile.moment_bound(2.0 * q);
  const double g2 = profile.gamma_sum(2.0 * q);
  const double prod = m2 * g2;
  const double ratio = static_cast<double>(segment_len) / hop;
  const double moment = 8.0 * (2.0 * q - 1.0) * prod;
  const double gamma =
      48.0 * (2.0 * q - 1.0) * prod *
      (4.0 * ratio * std::sqrt(2.0 * (2.0 * q - 1.0) * prod) + 2.0 * g2);
  return {moment, gamma};
}

PropagatedConstants propagate_constants(const MixingProfile& profile, double q,
                                        int segment_len, int hop) {
  const SegmentMixing seg = segment_mixing(profile, q, segment_len, hop);
  const OuterProductMixing outer =
      outer_product_mixing(profile, q, segment_len, hop);
  return {q,           seg.moment,  seg.gamma_sum, outer.moment,
          outer.gamma_sum, segment_len, hop};
}

double deviation_constant_bq(const MixingProfile& profile, double q,
                             int segment_len, int hop) {
  require_q(q);
  require_segmenting(segment_len, hop);
  const double m4 = profile.moment_bound(4.0 * q);
  const double g4 = profile.gamma_sum(4.0 * q);
  const double prod = m4 * g4;
  const double ratio = static_cast<double>(segment_len) / hop;
  const double inner =
      4.0 * ratio * std::sqrt(2.0 * (4.0 * q - 1.0) * prod) + 2.0 * g4;
  return 128.0 * (4.0 * q - 1.0) * std::sqrt(3.0 * (2.0 * q - 1.0)) * prod *
             std::sqrt(inner) +
         8.0 * (4.0 * q - 1.0) * prod;
}

double variance_bound(const MixingProfile& profile, double q, int segment_len,
                      int hop, std::int64_t k) {
  require_k(k);
  const double bq = deviation_constant_bq(profile, q, segment_len, hop);
  return bq * loglog2(k) / std::sqrt(static_cast<double>(k));
}

PowerLawFit fit_power_law(const std::function<double(double)>& bq,
                          std::vector<double> q_grid) {
  if (q_grid.size() < 2) {
    throw std::invalid_argument("power-law fit needs at least two q values");
  }
  for (std::size_t i = 0; i < q_grid.size(); ++i) {
    if (!(q_grid[i] >= 1.0)) {
      throw std::invalid_argument("power-law grid must satisfy q >= 1");
    }
    if (i > 0 && q_grid[i] <= q_grid[i - 1]) {
      throw std::invalid_argument("power-law grid must be strictly increasing");
    }
  }
  std::vector<double> values(q_grid.size());
  for (std::size_t i = 0; i < q_grid.size(); ++i) {
    values[i] = bq(q_grid[i]);
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
      throw std::invalid_argument("b_q must be positive and finite");
    }
  }

  // Slopes on ratios so an exact power law fits exactly.
  double slope = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < q_grid.size(); ++i) {
    slope = std::max(slope, std::log(values[i + 1] / values[i]) /
                                std::log(q_grid[i + 1] / q_grid[i]));
  }
  const double r = std::max(slope, 1e-6);

  // Covering constant over the grid, then over a 10x dense refinement so
  // the certified inequality holds everywhere audited.
  std::vector<std::pair<double, double>> audit;
  for (std::size_t i = 0; i < q_grid.size(); ++i) {
    audit.emplace_back(q_grid[i], values[i]);
  }
  for (std::size_t i = 0; i + 1 < q_grid.size(); ++i) {
    const double ratio = q_grid[i + 1] / q_grid[i];
    for (int t = 1; t < 10; ++t) {
      const double qq = q_grid[i] * std::pow(ratio, t / 10.0);
      audit.emplace_back(qq, bq(qq));
    }
  }
  double c = 0.0;
  for (const auto& [qq, b] : audit) {
    c = std::max(c, b / std::pow(qq, r));
  }
  // Nudge c upward until no audited point sits above c q^r.
  for (bool clean = false; !clean;) {
    clean = true;
    for (const auto& [qq, b] : audit) {
      if (b > c * std::pow(qq, r)) {
        c = std::nextafter(c, std::numeric_limits<double>::infinity());
        clean = false;
        break;
      }
    }
  }

  PowerLawFit fit;
  fit.c = c;
  fit.r = r;
  fit.residual = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < q_grid.size(); ++i) {
    fit.residual =
        std::max(fit.residual, values[i] - c * std::pow(q_grid[i], r));
  }
  fit.q_grid = std::move(q_grid);
  return fit;
}

PowerLawFit fit_power_law(const MixingProfile& profile, int segment_len,
                          int hop, std::vector<double> q_grid) {
  require_segmenting(segment_len, hop);
  auto bq = [&profile, segment_len, hop](double q) {
    return deviation_constant_bq(profile, q, segment_len, hop);
  };
  return fit_power_law(bq, std::move(q_grid));
}

double high_probability_radius(const PowerLawFit& fit, std::int64_t k,
                               double nu) {
  require_k(k);
  if (!(nu > 0.0 && nu < 1.0)) {
    throw std::invalid_argument("confidence level nu must lie in (0, 1)");
  }
  if (!(fit.c > 0.0) || !(fit.r > 0.0)) {
    throw std::invalid_argument("power-law fit must have c > 0 and r > 0");
  }
  const double lognu = std::log(1.0 / nu);
  const double tail = std::max(1.0, std::pow(lognu / fit.r, fit.r));
  return fit.c * (loglog2(k) / std::sqrt(static_cast<double>(k))) *
         std::exp(fit.r) * tail;
}

namespace {

// sum_{|k| >= start} gamma_2(|k|) = 2 sum_{kappa >= start} gamma_2(kappa),
// truncated once the geometric remainder (scaled into final-bound units
// by `scale`) drops below tail_tol; the remainder is added back so the
// result stays an upper bound. Valid when the gamma ratio is
// nonincreasing past the truncation point, which holds for the built-in
// profiles (eventually exact geometric decay or finite support).
double two_sided_gamma_tail(const MixingProfile& profile, int start,
                            double tail_tol, double scale) {
  double sum = 0.0;
  double prev = -1.0;
  std::int64_t steps = 0;
  for (std::int64_t kappa = start;; ++kappa, ++steps) {
    if (steps > 1000000) {
      throw std::runtime_error(
          "gamma sequence tail is not shrinking after 1e6 terms; the "
          "profile does not look summable");
    }
    const double g = profile.gamma_seq(kappa, 2.0);
    if (!(g >= 0.0) || !std::isfinite(g)) {
      throw std::invalid_argument("gamma sequence must be finite and >= 0");
    }
    if (g == 0.0) {
      // Nonincreasing and nonnegative: every later term is zero too.
      return 2.0 * sum;
    }
    sum += g;
    if (prev > 0.0 && g < prev) {
      const double rho = g / prev;
      const double remainder = g * rho / (1.0 - rho);
      if (scale * 2.0 * remainder < tail_tol) {
        return 2.0 * (sum + remainder);
      }
    }
    prev = g;
  }
}

}  // namespace

double bias_bound_bartlett(const MixingProfile& profile, int segment_len,
                           double tail_tol) {
  if (segment_len < 1) {
    throw std::invalid_argument("segment length must be >= 1");
  }
  if (!(tail_tol > 0.0)) {
    throw std::invalid_argument("tail tolerance must be positive");
  }
  const double m2 = profile.moment_bound(2.0);
  double inner = 0.0;  // sum_{|k| < M} |k| gamma_2(|k|)
  for (int kappa = 1; kappa < segment_len; ++kappa) {
    inner += 2.0 * kappa * profile.gamma_seq(kappa, 2.0);
  }
  const double tail =
      two_sided_gamma_tail(profile, segment_len, tail_tol, 2.0 * m2);
  return 2.0 * m2 * tail + (2.0 * m2 / segment_len) * inner;
}

double bias_bound_welch(const MixingProfile& profile, int segment_len,
                        const Eigen::VectorXd& window, double tail_tol) {
  if (segment_len < 1) {
    throw std::invalid_argument("segment length must be >= 1");
  }
  if (!(tail_tol > 0.0)) {
    throw std::invalid_argument("tail tolerance must be positive");
  }
  if (window.size() != segment_len) {
    throw std::invalid_argument("window length must equal the segment length");
  }
  const double wnorm2 = window.squaredNorm();
  if (wnorm2 == 0.0) {
    throw std::invalid_argument("window vector must have a nonzero entry");
  }
  const double m2 = profile.moment_bound(2.0);
  // Window autocorrelation at lag kappa, normalized by ||v||^2.
  auto autocorr = [&](int kappa) {
    double s = 0.0;
    for (int i = kappa; i < segment_len; ++i) {
      s += window(i - kappa) * window(i);
    }
    return s / wnorm2;
  };
  double inner = profile.gamma_seq(0, 2.0) * autocorr(0);
  for (int kappa = 1; kappa < segment_len; ++kappa) {
    inner += 2.0 * profile.gamma_seq(kappa, 2.0) * autocorr(kappa);
  }
  const double tail =
      two_sided_gamma_tail(profile, segment_len, tail_tol, 2.0 * m2);
  return 2.0 * m2 * tail + 2.0 * m2 * inner;
}

}  // namespace specest
