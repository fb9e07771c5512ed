#include "specest/estimators.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace specest {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Neumaier-compensated accumulator.
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      carry += (sum - t) + x;
    } else {
      carry += (x - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + carry; }
};

// yhat += sum_k w_k y[start + k], without revalidating inputs.
void accumulate_segment(const TimeSeries& y, const Eigen::VectorXcd& w,
                        std::int64_t start, Eigen::VectorXcd& yhat) {
  const int n = y.dim;
  yhat.setZero();
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    const double* p = y.sample(start + k);
    const std::complex<double> wk = w(k);
    for (int d = 0; d < n; ++d) {
      yhat(d) += wk * p[d];
    }
  }
}

void check_segment_range(const TimeSeries& y, const WindowSpec& spec,
                         std::int64_t segment) {
  const std::int64_t last =
      segment * spec.hop + spec.segment_len - 1;
  if (last >= y.size()) {
    throw std::out_of_range(
        "segment " + std::to_string(segment) + " needs sample index " +
        std::to_string(last) + " but the series holds " +
        std::to_string(y.size()) + " samples");
  }
}

}  // namespace

WindowSpec WindowSpec::bartlett(int segment_len) {
  WindowSpec spec;
  spec.method = Method::Bartlett;
  spec.segment_len = segment_len;
  spec.hop = segment_len;
  spec.window = Eigen::VectorXd::Ones(std::max(segment_len, 0));
  spec.validate();
  return spec;
}

WindowSpec WindowSpec::welch(int segment_len, int hop, Eigen::VectorXd window) {
  WindowSpec spec;
  spec.method = Method::Welch;
  spec.segment_len = segment_len;
  spec.hop = hop;
  spec.window = std::move(window);
  spec.validate();
  return spec;
}

WindowSpec WindowSpec::welch_rect(int segment_len, int hop) {
  return welch(segment_len, hop, Eigen::VectorXd::Ones(std::max(segment_len, 0)));
}

WindowSpec WindowSpec::welch_hann(int segment_len, int hop) {
  return welch(segment_len, hop, hann_window(segment_len));
}

void WindowSpec::validate() const {
  if (segment_len < 1) {
    throw std::invalid_argument("segment length must be >= 1");
  }
  if (hop < 1) {
    throw std::invalid_argument("hop must be >= 1");
  }
  if (window.size() != segment_len) {
    throw std::invalid_argument("window length " +
                                std::to_string(window.size()) +
                                " does not match segment length " +
                                std::to_string(segment_len));
  }
  if (!window.allFinite()) {
    throw std::invalid_argument("window vector must be finite");
  }
  if (window.norm() == 0.0) {
    throw std::invalid_argument("window vector must have a nonzero entry");
  }
  if (method == Method::Bartlett) {
    if (hop != segment_len) {
      throw std::invalid_argument("Bartlett requires hop == segment length");
    }
    if (!(window.array() == 1.0).all()) {
      throw std::invalid_argument("Bartlett uses the all-ones window");
    }
  }
}

Eigen::VectorXd hann_window(int segment_len) {
  if (segment_len < 1) {
    throw std::invalid_argument("segment length must be >= 1");
  }
  Eigen::VectorXd v(segment_len);
  for (int i = 0; i < segment_len; ++i) {
    v(i) = 0.5 * (1.0 - std::cos(kTwoPi * (i + 1) / (segment_len + 1)));
  }
  return v;
}

void TimeSeries::validate() const {
  if (dim < 1) {
    throw std::invalid_argument("sample dimension must be >= 1");
  }
  if (data.size() % static_cast<std::size_t>(dim) != 0) {
    throw std::invalid_argument("sample buffer size is not a multiple of dim");
  }
}

SpectralEstimate SpectralEstimate::zero(int dim, double freq) {
  return {Eigen::MatrixXcd::Zero(dim, dim), 0, freq};
}

EstimatorState EstimatorState::initial(int dim, double freq) {
  return {SpectralEstimate::zero(dim, freq), 0};
}

double reduce_frequency(double s) {
  if (!std::isfinite(s)) {
    throw std::invalid_argument("frequency must be finite");
  }
  return std::remainder(s, 1.0);
}

Eigen::VectorXcd make_window(const WindowSpec& spec, double s) {
  spec.validate();
  const double sr = reduce_frequency(s);
  const double scale = 1.0 / spec.window.norm();
  Eigen::VectorXcd w(spec.segment_len);
  for (int k = 0; k < spec.segment_len; ++k) {
    const double phase = -kTwoPi * k * sr;
    w(k) = (spec.window(k) * scale) *
           std::complex<double>(std::cos(phase), std::sin(phase));
  }
  return w;
}

SegmentVector segment_transform(const TimeSeries& y, const WindowSpec& spec,
                                double s, std::int64_t segment) {
  y.validate();
  if (segment < 0) {
    throw std::invalid_argument("segment index must be >= 0");
  }
  const Eigen::VectorXcd w = make_window(spec, s);
  check_segment_range(y, spec, segment);
  Eigen::VectorXcd value(y.dim);
  accumulate_segment(y, w, segment * spec.hop, value);
  if (!value.allFinite()) {
    throw std::invalid_argument("segment " + std::to_string(segment) +
                                " produced a non-finite transform; the "
                                "input samples must be finite");
  }
  return {std::move(value), segment, reduce_frequency(s)};
}

Eigen::MatrixXcd rank_one_term(const Eigen::VectorXcd& yhat) {
  const Eigen::Index n = yhat.size();
  Eigen::MatrixXcd z(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    z(j, j) = std::complex<double>(std::norm(yhat(j)), 0.0);
    for (Eigen::Index i = 0; i < j; ++i) {
      const std::complex<double> t = yhat(i) * std::conj(yhat(j));
      z(i, j) = t;
      z(j, i) = std::conj(t);
    }
  }
  return z;
}

SpectralEstimate batch_estimate(const TimeSeries& y, const WindowSpec& spec,
                                double s, std::int64_t segments) {
  y.validate();
  spec.validate();
  if (segments < 0) {
    throw std::invalid_argument("segment count must be >= 0");
  }
  const double sr = reduce_frequency(s);
  if (segments == 0) {
    return SpectralEstimate::zero(y.dim, sr);
  }
  check_segment_range(y, spec, segments - 1);

  const Eigen::VectorXcd w = make_window(spec, s);
  const int n = y.dim;
  const int pairs = n * (n + 1) / 2;
  std::vector<KahanSum> re(pairs), im(pairs);
  Eigen::VectorXcd yhat(n);
  for (std::int64_t seg = 0; seg < segments; ++seg) {
    accumulate_segment(y, w, seg * spec.hop, yhat);
    int idx = 0;
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i <= j; ++i, ++idx) {
        const std::complex<double> t = yhat(i) * std::conj(yhat(j));
        re[idx].add(t.real());
        if (i != j) {
          im[idx].add(t.imag());
        }
      }
    }
  }

  SpectralEstimate out;
  out.matrix.resize(n, n);
  out.segments = segments;
  out.freq = sr;
  const double inv = 1.0 / static_cast<double>(segments);
  int idx = 0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i <= j; ++i, ++idx) {
      const double a = re[idx].value() * inv;
      if (i == j) {
        out.matrix(j, j) = std::complex<double>(a, 0.0);
      } else {
        const double b = im[idx].value() * inv;
        out.matrix(i, j) = std::complex<double>(a, b);
        out.matrix(j, i) = std::complex<double>(a, -b);
      }
    }
  }
  return out;
}

EstimatorState streaming_update(const EstimatorState& state,
                                const Eigen::MatrixXcd& term) {
  const Eigen::MatrixXcd& x = state.current.matrix;
  if (term.rows() != x.rows() || term.cols() != x.cols()) {
    throw std::invalid_argument("rank-one term dimension mismatch");
  }
  const double alpha = 1.0 / static_cast<double>(state.count + 1);
  EstimatorState next;
  next.current.matrix = x + alpha * (term - x);
  next.current.segments = state.count + 1;
  next.current.freq = state.current.freq;
  next.count = state.count + 1;
  return next;
}

std::vector<SpectralEstimate> streaming_run(
    const TimeSeries& y, const WindowSpec& spec, double s,
    const std::vector<std::int64_t>& checkpoints) {
  y.validate();
  spec.validate();
  if (checkpoints.empty()) {
    return {};
  }
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] < 1 ||
        (i > 0 && checkpoints[i] <= checkpoints[i - 1])) {
      throw std::invalid_argument(
          "checkpoints must be strictly increasing segment counts >= 1");
    }
  }
  check_segment_range(y, spec, checkpoints.back() - 1);

  const Eigen::VectorXcd w = make_window(spec, s);
  const double sr = reduce_frequency(s);
  const int n = y.dim;
  Eigen::VectorXcd yhat(n);
  Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd term(n, n);

  std::vector<SpectralEstimate> out;
  out.reserve(checkpoints.size());
  std::size_t next_cp = 0;
  for (std::int64_t seg = 0; seg < checkpoints.back(); ++seg) {
    accumulate_segment(y, w, seg * spec.hop, yhat);
    term = rank_one_term(yhat);
    // Same update expression as streaming_update, applied in place.
    const double alpha = 1.0 / static_cast<double>(seg + 1);
    x += alpha * (term - x);
    if (seg + 1 == checkpoints[next_cp]) {
      out.push_back({x, seg + 1, sr});
      ++next_cp;
    }
  }
  return out;
}

std::int64_t data_budget(std::int64_t segments, int segment_len, int hop) {
  if (segments < 1) {
    throw std::invalid_argument("segment count must be >= 1");
  }
  if (segment_len < 1 || hop < 1) {
    throw std::invalid_argument("segment length and hop must be >= 1");
  }
  return (segments - 1) * static_cast<std::int64_t>(hop) + segment_len;
}

}  // namespace specest
