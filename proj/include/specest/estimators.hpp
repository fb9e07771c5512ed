#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace specest {

enum class Method { Bartlett, Welch };

/// Segmenting and window parameters shared by both estimators.
///
/// A record is cut into segments of `segment_len` samples starting every
/// `hop` samples. Bartlett is the special case hop == segment_len with a
/// rectangular window; Welch allows overlap and an arbitrary nonzero
/// window shape (normalized internally, so overall scale is irrelevant).
struct WindowSpec {
  Method method = Method::Bartlett;
  int segment_len = 1;     // M
  int hop = 1;             // K
  Eigen::VectorXd window;  // v, length M; all-ones for Bartlett

  static WindowSpec bartlett(int segment_len);
  static WindowSpec welch(int segment_len, int hop, Eigen::VectorXd window);
  static WindowSpec welch_rect(int segment_len, int hop);
  static WindowSpec welch_hann(int segment_len, int hop);

  void validate() const;  // throws std::invalid_argument
};

// Symmetric Hann shape with nonzero endpoints:
// v_i = 0.5 (1 - cos(2 pi (i+1) / (M+1))), i = 0..M-1.
Eigen::VectorXd hann_window(int segment_len);

/// Finite record of n-dimensional real samples, stored row-major
/// (sample index varies slowest). `mean_shifted` records whether the
/// known process mean has already been subtracted; the estimators
/// themselves never subtract anything.
struct TimeSeries {
  int dim = 1;
  std::vector<double> data;
  bool mean_shifted = false;

  std::int64_t size() const {
    return dim <= 0 ? 0 : static_cast<std::int64_t>(data.size()) / dim;
  }
  const double* sample(std::int64_t i) const { return data.data() + i * dim; }
  void validate() const;
};

/// Windowed complex sum over one segment.
struct SegmentVector {
  Eigen::VectorXcd value;
  std::int64_t segment_index = 0;
  double freq = 0.0;
};

/// n x n spectral estimate at a single frequency. The matrix is kept
/// exactly Hermitian: rank-one terms are built on the upper triangle and
/// mirrored, and every later operation preserves conjugate symmetry
/// entry for entry.
struct SpectralEstimate {
  Eigen::MatrixXcd matrix;
  std::int64_t segments = 0;
  double freq = 0.0;

  static SpectralEstimate zero(int dim, double freq);
};

/// Immutable state of the running-average form. After k updates from the
/// zero state, `current.matrix` is the arithmetic mean of the k consumed
/// rank-one terms (exactly so in exact arithmetic).
struct EstimatorState {
  SpectralEstimate current;
  std::int64_t count = 0;

  static EstimatorState initial(int dim, double freq);
};

// Wraps a frequency into [-1/2, 1/2]; the window is 1-periodic in s.
double reduce_frequency(double s);

// Unit-norm complex window w_k(s) = (v_k / ||v||) e^{-j 2 pi k s}.
Eigen::VectorXcd make_window(const WindowSpec& spec, double s);

// yhat_i(s) = sum_{k=0}^{M-1} w_k(s) y[iK + k].
SegmentVector segment_transform(const TimeSeries& y, const WindowSpec& spec,
                                double s, std::int64_t segment);

// Hermitian rank-one term yhat yhat^*.
Eigen::MatrixXcd rank_one_term(const Eigen::VectorXcd& yhat);

// Mean of the first `segments` rank-one terms, accumulated with
// compensated summation. segments == 0 yields the zero estimate.
SpectralEstimate batch_estimate(const TimeSeries& y, const WindowSpec& spec,
                                double s, std::int64_t segments);

// One step of x_{k+1} = x_k + (z_k - x_k) / (k + 1).
EstimatorState streaming_update(const EstimatorState& state,
                                const Eigen::MatrixXcd& term);

// Runs the iterative form over segments 0..max(checkpoints)-1 and
// snapshots the state at each requested segment count.
std::vector<SpectralEstimate> streaming_run(
    const TimeSeries& y, const WindowSpec& spec, double s,
    const std::vector<std::int64_t>& checkpoints);

// Samples needed for k segments: indices 0..(k-1)K + (M-1).
std::int64_t data_budget(std::int64_t segments, int segment_len, int hop);

}  // namespace specest
