#include <doctest.h>

#include <cmath>
#include <complex>

#include "helpers.hpp"
#include "specest/estimators.hpp"
#include "specest/models.hpp"

using namespace specest;
using test_helpers::random_series;
using test_helpers::two_state_chain;

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Independent direct evaluation of the windowed sum, kept free of the
// library's accumulation helpers.
std::complex<double> direct_scalar_transform(const std::vector<double>& y,
                                             const Eigen::VectorXd& shape,
                                             int hop, double s, int segment) {
  std::complex<double> acc(0.0, 0.0);
  const double norm = shape.norm();
  for (int k = 0; k < shape.size(); ++k) {
    const double phase = -kTwoPi * k * s;
    acc += (shape(k) / norm) *
           std::complex<double>(std::cos(phase), std::sin(phase)) *
           y[static_cast<std::size_t>(segment * hop + k)];
  }
  return acc;
}

}  // namespace

TEST_CASE("make_window: Bartlett M=4 at s=0 is the constant 1/2 vector") {
  const auto w = make_window(WindowSpec::bartlett(4), 0.0);
  REQUIRE(w.size() == 4);
  for (int k = 0; k < 4; ++k) {
    CHECK(w(k).real() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(w(k).imag() == 0.0);
  }
}

TEST_CASE("make_window: Welch rectangular M=2 at s=1/2 alternates sign") {
  const auto w = make_window(WindowSpec::welch_rect(2, 1), 0.5);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(w(0) - std::complex<double>(inv_sqrt2, 0.0)) < 1e-15);
  CHECK(std::abs(w(1) - std::complex<double>(-inv_sqrt2, 0.0)) < 1e-14);
}

TEST_CASE("make_window: unit Euclidean norm on a 1024-point frequency grid") {
  std::vector<WindowSpec> specs = {
      WindowSpec::bartlett(1),       WindowSpec::bartlett(4),
      WindowSpec::welch_hann(16, 8), WindowSpec::welch_rect(7, 3),
  };
  // A window with negative and irregular entries.
  Eigen::VectorXd odd(5);
  odd << 0.3, -1.2, 2.0, -0.1, 0.7;
  specs.push_back(WindowSpec::welch(5, 2, odd));
  for (const auto& spec : specs) {
    for (int j = 0; j < 1024; ++j) {
      const double s = -0.5 + j / 1024.0;
      CHECK(std::abs(make_window(spec, s).norm() - 1.0) <= 1e-14);
    }
  }
}

TEST_CASE("make_window: frequency is reduced mod 1") {
  const auto spec = WindowSpec::welch_hann(8, 4);
  const auto w0 = make_window(spec, 0.3);
  const auto w1 = make_window(spec, 1.3);
  const auto w2 = make_window(spec, -0.7);
  CHECK((w0 - w1).norm() <= 1e-12);
  CHECK((w0 - w2).norm() <= 1e-12);
  // Half-integer frequencies stay put (ties-to-even remainder).
  CHECK(reduce_frequency(0.5) == 0.5);
  CHECK(reduce_frequency(-0.5) == -0.5);
}

TEST_CASE("window spec validation") {
  CHECK_THROWS_AS(WindowSpec::welch(2, 1, Eigen::VectorXd::Zero(2)),
                  std::invalid_argument);
  CHECK_THROWS_AS(WindowSpec::bartlett(0), std::invalid_argument);
  CHECK_THROWS_AS(WindowSpec::welch_rect(4, 0), std::invalid_argument);
  WindowSpec broken = WindowSpec::bartlett(4);
  broken.hop = 2;
  CHECK_THROWS_AS(broken.validate(), std::invalid_argument);
}

TEST_CASE("segment_transform: single-sample segment returns the sample") {
  TimeSeries y;
  y.dim = 1;
  y.data = {3.0};
  for (double s : {0.0, 0.17, -0.5, 0.5}) {
    const auto seg = segment_transform(y, WindowSpec::bartlett(1), s, 0);
    CHECK(std::abs(seg.value(0) - std::complex<double>(3.0, 0.0)) <= 1e-15);
  }
}

TEST_CASE("segment_transform: Bartlett M=2 at s=0 sums to sqrt(2)") {
  TimeSeries y;
  y.dim = 1;
  y.data = {1.0, 1.0};
  const auto seg = segment_transform(y, WindowSpec::bartlett(2), 0.0, 0);
  CHECK(seg.value(0).real() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(seg.value(0).imag() == 0.0);
}

TEST_CASE("segment_transform: matches a direct 5-term sum on chain data") {
  const auto model = two_state_chain();
  const TimeSeries y = simulate_markov(model, 5, 20240811u);
  const auto spec = WindowSpec::bartlett(5);
  const auto seg = segment_transform(y, spec, 0.5, 0);
  const auto direct =
      direct_scalar_transform(y.data, spec.window, spec.hop, 0.5, 0);
  CHECK(std::abs(seg.value(0) - direct) <= 1e-14);
}

TEST_CASE("segment_transform: non-finite samples are rejected") {
  TimeSeries y;
  y.dim = 1;
  y.data = {1.0, std::nan(""), 2.0};
  CHECK_THROWS_AS(segment_transform(y, WindowSpec::bartlett(3), 0.0, 0),
                  std::invalid_argument);
}

TEST_CASE("segment_transform: missing data names the missing index") {
  TimeSeries y;
  y.dim = 1;
  y.data = {1.0, 2.0, 3.0, 4.0};
  try {
    segment_transform(y, WindowSpec::bartlett(5), 0.0, 0);
    FAIL("expected out_of_range");
  } catch (const std::out_of_range& e) {
    const std::string msg = e.what();
    CHECK(msg.find("4") != std::string::npos);
  }
}

TEST_CASE("batch_estimate: zero data gives the zero matrix") {
  TimeSeries y;
  y.dim = 1;
  y.data.assign(50, 0.0);
  const auto est = batch_estimate(y, WindowSpec::bartlett(5), 0.25, 10);
  CHECK(est.matrix.norm() == 0.0);
  CHECK(est.segments == 10);
}

TEST_CASE("batch_estimate: scalar M=K=1 averages squared magnitudes") {
  TimeSeries y;
  y.dim = 1;
  y.data = {2.0, -2.0};
  const auto est = batch_estimate(y, WindowSpec::bartlett(1), 0.1, 2);
  CHECK(est.matrix(0, 0).real() == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(est.matrix(0, 0).imag() == 0.0);
}

TEST_CASE("batch_estimate: L=0 returns the zero estimate") {
  TimeSeries y;
  y.dim = 2;
  const auto est = batch_estimate(y, WindowSpec::welch_rect(4, 2), 0.0, 0);
  CHECK(est.segments == 0);
  CHECK(est.matrix.rows() == 2);
  CHECK(est.matrix.norm() == 0.0);
}

TEST_CASE("batch_estimate: equals the per-segment brute-force mean") {
  const auto model = two_state_chain();
  const auto spec = WindowSpec::bartlett(5);
  const std::int64_t segments = 100;
  const TimeSeries y =
      simulate_markov(model, data_budget(segments, 5, 5), 7u);
  const auto est = batch_estimate(y, spec, 0.5, segments);

  double mean = 0.0;
  for (int i = 0; i < segments; ++i) {
    const auto z =
        direct_scalar_transform(y.data, spec.window, spec.hop, 0.5, i);
    mean += std::norm(z);
  }
  mean /= static_cast<double>(segments);
  CHECK(test_helpers::rel_err(est.matrix(0, 0).real(), mean) <= 1e-12);
}

TEST_CASE("batch_estimate: insufficient data throws out_of_range") {
  TimeSeries y;
  y.dim = 1;
  y.data.assign(9, 1.0);
  CHECK_THROWS_AS(batch_estimate(y, WindowSpec::bartlett(5), 0.0, 2),
                  std::out_of_range);
}

TEST_CASE("Welch with rectangular window and K=M matches Bartlett exactly") {
  const TimeSeries y = random_series(1, 64, 99u);
  for (double s : {0.0, 0.21, 0.5}) {
    const auto a = batch_estimate(y, WindowSpec::bartlett(8), s, 8);
    const auto b = batch_estimate(y, WindowSpec::welch_rect(8, 8), s, 8);
    CHECK(a.matrix(0, 0) == b.matrix(0, 0));
  }
}

TEST_CASE("streaming_update: first update lands on the term") {
  Eigen::VectorXcd yhat(2);
  yhat << std::complex<double>(1.0, 2.0), std::complex<double>(-0.5, 0.25);
  const auto term = rank_one_term(yhat);
  const auto next = streaming_update(EstimatorState::initial(2, 0.0), term);
  CHECK(next.count == 1);
  CHECK((next.current.matrix - term).norm() == 0.0);
}

TEST_CASE("streaming_update: second update averages") {
  Eigen::MatrixXcd z1 = Eigen::MatrixXcd::Constant(1, 1, 2.0);
  Eigen::MatrixXcd z2 = Eigen::MatrixXcd::Constant(1, 1, 6.0);
  auto state = EstimatorState::initial(1, 0.0);
  state = streaming_update(state, z1);
  state = streaming_update(state, z2);
  CHECK(state.current.matrix(0, 0).real() == 4.0);
}

TEST_CASE("streaming_update: dimension mismatch throws") {
  const auto state = EstimatorState::initial(2, 0.0);
  CHECK_THROWS_AS(streaming_update(state, Eigen::MatrixXcd::Zero(3, 3)),
                  std::invalid_argument);
}

TEST_CASE("streaming_run matches repeated streaming_update bit for bit") {
  const TimeSeries y = random_series(2, 130, 5u);
  const auto spec = WindowSpec::welch_hann(16, 8);
  const double s = 0.3;
  const std::vector<std::int64_t> cps{1, 3, 7, 14};
  const auto snaps = streaming_run(y, spec, s, cps);

  auto state = EstimatorState::initial(2, s);
  std::size_t ci = 0;
  for (std::int64_t seg = 0; seg < cps.back(); ++seg) {
    const auto z = rank_one_term(segment_transform(y, spec, s, seg).value);
    state = streaming_update(state, z);
    if (state.count == cps[ci]) {
      CHECK((state.current.matrix - snaps[ci].matrix).norm() == 0.0);
      ++ci;
    }
  }
  CHECK(ci == cps.size());
}

TEST_CASE("streaming_run: single checkpoint reproduces the rank-one term") {
  const TimeSeries y = random_series(3, 8, 11u);
  const auto spec = WindowSpec::welch_rect(8, 8);
  const auto snaps = streaming_run(y, spec, 0.125, {1});
  const auto z = rank_one_term(segment_transform(y, spec, 0.125, 0).value);
  CHECK((snaps[0].matrix - z).norm() == 0.0);
}

TEST_CASE("streaming_run: checkpoints match batch estimates") {
  const TimeSeries y = random_series(1, 200, 21u);
  const auto spec = WindowSpec::welch_hann(12, 6);
  const auto snaps = streaming_run(y, spec, -0.2, {4, 16});
  for (const auto& snap : snaps) {
    const auto batch = batch_estimate(y, spec, -0.2, snap.segments);
    const double rel =
        (snap.matrix - batch.matrix).norm() / batch.matrix.norm();
    CHECK(rel <= 1e-12);
  }
}

TEST_CASE("streaming_run: empty checkpoint list yields empty output") {
  const TimeSeries y = random_series(1, 10, 2u);
  CHECK(streaming_run(y, WindowSpec::bartlett(2), 0.0, {}).empty());
}

TEST_CASE("streaming_run: checkpoints must increase strictly") {
  const TimeSeries y = random_series(1, 50, 2u);
  CHECK_THROWS_AS(streaming_run(y, WindowSpec::bartlett(2), 0.0, {4, 4}),
                  std::invalid_argument);
  CHECK_THROWS_AS(streaming_run(y, WindowSpec::bartlett(2), 0.0, {0, 4}),
                  std::invalid_argument);
}

TEST_CASE("streaming/batch equivalence on random data") {
  specest::Rng rng(31415u);
  for (int trial = 0; trial < 25; ++trial) {
    const int m = 1 + static_cast<int>(rng.uniform() * 12);
    const int hop = 1 + static_cast<int>(rng.uniform() * m);
    const std::int64_t segments =
        1 + static_cast<std::int64_t>(rng.uniform() * 1000);
    const auto spec = (trial % 2 == 0) ? WindowSpec::welch_hann(m, hop)
                                       : WindowSpec::welch_rect(m, hop);
    const double s = rng.uniform() - 0.5;
    const TimeSeries y =
        random_series(1, data_budget(segments, m, hop), 1000u + trial);
    const auto snaps = streaming_run(y, spec, s, {segments});
    const auto batch = batch_estimate(y, spec, s, segments);
    const double rel =
        (snaps[0].matrix - batch.matrix).norm() / batch.matrix.norm();
    CHECK(rel <= 1e-12);
  }
}

TEST_CASE("scalar estimates are real and essentially nonnegative") {
  specest::Rng rng(777u);
  for (int trial = 0; trial < 10; ++trial) {
    const auto spec = WindowSpec::welch_hann(9, 4);
    const TimeSeries y = random_series(1, data_budget(50, 9, 4), 50u + trial);
    const double s = rng.uniform() - 0.5;
    const auto est = batch_estimate(y, spec, s, 50);
    CHECK(est.matrix(0, 0).imag() == 0.0);
    double max_term = 0.0;
    for (int i = 0; i < 50; ++i) {
      max_term = std::max(
          max_term,
          std::norm(segment_transform(y, spec, s, i).value(0)));
    }
    CHECK(est.matrix(0, 0).real() >= -1e-12 * max_term);
  }
}

TEST_CASE("frequency symmetry for real data") {
  // For real samples the segment vector at -s is the conjugate of the
  // one at s, so the estimate at -s is the entrywise conjugate (equal
  // transpose, the estimate being Hermitian). Scalars are unchanged.
  const TimeSeries y = random_series(2, 140, 8u);
  const auto spec = WindowSpec::welch_hann(10, 5);
  for (double s : {0.05, 0.2, 0.45}) {
    const auto plus = batch_estimate(y, spec, s, 20);
    const auto minus = batch_estimate(y, spec, -s, 20);
    const double rel =
        (minus.matrix - plus.matrix.transpose()).norm() / plus.matrix.norm();
    CHECK(rel <= 1e-12);
  }
  const TimeSeries scalar = random_series(1, 140, 9u);
  const auto plus = batch_estimate(scalar, spec, 0.3, 20);
  const auto minus = batch_estimate(scalar, spec, -0.3, 20);
  CHECK(std::abs(plus.matrix(0, 0) - minus.matrix(0, 0)) <=
        1e-12 * std::abs(plus.matrix(0, 0)));
}

TEST_CASE("estimates are exactly Hermitian and near-PSD") {
  const TimeSeries y = random_series(3, 500, 13u);
  const auto spec = WindowSpec::welch_hann(16, 8);
  const auto est = batch_estimate(y, spec, 0.37, 40);
  CHECK((est.matrix - est.matrix.adjoint()).norm() == 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eigs(est.matrix);
  const double trace = est.matrix.real().trace();
  for (int i = 0; i < 3; ++i) {
    CHECK(eigs.eigenvalues()(i) >= -1e-10 * trace);
  }
}

TEST_CASE("data_budget arithmetic") {
  CHECK(data_budget(1, 7, 3) == 7);
  CHECK(data_budget(100, 5, 5) == 500);
  CHECK(data_budget(4, 16, 8) == 40);
  CHECK_THROWS_AS(data_budget(0, 5, 5), std::invalid_argument);
}
