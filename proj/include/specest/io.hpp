#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "specest/bounds.hpp"
#include "specest/estimators.hpp"
#include "specest/harness.hpp"
#include "specest/mixing.hpp"

namespace specest {

// --- TimeSeries CSV: one sample per row, n columns, '.' decimal. ---
TimeSeries read_timeseries_csv(const std::string& path, bool skip_header);
void write_timeseries_csv(const TimeSeries& series, const std::string& path);

// --- SpectralEstimate CSV: rows (k, s, re/im of the upper triangle in
// column-major order). ---
void write_estimates_csv(const std::vector<SpectralEstimate>& estimates,
                         const std::string& path);

// --- Model files: key = value lines, '#' comments. A Markov chain needs
// `P` (rows separated by ';') and `g`, with optional `mu`; a linear
// process needs `h` (scalar taps) and `sigma`, with optional
// `innovation = gaussian|rademacher`. ---
struct ModelFile {
  std::variant<MarkovChainModel, LinearProcessModel> model;
  Innovation innovation = Innovation::Gaussian;
};
ModelFile read_model_file(const std::string& path);

// --- Profile tables: keys qgrid, Mq, GammaDq and optional gammaSeq
// (rows separated by ';', one per lag starting at tau = 0). ---
MixingProfile read_profile_file(const std::string& path);
void write_profile_csv(const MixingProfile& profile,
                       const std::vector<double>& q_grid,
                       const std::string& path);

// --- Bound reports. ---
std::string render_bound_report(const BoundReport& report);
void write_bound_report_csv(const BoundReport& report, const std::string& path);

// --- Experiment config files (key = value) mirroring ExperimentConfig.
// Recognized keys: model (path to a model file, resolved relative to the
// config file), method, segment_len, hop, window (rect|hann|file:PATH),
// freq, checkpoints, replications, nu, qgrid, seed, tail_tol. ---
struct ExperimentConfigFile {
  ExperimentConfig config;
  bool has_seed = false;
};
ExperimentConfigFile read_experiment_config(const std::string& path);

// Full-precision decimal rendering (round-trips through strtod).
std::string format_double(double value);

}  // namespace specest
