#include "specest/harness.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "specest/io.hpp"
#include "specest/rng.hpp"

namespace specest {

namespace {

double nearest_rank(const std::vector<double>& sorted, double p) {
  const std::size_t n = sorted.size();
  std::size_t idx = static_cast<std::size_t>(
      std::ceil(p * static_cast<double>(n)));
  idx = std::clamp<std::size_t>(idx, 1, n);
  return sorted[idx - 1];
}

void validate_config(const ExperimentConfig& cfg) {
  cfg.spec.validate();
  if (cfg.replications < 1) {
    throw std::invalid_argument("replication count must be >= 1");
  }
  if (!(cfg.nu > 0.0 && cfg.nu < 1.0)) {
    throw std::invalid_argument("confidence level nu must lie in (0, 1)");
  }
  for (std::size_t i = 0; i < cfg.checkpoints.size(); ++i) {
    if (cfg.checkpoints[i] < 4) {
      throw std::invalid_argument("checkpoints must satisfy k >= 4");
    }
    if (i > 0 && cfg.checkpoints[i] <= cfg.checkpoints[i - 1]) {
      throw std::invalid_argument("checkpoints must be strictly increasing");
    }
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const bool markov = std::holds_alternative<MarkovChainModel>(cfg.model);

  const MixingProfile profile =
      cfg.profile_override.has_value()
          ? *cfg.profile_override
          : (markov ? markov_profile(std::get<MarkovChainModel>(cfg.model))
                    : filter_profile(std::get<LinearProcessModel>(cfg.model)));
  const AutocovarianceSequence autocov =
      markov ? markov_autocovariance(std::get<MarkovChainModel>(cfg.model))
             : linear_autocovariance(std::get<LinearProcessModel>(cfg.model));

  ExperimentResult result;
  result.expected = expected_estimate(autocov, cfg.spec, cfg.freq);
  result.fit = fit_power_law(profile, cfg.spec.segment_len, cfg.spec.hop,
                             cfg.q_grid);
  result.bias_bound =
      cfg.spec.method == Method::Bartlett
          ? bias_bound_bartlett(profile, cfg.spec.segment_len, cfg.tail_tol)
          : bias_bound_welch(profile, cfg.spec.segment_len, cfg.spec.window,
                             cfg.tail_tol);
  result.replications = cfg.replications;
  result.nu = cfg.nu;
  result.seed = cfg.master_seed;
  result.freq = reduce_frequency(cfg.freq);

  if (cfg.checkpoints.empty()) {
    return result;
  }
  result.samples_per_replication = data_budget(
      cfg.checkpoints.back(), cfg.spec.segment_len, cfg.spec.hop);

  const std::size_t n_cp = cfg.checkpoints.size();
  const int reps = cfg.replications;
  // errors[i] holds the per-replication deviations at checkpoint i,
  // indexed by replication so the aggregate is schedule-independent.
  std::vector<std::vector<double>> errors(
      n_cp, std::vector<double>(static_cast<std::size_t>(reps)));

  auto run_replication = [&](int r) {
    const std::uint64_t seed = derive_seed(cfg.master_seed,
                                           static_cast<std::uint64_t>(r));
    const TimeSeries series =
        markov ? simulate_markov(std::get<MarkovChainModel>(cfg.model),
                                 result.samples_per_replication, seed)
               : simulate_linear_process(
                     std::get<LinearProcessModel>(cfg.model),
                     result.samples_per_replication, seed, cfg.innovation);
    const auto snapshots =
        streaming_run(series, cfg.spec, cfg.freq, cfg.checkpoints);
    for (std::size_t i = 0; i < n_cp; ++i) {
      const double err = (snapshots[i].matrix - result.expected).norm();
      if (!std::isfinite(err)) {
        throw std::runtime_error(
            "non-finite estimation error at checkpoint k=" +
            std::to_string(cfg.checkpoints[i]) + ", replication " +
            std::to_string(r) + ", seed " + std::to_string(seed));
      }
      errors[i][static_cast<std::size_t>(r)] = err;
    }
  };

  int n_threads = cfg.threads > 0
                      ? cfg.threads
                      : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::clamp(n_threads, 1, reps);
  if (n_threads == 1) {
    for (int r = 0; r < reps; ++r) {
      run_replication(r);
    }
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (int t = 0; t < n_threads; ++t) {
      pool.emplace_back([&, t]() {
        try {
          for (int r = t; r < reps; r += n_threads) {
            run_replication(r);
          }
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) {
            failure = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) {
      th.join();
    }
    if (failure) {
      std::rethrow_exception(failure);
    }
  }

  result.rows.reserve(n_cp);
  for (std::size_t i = 0; i < n_cp; ++i) {
    CheckpointStats row;
    row.k = cfg.checkpoints[i];
    row.epsilon = high_probability_radius(result.fit, row.k, cfg.nu);
    std::vector<double> sorted = errors[i];
    std::sort(sorted.begin(), sorted.end());
    row.median_err = nearest_rank(sorted, 0.5);
    row.quantile_err = nearest_rank(sorted, 1.0 - cfg.nu);
    row.max_err = sorted.back();
    row.exceedances = static_cast<std::int64_t>(
        std::count_if(sorted.begin(), sorted.end(),
                      [&](double e) { return e > row.epsilon; }));
    result.rows.push_back(row);
  }
  return result;
}

double slope_fit(const ExperimentResult& result) {
  if (result.rows.size() < 3) {
    throw std::invalid_argument("slope fit needs at least three checkpoints");
  }
  const double span = static_cast<double>(result.rows.back().k) /
                      static_cast<double>(result.rows.front().k);
  if (span < 100.0) {
    throw std::invalid_argument(
        "slope fit needs checkpoints spanning at least two decades");
  }
  std::vector<double> x, y;
  for (const auto& row : result.rows) {
    if (!(row.median_err > 0.0)) {
      throw std::invalid_argument(
          "slope fit needs positive median errors at every checkpoint");
    }
    x.push_back(std::log(static_cast<double>(row.k)));
    y.push_back(std::log(row.median_err));
  }
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / sxx;
}

void export_result(const ExperimentResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  out << "k,median_err,quantile_err,max_err,epsilon,bias_bound,"
         "exceedances,R,nu,seed\n";
  for (const auto& row : result.rows) {
    out << row.k << ',' << format_double(row.median_err) << ','
        << format_double(row.quantile_err) << ','
        << format_double(row.max_err) << ',' << format_double(row.epsilon)
        << ',' << format_double(result.bias_bound) << ',' << row.exceedances
        << ',' << result.replications << ',' << format_double(result.nu)
        << ',' << result.seed << '\n';
  }
  if (!out.good()) {
    throw std::runtime_error("failed while writing '" + path + "'");
  }
}

ExperimentResult import_result(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open '" + path + "' for reading");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("result file '" + path + "' is empty");
  }
  if (line.rfind("k,median_err", 0) != 0) {
    throw std::runtime_error("result file '" + path +
                             "' has an unexpected header");
  }
  ExperimentResult result;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) {
      fields.push_back(field);
    }
    if (fields.size() != 10) {
      throw std::runtime_error("malformed row in '" + path + "': " + line);
    }
    CheckpointStats row;
    row.k = std::stoll(fields[0]);
    row.median_err = std::stod(fields[1]);
    row.quantile_err = std::stod(fields[2]);
    row.max_err = std::stod(fields[3]);
    row.epsilon = std::stod(fields[4]);
    result.bias_bound = std::stod(fields[5]);
    row.exceedances = std::stoll(fields[6]);
    result.replications = std::stoi(fields[7]);
    result.nu = std::stod(fields[8]);
    result.seed = std::stoull(fields[9]);
    result.rows.push_back(row);
  }
  return result;
}

}  // namespace specest
