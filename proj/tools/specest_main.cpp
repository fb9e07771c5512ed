#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "specest/bounds.hpp"
#include "specest/estimators.hpp"
#include "specest/harness.hpp"
#include "specest/io.hpp"
#include "specest/mixing.hpp"
#include "specest/models.hpp"

namespace {

using namespace specest;

// Exit codes: 0 success, 1 verification failure, 2 usage/domain error,
// 3 data/I-O error.
constexpr int kExitOk = 0;
constexpr int kExitVerificationFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;

struct SimulateOptions {
  std::string model_path;
  std::int64_t n = 0;
  std::uint64_t seed = 0;
  std::string out;
};

struct EstimateOptions {
  std::string input;
  std::string method = "bartlett";
  int segment_len = 0;
  int hop = 0;  // 0 = default to segment_len
  std::string window = "rect";
  std::optional<double> freq;
  int freq_grid = 0;
  std::int64_t segments = 0;
  std::string out;
  bool header = false;
};

struct BoundOptions {
  std::string model_path;
  std::string profile_path;
  std::string method = "bartlett";
  int segment_len = 0;
  int hop = 0;
  std::string window = "rect";
  double q = 1.0;
  std::int64_t k = 0;
  double nu = 0.1;
  std::vector<double> q_grid{1.0, 2.0, 4.0, 8.0};
  double tail_tol = 1e-12;
  double freq = 0.0;
  std::string out;
  std::string export_profile;
};

struct VerifyOptions {
  std::string config_path;
  std::string model_path;
  std::string profile_path;
  std::optional<std::string> method;
  std::optional<int> segment_len;
  std::optional<int> hop;
  std::optional<std::string> window;
  std::optional<double> freq;
  std::vector<std::int64_t> checkpoints;
  std::optional<int> replications;
  std::optional<double> nu;
  std::vector<double> q_grid;
  std::uint64_t seed = 0;
  std::string out;
  int threads = 0;
};

WindowSpec build_spec(const std::string& method, int segment_len, int hop,
                      const std::string& window) {
  if (segment_len < 1) {
    throw std::invalid_argument("--segment-len must be >= 1");
  }
  const int k = hop > 0 ? hop : segment_len;
  if (method == "bartlett") {
    if (k != segment_len) {
      throw std::invalid_argument(
          "bartlett requires --hop equal to --segment-len (got hop=" +
          std::to_string(k) + ", segment-len=" + std::to_string(segment_len) +
          ")");
    }
    if (window != "rect") {
      throw std::invalid_argument("bartlett uses the rectangular window");
    }
    return WindowSpec::bartlett(segment_len);
  }
  if (method != "welch") {
    throw std::invalid_argument("--method must be bartlett or welch");
  }
  if (window == "rect") {
    return WindowSpec::welch_rect(segment_len, k);
  }
  if (window == "hann") {
    return WindowSpec::welch_hann(segment_len, k);
  }
  if (window.rfind("file:", 0) == 0) {
    const TimeSeries w = read_timeseries_csv(window.substr(5), false);
    if (w.dim != 1) {
      throw std::invalid_argument("window file must have a single column");
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(w.data.size()));
    for (std::size_t i = 0; i < w.data.size(); ++i) {
      v(static_cast<Eigen::Index>(i)) = w.data[i];
    }
    return WindowSpec::welch(segment_len, k, std::move(v));
  }
  throw std::invalid_argument("--window must be rect, hann or file:PATH");
}

MixingProfile build_profile(const ModelFile& model) {
  if (std::holds_alternative<MarkovChainModel>(model.model)) {
    return markov_profile(std::get<MarkovChainModel>(model.model));
  }
  return filter_profile(std::get<LinearProcessModel>(model.model));
}

int cmd_simulate(const SimulateOptions& opt) {
  std::cerr << "# config: simulate model=" << opt.model_path
            << " n=" << opt.n << " seed=" << opt.seed << " out=" << opt.out
            << "\n";
  const ModelFile model = read_model_file(opt.model_path);
  TimeSeries series;
  if (std::holds_alternative<MarkovChainModel>(model.model)) {
    series = simulate_markov(std::get<MarkovChainModel>(model.model), opt.n,
                             opt.seed);
  } else {
    series = simulate_linear_process(std::get<LinearProcessModel>(model.model),
                                     opt.n, opt.seed, model.innovation);
  }
  write_timeseries_csv(series, opt.out);
  double mean = 0.0;
  for (double v : series.data) {
    mean += v;
  }
  mean = series.data.empty() ? 0.0 : mean / static_cast<double>(series.data.size());
  std::cout << "wrote " << series.size() << " samples (dim " << series.dim
            << ") to " << opt.out << "; sample mean " << format_double(mean)
            << "\n";
  return kExitOk;
}

int cmd_estimate(const EstimateOptions& opt) {
  const int hop = opt.hop > 0 ? opt.hop : opt.segment_len;
  std::cerr << "# config: estimate input=" << opt.input
            << " method=" << opt.method << " segment_len=" << opt.segment_len
            << " hop=" << hop << " window=" << opt.window
            << " segments=" << opt.segments << " out=" << opt.out << "\n";
  if (!opt.freq.has_value() && opt.freq_grid <= 0) {
    throw std::invalid_argument("one of --freq or --freq-grid is required");
  }
  const WindowSpec spec =
      build_spec(opt.method, opt.segment_len, opt.hop, opt.window);
  const TimeSeries series = read_timeseries_csv(opt.input, opt.header);
  if (opt.segments < 1) {
    throw std::invalid_argument("--segments must be >= 1");
  }
  const std::int64_t needed =
      data_budget(opt.segments, spec.segment_len, spec.hop);
  if (series.size() < needed) {
    throw std::out_of_range(
        "estimating " + std::to_string(opt.segments) + " segments (M=" +
        std::to_string(spec.segment_len) + ", K=" + std::to_string(spec.hop) +
        ") needs " + std::to_string(needed) + " samples but '" + opt.input +
        "' holds " + std::to_string(series.size()));
  }
  std::vector<double> freqs;
  if (opt.freq.has_value()) {
    freqs.push_back(*opt.freq);
  } else {
    for (int j = 0; j < opt.freq_grid; ++j) {
      freqs.push_back(-0.5 + static_cast<double>(j) / opt.freq_grid);
    }
  }
  std::vector<SpectralEstimate> estimates;
  estimates.reserve(freqs.size());
  for (double s : freqs) {
    estimates.push_back(batch_estimate(series, spec, s, opt.segments));
  }
  write_estimates_csv(estimates, opt.out);
  std::cout << "wrote " << estimates.size() << " estimate row(s) to "
            << opt.out << "\n";
  return kExitOk;
}

int cmd_bound(const BoundOptions& opt) {
  const int hop = opt.hop > 0 ? opt.hop : opt.segment_len;
  std::cerr << "# config: bound model=" << opt.model_path
            << " profile=" << opt.profile_path << " method=" << opt.method
            << " segment_len=" << opt.segment_len << " hop=" << hop
            << " window=" << opt.window << " q=" << opt.q << " k=" << opt.k
            << " nu=" << opt.nu << "\n";
  if (opt.model_path.empty() == opt.profile_path.empty()) {
    throw std::invalid_argument(
        "exactly one of --model or --profile is required");
  }
  const WindowSpec spec =
      build_spec(opt.method, opt.segment_len, opt.hop, opt.window);
  const MixingProfile profile =
      opt.profile_path.empty() ? build_profile(read_model_file(opt.model_path))
                               : read_profile_file(opt.profile_path);
  if (opt.k < 4) {
    throw std::invalid_argument(
        "--k must be >= 4; the deviation bound is not asserted below that");
  }

  BoundReport report;
  report.q = opt.q;
  report.k = opt.k;
  report.nu = opt.nu;
  report.freq = reduce_frequency(opt.freq);
  report.bq =
      deviation_constant_bq(profile, opt.q, spec.segment_len, spec.hop);
  report.variance_bound =
      variance_bound(profile, opt.q, spec.segment_len, spec.hop, opt.k);
  const PowerLawFit fit =
      fit_power_law(profile, spec.segment_len, spec.hop, opt.q_grid);
  report.c = fit.c;
  report.r = fit.r;
  report.epsilon = high_probability_radius(fit, opt.k, opt.nu);
  report.bias_bound =
      spec.method == Method::Bartlett
          ? bias_bound_bartlett(profile, spec.segment_len, opt.tail_tol)
          : bias_bound_welch(profile, spec.segment_len, spec.window,
                             opt.tail_tol);

  std::cout << render_bound_report(report);
  if (!opt.out.empty()) {
    write_bound_report_csv(report, opt.out);
    std::cout << "wrote report to " << opt.out << "\n";
  }
  if (!opt.export_profile.empty()) {
    write_profile_csv(profile, opt.q_grid, opt.export_profile);
    std::cout << "wrote profile table to " << opt.export_profile << "\n";
  }
  return kExitOk;
}

int cmd_verify(const VerifyOptions& opt) {
  ExperimentConfig cfg;
  if (!opt.config_path.empty()) {
    cfg = read_experiment_config(opt.config_path).config;
  } else {
    if (opt.model_path.empty()) {
      throw std::invalid_argument("verify needs --config or --model");
    }
    if (!opt.segment_len.has_value()) {
      throw std::invalid_argument("--segment-len is required without --config");
    }
  }
  if (!opt.model_path.empty()) {
    const ModelFile model = read_model_file(opt.model_path);
    cfg.model = model.model;
    cfg.innovation = model.innovation;
  }
  if (opt.method.has_value() || opt.segment_len.has_value() ||
      opt.hop.has_value() || opt.window.has_value()) {
    const std::string method = opt.method.value_or("bartlett");
    const int segment_len = opt.segment_len.value_or(cfg.spec.segment_len);
    const int hop = opt.hop.value_or(0);
    const std::string window = opt.window.value_or("rect");
    cfg.spec = build_spec(method, segment_len, hop, window);
  }
  if (opt.freq.has_value()) {
    cfg.freq = *opt.freq;
  }
  if (!opt.checkpoints.empty()) {
    cfg.checkpoints = opt.checkpoints;
  }
  if (opt.replications.has_value()) {
    cfg.replications = *opt.replications;
  }
  if (opt.nu.has_value()) {
    cfg.nu = *opt.nu;
  }
  if (!opt.q_grid.empty()) {
    cfg.q_grid = opt.q_grid;
  }
  cfg.master_seed = opt.seed;
  cfg.threads = opt.threads;
  if (!opt.profile_path.empty()) {
    cfg.profile_override = read_profile_file(opt.profile_path);
  }
  if (cfg.checkpoints.empty()) {
    throw std::invalid_argument("verify needs a nonempty checkpoint list");
  }

  std::cerr << "# config: verify config=" << opt.config_path
            << " checkpoints=" << cfg.checkpoints.size()
            << " max_k=" << cfg.checkpoints.back()
            << " R=" << cfg.replications << " nu=" << cfg.nu
            << " seed=" << cfg.master_seed << " out=" << opt.out << "\n";

  const ExperimentResult result = run_experiment(cfg);

  std::cerr << "# data budget: " << result.samples_per_replication
            << " samples per replication, "
            << result.samples_per_replication * cfg.replications
            << " total\n";

  export_result(result, opt.out);

  auto brief = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return std::string(buf);
  };
  std::vector<std::int64_t> failing;
  for (const auto& row : result.rows) {
    const bool ok = row.quantile_err <= row.epsilon;
    std::cout << "k=" << row.k << " median=" << brief(row.median_err)
              << " quantile=" << brief(row.quantile_err)
              << " max=" << brief(row.max_err)
              << " epsilon=" << brief(row.epsilon)
              << (ok ? "  ok" : "  EXCEEDED") << "\n";
    if (!ok) {
      failing.push_back(row.k);
    }
  }
  std::cout << "bias bound: " << brief(result.bias_bound) << "\n";
  std::cout << "wrote result to " << opt.out << "\n";
  if (!failing.empty()) {
    std::cout << "verification FAILED at checkpoints:";
    for (auto k : failing) {
      std::cout << ' ' << k;
    }
    std::cout << "\n";
    return kExitVerificationFailed;
  }
  std::cout << "verification passed: empirical (1-nu)-quantile below the "
               "radius at every checkpoint\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Bartlett/Welch spectral estimation with non-asymptotic error "
      "certificates for L-mixing data"};
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* simulate = app.add_subcommand(
      "simulate", "Generate a synthetic time series as CSV");
  simulate->add_option("--model", sim.model_path, "model file")->required();
  simulate->add_option("--n", sim.n, "number of samples")->required();
  simulate->add_option("--seed", sim.seed, "random seed")->required();
  simulate->add_option("--out", sim.out, "output CSV path")->required();

  EstimateOptions est;
  auto* estimate = app.add_subcommand(
      "estimate", "Batch spectral estimate from a CSV record");
  estimate->add_option("--input", est.input, "input time-series CSV")
      ->required();
  estimate->add_option("--method", est.method, "bartlett|welch");
  estimate->add_option("--segment-len", est.segment_len, "segment length M")
      ->required();
  estimate->add_option("--hop", est.hop, "hop K (default: segment length)");
  estimate->add_option("--window", est.window, "rect|hann|file:PATH");
  auto* freq_opt =
      estimate->add_option("--freq", est.freq, "frequency in [-1/2, 1/2]");
  estimate
      ->add_option("--freq-grid", est.freq_grid,
                   "evaluate on G equispaced frequencies")
      ->excludes(freq_opt);
  estimate->add_option("--segments", est.segments, "segment count L")
      ->required();
  estimate->add_option("--out", est.out, "output CSV path")->required();
  estimate->add_flag("--header", est.header, "skip one header line on input");

  BoundOptions bnd;
  auto* bound = app.add_subcommand(
      "bound", "Evaluate the error certificate for a model or profile");
  bound->add_option("--model", bnd.model_path, "model file");
  bound->add_option("--profile", bnd.profile_path, "mixing profile table");
  bound->add_option("--method", bnd.method, "bartlett|welch");
  bound->add_option("--segment-len", bnd.segment_len, "segment length M")
      ->required();
  bound->add_option("--hop", bnd.hop, "hop K (default: segment length)");
  bound->add_option("--window", bnd.window, "rect|hann|file:PATH");
  bound->add_option("--q", bnd.q, "moment order q >= 1");
  bound->add_option("--k", bnd.k, "segment count k >= 4")->required();
  bound->add_option("--nu", bnd.nu, "confidence level in (0,1)");
  bound->add_option("--qgrid", bnd.q_grid, "grid for the power-law fit");
  bound->add_option("--tail-tol", bnd.tail_tol, "bias tail tolerance");
  bound->add_option("--freq", bnd.freq, "frequency (context only)");
  bound->add_option("--out", bnd.out, "optional CSV output path");
  bound->add_option("--export-profile", bnd.export_profile,
                    "write the profile table (q, Mq, GammaDq) as CSV");

  VerifyOptions ver;
  auto* verify = app.add_subcommand(
      "verify", "Monte Carlo check of the certificates (writes result CSV)");
  verify->add_option("--config", ver.config_path, "experiment config file");
  verify->add_option("--model", ver.model_path, "model file (overrides config)");
  verify->add_option("--profile", ver.profile_path,
                     "profile table overriding the certificate source");
  verify->add_option("--method", ver.method, "bartlett|welch");
  verify->add_option("--segment-len", ver.segment_len, "segment length M");
  verify->add_option("--hop", ver.hop, "hop K");
  verify->add_option("--window", ver.window, "rect|hann|file:PATH");
  verify->add_option("--freq", ver.freq, "frequency in [-1/2, 1/2]");
  verify->add_option("--checkpoints", ver.checkpoints,
                     "segment counts to snapshot (each >= 4)");
  verify->add_option("--replications", ver.replications, "replication count");
  verify->add_option("--nu", ver.nu, "confidence level in (0,1)");
  verify->add_option("--qgrid", ver.q_grid, "grid for the power-law fit");
  verify->add_option("--seed", ver.seed, "master seed (all randomness)")
      ->required();
  verify->add_option("--out", ver.out, "result CSV path")->required();
  verify->add_option("--threads", ver.threads, "worker threads (0 = auto)");

  try {
    app.parse(argc, argv);
    if (simulate->parsed()) {
      return cmd_simulate(sim);
    }
    if (estimate->parsed()) {
      return cmd_estimate(est);
    }
    if (bound->parsed()) {
      return cmd_bound(bnd);
    }
    if (verify->parsed()) {
      return cmd_verify(ver);
    }
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
}
