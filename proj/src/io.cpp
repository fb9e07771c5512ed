#include "specest/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace specest {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) {
    return "";
  }
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& token, const std::string& context) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0') {
    throw std::invalid_argument(context + ": cannot parse number '" + token +
                                "'");
  }
  return v;
}

std::vector<double> parse_number_list(const std::string& text,
                                      const std::string& context) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string token;
  while (ss >> token) {
    out.push_back(parse_double(token, context));
  }
  return out;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, sep)) {
    out.push_back(part);
  }
  return out;
}

// key = value file with '#' comments; later keys override earlier ones.
std::map<std::string, std::string> read_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open '" + path + "' for reading");
  }
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                  ": expected 'key = value'");
    }
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

Eigen::MatrixXd parse_matrix(const std::string& text,
                             const std::string& context) {
  const auto rows = split(text, ';');
  std::vector<std::vector<double>> parsed;
  for (const auto& row : rows) {
    auto nums = parse_number_list(row, context);
    if (nums.empty()) {
      continue;
    }
    if (!parsed.empty() && nums.size() != parsed.front().size()) {
      throw std::invalid_argument(context + ": ragged matrix rows");
    }
    parsed.push_back(std::move(nums));
  }
  if (parsed.empty()) {
    throw std::invalid_argument(context + ": empty matrix");
  }
  Eigen::MatrixXd m(parsed.size(), parsed.front().size());
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    for (std::size_t j = 0; j < parsed.front().size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          parsed[i][j];
    }
  }
  return m;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = v[i];
  }
  return out;
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

namespace {

// Console rendering; CSV output keeps the full 17 digits.
std::string short_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", value);
  return buf;
}

}  // namespace

TimeSeries read_timeseries_csv(const std::string& path, bool skip_header) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open '" + path + "' for reading");
  }
  TimeSeries series;
  series.dim = 1;
  std::string line;
  int lineno = 0;
  bool first_row = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (skip_header && lineno == 1) {
      continue;
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto fields = split(line, ',');
    if (first_row) {
      series.dim = static_cast<int>(fields.size());
      first_row = false;
    } else if (static_cast<int>(fields.size()) != series.dim) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                  ": expected " + std::to_string(series.dim) +
                                  " columns, found " +
                                  std::to_string(fields.size()));
    }
    for (const auto& f : fields) {
      series.data.push_back(
          parse_double(trim(f), path + ":" + std::to_string(lineno)));
    }
  }
  return series;
}

void write_timeseries_csv(const TimeSeries& series, const std::string& path) {
  series.validate();
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  const std::int64_t n = series.size();
  for (std::int64_t i = 0; i < n; ++i) {
    const double* p = series.sample(i);
    for (int d = 0; d < series.dim; ++d) {
      if (d > 0) {
        out << ',';
      }
      out << format_double(p[d]);
    }
    out << '\n';
  }
  if (!out.good()) {
    throw std::runtime_error("failed while writing '" + path + "'");
  }
}

void write_estimates_csv(const std::vector<SpectralEstimate>& estimates,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  for (const auto& est : estimates) {
    out << est.segments << ',' << format_double(est.freq);
    // Upper triangle, column-major.
    for (Eigen::Index j = 0; j < est.matrix.cols(); ++j) {
      for (Eigen::Index i = 0; i <= j; ++i) {
        out << ',' << format_double(est.matrix(i, j).real()) << ','
            << format_double(est.matrix(i, j).imag());
      }
    }
    out << '\n';
  }
  if (!out.good()) {
    throw std::runtime_error("failed while writing '" + path + "'");
  }
}

ModelFile read_model_file(const std::string& path) {
  const auto kv = read_key_values(path);
  ModelFile out;
  const bool has_markov = kv.count("P") > 0;
  const bool has_linear = kv.count("h") > 0;
  if (has_markov == has_linear) {
    throw std::invalid_argument(
        path + ": expected exactly one of 'P' (Markov chain) or 'h' "
               "(linear process)");
  }
  if (has_markov) {
    if (kv.count("g") == 0) {
      throw std::invalid_argument(path + ": missing key 'g'");
    }
    const Eigen::MatrixXd transition = parse_matrix(kv.at("P"), path + ": P");
    const Eigen::VectorXd values =
        to_vector(parse_number_list(kv.at("g"), path + ": g"));
    if (kv.count("mu") > 0) {
      const Eigen::VectorXd mu =
          to_vector(parse_number_list(kv.at("mu"), path + ": mu"));
      out.model = MarkovChainModel::create(transition, values, mu);
    } else {
      out.model = MarkovChainModel::create(transition, values);
    }
  } else {
    if (kv.count("sigma") == 0) {
      throw std::invalid_argument(path + ": missing key 'sigma'");
    }
    const auto taps = parse_number_list(kv.at("h"), path + ": h");
    const double sigma = parse_double(kv.at("sigma"), path + ": sigma");
    out.model = LinearProcessModel::scalar(taps, sigma);
    if (kv.count("innovation") > 0) {
      const std::string inn = kv.at("innovation");
      if (inn == "gaussian") {
        out.innovation = Innovation::Gaussian;
      } else if (inn == "rademacher") {
        out.innovation = Innovation::Rademacher;
      } else {
        throw std::invalid_argument(path +
                                    ": innovation must be 'gaussian' or "
                                    "'rademacher', got '" +
                                    inn + "'");
      }
    }
  }
  return out;
}

MixingProfile read_profile_file(const std::string& path) {
  const auto kv = read_key_values(path);
  for (const char* key : {"qgrid", "Mq", "GammaDq"}) {
    if (kv.count(key) == 0) {
      throw std::invalid_argument(path + ": missing key '" +
                                  std::string(key) + "'");
    }
  }
  auto q_grid = parse_number_list(kv.at("qgrid"), path + ": qgrid");
  auto moments = parse_number_list(kv.at("Mq"), path + ": Mq");
  auto sums = parse_number_list(kv.at("GammaDq"), path + ": GammaDq");
  std::vector<std::vector<double>> gamma_rows;
  if (kv.count("gammaSeq") > 0) {
    for (const auto& row : split(kv.at("gammaSeq"), ';')) {
      auto nums = parse_number_list(row, path + ": gammaSeq");
      if (!nums.empty()) {
        gamma_rows.push_back(std::move(nums));
      }
    }
  }
  return table_profile(std::move(q_grid), std::move(moments), std::move(sums),
                       std::move(gamma_rows),
                       "table(" + std::filesystem::path(path).filename().string() + ")");
}

void write_profile_csv(const MixingProfile& profile,
                       const std::vector<double>& q_grid,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  out << "q,Mq,GammaDq\n";
  for (double q : q_grid) {
    out << format_double(q) << ',' << format_double(profile.moment_bound(q))
        << ',' << format_double(profile.gamma_sum(q)) << '\n';
  }
  if (!out.good()) {
    throw std::runtime_error("failed while writing '" + path + "'");
  }
}

std::string render_bound_report(const BoundReport& report) {
  std::ostringstream out;
  out << "error certificate at k=" << report.k << ", nu="
      << short_double(report.nu) << ", q=" << short_double(report.q) << "\n";
  out << "  b_q                      = " << short_double(report.bq) << "\n";
  out << "  L_q deviation bound      = " << short_double(report.variance_bound)
      << "  (b_q log2(log2 k)/sqrt(k))\n";
  out << "  power-law envelope       = " << short_double(report.c) << " * q^"
      << short_double(report.r) << "\n";
  out << "  high-probability radius  = " << short_double(report.epsilon)
      << "  (P(deviation > radius) <= nu)\n";
  out << "  bias bound               = " << short_double(report.bias_bound)
      << "\n";
  return out.str();
}

void write_bound_report_csv(const BoundReport& report,
                            const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  out << "k,nu,q,b_q,variance_bound,c,r,epsilon,bias_bound\n";
  out << report.k << ',' << format_double(report.nu) << ','
      << format_double(report.q) << ',' << format_double(report.bq) << ','
      << format_double(report.variance_bound) << ',' << format_double(report.c)
      << ',' << format_double(report.r) << ',' << format_double(report.epsilon)
      << ',' << format_double(report.bias_bound) << '\n';
  if (!out.good()) {
    throw std::runtime_error("failed while writing '" + path + "'");
  }
}

ExperimentConfigFile read_experiment_config(const std::string& path) {
  const auto kv = read_key_values(path);
  ExperimentConfigFile out;
  ExperimentConfig& cfg = out.config;

  if (kv.count("model") == 0) {
    throw std::invalid_argument(path + ": missing key 'model'");
  }
  std::filesystem::path model_path(kv.at("model"));
  if (model_path.is_relative()) {
    model_path = std::filesystem::path(path).parent_path() / model_path;
  }
  const ModelFile model = read_model_file(model_path.string());
  cfg.model = model.model;
  cfg.innovation = model.innovation;

  std::string method = "bartlett";
  if (kv.count("method") > 0) {
    method = kv.at("method");
  }
  int segment_len = 0;
  if (kv.count("segment_len") == 0) {
    throw std::invalid_argument(path + ": missing key 'segment_len'");
  }
  segment_len = static_cast<int>(
      parse_double(kv.at("segment_len"), path + ": segment_len"));
  int hop = segment_len;
  if (kv.count("hop") > 0) {
    hop = static_cast<int>(parse_double(kv.at("hop"), path + ": hop"));
  }
  std::string window = "rect";
  if (kv.count("window") > 0) {
    window = kv.at("window");
  }
  if (method == "bartlett") {
    if (hop != segment_len) {
      throw std::invalid_argument(path +
                                  ": bartlett requires hop == segment_len");
    }
    if (window != "rect") {
      throw std::invalid_argument(path +
                                  ": bartlett uses the rectangular window");
    }
    cfg.spec = WindowSpec::bartlett(segment_len);
  } else if (method == "welch") {
    if (window == "rect") {
      cfg.spec = WindowSpec::welch_rect(segment_len, hop);
    } else if (window == "hann") {
      cfg.spec = WindowSpec::welch_hann(segment_len, hop);
    } else if (window.rfind("file:", 0) == 0) {
      std::filesystem::path wpath(window.substr(5));
      if (wpath.is_relative()) {
        wpath = std::filesystem::path(path).parent_path() / wpath;
      }
      const TimeSeries w = read_timeseries_csv(wpath.string(), false);
      if (w.dim != 1) {
        throw std::invalid_argument(path + ": window file must have 1 column");
      }
      cfg.spec = WindowSpec::welch(segment_len, hop,
                                   to_vector(w.data));
    } else {
      throw std::invalid_argument(path + ": window must be rect, hann or "
                                         "file:PATH");
    }
  } else {
    throw std::invalid_argument(path + ": method must be bartlett or welch");
  }

  if (kv.count("freq") > 0) {
    cfg.freq = parse_double(kv.at("freq"), path + ": freq");
  }
  if (kv.count("checkpoints") > 0) {
    cfg.checkpoints.clear();
    for (double v :
         parse_number_list(kv.at("checkpoints"), path + ": checkpoints")) {
      cfg.checkpoints.push_back(static_cast<std::int64_t>(v));
    }
  }
  if (kv.count("replications") > 0) {
    cfg.replications = static_cast<int>(
        parse_double(kv.at("replications"), path + ": replications"));
  }
  if (kv.count("nu") > 0) {
    cfg.nu = parse_double(kv.at("nu"), path + ": nu");
  }
  if (kv.count("qgrid") > 0) {
    cfg.q_grid = parse_number_list(kv.at("qgrid"), path + ": qgrid");
  }
  if (kv.count("tail_tol") > 0) {
    cfg.tail_tol = parse_double(kv.at("tail_tol"), path + ": tail_tol");
  }
  if (kv.count("seed") > 0) {
    cfg.master_seed = static_cast<std::uint64_t>(
        std::stoull(kv.at("seed")));
    out.has_seed = true;
  }
  return out;
}

}  // namespace specest
