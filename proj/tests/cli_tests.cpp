// End-to-end checks of the command-line tool: exit codes, file outputs
// and reproducibility. The binary path comes in via SPECEST_CLI.
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "helpers.hpp"
#include "specest/bounds.hpp"
#include "specest/io.hpp"
#include "specest/mixing.hpp"

using namespace specest;

namespace {

namespace fs = std::filesystem;

fs::path work_dir() {
  auto dir = fs::temp_directory_path() / "specest_cli_tests";
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SPECEST_CLI) + " " + args +
                          " >" + (work_dir() / "stdout.txt").string() +
                          " 2>" + (work_dir() / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string last_stdout() { return read_file(work_dir() / "stdout.txt"); }
std::string last_stderr() { return read_file(work_dir() / "stderr.txt"); }

fs::path chain_model_file() {
  const auto path = work_dir() / "chain.toml";
  std::ofstream out(path);
  out << "P = 0.3 0.7 ; 0.5 0.5\n"
      << "g = 0 1\n";
  return path;
}

fs::path tiny_profile_file() {
  const auto path = work_dir() / "tiny_profile.toml";
  std::ofstream out(path);
  out << "qgrid = 1 2 4 8 16 32\n"
      << "Mq = 1e-9 1e-9 1e-9 1e-9 1e-9 1e-9\n"
      << "GammaDq = 1e-9 1e-9 1e-9 1e-9 1e-9 1e-9\n"
      << "gammaSeq = 1e-9 1e-9 1e-9 1e-9 1e-9 1e-9\n";
  return path;
}

}  // namespace

TEST_CASE("cli: no subcommand is a usage error") {
  CHECK(run_cli("") == 2);
}

TEST_CASE("cli: unknown flags are rejected with usage text") {
  CHECK(run_cli("simulate --bogus 1") == 2);
}

TEST_CASE("cli: help exits cleanly") {
  CHECK(run_cli("--help") == 0);
}

TEST_CASE("cli simulate: reproducible output and echoed config") {
  const auto model = chain_model_file();
  const auto out_a = work_dir() / "sim_a.csv";
  const auto out_b = work_dir() / "sim_b.csv";
  CHECK(run_cli("simulate --model " + model.string() +
                " --n 1000 --seed 7 --out " + out_a.string()) == 0);
  CHECK(last_stderr().find("# config:") != std::string::npos);
  CHECK(run_cli("simulate --model " + model.string() +
                " --n 1000 --seed 7 --out " + out_b.string()) == 0);
  const std::string a = read_file(out_a);
  CHECK(a == read_file(out_b));
  CHECK(std::count(a.begin(), a.end(), '\n') == 1000);
}

TEST_CASE("cli simulate: missing --out is a usage error") {
  const auto model = chain_model_file();
  CHECK(run_cli("simulate --model " + model.string() + " --n 10 --seed 1") ==
        2);
}

TEST_CASE("cli simulate: a bad model file names the offending field") {
  const auto path = work_dir() / "bad_chain.toml";
  {
    std::ofstream out(path);
    out << "P = 0.5 0.4 ; 0.5 0.5\n"  // row 0 sums to 0.9
        << "g = 0 1\n";
  }
  CHECK(run_cli("simulate --model " + path.string() +
                " --n 10 --seed 1 --out " + (work_dir() / "x.csv").string()) ==
        2);
  CHECK(last_stderr().find("row 0") != std::string::npos);
}

TEST_CASE("cli simulate: linear process model with rademacher innovations") {
  const auto path = work_dir() / "filter.toml";
  {
    std::ofstream out(path);
    out << "h = 1\n"
        << "sigma = 2\n"
        << "innovation = rademacher\n";
  }
  const auto data = work_dir() / "filter_data.csv";
  CHECK(run_cli("simulate --model " + path.string() +
                " --n 100 --seed 4 --out " + data.string()) == 0);
  const auto series = read_timeseries_csv(data.string(), false);
  REQUIRE(series.size() == 100);
  for (double v : series.data) {
    CHECK(std::abs(v) == 2.0);
  }
}

TEST_CASE("cli estimate: too little data exits 3 with the required count") {
  const auto empty = work_dir() / "empty.csv";
  std::ofstream(empty).close();
  CHECK(run_cli("estimate --input " + empty.string() +
                " --method bartlett --segment-len 5 --freq 0.5 --segments 1 "
                "--out " +
                (work_dir() / "est.csv").string()) == 3);
  CHECK(last_stderr().find("needs 5 samples") != std::string::npos);
}

TEST_CASE("cli estimate: bartlett with mismatched hop exits 2") {
  const auto model = chain_model_file();
  const auto data = work_dir() / "data.csv";
  REQUIRE(run_cli("simulate --model " + model.string() +
                  " --n 100 --seed 3 --out " + data.string()) == 0);
  CHECK(run_cli("estimate --input " + data.string() +
                " --method bartlett --segment-len 5 --hop 3 --freq 0.5 "
                "--segments 10 --out " +
                (work_dir() / "est.csv").string()) == 2);
}

TEST_CASE("cli estimate: chain record lands near the true density") {
  const auto model = chain_model_file();
  const auto data = work_dir() / "long_chain.csv";
  const std::int64_t segments = 10000;
  const std::int64_t budget = data_budget(segments, 5, 5);
  REQUIRE(run_cli("simulate --model " + model.string() + " --n " +
                  std::to_string(budget) + " --seed 11 --out " +
                  data.string()) == 0);
  const auto est_path = work_dir() / "est.csv";
  CHECK(run_cli("estimate --input " + data.string() +
                " --method bartlett --segment-len 5 --freq 0.5 --segments " +
                std::to_string(segments) + " --out " + est_path.string()) ==
        0);

  std::ifstream in(est_path);
  std::string line;
  REQUIRE(std::getline(in, line));
  std::stringstream ss(line);
  std::string field;
  std::vector<std::string> fields;
  while (std::getline(ss, field, ',')) {
    fields.push_back(field);
  }
  REQUIRE(fields.size() == 4);  // k, s, re, im
  const double estimate = std::stod(fields[2]);

  const auto chain = test_helpers::two_state_chain();
  const auto profile = markov_profile(chain);
  const double bound =
      variance_bound(profile, 1.0, 5, 5, segments) +
      bias_bound_bartlett(profile, 5, 1e-12);
  CHECK(std::abs(estimate - 35.0 / 96.0) <= bound);
}

TEST_CASE("cli estimate: frequency grid produces one row per frequency") {
  const auto model = chain_model_file();
  const auto data = work_dir() / "grid_data.csv";
  REQUIRE(run_cli("simulate --model " + model.string() +
                  " --n 200 --seed 5 --out " + data.string()) == 0);
  const auto est_path = work_dir() / "grid_est.csv";
  CHECK(run_cli("estimate --input " + data.string() +
                " --method welch --segment-len 16 --hop 8 --window hann "
                "--freq-grid 8 --segments 20 --out " +
                est_path.string()) == 0);
  const std::string text = read_file(est_path);
  CHECK(std::count(text.begin(), text.end(), '\n') == 8);
}

TEST_CASE("cli bound: k = 4 report halves b_q") {
  const auto model = chain_model_file();
  const auto out = work_dir() / "report.csv";
  CHECK(run_cli("bound --model " + model.string() +
                " --method bartlett --segment-len 5 --q 1 --k 4 --nu 0.1 "
                "--out " +
                out.string()) == 0);
  std::ifstream in(out);
  std::string header, row;
  REQUIRE(std::getline(in, header));
  REQUIRE(std::getline(in, row));
  std::stringstream ss(row);
  std::string field;
  std::vector<std::string> fields;
  while (std::getline(ss, field, ',')) {
    fields.push_back(field);
  }
  REQUIRE(fields.size() == 9);
  const double bq = std::stod(fields[3]);
  const double vb = std::stod(fields[4]);
  CHECK(vb == bq / 2.0);
  // Frozen chain fixtures.
  CHECK(std::abs(bq / 20865.25698719888232553 - 1.0) <= 1e-12);
  const double c = std::stod(fields[5]);
  const double r = std::stod(fields[6]);
  CHECK(std::abs(c / 21641.54100111206129905 - 1.0) <= 1e-12);
  CHECK(std::abs(r / 3.392486732973408448349 - 1.0) <= 1e-12);
}

TEST_CASE("cli bound: exports the profile table") {
  const auto model = chain_model_file();
  const auto table = work_dir() / "profile_export.csv";
  CHECK(run_cli("bound --model " + model.string() +
                " --method bartlett --segment-len 5 --q 1 --k 4 "
                "--export-profile " +
                table.string()) == 0);
  std::ifstream in(table);
  std::string header;
  REQUIRE(std::getline(in, header));
  CHECK(header == "q,Mq,GammaDq");
  int rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++rows;
  }
  CHECK(rows == 4);  // default qgrid 1 2 4 8
}

TEST_CASE("cli bound: nu outside (0,1) exits 2") {
  const auto model = chain_model_file();
  CHECK(run_cli("bound --model " + model.string() +
                " --segment-len 5 --q 1 --k 100 --nu 1.5") == 2);
}

TEST_CASE("cli bound: k below 4 exits 2") {
  const auto model = chain_model_file();
  CHECK(run_cli("bound --model " + model.string() +
                " --segment-len 5 --q 1 --k 3") == 2);
}

TEST_CASE("cli verify: chain config passes and is idempotent") {
  const auto model = chain_model_file();
  const auto cfg = work_dir() / "exp.toml";
  {
    std::ofstream out(cfg);
    out << "model = chain.toml\n"
        << "method = bartlett\n"
        << "segment_len = 5\n"
        << "freq = 0.5\n"
        << "checkpoints = 4 16 64 256\n"
        << "replications = 50\n"
        << "nu = 0.1\n"
        << "qgrid = 1 2 4 8\n";
  }
  const auto out_a = work_dir() / "verify_a.csv";
  const auto out_b = work_dir() / "verify_b.csv";
  CHECK(run_cli("verify --config " + cfg.string() + " --seed 2024 --out " +
                out_a.string()) == 0);
  CHECK(last_stdout().find("verification passed") != std::string::npos);
  CHECK(run_cli("verify --config " + cfg.string() + " --seed 2024 --out " +
                out_b.string()) == 0);
  CHECK(read_file(out_a) == read_file(out_b));

  const auto result = import_result(out_a.string());
  CHECK(result.rows.size() == 4);
  for (const auto& row : result.rows) {
    CHECK(row.quantile_err <= row.epsilon);
  }
}

TEST_CASE("cli verify: welch configuration passes") {
  const auto model = chain_model_file();
  CHECK(run_cli("verify --model " + model.string() +
                " --method welch --segment-len 16 --hop 8 --window hann "
                "--freq 0.5 --checkpoints 4 16 64 --replications 30 "
                "--nu 0.1 --seed 99 --out " +
                (work_dir() / "verify_welch.csv").string()) == 0);
}

TEST_CASE("cli verify: a tiny test profile forces exit 1") {
  const auto model = chain_model_file();
  const auto profile = tiny_profile_file();
  CHECK(run_cli("verify --model " + model.string() +
                " --method bartlett --segment-len 5 --freq 0.5 "
                "--checkpoints 4 16 --replications 10 --nu 0.999 "
                "--profile " +
                profile.string() + " --seed 5 --out " +
                (work_dir() / "verify_fail.csv").string()) == 1);
  CHECK(last_stdout().find("FAILED") != std::string::npos);
}

TEST_CASE("cli verify: missing --seed is a usage error") {
  const auto model = chain_model_file();
  CHECK(run_cli("verify --model " + model.string() +
                " --method bartlett --segment-len 5 --checkpoints 4 16 "
                "--out " +
                (work_dir() / "nope.csv").string()) == 2);
}
