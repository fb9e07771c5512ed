#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "specest/bounds.hpp"
#include "specest/estimators.hpp"
#include "specest/harness.hpp"
#include "specest/io.hpp"
#include "specest/mixing.hpp"
#include "specest/models.hpp"
#include "specest/rng.hpp"

namespace py = pybind11;
using namespace specest;

namespace {

TimeSeries series_from_array(py::array_t<double, py::array::c_style |
                                                     py::array::forcecast>
                                 array,
                             bool mean_shifted) {
  TimeSeries out;
  out.mean_shifted = mean_shifted;
  if (array.ndim() == 1) {
    out.dim = 1;
    out.data.assign(array.data(), array.data() + array.size());
  } else if (array.ndim() == 2) {
    out.dim = static_cast<int>(array.shape(1));
    out.data.assign(array.data(), array.data() + array.size());
  } else {
    throw std::invalid_argument("expected a 1-D or 2-D sample array");
  }
  out.validate();
  return out;
}

py::array_t<double> series_to_array(const TimeSeries& series) {
  const auto n = static_cast<py::ssize_t>(series.size());
  py::array_t<double> out({n, static_cast<py::ssize_t>(series.dim)});
  std::copy(series.data.begin(), series.data.end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(_specest, m) {
  m.doc() =
      "Bartlett/Welch spectral estimation with non-asymptotic error "
      "certificates for L-mixing data";

  py::enum_<Method>(m, "Method")
      .value("Bartlett", Method::Bartlett)
      .value("Welch", Method::Welch);

  py::enum_<Innovation>(m, "Innovation")
      .value("Gaussian", Innovation::Gaussian)
      .value("Rademacher", Innovation::Rademacher);

  py::class_<WindowSpec>(m, "WindowSpec")
      .def_static("bartlett", &WindowSpec::bartlett, py::arg("segment_len"))
      .def_static("welch", &WindowSpec::welch, py::arg("segment_len"),
                  py::arg("hop"), py::arg("window"))
      .def_static("welch_rect", &WindowSpec::welch_rect,
                  py::arg("segment_len"), py::arg("hop"))
      .def_static("welch_hann", &WindowSpec::welch_hann,
                  py::arg("segment_len"), py::arg("hop"))
      .def_readonly("method", &WindowSpec::method)
      .def_readonly("segment_len", &WindowSpec::segment_len)
      .def_readonly("hop", &WindowSpec::hop)
      .def_readonly("window", &WindowSpec::window);

  py::class_<TimeSeries>(m, "TimeSeries")
      .def(py::init(&series_from_array), py::arg("samples"),
           py::arg("mean_shifted") = false)
      .def_property_readonly("dim", [](const TimeSeries& s) { return s.dim; })
      .def_property_readonly("mean_shifted",
                             [](const TimeSeries& s) { return s.mean_shifted; })
      .def("__len__", &TimeSeries::size)
      .def("array", &series_to_array);

  py::class_<SegmentVector>(m, "SegmentVector")
      .def_readonly("value", &SegmentVector::value)
      .def_readonly("segment_index", &SegmentVector::segment_index)
      .def_readonly("freq", &SegmentVector::freq);

  py::class_<SpectralEstimate>(m, "SpectralEstimate")
      .def_readonly("matrix", &SpectralEstimate::matrix)
      .def_readonly("segments", &SpectralEstimate::segments)
      .def_readonly("freq", &SpectralEstimate::freq);

  py::class_<EstimatorState>(m, "EstimatorState")
      .def_static("initial", &EstimatorState::initial, py::arg("dim"),
                  py::arg("freq"))
      .def_readonly("current", &EstimatorState::current)
      .def_readonly("count", &EstimatorState::count);

  m.def("hann_window", &hann_window, py::arg("segment_len"));
  m.def("reduce_frequency", &reduce_frequency, py::arg("s"));
  m.def("make_window", &make_window, py::arg("spec"), py::arg("s"));
  m.def("segment_transform", &segment_transform, py::arg("series"),
        py::arg("spec"), py::arg("s"), py::arg("segment"));
  m.def("rank_one_term", &rank_one_term, py::arg("yhat"));
  m.def("batch_estimate", &batch_estimate, py::arg("series"), py::arg("spec"),
        py::arg("s"), py::arg("segments"));
  m.def("streaming_update", &streaming_update, py::arg("state"),
        py::arg("term"));
  m.def("streaming_run", &streaming_run, py::arg("series"), py::arg("spec"),
        py::arg("s"), py::arg("checkpoints"));
  m.def("data_budget", &data_budget, py::arg("segments"),
        py::arg("segment_len"), py::arg("hop"));

  py::class_<MixingProfile>(m, "MixingProfile")
      .def("moment_bound", &MixingProfile::moment_bound, py::arg("q"))
      .def("gamma_sum", &MixingProfile::gamma_sum, py::arg("q"))
      .def("gamma_seq", &MixingProfile::gamma_seq, py::arg("tau"),
           py::arg("q"))
      .def_property_readonly("label", &MixingProfile::label);

  py::class_<MarkovChainModel>(m, "MarkovChainModel")
      .def_static(
          "create",
          py::overload_cast<Eigen::MatrixXd, Eigen::VectorXd>(
              &MarkovChainModel::create),
          py::arg("transition"), py::arg("values"))
      .def_static(
          "create",
          py::overload_cast<Eigen::MatrixXd, Eigen::VectorXd, Eigen::VectorXd>(
              &MarkovChainModel::create),
          py::arg("transition"), py::arg("values"), py::arg("stationary"))
      .def_readonly("transition", &MarkovChainModel::transition)
      .def_readonly("values", &MarkovChainModel::values)
      .def_readonly("stationary", &MarkovChainModel::stationary)
      .def_readonly("doeblin", &MarkovChainModel::doeblin)
      .def_readonly("mean", &MarkovChainModel::mean)
      .def_readonly("g_max", &MarkovChainModel::g_max);

  py::class_<LinearProcessModel>(m, "LinearProcessModel")
      .def_static("scalar", &LinearProcessModel::scalar, py::arg("taps"),
                  py::arg("sigma"))
      .def_readonly("impulse", &LinearProcessModel::impulse)
      .def_readonly("sigma", &LinearProcessModel::sigma)
      .def_readonly("input_dim", &LinearProcessModel::input_dim)
      .def_readonly("output_dim", &LinearProcessModel::output_dim)
      .def("tap_norm_sum", &LinearProcessModel::tap_norm_sum)
      .def("weighted_tap_norm_sum", &LinearProcessModel::weighted_tap_norm_sum);

  m.def("stationary_distribution", &stationary_distribution,
        py::arg("transition"));
  m.def("doeblin_coefficient", &doeblin_coefficient, py::arg("transition"),
        py::arg("stationary"));
  m.def("markov_profile", &markov_profile, py::arg("model"));
  m.def("filter_profile", &filter_profile, py::arg("model"));
  m.def("table_profile", &table_profile, py::arg("q_grid"),
        py::arg("moment_bounds"), py::arg("gamma_sums"), py::arg("gamma_rows"),
        py::arg("label") = "table");

  py::class_<SegmentMixing>(m, "SegmentMixing")
      .def_readonly("moment", &SegmentMixing::moment)
      .def_readonly("gamma_sum", &SegmentMixing::gamma_sum);
  py::class_<OuterProductMixing>(m, "OuterProductMixing")
      .def_readonly("moment", &OuterProductMixing::moment)
      .def_readonly("gamma_sum", &OuterProductMixing::gamma_sum);
  py::class_<PropagatedConstants>(m, "PropagatedConstants")
      .def_readonly("q", &PropagatedConstants::q)
      .def_readonly("moment_yhat", &PropagatedConstants::moment_yhat)
      .def_readonly("gamma_yhat", &PropagatedConstants::gamma_yhat)
      .def_readonly("moment_z", &PropagatedConstants::moment_z)
      .def_readonly("gamma_z", &PropagatedConstants::gamma_z)
      .def_readonly("segment_len", &PropagatedConstants::segment_len)
      .def_readonly("hop", &PropagatedConstants::hop);

  py::class_<PowerLawFit>(m, "PowerLawFit")
      .def_readonly("c", &PowerLawFit::c)
      .def_readonly("r", &PowerLawFit::r)
      .def_readonly("q_grid", &PowerLawFit::q_grid)
      .def_readonly("residual", &PowerLawFit::residual);

  m.def("segment_mixing", &segment_mixing, py::arg("profile"), py::arg("q"),
        py::arg("segment_len"), py::arg("hop"));
  m.def("outer_product_mixing", &outer_product_mixing, py::arg("profile"),
        py::arg("q"), py::arg("segment_len"), py::arg("hop"));
  m.def("propagate_constants", &propagate_constants, py::arg("profile"),
        py::arg("q"), py::arg("segment_len"), py::arg("hop"));
  m.def("deviation_constant_bq", &deviation_constant_bq, py::arg("profile"),
        py::arg("q"), py::arg("segment_len"), py::arg("hop"));
  m.def("variance_bound", &variance_bound, py::arg("profile"), py::arg("q"),
        py::arg("segment_len"), py::arg("hop"), py::arg("k"));
  m.def("fit_power_law",
        py::overload_cast<const MixingProfile&, int, int, std::vector<double>>(
            &fit_power_law),
        py::arg("profile"), py::arg("segment_len"), py::arg("hop"),
        py::arg("q_grid"));
  m.def("fit_power_law_fn",
        py::overload_cast<const std::function<double(double)>&,
                          std::vector<double>>(&fit_power_law),
        py::arg("bq"), py::arg("q_grid"));
  m.def("high_probability_radius", &high_probability_radius, py::arg("fit"),
        py::arg("k"), py::arg("nu"));
  m.def("bias_bound_bartlett", &bias_bound_bartlett, py::arg("profile"),
        py::arg("segment_len"), py::arg("tail_tol") = 1e-12);
  m.def("bias_bound_welch", &bias_bound_welch, py::arg("profile"),
        py::arg("segment_len"), py::arg("window"), py::arg("tail_tol") = 1e-12);

  py::class_<AutocovarianceSequence>(m, "AutocovarianceSequence")
      .def("value",
           [](const AutocovarianceSequence& seq, std::int64_t lag) {
             return seq.values(lag);
           },
           py::arg("lag"))
      .def_readonly("decay_rate", &AutocovarianceSequence::decay_rate)
      .def_readonly("envelope", &AutocovarianceSequence::envelope)
      .def_readonly("support", &AutocovarianceSequence::support)
      .def_readonly("dim", &AutocovarianceSequence::dim);

  py::class_<SpectralDensity>(m, "SpectralDensity")
      .def("value",
           [](const SpectralDensity& psd, double s) { return psd.value(s); },
           py::arg("s"))
      .def_readonly("truncation_lag", &SpectralDensity::truncation_lag)
      .def_readonly("dim", &SpectralDensity::dim);

  m.def("simulate_markov", &simulate_markov, py::arg("model"),
        py::arg("n_samples"), py::arg("seed"));
  m.def("simulate_linear_process", &simulate_linear_process, py::arg("model"),
        py::arg("n_samples"), py::arg("seed"),
        py::arg("innovation") = Innovation::Gaussian);
  m.def("markov_autocovariance", &markov_autocovariance, py::arg("model"));
  m.def("linear_autocovariance", &linear_autocovariance, py::arg("model"));
  m.def("true_psd", &true_psd, py::arg("autocov"), py::arg("tol") = 1e-12);
  m.def("expected_estimate", &expected_estimate, py::arg("autocov"),
        py::arg("spec"), py::arg("s"));

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("model", &ExperimentConfig::model)
      .def_readwrite("innovation", &ExperimentConfig::innovation)
      .def_readwrite("spec", &ExperimentConfig::spec)
      .def_readwrite("freq", &ExperimentConfig::freq)
      .def_readwrite("checkpoints", &ExperimentConfig::checkpoints)
      .def_readwrite("replications", &ExperimentConfig::replications)
      .def_readwrite("nu", &ExperimentConfig::nu)
      .def_readwrite("q_grid", &ExperimentConfig::q_grid)
      .def_readwrite("master_seed", &ExperimentConfig::master_seed)
      .def_readwrite("tail_tol", &ExperimentConfig::tail_tol)
      .def_readwrite("threads", &ExperimentConfig::threads)
      .def_readwrite("profile_override", &ExperimentConfig::profile_override);

  py::class_<CheckpointStats>(m, "CheckpointStats")
      .def_readonly("k", &CheckpointStats::k)
      .def_readonly("median_err", &CheckpointStats::median_err)
      .def_readonly("quantile_err", &CheckpointStats::quantile_err)
      .def_readonly("max_err", &CheckpointStats::max_err)
      .def_readonly("epsilon", &CheckpointStats::epsilon)
      .def_readonly("exceedances", &CheckpointStats::exceedances);

  py::class_<ExperimentResult>(m, "ExperimentResult")
      .def_readonly("rows", &ExperimentResult::rows)
      .def_readonly("bias_bound", &ExperimentResult::bias_bound)
      .def_readonly("expected", &ExperimentResult::expected)
      .def_readonly("fit", &ExperimentResult::fit)
      .def_readonly("replications", &ExperimentResult::replications)
      .def_readonly("nu", &ExperimentResult::nu)
      .def_readonly("seed", &ExperimentResult::seed)
      .def_readonly("freq", &ExperimentResult::freq)
      .def_readonly("samples_per_replication",
                    &ExperimentResult::samples_per_replication);

  m.def("run_experiment", &run_experiment, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("slope_fit", &slope_fit, py::arg("result"));
  m.def("export_result", &export_result, py::arg("result"), py::arg("path"));
  m.def("import_result", &import_result, py::arg("path"));

  m.def("derive_seed", &derive_seed, py::arg("master"), py::arg("stream"));

  m.def("read_timeseries_csv", &read_timeseries_csv, py::arg("path"),
        py::arg("skip_header") = false);
  m.def("write_timeseries_csv", &write_timeseries_csv, py::arg("series"),
        py::arg("path"));
}
