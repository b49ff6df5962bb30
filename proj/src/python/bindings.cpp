#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "czsim/adiabaticity.hpp"
#include "czsim/device.hpp"
#include "czsim/dynamics.hpp"
#include "czsim/errors.hpp"
#include "czsim/fitting.hpp"
#include "czsim/io.hpp"
#include "czsim/pulseshape.hpp"
#include "czsim/rbstats.hpp"
#include "czsim/spectrum.hpp"
#include "czsim/units.hpp"

namespace py = pybind11;
using namespace czsim;

PYBIND11_MODULE(_czsim, m) {
  m.doc() = "Tunable-coupler CZ gate simulation and analysis";
  m.attr("__version__") = kToolVersion;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<OutOfRangeError>(m, "OutOfRangeError", PyExc_ValueError);
  py::register_exception<TrackingAmbiguousError>(m, "TrackingAmbiguousError");
  py::register_exception<UnreachableError>(m, "UnreachableError");
  py::register_exception<ConvergenceFailureError>(m, "ConvergenceFailureError");
  py::register_exception<FitDegenerateError>(m, "FitDegenerateError");

  // Device model.
  py::class_<TransmonParams>(m, "TransmonParams")
      .def(py::init<>())
      .def_readwrite("bare_frequency", &TransmonParams::bare_frequency)
      .def_readwrite("anharmonicity", &TransmonParams::anharmonicity)
      .def_readwrite("levels", &TransmonParams::levels);

  py::class_<TunableCouplerParams>(m, "TunableCouplerParams")
      .def(py::init<>())
      .def_readwrite("ej_sum", &TunableCouplerParams::ej_sum)
      .def_readwrite("ec", &TunableCouplerParams::ec)
      .def_readwrite("jj_ratio", &TunableCouplerParams::jj_ratio)
      .def_readwrite("levels", &TunableCouplerParams::levels)
      .def("max_frequency", &TunableCouplerParams::max_frequency)
      .def("min_frequency", &TunableCouplerParams::min_frequency);

  py::class_<DeviceParams>(m, "DeviceParams")
      .def(py::init<>())
      .def_readwrite("q1", &DeviceParams::q1)
      .def_readwrite("q2", &DeviceParams::q2)
      .def_readwrite("coupler", &DeviceParams::coupler)
      .def_readwrite("rho_12", &DeviceParams::rho_12)
      .def_readwrite("rho_1c", &DeviceParams::rho_1c)
      .def_readwrite("rho_2c", &DeviceParams::rho_2c)
      .def("validate", &DeviceParams::validate);

  py::class_<HilbertLabel>(m, "HilbertLabel")
      .def(py::init([](int n1, int n2, int nc) {
             return HilbertLabel{n1, n2, nc};
           }),
           py::arg("n1"), py::arg("n2"), py::arg("nc"))
      .def_readwrite("n1", &HilbertLabel::n1)
      .def_readwrite("n2", &HilbertLabel::n2)
      .def_readwrite("nc", &HilbertLabel::nc)
      .def("__eq__",
           [](const HilbertLabel& a, const HilbertLabel& b) { return a == b; })
      .def("__repr__", [](const HilbertLabel& l) {
        return "HilbertLabel(" + l.str() + ")";
      });

  py::class_<DevicePreset>(m, "DevicePreset")
      .def(py::init<>())
      .def_readwrite("device", &DevicePreset::device)
      .def_readwrite("idle_flux", &DevicePreset::idle_flux)
      .def_readwrite("idle_freq_mhz", &DevicePreset::idle_freq_mhz)
      .def_readwrite("description", &DevicePreset::description);

  m.def("load_device_preset", &load_device_preset, py::arg("path"));
  m.def("save_device_preset", &save_device_preset, py::arg("path"),
        py::arg("preset"));
  m.def("squid_ej", &squid_ej, py::arg("coupler"), py::arg("flux"));
  m.def("flux_to_frequency", &flux_to_frequency, py::arg("coupler"),
        py::arg("flux"));
  m.def("frequency_to_flux", &frequency_to_flux, py::arg("coupler"),
        py::arg("target_mhz"));
  m.def("coupling_g", &coupling_g, py::arg("rho"), py::arg("f_a"),
        py::arg("f_b"));
  m.def("build_hamiltonian", &build_hamiltonian, py::arg("device"),
        py::arg("coupler_freq_mhz"), py::arg("dim_cap") = 10000);
  m.def("all_labels", &all_labels, py::arg("device"));
  m.def("label_to_index", &label_to_index, py::arg("label"), py::arg("device"));

  // Spectrum.
  m.def("diagonalize", &diagonalize, py::arg("h"));

  py::class_<TrackingOptions>(m, "TrackingOptions")
      .def(py::init<>())
      .def_readwrite("overlap_threshold", &TrackingOptions::overlap_threshold)
      .def_readwrite("max_refine_depth", &TrackingOptions::max_refine_depth)
      .def_readwrite("continuity_jump_mhz",
                     &TrackingOptions::continuity_jump_mhz);

  py::class_<TrackedSpectrum>(m, "TrackedSpectrum")
      .def_readonly("grid", &TrackedSpectrum::grid)
      .def_readonly("labels", &TrackedSpectrum::labels)
      .def_readonly("energies", &TrackedSpectrum::energies)
      .def("label_index", &TrackedSpectrum::label_index)
      .def("energy_at", &TrackedSpectrum::energy_at, py::arg("label"),
           py::arg("freq_mhz"));

  m.def("track_spectrum", &track_spectrum, py::arg("device"),
        py::arg("grid_mhz"), py::arg("anchor_mhz"),
        py::arg("opts") = TrackingOptions{});
  m.def("zeta", &zeta, py::arg("spectrum"), py::arg("at_mhz"));
  m.def("zeta_direct", &zeta_direct, py::arg("device"),
        py::arg("coupler_freq_mhz"));
  m.def("find_zz_zero", &find_zz_zero, py::arg("device"), py::arg("lo_mhz"),
        py::arg("hi_mhz"));

  py::class_<HybridizationCurve>(m, "HybridizationCurve")
      .def_readonly("grid", &HybridizationCurve::grid)
      .def_readonly("weights", &HybridizationCurve::weights);
  m.def("hybridization", &hybridization, py::arg("spectrum"), py::arg("state"));

  // Adiabaticity.
  py::class_<DFactorOptions>(m, "DFactorOptions")
      .def(py::init<>())
      .def_readwrite("fd_step_mhz", &DFactorOptions::fd_step_mhz)
      .def_readwrite("singular_gap_mhz", &DFactorOptions::singular_gap_mhz)
      .def_readwrite("manifold_only", &DFactorOptions::manifold_only);

  py::class_<DFactorCurve>(m, "DFactorCurve")
      .def_readonly("grid", &DFactorCurve::grid)
      .def_readonly("sources", &DFactorCurve::sources)
      .def_readonly("partners", &DFactorCurve::partners)
      .def_readonly("state_sum", &DFactorCurve::state_sum)
      .def_readonly("total", &DFactorCurve::total)
      .def_property_readonly("gap_marker",
                             [](const DFactorCurve& c) {
                               return std::vector<int>(c.gap_marker.begin(),
                                                       c.gap_marker.end());
                             })
      .def("source_index", &DFactorCurve::source_index);

  m.def("adiabatic_factor", &adiabatic_factor, py::arg("device"),
        py::arg("grid_mhz"), py::arg("source"), py::arg("anchor_mhz"),
        py::arg("opts") = DFactorOptions{});
  m.def("total_D", &total_D, py::arg("device"), py::arg("grid_mhz"),
        py::arg("anchor_mhz"),
        py::arg("computational") = std::vector<HilbertLabel>{},
        py::arg("opts") = DFactorOptions{});

  // Pulse shaping.
  py::enum_<WaveformUnit>(m, "WaveformUnit")
      .value("CouplerFrequencyMHz", WaveformUnit::CouplerFrequencyMHz)
      .value("FluxQuantum", WaveformUnit::FluxQuantum)
      .value("NormalizedAmplitude", WaveformUnit::NormalizedAmplitude);

  py::class_<Waveform>(m, "Waveform")
      .def(py::init<>())
      .def_readwrite("samples", &Waveform::samples)
      .def_readwrite("dt", &Waveform::dt)
      .def_readwrite("unit", &Waveform::unit)
      .def_readwrite("pad_before", &Waveform::pad_before)
      .def_readwrite("pad_after", &Waveform::pad_after)
      .def("duration", &Waveform::duration)
      .def("total_duration", &Waveform::total_duration)
      .def("value_at", &Waveform::value_at, py::arg("t_ns"));

  m.def("fourier_cosine", &fourier_cosine, py::arg("t_cz_ns"),
        py::arg("coefficients"), py::arg("dt_ns"));
  m.def("envelope_to_frequency", &envelope_to_frequency, py::arg("envelope"),
        py::arg("idle_mhz"), py::arg("amplitude_mhz"));
  m.def("waveform_freq_to_flux", &waveform_freq_to_flux, py::arg("waveform"),
        py::arg("coupler"));

  py::class_<AwpSpec>(m, "AwpSpec")
      .def(py::init<>())
      .def_readwrite("t_cz", &AwpSpec::t_cz)
      .def_readwrite("lambda_", &AwpSpec::lambda)
      .def_readwrite("d_curve", &AwpSpec::d_curve)
      .def_readwrite("start_freq", &AwpSpec::start_freq);
  m.def("awp_generate", &awp_generate, py::arg("spec"), py::arg("dt_ns"));

  // Dynamics.
  py::class_<EvolveOptions>(m, "EvolveOptions")
      .def(py::init<>())
      .def_readwrite("dt_solver", &EvolveOptions::dt_solver)
      .def_readwrite("check_convergence", &EvolveOptions::check_convergence)
      .def_readwrite("convergence_tol", &EvolveOptions::convergence_tol);

  py::class_<EvolutionResult>(m, "EvolutionResult")
      .def_readonly("final_state", &EvolutionResult::final_state)
      .def_readonly("unitary_check", &EvolutionResult::unitary_check);
  m.def("evolve", &evolve, py::arg("device"), py::arg("pulse"),
        py::arg("initial"), py::arg("opts") = EvolveOptions{});

  py::class_<ConditionalPhaseResult>(m, "ConditionalPhaseResult")
      .def_readonly("phase", &ConditionalPhaseResult::phase)
      .def_readonly("phase_unwrapped", &ConditionalPhaseResult::phase_unwrapped)
      .def_readonly("state_phase", &ConditionalPhaseResult::state_phase)
      .def_readonly("residual_leakage",
                    &ConditionalPhaseResult::residual_leakage)
      .def_readonly("high_leakage", &ConditionalPhaseResult::high_leakage);
  m.def("conditional_phase", &conditional_phase, py::arg("device"),
        py::arg("pulse"), py::arg("opts") = EvolveOptions{});

  py::class_<CalibrationOptions>(m, "CalibrationOptions")
      .def(py::init<>())
      .def_readwrite("evolve", &CalibrationOptions::evolve)
      .def_readwrite("phase_tol", &CalibrationOptions::phase_tol)
      .def_readwrite("scan_points", &CalibrationOptions::scan_points)
      .def_readwrite("max_iterations", &CalibrationOptions::max_iterations);
  m.def("calibrate_amplitude", &calibrate_amplitude, py::arg("device"),
        py::arg("envelope"), py::arg("idle_mhz"), py::arg("target_phase_rad"),
        py::arg("max_amplitude_mhz") = 0.0,
        py::arg("opts") = CalibrationOptions{});

  m.def("incoherent_error", &incoherent_error, py::arg("t_total_ns"),
        py::arg("t1_q1_us"), py::arg("t2e_q1_us"), py::arg("t1_q2_us"),
        py::arg("t2e_q2_us"));

  // Fitting.
  py::class_<SpectroscopyDataset>(m, "SpectroscopyDataset")
      .def(py::init<>())
      .def_readwrite("flux", &SpectroscopyDataset::flux)
      .def_readwrite("f1", &SpectroscopyDataset::f1)
      .def_readwrite("f2", &SpectroscopyDataset::f2)
      .def_readwrite("fc", &SpectroscopyDataset::fc)
      .def_readwrite("zz", &SpectroscopyDataset::zz)
      .def("__len__", &SpectroscopyDataset::size);

  py::class_<FitMask>(m, "FitMask")
      .def(py::init<>())
      .def_readwrite("ej_sum", &FitMask::ej_sum)
      .def_readwrite("ec", &FitMask::ec)
      .def_readwrite("jj_ratio", &FitMask::jj_ratio)
      .def_readwrite("rho_12", &FitMask::rho_12)
      .def_readwrite("rho_1c", &FitMask::rho_1c)
      .def_readwrite("rho_2c", &FitMask::rho_2c);

  py::class_<FitOptions>(m, "FitOptions")
      .def(py::init<>())
      .def_readwrite("max_iterations", &FitOptions::max_iterations)
      .def_readwrite("zeta_scale", &FitOptions::zeta_scale);

  py::class_<FitResult>(m, "FitResult")
      .def_readonly("params", &FitResult::params)
      .def_readonly("residuals", &FitResult::residuals)
      .def_readonly("objective", &FitResult::objective)
      .def_readonly("converged", &FitResult::converged)
      .def_readonly("singular_jacobian", &FitResult::singular_jacobian)
      .def_readonly("iterations", &FitResult::iterations)
      .def_readonly("message", &FitResult::message);

  py::class_<ModelPoint>(m, "ModelPoint")
      .def_readonly("f1", &ModelPoint::f1)
      .def_readonly("f2", &ModelPoint::f2)
      .def_readonly("fc", &ModelPoint::fc)
      .def_readonly("zz", &ModelPoint::zz);

  m.def("model_observables", &model_observables, py::arg("device"),
        py::arg("flux"));
  m.def("joint_fit", &joint_fit, py::arg("data"), py::arg("initial"),
        py::arg("mask"), py::arg("opts") = FitOptions{});

  // Benchmarking statistics.
  py::class_<RBDataset>(m, "RBDataset")
      .def(py::init<>())
      .def_readwrite("depths", &RBDataset::depths)
      .def_readwrite("successes", &RBDataset::successes)
      .def_readwrite("trials", &RBDataset::trials)
      .def("validate", &RBDataset::validate)
      .def("__len__", &RBDataset::size);

  py::class_<RBFit>(m, "RBFit")
      .def_readonly("p", &RBFit::p)
      .def_readonly("a", &RBFit::a)
      .def_readonly("b", &RBFit::b)
      .def_readonly("unconstrained", &RBFit::unconstrained)
      .def_readonly("covariance", &RBFit::covariance)
      .def_readonly("log_likelihood", &RBFit::log_likelihood)
      .def_readonly("iterations", &RBFit::iterations);

  py::class_<GateErrorEstimate>(m, "GateErrorEstimate")
      .def_readonly("mean", &GateErrorEstimate::mean)
      .def_readonly("lower", &GateErrorEstimate::lower)
      .def_readonly("upper", &GateErrorEstimate::upper)
      .def_readonly("level", &GateErrorEstimate::level)
      .def_readonly("sigma", &GateErrorEstimate::sigma)
      .def_readonly("samples_used", &GateErrorEstimate::samples_used)
      .def_readonly("samples_total", &GateErrorEstimate::samples_total)
      .def_readonly("seed", &GateErrorEstimate::seed);

  m.def("normal_quantile", &normal_quantile, py::arg("p"));
  m.def("logit", &logit, py::arg("p"));
  m.def("sigmoid", &sigmoid, py::arg("x"));
  m.def("wald_interval", &wald_interval, py::arg("k"), py::arg("n"),
        py::arg("level"), py::arg("clamp") = false);
  m.def("wilson_interval", &wilson_interval, py::arg("k"), py::arg("n"),
        py::arg("level"));
  m.def("mle_fit", &mle_fit, py::arg("data"),
        py::arg("init_pab") = std::nullopt);
  m.def("gate_error", &gate_error, py::arg("p_rb"), py::arg("p_irb"),
        py::arg("d"));
  m.def("monte_carlo_ci", &monte_carlo_ci, py::arg("fit_rb"),
        py::arg("fit_irb"), py::arg("d"), py::arg("samples"), py::arg("level"),
        py::arg("seed"));
  m.def("delta_method_sigma", &delta_method_sigma, py::arg("fit_rb"),
        py::arg("fit_irb"), py::arg("d"));
  m.def("synthesize_rb_counts", &synthesize_rb_counts, py::arg("p"),
        py::arg("a"), py::arg("b"), py::arg("depths"),
        py::arg("shots_per_depth"), py::arg("seed"));
}
