#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "czsim/adiabaticity.hpp"
#include "czsim/device.hpp"
#include "czsim/dynamics.hpp"
#include "czsim/fitting.hpp"
#include "czsim/io.hpp"
#include "czsim/pulseshape.hpp"
#include "czsim/rbstats.hpp"
#include "czsim/spectrum.hpp"
#include "czsim/units.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace czsim;

namespace {

json load_config(const std::string& path, const std::vector<std::string>& sets) {
  json cfg = json::object();
  if (!path.empty()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    try {
      in >> cfg;
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!cfg.is_object()) throw ConfigError("config: top level must be an object");
  }
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--set expects path=value, got '" + s + "'");
    const std::string path_part = s.substr(0, eq);
    const std::string value_part = s.substr(eq + 1);
    json value;
    try {
      value = json::parse(value_part);
    } catch (const json::parse_error&) {
      value = value_part;  // bare strings allowed unquoted
    }
    json* node = &cfg;
    std::string key;
    std::istringstream keys(path_part);
    std::vector<std::string> parts;
    while (std::getline(keys, key, '.')) parts.push_back(key);
    if (parts.empty()) throw ConfigError("--set: empty path");
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
      if (!node->contains(parts[i])) (*node)[parts[i]] = json::object();
      node = &(*node)[parts[i]];
      if (!node->is_object())
        throw ConfigError("--set: path '" + path_part + "' crosses a non-object");
    }
    (*node)[parts.back()] = value;
  }
  return cfg;
}

double num(const json& cfg, const std::string& key, double fallback) {
  if (!cfg.contains(key)) return fallback;
  if (!cfg.at(key).is_number())
    throw ConfigError("config field '" + key + "' must be a number");
  return cfg.at(key).get<double>();
}

double num_required(const json& cfg, const std::string& key) {
  if (!cfg.contains(key)) throw ConfigError("config field '" + key + "' is required");
  if (!cfg.at(key).is_number())
    throw ConfigError("config field '" + key + "' must be a number");
  return cfg.at(key).get<double>();
}

std::string str_required(const json& cfg, const std::string& key) {
  if (!cfg.contains(key) || !cfg.at(key).is_string())
    throw ConfigError("config field '" + key + "' (string) is required");
  return cfg.at(key).get<std::string>();
}

std::string str_opt(const json& cfg, const std::string& key,
                    const std::string& fallback) {
  if (!cfg.contains(key)) return fallback;
  if (!cfg.at(key).is_string())
    throw ConfigError("config field '" + key + "' must be a string");
  return cfg.at(key).get<std::string>();
}

fs::path output_dir(const json& cfg) {
  const fs::path dir = str_opt(cfg, "output_dir", ".");
  fs::create_directories(dir);
  return dir;
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 2 || !(hi > lo)) throw ConfigError("grid: need max > min and points >= 2");
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * i / (n - 1);
  return g;
}

HilbertLabel parse_label(const std::string& s) {
  // "n1n2,nc"
  if (s.size() != 4 || s[2] != ',')
    throw ConfigError("state label must look like '11,0', got '" + s + "'");
  auto digit = [&](char c) {
    if (c < '0' || c > '9') throw ConfigError("bad state label '" + s + "'");
    return c - '0';
  };
  return {digit(s[0]), digit(s[1]), digit(s[3])};
}

std::string quoted_label(const std::string& prefix, const HilbertLabel& l) {
  return "\"" + prefix + l.str() + "\"";
}

double preset_idle_freq(const DevicePreset& p) {
  if (p.idle_freq_mhz) return *p.idle_freq_mhz;
  if (p.idle_flux) return flux_to_frequency(p.device.coupler, *p.idle_flux);
  throw ConfigError("preset has neither idle_frequency_mhz nor idle_flux");
}

struct GridSpec {
  std::vector<double> grid;
  double anchor;
};

GridSpec grid_from_config(const json& cfg, const DevicePreset& preset) {
  const auto& c = preset.device.coupler;
  const double lo = num(cfg, "grid_min_mhz", c.min_frequency() + 50.0);
  const double hi = num(cfg, "grid_max_mhz", c.max_frequency());
  const int n = static_cast<int>(num(cfg, "grid_points", 201));
  double anchor = num(cfg, "anchor_mhz", 0.0);
  if (anchor == 0.0) anchor = preset_idle_freq(preset);
  anchor = std::clamp(anchor, lo, hi);
  return {linspace(lo, hi, n), anchor};
}

void write_spectrum_outputs(const fs::path& dir, const CsvMetadata& meta,
                            const DeviceParams& device,
                            const TrackedSpectrum& ts,
                            const HilbertLabel& hyb_state) {
  std::vector<std::string> header{"coupler_freq_mhz"};
  for (const auto& l : ts.labels) header.push_back(quoted_label("", l));
  std::vector<std::vector<double>> rows;
  for (std::size_t g = 0; g < ts.grid.size(); ++g) {
    std::vector<double> row{ts.grid[g]};
    for (int k = 0; k < ts.energies[g].size(); ++k)
      row.push_back(ts.energies[g](k));
    rows.push_back(std::move(row));
  }
  write_csv((dir / "spectrum.csv").string(), meta, header, rows);

  const HybridizationCurve hyb = hybridization(ts, hyb_state);
  std::vector<std::string> hheader{"coupler_freq_mhz"};
  for (const auto& l : all_labels(device)) hheader.push_back(quoted_label("", l));
  std::vector<std::vector<double>> hrows;
  for (std::size_t g = 0; g < hyb.grid.size(); ++g) {
    std::vector<double> row{hyb.grid[g]};
    for (int i = 0; i < hyb.weights[g].size(); ++i)
      row.push_back(hyb.weights[g](i));
    hrows.push_back(std::move(row));
  }
  write_csv((dir / "hybridization.csv").string(), meta, hheader, hrows);

  std::vector<std::vector<double>> zrows;
  for (double f : ts.grid) zrows.push_back({f, zeta(ts, f)});
  write_csv((dir / "zeta.csv").string(), meta, {"coupler_freq_mhz", "zeta_mhz"},
            zrows);
}

void write_dfactor_csv(const fs::path& path, const CsvMetadata& meta,
                       const DFactorCurve& d) {
  std::vector<std::string> header{"coupler_freq_mhz"};
  for (const auto& k : d.sources)
    for (const auto& i : d.partners)
      header.push_back("\"D " + k.str() + "<-" + i.str() + "\"");
  for (const auto& k : d.sources) header.push_back(quoted_label("Dsum ", k));
  header.push_back("total");
  header.push_back("gap_excluded");
  std::vector<std::vector<double>> rows;
  for (std::size_t g = 0; g < d.grid.size(); ++g) {
    std::vector<double> row{d.grid[g]};
    for (std::size_t s = 0; s < d.sources.size(); ++s)
      for (int i = 0; i < d.components[s][g].size(); ++i)
        row.push_back(d.components[s][g](i));
    for (std::size_t s = 0; s < d.sources.size(); ++s)
      row.push_back(d.state_sum[s][g]);
    row.push_back(d.total[g]);
    row.push_back(static_cast<double>(d.gap_marker[g]));
    rows.push_back(std::move(row));
  }
  write_csv(path.string(), meta, header, rows);
}

int cmd_spectrum(const json& cfg) {
  const std::string preset_path = str_required(cfg, "preset");
  const DevicePreset preset = load_device_preset(preset_path);
  const GridSpec gs = grid_from_config(cfg, preset);
  const fs::path dir = output_dir(cfg);
  CsvMetadata meta{file_hash(preset_path), std::nullopt};
  const TrackedSpectrum ts =
      track_spectrum(preset.device, gs.grid, gs.anchor);
  const HilbertLabel hyb = parse_label(str_opt(cfg, "hybridization_state", "11,0"));
  write_spectrum_outputs(dir, meta, preset.device, ts, hyb);
  std::cout << "wrote spectrum.csv, hybridization.csv, zeta.csv to " << dir
            << "\n";
  return 0;
}

int cmd_dfactor(const json& cfg) {
  const std::string preset_path = str_required(cfg, "preset");
  const DevicePreset preset = load_device_preset(preset_path);
  const GridSpec gs = grid_from_config(cfg, preset);
  const fs::path dir = output_dir(cfg);
  CsvMetadata meta{file_hash(preset_path), std::nullopt};
  DFactorOptions opts;
  opts.manifold_only = cfg.value("manifold_only", false);
  const DFactorCurve d = total_D(preset.device, gs.grid, gs.anchor, {}, opts);
  write_dfactor_csv(dir / "dfactor.csv", meta, d);
  std::cout << "wrote dfactor.csv to " << dir << "\n";
  return 0;
}

Waveform cosine_envelope(double t_cz, double dt) {
  return fourier_cosine(t_cz, {0.5}, dt);
}

int cmd_pulse(const json& cfg) {
  const std::string preset_path = str_required(cfg, "preset");
  const DevicePreset preset = load_device_preset(preset_path);
  const fs::path dir = output_dir(cfg);
  CsvMetadata meta{file_hash(preset_path), std::nullopt};

  const std::string type = str_opt(cfg, "type", "cosine");
  const double t_cz = num(cfg, "t_cz_ns", 40.0);
  const double dt = num(cfg, "dt_ns", 0.05);
  const double pad = num(cfg, "pad_ns", 2.0);
  const double target = num(cfg, "target_phase_rad", kPi);
  const double idle = num(cfg, "idle_mhz", preset_idle_freq(preset));

  WaveformDescriptor desc;
  desc.t_cz = t_cz;
  desc.dt = dt;
  desc.pad_before = desc.pad_after = pad;
  desc.start_freq = idle;
  Waveform pulse;

  if (type == "cosine" || type == "fourier") {
    std::vector<double> coeffs{0.5};
    if (cfg.contains("coefficients"))
      coeffs = cfg.at("coefficients").get<std::vector<double>>();
    Waveform env = fourier_cosine(t_cz, coeffs, dt);
    env.pad_before = env.pad_after = pad;
    const double amp = calibrate_amplitude(preset.device, env, idle, target);
    pulse = envelope_to_frequency(env, idle, amp);
    desc.type = "fourier_cosine";
    desc.coefficients = coeffs;
    desc.amplitude_mhz = amp;
  } else if (type == "awp") {
    const GridSpec gs = grid_from_config(cfg, preset);
    AwpSpec spec;
    spec.t_cz = t_cz;
    spec.start_freq = idle;
    spec.d_curve = total_D(preset.device, gs.grid, gs.anchor);
    spec.lambda = calibrate_lambda(preset.device, spec, target, dt);
    pulse = awp_generate(spec, dt);
    pulse.pad_before = pulse.pad_after = pad;
    desc.type = "awp";
    desc.lambda = spec.lambda;
  } else {
    throw ConfigError("pulse type must be 'cosine' or 'awp', got '" + type + "'");
  }

  write_waveform_csv((dir / "waveform.csv").string(), meta, pulse);
  const Waveform flux = waveform_freq_to_flux(pulse, preset.device.coupler);
  write_waveform_csv((dir / "waveform_flux.csv").string(), meta, flux);
  write_waveform_descriptor((dir / "waveform.json").string(), desc);
  std::cout << "wrote waveform.csv, waveform_flux.csv, waveform.json to " << dir
            << "\n";
  return 0;
}

std::string label_file_tag(const HilbertLabel& l) {
  return std::to_string(l.n1) + std::to_string(l.n2) + "_" +
         std::to_string(l.nc);
}

int cmd_leakage(const json& cfg) {
  const std::string preset_path = str_required(cfg, "preset");
  const DevicePreset preset = load_device_preset(preset_path);
  const fs::path dir = output_dir(cfg);
  CsvMetadata meta{file_hash(preset_path), std::nullopt};

  const double t_cz = num(cfg, "t_cz_ns", 24.0);
  const double dt = num(cfg, "dt_ns", 0.05);
  const double idle = num(cfg, "idle_mhz", preset_idle_freq(preset));
  const double peak = num_required(cfg, "peak_mhz");
  const double delay_min = num(cfg, "delay_min_ns", 0.0);
  const double delay_max = num(cfg, "delay_max_ns", 10.0);
  const int delay_points = static_cast<int>(num(cfg, "delay_points", 51));
  const int max_cycles = static_cast<int>(num(cfg, "max_cycles", 40));

  Waveform env = cosine_envelope(t_cz, dt);
  const Waveform pulse = envelope_to_frequency(env, idle, peak - idle);
  const std::vector<double> delays = linspace(delay_min, delay_max, delay_points);
  const LeakageMap map =
      leakage_amplification(preset.device, pulse, delays, max_cycles);

  // One matrix per tracked label: rows = delays, columns = cycle count.
  for (std::size_t li = 0; li < map.labels.size(); ++li) {
    std::vector<std::string> header{"delay_ns"};
    for (int n = 1; n <= map.max_cycles; ++n)
      header.push_back("N" + std::to_string(n));
    std::vector<std::vector<double>> rows;
    for (std::size_t d = 0; d < map.delays.size(); ++d) {
      std::vector<double> row{map.delays[d]};
      for (int n = 0; n < map.max_cycles; ++n)
        row.push_back(map.populations[d][n](static_cast<int>(li)));
      rows.push_back(std::move(row));
    }
    write_csv((dir / ("population_" + label_file_tag(map.labels[li]) + ".csv"))
                  .string(),
              meta, header, rows);
  }

  std::vector<std::string> cheader{"delay_ns"};
  for (const auto& l : map.labels) cheader.push_back(quoted_label("", l));
  std::vector<std::vector<double>> crows;
  for (std::size_t d = 0; d < map.delays.size(); ++d) {
    std::vector<double> row{map.delays[d]};
    for (int i = 0; i < map.cycle_averaged[d].size(); ++i)
      row.push_back(map.cycle_averaged[d](i));
    crows.push_back(std::move(row));
  }
  write_csv((dir / "cycle_averaged.csv").string(), meta, cheader, crows);

  // Peak-spacing report for the requested leakage states.
  json report;
  report["peak_mhz"] = peak;
  report["t_cz_ns"] = t_cz;
  std::vector<std::string> states{"02,0", "20,0", "01,1"};
  if (cfg.contains("report_states"))
    states = cfg.at("report_states").get<std::vector<std::string>>();
  for (const auto& s : states) {
    const HilbertLabel l = parse_label(s);
    try {
      report["peak_spacing_ns"][s] = peak_spacing(map, l);
    } catch (const InsufficientPeaksError&) {
      report["peak_spacing_ns"][s] = nullptr;
    }
  }
  std::ofstream out(dir / "peak_report.json", std::ios::binary);
  out << report.dump(2) << "\n";
  std::cout << "wrote per-state populations, cycle_averaged.csv, "
               "peak_report.json to "
            << dir << "\n";
  return 0;
}

int cmd_compare(const json& cfg) {
  const fs::path dir = output_dir(cfg);
  const std::vector<std::pair<std::string, std::string>> entries{
      {"sym", str_required(cfg, "sym_preset")},
      {"asym", str_required(cfg, "asym_preset")}};
  for (const auto& [tag, path] : entries) {
    const DevicePreset preset = load_device_preset(path);
    const GridSpec gs = grid_from_config(cfg, preset);
    CsvMetadata meta{file_hash(path), std::nullopt};
    const TrackedSpectrum ts = track_spectrum(preset.device, gs.grid, gs.anchor);

    std::vector<std::string> header{"coupler_freq_mhz"};
    for (const auto& l : ts.labels) header.push_back(quoted_label("", l));
    std::vector<std::vector<double>> rows;
    for (std::size_t g = 0; g < ts.grid.size(); ++g) {
      std::vector<double> row{ts.grid[g]};
      for (int k = 0; k < ts.energies[g].size(); ++k)
        row.push_back(ts.energies[g](k));
      rows.push_back(std::move(row));
    }
    write_csv((dir / (tag + "_spectrum.csv")).string(), meta, header, rows);

    std::vector<std::vector<double>> zrows;
    for (double f : ts.grid) zrows.push_back({f, zeta(ts, f)});
    write_csv((dir / (tag + "_zeta.csv")).string(), meta,
              {"coupler_freq_mhz", "zeta_mhz"}, zrows);

    const DFactorCurve d = total_D(preset.device, gs.grid, gs.anchor);
    write_dfactor_csv(dir / (tag + "_dfactor.csv"), meta, d);
  }
  std::cout << "wrote sym/asym spectrum, zeta, dfactor files to " << dir << "\n";
  return 0;
}

int cmd_fit(const json& cfg) {
  const std::string preset_path = str_required(cfg, "preset");
  const DevicePreset preset = load_device_preset(preset_path);
  const SpectroscopyDataset data =
      load_spectroscopy_csv(str_required(cfg, "dataset"));
  const fs::path dir = output_dir(cfg);

  FitMask mask;
  std::vector<std::string> free{"ej_sum", "ec", "jj_ratio",
                                "rho_12", "rho_1c", "rho_2c"};
  if (cfg.contains("free")) free = cfg.at("free").get<std::vector<std::string>>();
  for (const auto& f : free) {
    if (f == "ej_sum") mask.ej_sum = true;
    else if (f == "ec") mask.ec = true;
    else if (f == "jj_ratio") mask.jj_ratio = true;
    else if (f == "rho_12") mask.rho_12 = true;
    else if (f == "rho_1c") mask.rho_1c = true;
    else if (f == "rho_2c") mask.rho_2c = true;
    else throw ConfigError("unknown free parameter '" + f + "'");
  }

  const FitResult result = joint_fit(data, preset.device, mask);

  json out;
  out["objective"] = result.objective;
  out["converged"] = result.converged;
  out["iterations"] = result.iterations;
  out["singular_jacobian"] = result.singular_jacobian;
  if (!result.message.empty()) out["message"] = result.message;
  out["residuals"] = std::vector<double>(
      result.residuals.data(), result.residuals.data() + result.residuals.size());
  DevicePreset fitted = preset;
  fitted.device = result.params;
  out["preset"] = json::parse(render_device_preset(fitted));
  std::ofstream f(dir / "fit_result.json", std::ios::binary);
  f << out.dump(2) << "\n";
  std::cout << "wrote fit_result.json to " << dir << "\n";
  return 0;
}

int cmd_rb(const json& cfg) {
  const RBDataset rb = load_rb_csv(str_required(cfg, "rb_csv"));
  const RBDataset irb = load_rb_csv(str_required(cfg, "irb_csv"));
  const int d = static_cast<int>(num(cfg, "dimension", 4));
  const long long samples = static_cast<long long>(num(cfg, "samples", 100000));
  const double level = num(cfg, "level", 0.95);
  const std::uint64_t seed = static_cast<std::uint64_t>(num(cfg, "seed", 1));
  const fs::path dir = output_dir(cfg);

  const RBFit fit_rb = mle_fit(rb);
  const RBFit fit_irb = mle_fit(irb);
  const GateErrorEstimate est = monte_carlo_ci(fit_rb, fit_irb, d, samples,
                                               level, seed);

  auto fit_json = [&](const RBFit& f, const RBDataset& data) {
    json j;
    j["p"] = f.p;
    j["a"] = f.a;
    j["b"] = f.b;
    j["log_likelihood"] = f.log_likelihood;
    j["iterations"] = f.iterations;
    json intervals = json::array();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto [lo, hi] = wilson_interval(data.successes[i], data.trials[i],
                                            level);
      intervals.push_back({{"depth", data.depths[i]},
                           {"lower", lo},
                           {"upper", hi}});
    }
    j["wilson_intervals"] = intervals;
    return j;
  };

  json out;
  out["rb_fit"] = fit_json(fit_rb, rb);
  out["irb_fit"] = fit_json(fit_irb, irb);
  out["gate_error"] = {{"point", gate_error(fit_rb.p, fit_irb.p, d)},
                       {"mean", est.mean},
                       {"lower", est.lower},
                       {"upper", est.upper},
                       {"sigma", est.sigma},
                       {"delta_method_sigma",
                        delta_method_sigma(fit_rb, fit_irb, d)},
                       {"level", est.level},
                       {"samples_used", est.samples_used},
                       {"samples_total", est.samples_total},
                       {"seed", est.seed}};
  std::ofstream f(dir / "rb_result.json", std::ios::binary);
  f << out.dump(2) << "\n";
  std::cout << "wrote rb_result.json to " << dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tunable-coupler CZ gate simulation and analysis"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> sets;
  int (*handler)(const json&) = nullptr;

  auto add = [&](const std::string& name, const std::string& desc,
                 int (*fn)(const json&)) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("-c,--config", config_path, "JSON config file");
    sub->add_option("--set", sets, "Override a config field: path=value");
    sub->callback([&handler, fn] { handler = fn; });
    return sub;
  };

  add("spectrum", "Tracked spectrum, hybridization, and zeta over a sweep",
      cmd_spectrum);
  add("dfactor", "Adiabatic factors for the computational states", cmd_dfactor);
  add("pulse", "Synthesize and calibrate a gate pulse", cmd_pulse);
  add("leakage", "Leakage amplification over a delay/cycle grid", cmd_leakage);
  add("compare", "Symmetric vs asymmetric coupler study", cmd_compare);
  add("fit", "Joint fit of spectroscopy data", cmd_fit);
  add("rb", "Randomized-benchmarking statistics pipeline", cmd_rb);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const json cfg = load_config(config_path, sets);
    return handler(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
