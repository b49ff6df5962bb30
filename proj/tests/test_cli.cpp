#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "json.hpp"

#include "czsim/device.hpp"
#include "czsim/fitting.hpp"
#include "czsim/io.hpp"
#include "czsim/rbstats.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace czsim;
using czsim_test::load_preset;
using czsim_test::preset_path;

namespace {

std::string cli_binary() {
  const char* p = std::getenv("CZSIM_CLI");
  REQUIRE(p != nullptr);
  return p;
}

// Fresh per-case working directory under the system temp root.
fs::path workdir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "czsim_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = cli_binary() + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Csv {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Csv read_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  Csv csv;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::istringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      csv.comments.push_back(line);
      continue;
    }
    if (csv.header.empty()) {
      csv.header = split(line);
      continue;
    }
    std::vector<double> row;
    for (const auto& cell : split(line)) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        break;  // trailing non-numeric columns (units) end the row
      }
    }
    csv.rows.push_back(std::move(row));
  }
  return csv;
}

bool has_comment(const Csv& csv, const std::string& prefix) {
  for (const auto& c : csv.comments)
    if (c.rfind(prefix, 0) == 0) return true;
  return false;
}

double column_at(const Csv& csv, double x, std::size_t col) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < csv.rows.size(); ++i)
    if (std::abs(csv.rows[i][0] - x) < std::abs(csv.rows[best][0] - x)) best = i;
  return csv.rows[best][col];
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST_CASE("a missing subcommand is a usage error") {
  CHECK(run("") == 2);
  CHECK(run("no_such_subcommand") == 2);
}

TEST_CASE("invalid JSON in the config file is a config error") {
  const fs::path dir = workdir("bad_json");
  write_text(dir / "cfg.json", "{ not json");
  CHECK(run("spectrum -c " + q(dir / "cfg.json")) == 2);
}

TEST_CASE("a missing required config field is a config error") {
  const fs::path dir = workdir("missing_field");
  write_text(dir / "cfg.json", "{}");
  CHECK(run("spectrum -c " + q(dir / "cfg.json")) == 2);
}

TEST_CASE("a nonexistent preset path is a config error") {
  const fs::path dir = workdir("missing_preset");
  CHECK(run("spectrum --set preset=" + (dir / "nope.json").string()) == 2);
}

TEST_CASE("an unknown pulse type is a config error") {
  CHECK(run("pulse --set preset=" + preset_path("measured_device.json") +
            " --set type=triangle") == 2);
}

TEST_CASE("a numerical failure exits with the runtime error code") {
  // Anchoring between the strongly hybridized qubit states leaves no
  // unambiguous labeling, which the tracker reports as a runtime failure.
  const fs::path dir = workdir("ambiguous");
  CHECK(run("spectrum --set preset=" + preset_path("sym_comparison.json") +
            " --set grid_min_mhz=3800 --set grid_max_mhz=4000" +
            " --set grid_points=41 --set anchor_mhz=3900" +
            " --set output_dir=" + dir.string()) == 3);
}

TEST_CASE("spectrum reruns are byte-identical and carry metadata headers") {
  const fs::path a = workdir("spectrum_a");
  const fs::path b = workdir("spectrum_b");
  const std::string base =
      "spectrum --set preset=" + preset_path("measured_device.json") +
      " --set grid_min_mhz=2450 --set grid_max_mhz=3400 --set grid_points=101" +
      " --set output_dir=";
  REQUIRE(run(base + a.string()) == 0);
  REQUIRE(run(base + b.string()) == 0);

  for (const std::string name : {"spectrum.csv", "hybridization.csv",
                                 "zeta.csv"}) {
    const std::string bytes = read_bytes(a / name);
    CHECK(bytes == read_bytes(b / name));
    CHECK(!bytes.empty());
  }
  const Csv zeta = read_csv(a / "zeta.csv");
  CHECK(has_comment(zeta, "# tool_version:"));
  CHECK(has_comment(zeta, "# preset_hash:"));
  CHECK(zeta.rows.size() == 101);
  REQUIRE(zeta.header.size() == 2);
  CHECK(zeta.header[1] == "zeta_mhz");
}

TEST_CASE("dfactor reports per-channel, per-state, and total columns") {
  const fs::path dir = workdir("dfactor");
  REQUIRE(run("dfactor --set preset=" + preset_path("measured_device.json") +
              " --set grid_min_mhz=2450 --set grid_max_mhz=3400" +
              " --set grid_points=51 --set output_dir=" + dir.string()) == 0);
  const Csv d = read_csv(dir / "dfactor.csv");
  REQUIRE(d.rows.size() == 51);
  REQUIRE(d.header.size() >= 3);
  CHECK(d.header[d.header.size() - 2] == "total");
  CHECK(d.header.back() == "gap_excluded");
  for (const auto& row : d.rows) {
    CHECK(row[row.size() - 2] >= 0.0);
    const double marker = row.back();
    CHECK((marker == 0.0 || marker == 1.0));
  }
}

TEST_CASE("leakage writes per-state populations and a peak report") {
  const fs::path dir = workdir("leakage");
  json cfg;
  cfg["preset"] = preset_path("measured_device.json");
  cfg["idle_mhz"] = 2540.0;
  cfg["peak_mhz"] = 3600.0;
  cfg["t_cz_ns"] = 24.0;
  cfg["dt_ns"] = 0.05;
  cfg["delay_min_ns"] = 0.0;
  cfg["delay_max_ns"] = 1.0;
  cfg["delay_points"] = 6;
  cfg["max_cycles"] = 3;
  cfg["output_dir"] = dir.string();
  write_text(dir / "cfg.json", cfg.dump());
  REQUIRE(run("leakage -c " + q(dir / "cfg.json")) == 0);

  const Csv pop = read_csv(dir / "population_01_1.csv");
  REQUIRE(pop.rows.size() == 6);
  REQUIRE(pop.header.size() == 4);  // delay + N1..N3
  for (const auto& row : pop.rows)
    for (std::size_t i = 1; i < row.size(); ++i) {
      CHECK(row[i] >= 0.0);
      CHECK(row[i] <= 1.0);
    }

  const Csv avg = read_csv(dir / "cycle_averaged.csv");
  REQUIRE(avg.rows.size() == 6);
  for (const auto& row : avg.rows) {
    double sum = 0.0;
    for (std::size_t i = 1; i < row.size(); ++i) sum += row[i];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  }

  const json report = json::parse(read_bytes(dir / "peak_report.json"));
  CHECK(report.at("peak_mhz").get<double>() == 3600.0);
  REQUIRE(report.contains("peak_spacing_ns"));
  // Six delay samples cannot resolve three peaks; the report degrades to null
  // instead of failing the run.
  for (const auto& [state, value] : report.at("peak_spacing_ns").items())
    CHECK(value.is_null());
}

TEST_CASE("compare produces both coupler studies on a shared grid") {
  const fs::path dir = workdir("compare");
  json cfg;
  cfg["sym_preset"] = preset_path("sym_comparison.json");
  cfg["asym_preset"] = preset_path("asym_comparison.json");
  cfg["grid_min_mhz"] = 3480.0;
  cfg["grid_max_mhz"] = 6000.0;
  cfg["grid_points"] = 401;
  cfg["output_dir"] = dir.string();
  write_text(dir / "cfg.json", cfg.dump());
  REQUIRE(run("compare -c " + q(dir / "cfg.json")) == 0);

  for (const std::string tag : {"sym", "asym"}) {
    CHECK(fs::exists(dir / (tag + "_spectrum.csv")));
    CHECK(fs::exists(dir / (tag + "_dfactor.csv")));
  }
  const Csv sym = read_csv(dir / "sym_zeta.csv");
  const Csv asym = read_csv(dir / "asym_zeta.csv");
  REQUIRE(sym.rows.size() == 401);
  REQUIRE(asym.rows.size() == 401);
  // Far-detuned idling buys the asymmetric coupler a much smaller residual
  // interaction than the symmetric one has at its own idle point.
  const double sym_idle = std::abs(column_at(sym, 3600.0, 1));
  const double asym_idle = std::abs(column_at(asym, 5800.0, 1));
  CHECK(asym_idle < 1.0);
  CHECK(sym_idle > asym_idle);
}

TEST_CASE("pulse calibrates a cosine waveform and writes its descriptor") {
  const fs::path dir = workdir("pulse");
  json cfg;
  cfg["preset"] = preset_path("measured_device.json");
  cfg["type"] = "cosine";
  cfg["t_cz_ns"] = 40.0;
  cfg["dt_ns"] = 0.1;
  cfg["idle_mhz"] = 2540.0;
  cfg["output_dir"] = dir.string();
  write_text(dir / "cfg.json", cfg.dump());
  REQUIRE(run("pulse -c " + q(dir / "cfg.json")) == 0);

  const json desc = json::parse(read_bytes(dir / "waveform.json"));
  CHECK(desc.at("type") == "fourier_cosine");
  const double amp = desc.at("amplitude_mhz").get<double>();
  CHECK(amp > 400.0);
  CHECK(amp < 1400.0);

  const Csv freq = read_csv(dir / "waveform.csv");
  const Csv flux = read_csv(dir / "waveform_flux.csv");
  REQUIRE(!freq.rows.empty());
  REQUIRE(freq.rows.size() == flux.rows.size());
  CHECK(freq.rows.front()[1] == doctest::Approx(2540.0).epsilon(1e-9));
  for (const auto& row : flux.rows) {
    CHECK(row[1] >= 0.0);
    CHECK(row[1] <= 0.5);
  }
}

TEST_CASE("fit recovers a perturbed coupling from synthetic spectroscopy") {
  const fs::path dir = workdir("fit");
  const DevicePreset truth_preset = load_preset("measured_device.json");
  const DeviceParams truth = truth_preset.device;

  SpectroscopyDataset data;
  for (double phi : {0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.44}) {
    const ModelPoint m = model_observables(truth, phi);
    data.flux.push_back(phi);
    data.f1.push_back(m.f1);
    data.f2.push_back(m.f2);
    data.fc.push_back(m.fc);
    data.zz.push_back(m.zz);
  }
  write_spectroscopy_csv((dir / "data.csv").string(), data);

  DevicePreset init = truth_preset;
  init.device.rho_1c *= 0.97;
  save_device_preset((dir / "init.json").string(), init);

  json cfg;
  cfg["preset"] = (dir / "init.json").string();
  cfg["dataset"] = (dir / "data.csv").string();
  cfg["free"] = {"rho_1c"};
  cfg["output_dir"] = dir.string();
  write_text(dir / "cfg.json", cfg.dump());
  REQUIRE(run("fit -c " + q(dir / "cfg.json")) == 0);

  const json result = json::parse(read_bytes(dir / "fit_result.json"));
  CHECK(result.at("converged").get<bool>());
  CHECK(result.at("objective").get<double>() < 1e-6);
  const double fitted = result.at("preset").at("rho_1c").get<double>();
  CHECK(fitted == doctest::Approx(truth.rho_1c).epsilon(1e-3));
}

TEST_CASE("rb fits two decay curves and propagates the gate error") {
  const fs::path dir = workdir("rb");
  const std::vector<int> depths{1, 2, 4, 8, 16, 32, 64, 128, 256, 512};
  const double p_rb = 0.995, p_irb = 0.990;
  const RBDataset rb =
      synthesize_rb_counts(p_rb, 0.70, 0.25, depths, 20000, 11);
  const RBDataset irb =
      synthesize_rb_counts(p_irb, 0.70, 0.25, depths, 20000, 12);

  auto dump = [&](const fs::path& path, const RBDataset& d) {
    std::ofstream out(path, std::ios::binary);
    out << "depth,successes,trials\n";
    for (std::size_t i = 0; i < d.size(); ++i)
      out << d.depths[i] << "," << d.successes[i] << "," << d.trials[i] << "\n";
  };
  dump(dir / "rb.csv", rb);
  dump(dir / "irb.csv", irb);

  json cfg;
  cfg["rb_csv"] = (dir / "rb.csv").string();
  cfg["irb_csv"] = (dir / "irb.csv").string();
  cfg["dimension"] = 4;
  cfg["samples"] = 20000;
  cfg["seed"] = 5;
  cfg["output_dir"] = dir.string();
  write_text(dir / "cfg.json", cfg.dump());
  REQUIRE(run("rb -c " + q(dir / "cfg.json")) == 0);

  const json result = json::parse(read_bytes(dir / "rb_result.json"));
  CHECK(result.at("rb_fit").at("p").get<double>() ==
        doctest::Approx(p_rb).epsilon(2e-3));
  CHECK(result.at("irb_fit").at("p").get<double>() ==
        doctest::Approx(p_irb).epsilon(2e-3));

  const json err = result.at("gate_error");
  const double expected = (3.0 / 4.0) * (1.0 - p_irb / p_rb);
  CHECK(err.at("point").get<double>() ==
        doctest::Approx(expected).epsilon(0.25));
  CHECK(err.at("lower").get<double>() <= err.at("mean").get<double>());
  CHECK(err.at("mean").get<double>() <= err.at("upper").get<double>());
  CHECK(err.at("seed").get<std::uint64_t>() == 5);
  CHECK(result.at("rb_fit").at("wilson_intervals").size() == depths.size());
}
