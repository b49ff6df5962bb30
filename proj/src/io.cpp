#include "czsim/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace czsim {

using nlohmann::json;

std::string format_value(double v, int significant) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", significant, v);
  return buf;
}

std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file for hashing: " + path);
  std::uint64_t h = 1469598103934665603ull;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string CsvMetadata::render() const {
  std::string out;
  out += "# tool_version: ";
  out += kToolVersion;
  out += "\n";
  if (!preset_hash.empty()) out += "# preset_hash: " + preset_hash + "\n";
  if (seed) out += "# seed: " + std::to_string(*seed) + "\n";
  return out;
}

void write_csv(const std::string& path, const CsvMetadata& meta,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path, std::ios::binary);  // binary keeps LF on any platform
  if (!out) throw ConfigError("cannot open output file: " + path);
  out << meta.render();
  for (std::size_t i = 0; i < header.size(); ++i)
    out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw ConfigError("csv row width does not match header");
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << format_value(row[i]);
    out << "\n";
  }
}

namespace {

double require_number(const json& j, const std::string& path) {
  const json* p = &j;
  std::string walked;
  std::istringstream keys(path);
  std::string key;
  while (std::getline(keys, key, '.')) {
    if (!p->is_object() || !p->contains(key))
      throw ConfigError("preset: missing field " + path);
    p = &(*p)[key];
    walked += walked.empty() ? key : "." + key;
  }
  if (!p->is_number()) throw ConfigError("preset: field " + path + " must be a number");
  return p->get<double>();
}

TransmonParams parse_transmon(const json& j, const std::string& prefix) {
  TransmonParams t;
  t.bare_frequency = require_number(j, prefix + ".frequency_mhz");
  t.anharmonicity = require_number(j, prefix + ".anharmonicity_mhz");
  if (j.contains(prefix) && j.at(prefix).contains("levels"))
    t.levels = j.at(prefix).at("levels").get<int>();
  return t;
}

}  // namespace

DevicePreset parse_device_preset(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("preset: invalid JSON: ") + e.what());
  }
  DevicePreset p;
  p.device.q1 = parse_transmon(j, "q1");
  p.device.q2 = parse_transmon(j, "q2");
  p.device.coupler.ej_sum = require_number(j, "coupler.ej_sum_mhz");
  p.device.coupler.ec = require_number(j, "coupler.ec_mhz");
  p.device.coupler.jj_ratio = require_number(j, "coupler.jj_ratio");
  if (j.at("coupler").contains("levels"))
    p.device.coupler.levels = j.at("coupler").at("levels").get<int>();
  p.device.rho_12 = require_number(j, "rho_12");
  p.device.rho_1c = require_number(j, "rho_1c");
  p.device.rho_2c = require_number(j, "rho_2c");
  if (j.contains("idle_flux")) p.idle_flux = j.at("idle_flux").get<double>();
  if (j.contains("idle_frequency_mhz"))
    p.idle_freq_mhz = j.at("idle_frequency_mhz").get<double>();
  if (j.contains("description"))
    p.description = j.at("description").get<std::string>();
  p.device.validate();
  return p;
}

DevicePreset load_device_preset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open preset file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_device_preset(buf.str());
}

std::string render_device_preset(const DevicePreset& p) {
  json j;
  if (!p.description.empty()) j["description"] = p.description;
  j["q1"] = {{"frequency_mhz", p.device.q1.bare_frequency},
             {"anharmonicity_mhz", p.device.q1.anharmonicity},
             {"levels", p.device.q1.levels}};
  j["q2"] = {{"frequency_mhz", p.device.q2.bare_frequency},
             {"anharmonicity_mhz", p.device.q2.anharmonicity},
             {"levels", p.device.q2.levels}};
  j["coupler"] = {{"ej_sum_mhz", p.device.coupler.ej_sum},
                  {"ec_mhz", p.device.coupler.ec},
                  {"jj_ratio", p.device.coupler.jj_ratio},
                  {"levels", p.device.coupler.levels}};
  j["rho_12"] = p.device.rho_12;
  j["rho_1c"] = p.device.rho_1c;
  j["rho_2c"] = p.device.rho_2c;
  if (p.idle_flux) j["idle_flux"] = *p.idle_flux;
  if (p.idle_freq_mhz) j["idle_frequency_mhz"] = *p.idle_freq_mhz;
  return j.dump(2) + "\n";
}

void save_device_preset(const std::string& path, const DevicePreset& preset) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + path);
  out << render_device_preset(preset);
}

void write_waveform_csv(const std::string& path, const CsvMetadata& meta,
                        const Waveform& w) {
  w.validate();
  const char* unit = nullptr;
  switch (w.unit) {
    case WaveformUnit::CouplerFrequencyMHz: unit = "mhz"; break;
    case WaveformUnit::FluxQuantum: unit = "phi0"; break;
    case WaveformUnit::NormalizedAmplitude: unit = "normalized"; break;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + path);
  out << meta.render() << "t_ns,value,unit\n";
  for (std::size_t i = 0; i < w.samples.size(); ++i)
    out << format_value(w.pad_before + w.dt * static_cast<double>(i)) << ","
        << format_value(w.samples[i]) << "," << unit << "\n";
}

void write_waveform_descriptor(const std::string& path,
                               const WaveformDescriptor& d) {
  json j;
  j["type"] = d.type;
  j["t_cz_ns"] = d.t_cz;
  if (!d.coefficients.empty()) j["coefficients"] = d.coefficients;
  if (d.lambda > 0.0) j["lambda"] = d.lambda;
  if (d.start_freq > 0.0) j["start_frequency_mhz"] = d.start_freq;
  if (d.amplitude_mhz > 0.0) j["amplitude_mhz"] = d.amplitude_mhz;
  j["pad_before_ns"] = d.pad_before;
  j["pad_after_ns"] = d.pad_after;
  j["dt_ns"] = d.dt;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + path);
  out << j.dump(2) << "\n";
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

std::vector<std::vector<std::string>> read_csv_rows(const std::string& path,
                                                    const std::string& header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open input file: " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool saw_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!saw_header) {
      if (line != header)
        throw ConfigError(path + ": expected header '" + header + "', got '" +
                          line + "'");
      saw_header = true;
      continue;
    }
    rows.push_back(split_csv_line(line));
  }
  if (!saw_header) throw ConfigError(path + ": missing header row");
  return rows;
}

}  // namespace

RBDataset load_rb_csv(const std::string& path) {
  RBDataset data;
  for (const auto& row : read_csv_rows(path, "depth,successes,trials")) {
    if (row.size() != 3) throw ConfigError(path + ": malformed row");
    try {
      data.depths.push_back(std::stoi(row[0]));
      data.successes.push_back(std::stoll(row[1]));
      data.trials.push_back(std::stoll(row[2]));
    } catch (const std::exception&) {
      throw ConfigError(path + ": non-numeric field in row");
    }
  }
  data.validate();
  return data;
}

SpectroscopyDataset load_spectroscopy_csv(const std::string& path) {
  SpectroscopyDataset data;
  auto parse_opt = [&](const std::string& s) -> std::optional<double> {
    if (s.empty()) return std::nullopt;
    try {
      return std::stod(s);
    } catch (const std::exception&) {
      throw ConfigError(path + ": non-numeric field '" + s + "'");
    }
  };
  for (const auto& row : read_csv_rows(path, "flux,f1,f2,fc,zeta")) {
    if (row.size() != 5) throw ConfigError(path + ": malformed row");
    const auto flux = parse_opt(row[0]);
    if (!flux) throw ConfigError(path + ": flux column may not be blank");
    data.flux.push_back(*flux);
    data.f1.push_back(parse_opt(row[1]));
    data.f2.push_back(parse_opt(row[2]));
    data.fc.push_back(parse_opt(row[3]));
    data.zz.push_back(parse_opt(row[4]));
  }
  data.validate();
  return data;
}

void write_spectroscopy_csv(const std::string& path,
                            const SpectroscopyDataset& data) {
  data.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + path);
  out << "flux,f1,f2,fc,zeta\n";
  auto cell = [&](const std::optional<double>& v) {
    return v ? format_value(*v) : std::string();
  };
  for (std::size_t i = 0; i < data.size(); ++i)
    out << format_value(data.flux[i]) << "," << cell(data.f1[i]) << ","
        << cell(data.f2[i]) << "," << cell(data.fc[i]) << ","
        << cell(data.zz[i]) << "\n";
}

}  // namespace czsim
