#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "czsim/device.hpp"
#include "czsim/fitting.hpp"
#include "czsim/pulseshape.hpp"
#include "czsim/rbstats.hpp"

namespace czsim {

inline constexpr const char* kToolVersion = "0.1.0";

/// Shortest representation with 12 significant digits.
std::string format_value(double v, int significant = 12);

/// FNV-1a 64-bit hash of a file's bytes, hex-encoded. Used to stamp outputs
/// with the preset they came from.
std::string file_hash(const std::string& path);

/// Comment lines (`# key: value`) prepended to every CSV. LF line endings.
struct CsvMetadata {
  std::string preset_hash;  // empty = omit
  std::optional<std::uint64_t> seed;

  std::string render() const;
};

void write_csv(const std::string& path, const CsvMetadata& meta,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

/// Device preset stored as JSON; optional idle-point fields ride along so
/// study commands know where the device operates.
struct DevicePreset {
  DeviceParams device;
  std::optional<double> idle_flux;       // flux-quantum units
  std::optional<double> idle_freq_mhz;   // bare coupler frequency
  std::string description;
};

DevicePreset load_device_preset(const std::string& path);
void save_device_preset(const std::string& path, const DevicePreset& preset);

/// Same schema, parsed from an in-memory JSON string.
DevicePreset parse_device_preset(const std::string& json_text);
std::string render_device_preset(const DevicePreset& preset);

void write_waveform_csv(const std::string& path, const CsvMetadata& meta,
                        const Waveform& w);
/// JSON descriptor capturing how a waveform was generated (type, timing,
/// coefficients or lambda, pads).
struct WaveformDescriptor {
  std::string type;  // "fourier_cosine" | "awp" | "raw"
  double t_cz = 0.0;
  std::vector<double> coefficients;
  double lambda = 0.0;
  double start_freq = 0.0;
  double amplitude_mhz = 0.0;
  double pad_before = 0.0, pad_after = 0.0;
  double dt = 0.0;
};
void write_waveform_descriptor(const std::string& path,
                               const WaveformDescriptor& d);

RBDataset load_rb_csv(const std::string& path);
SpectroscopyDataset load_spectroscopy_csv(const std::string& path);
void write_spectroscopy_csv(const std::string& path,
                            const SpectroscopyDataset& data);

}  // namespace czsim
