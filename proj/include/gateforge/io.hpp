#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gateforge/chain.hpp"
#include "gateforge/designer.hpp"
#include "gateforge/dynamics.hpp"
#include "gateforge/fourier.hpp"
#include "gateforge/waveform.hpp"

// Serialization and file plumbing for the command line tool: JSON artifacts,
// CSV tables for plotting, content digests, and atomic output writes.  All
// loaders throw std::runtime_error with a readable message on bad input.
namespace gateforge::io {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kWaveformFormat = "gateforge-wf-1";

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

std::string read_file(const std::string& path);
// writes to a sibling temp file, then renames over the target
void write_file_atomic(const std::string& path, const std::string& contents);

std::string to_json(const SegmentedWaveform& wf);
std::string to_json(const FourierWaveform& wf);
std::string to_json(const ModeStructure& ms);
std::string to_json(const GateReport& rep);

// either waveform kind, with `kind` saying which member is live
struct WaveformFile {
  std::string kind;
  SegmentedWaveform seg;
  FourierWaveform fourier;
};
WaveformFile parse_waveform(const std::string& text);
WaveformFile load_waveform(const std::string& path);

std::string trajectory_csv(const Trajectory& tr);
std::string phase_scan_csv(const std::vector<std::pair<double, double>>& scan);
std::string bound_scan_csv(const std::vector<BoundPoint>& pts, double period);
std::string gate_time_scan_csv(const std::vector<ScanPoint>& pts, double period);

// flat key = value text, '#' starts a comment
std::map<std::string, std::string> parse_config(const std::string& text);
std::map<std::string, std::string> load_config(const std::string& path);

// provenance sidecar written next to every file the tool produces
struct RunManifest {
  std::string command_line;
  std::string tool_version = kToolVersion;
  std::uint64_t seed = 0;
  std::string config_hash;  // digest of the resolved config text, empty if none
  std::string started_utc;
  std::string finished_utc;
  std::vector<std::pair<std::string, std::string>> inputs;   // path, digest
  std::vector<std::pair<std::string, std::string>> outputs;  // path, digest
};
std::string to_json(const RunManifest& m);
std::string utc_now();
// writes <output_path>.manifest.json; the payload file itself is untouched
void write_manifest(const std::string& output_path, const RunManifest& m);

}  // namespace gateforge::io
