#include "gateforge/io.hpp"

#include <openssl/evp.h>
#include <unistd.h>

#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace gateforge::io {

namespace {

using nlohmann::json;

std::string hex_of(const unsigned char* md, unsigned int len) {
  static const char* digits = "0123456789abcdef";
  std::string out(2 * len, '0');
  for (unsigned int i = 0; i < len; ++i) {
    out[2 * i] = digits[md[i] >> 4];
    out[2 * i + 1] = digits[md[i] & 0xF];
  }
  return out;
}

json complex_pair(const Cx& z) { return json::array({z.real(), z.imag()}); }

double num_at(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number())
    throw std::runtime_error(std::string("waveform file: missing numeric field '") + key + "'");
  return j[key].get<double>();
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 digest failed");
  return hex_of(md, len);
}

std::string sha256_file(const std::string& path) { return sha256_hex(read_file(path)); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw std::runtime_error("read failed: " + path);
  return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp" + std::to_string(static_cast<unsigned>(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("rename failed for " + path + ": " + ec.message());
  }
}

std::string to_json(const SegmentedWaveform& wf) {
  json j;
  j["format"] = kWaveformFormat;
  j["kind"] = "segmented";
  j["mu"] = wf.mu;
  j["phi0"] = wf.phi0;
  json segs = json::array();
  for (const auto& s : wf.segments) segs.push_back(json::array({s.tau, s.omega, s.phi}));
  j["segments"] = std::move(segs);
  return j.dump(2) + "\n";
}

std::string to_json(const FourierWaveform& wf) {
  json j;
  j["format"] = kWaveformFormat;
  j["kind"] = "fourier";
  j["tau_g"] = wf.tau_g;
  j["n_lo"] = wf.n_lo;
  j["n_hi"] = wf.n_hi;
  j["mu"] = wf.mu;
  j["phi0"] = wf.phi0;
  json cs = json::array();
  for (const auto& c : wf.coeffs) cs.push_back(complex_pair(c));
  j["coeffs"] = std::move(cs);
  return j.dump(2) + "\n";
}

std::string to_json(const ModeStructure& ms) {
  json j;
  j["n_ions"] = ms.positions.size();
  j["positions"] = std::vector<double>(ms.positions.data(),
                                       ms.positions.data() + ms.positions.size());
  j["frequencies"] = std::vector<double>(ms.frequencies.data(),
                                         ms.frequencies.data() + ms.frequencies.size());
  json vecs = json::array(), eta = json::array();
  for (Eigen::Index i = 0; i < ms.vectors.rows(); ++i) {
    json row = json::array(), erow = json::array();
    for (Eigen::Index m = 0; m < ms.vectors.cols(); ++m) {
      row.push_back(ms.vectors(i, m));
      erow.push_back(ms.lamb_dicke(i, m));
    }
    vecs.push_back(std::move(row));
    eta.push_back(std::move(erow));
  }
  j["vectors"] = std::move(vecs);
  j["lamb_dicke"] = std::move(eta);
  return j.dump(2) + "\n";
}

std::string to_json(const GateReport& rep) {
  json j;
  j["infidelity"] = rep.infidelity;
  j["closure_error"] = rep.closure_error;
  j["phase_error"] = rep.phase_error;
  j["carrier_error"] = rep.carrier_error;
  j["carrier_phase"] = rep.carrier_phase;
  j["max_abs_alpha"] = rep.max_abs_alpha;
  json th = json::array();
  for (Eigen::Index i = 0; i < rep.theta.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < rep.theta.cols(); ++k) row.push_back(rep.theta(i, k));
    th.push_back(std::move(row));
  }
  j["theta"] = std::move(th);
  j["theta_modes"] = std::vector<double>(rep.theta_modes.data(),
                                         rep.theta_modes.data() + rep.theta_modes.size());
  json al = json::array();
  for (Eigen::Index i = 0; i < rep.alpha.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index m = 0; m < rep.alpha.cols(); ++m) row.push_back(complex_pair(rep.alpha(i, m)));
    al.push_back(std::move(row));
  }
  j["alpha"] = std::move(al);
  return j.dump(2) + "\n";
}

WaveformFile parse_waveform(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("waveform file: invalid JSON: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != kWaveformFormat)
    throw std::runtime_error("waveform file: expected format tag '" +
                             std::string(kWaveformFormat) + "'");
  WaveformFile out;
  out.kind = j.value("kind", "");
  if (out.kind == "segmented") {
    out.seg.mu = num_at(j, "mu");
    out.seg.phi0 = j.contains("phi0") ? num_at(j, "phi0") : 0.0;
    if (!j.contains("segments") || !j["segments"].is_array())
      throw std::runtime_error("waveform file: missing 'segments' array");
    for (const auto& s : j["segments"]) {
      if (!s.is_array() || s.size() != 3)
        throw std::runtime_error("waveform file: each segment is [tau, omega, phi]");
      out.seg.segments.push_back(
          {s[0].get<double>(), s[1].get<double>(), s[2].get<double>()});
    }
    out.seg.validate();
  } else if (out.kind == "fourier") {
    out.fourier.tau_g = num_at(j, "tau_g");
    out.fourier.n_lo = static_cast<int>(num_at(j, "n_lo"));
    out.fourier.n_hi = static_cast<int>(num_at(j, "n_hi"));
    out.fourier.mu = j.contains("mu") ? num_at(j, "mu") : 0.0;
    out.fourier.phi0 = j.contains("phi0") ? num_at(j, "phi0") : 0.0;
    if (!j.contains("coeffs") || !j["coeffs"].is_array())
      throw std::runtime_error("waveform file: missing 'coeffs' array");
    for (const auto& c : j["coeffs"]) {
      if (!c.is_array() || c.size() != 2)
        throw std::runtime_error("waveform file: each coefficient is [re, im]");
      out.fourier.coeffs.emplace_back(c[0].get<double>(), c[1].get<double>());
    }
    out.fourier.validate();
  } else {
    throw std::runtime_error("waveform file: kind must be 'segmented' or 'fourier'");
  }
  return out;
}

WaveformFile load_waveform(const std::string& path) { return parse_waveform(read_file(path)); }

std::string trajectory_csv(const Trajectory& tr) {
  std::ostringstream out;
  out.precision(17);
  out << "t,mode,alpha_re,alpha_im,theta\n";
  for (Eigen::Index i = 0; i < tr.t.size(); ++i)
    for (Eigen::Index m = 0; m < tr.alpha.cols(); ++m)
      out << tr.t[i] << ',' << m << ',' << tr.alpha(i, m).real() << ',' << tr.alpha(i, m).imag()
          << ',' << tr.theta_modes(i, m) << '\n';
  return out.str();
}

std::string phase_scan_csv(const std::vector<std::pair<double, double>>& scan) {
  std::ostringstream out;
  out.precision(17);
  out << "phi0,epsilon\n";
  for (const auto& [ph, eps] : scan) out << ph << ',' << eps << '\n';
  return out.str();
}

std::string bound_scan_csv(const std::vector<BoundPoint>& pts, double period) {
  std::ostringstream out;
  out.precision(17);
  out << "tau_g_periods,lambda_min,lambda_max\n";
  for (const auto& p : pts)
    out << p.tau_g / period << ',' << p.lambda_min << ',' << p.lambda_max << '\n';
  return out.str();
}

std::string gate_time_scan_csv(const std::vector<ScanPoint>& pts, double period) {
  std::ostringstream out;
  out.precision(17);
  out << "tau_g_periods,objective,epsilon,converged\n";
  for (const auto& p : pts)
    out << p.tau_g / period << ',' << p.objective_value << ',' << p.epsilon << ','
        << (p.converged ? 1 : 0) << '\n';
  return out.str();
}

std::map<std::string, std::string> parse_config(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error("config line " + std::to_string(lineno) + ": empty key");
    out[key] = val;
  }
  return out;
}

std::map<std::string, std::string> load_config(const std::string& path) {
  return parse_config(read_file(path));
}

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string to_json(const RunManifest& m) {
  json j;
  j["command_line"] = m.command_line;
  j["tool_version"] = m.tool_version;
  j["seed"] = m.seed;
  j["config_hash"] = m.config_hash;
  j["started_utc"] = m.started_utc;
  j["finished_utc"] = m.finished_utc;
  json ins = json::array(), outs = json::array();
  for (const auto& [p, d] : m.inputs) ins.push_back({{"path", p}, {"sha256", d}});
  for (const auto& [p, d] : m.outputs) outs.push_back({{"path", p}, {"sha256", d}});
  j["inputs"] = std::move(ins);
  j["outputs"] = std::move(outs);
  return j.dump(2) + "\n";
}

void write_manifest(const std::string& output_path, const RunManifest& m) {
  write_file_atomic(output_path + ".manifest.json", to_json(m));
}

}  // namespace gateforge::io
