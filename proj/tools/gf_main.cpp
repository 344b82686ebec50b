// gf: pulse design and verification for global entangling gates on ion chains.
//
// Exit codes: 0 success (verify: threshold met), 1 verify threshold exceeded,
// 2 usage error, 3 infeasible design request (the computed bound is printed),
// 4 I/O or file format failure.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gateforge/chain.hpp"
#include "gateforge/designer.hpp"
#include "gateforge/dynamics.hpp"
#include "gateforge/fourier.hpp"
#include "gateforge/io.hpp"
#include "gateforge/waveform.hpp"

namespace gf = gateforge;

namespace {

constexpr double kPeriod = 2.0 * M_PI;  // lowest mode has unit frequency
constexpr std::uint64_t kDefaultSeed = 20260819ULL;

// records inputs/outputs so every written file gets a provenance sidecar
struct Session {
  gf::io::RunManifest man;

  Session(int argc, char** argv) {
    std::ostringstream cmd;
    for (int i = 0; i < argc; ++i) {
      if (i) cmd << ' ';
      const std::string a = argv[i];
      if (a.find(' ') != std::string::npos)
        cmd << '"' << a << '"';
      else
        cmd << a;
    }
    man.command_line = cmd.str();
    man.started_utc = gf::io::utc_now();
  }

  std::string input(const std::string& path) {
    const std::string text = gf::io::read_file(path);
    man.inputs.emplace_back(path, gf::io::sha256_hex(text));
    return text;
  }

  void emit(const std::string& path, const std::string& data) {
    gf::io::write_file_atomic(path, data);
    man.outputs.emplace_back(path, gf::io::sha256_hex(data));
  }

  // empty path means stdout and no manifest entry
  void emit_or_print(const std::string& path, const std::string& data) {
    if (path.empty())
      std::cout << data;
    else
      emit(path, data);
  }

  void finish() {
    man.finished_utc = gf::io::utc_now();
    for (const auto& [path, digest] : man.outputs) {
      (void)digest;
      gf::io::write_manifest(path, man);
    }
  }
};

std::uint64_t resolve_seed(const std::string& flag_value) {
  std::string text = flag_value;
  if (text.empty()) {
    if (const char* env = std::getenv("GATEFORGE_SEED")) text = env;
  }
  if (text.empty()) return kDefaultSeed;
  try {
    size_t used = 0;
    const std::uint64_t v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("seed must be a non-negative integer, got '" + text + "'");
  }
}

void hash_config(Session& ses, const CLI::App* sub) {
  const CLI::Option* cfg = sub->get_config_ptr();
  if (cfg && cfg->count() > 0) {
    const std::string path = cfg->as<std::string>();
    ses.man.config_hash = gf::io::sha256_file(path);
    ses.man.inputs.emplace_back(path, ses.man.config_hash);
  }
}

std::string frequencies_line(const gf::ModeStructure& ms) {
  std::ostringstream out;
  out.precision(17);
  out << '[';
  for (Eigen::Index m = 0; m < ms.frequencies.size(); ++m) {
    if (m) out << ", ";
    out << ms.frequencies[m];
  }
  out << "]\n";
  return out.str();
}

struct VerifySummary {
  double eps_at_phi0 = 0.0;
  double eps_max = 0.0;
  double max_abs_alpha = 0.0;
};

template <class Waveform>
VerifySummary verify_one(const Waveform& wf, const gf::ModeStructure& ms,
                         const gf::GateTarget& tgt, int grid, Session& ses,
                         const std::string& report_path, const std::string& traj_path) {
  const gf::GateReport rep = gf::evaluate(wf, ms, tgt);
  VerifySummary s;
  s.eps_at_phi0 = rep.infidelity;
  s.eps_max = rep.infidelity;
  s.max_abs_alpha = rep.max_abs_alpha;
  if (grid > 1)
    for (const auto& [ph, e] : gf::phase_scan(wf, ms, tgt, grid)) {
      (void)ph;
      s.eps_max = std::max(s.eps_max, e);
    }
  if (!report_path.empty()) ses.emit(report_path, gf::io::to_json(rep));
  if (!traj_path.empty()) ses.emit(traj_path, gf::io::trajectory_csv(gf::trajectory(wf, ms)));
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pulse design and verification for global entangling gates on ion chains"};
  app.require_subcommand(1);

  // ---- modes ----
  auto* c_modes = app.add_subcommand("modes", "compute transverse normal modes of a chain");
  int mo_ions = 0;
  double mo_eta = 0.13;
  std::string mo_out;
  c_modes->add_option("--ions", mo_ions, "number of ions (>= 1)")->required();
  c_modes->add_option("--eta-com", mo_eta, "center-of-mass Lamb-Dicke factor");
  c_modes->add_option("-o,--output", mo_out, "write full mode data as JSON here");

  // ---- design ----
  auto* c_design = app.add_subcommand("design", "search for a gate waveform");
  c_design->set_config("--config", "", "flat key = value option file");
  int de_ions = 2, de_segments = 10, de_nhi = 0, de_restarts = 0, de_jobs = 0;
  double de_eta = 0.13, de_taug = 0.0, de_omega_max = 2.0, de_tol = 1e-6, de_mu_hint = -1.0;
  bool de_robust = false;
  std::string de_method = "segmented", de_objective = "infidelity", de_seed, de_out, de_report;
  c_design->add_option("--ions", de_ions, "number of ions")->required();
  c_design->add_option("--tau-g", de_taug, "gate time in lowest-mode periods")->required();
  c_design->add_option("--method", de_method, "segmented | fourier")
      ->check(CLI::IsMember({"segmented", "fourier"}));
  c_design->add_option("--objective", de_objective,
                       "infidelity | max-rabi | pulse-area (fourier only)")
      ->check(CLI::IsMember({"infidelity", "max-rabi", "pulse-area"}));
  c_design->add_flag("--robust", de_robust, "make the gate offset-phase insensitive");
  c_design->add_option("--segments", de_segments, "segment count (segmented method)");
  c_design->add_option("--n-hi", de_nhi, "harmonic truncation (fourier method, 0 = auto)");
  c_design->add_option("--mu-hint", de_mu_hint, "carrier detuning hint stored with the result");
  c_design->add_option("--omega-max", de_omega_max, "amplitude bound for random starts");
  c_design->add_option("--restarts", de_restarts, "restart count (0 = default per chain size)");
  c_design->add_option("--seed", de_seed, "RNG seed (also via GATEFORGE_SEED)");
  c_design->add_option("--tol", de_tol, "convergence threshold on the gate error");
  c_design->add_option("--jobs", de_jobs, "worker cap, 0 = all cores");
  c_design->add_option("--eta-com", de_eta, "center-of-mass Lamb-Dicke factor");
  c_design->add_option("-o,--output", de_out, "waveform JSON path")->required();
  c_design->add_option("--report", de_report, "gate report JSON path");

  // ---- bound-scan ----
  auto* c_bound = app.add_subcommand("bound-scan",
                                     "scan the three-ion pair-phase form over gate time");
  int bs_ions = 3, bs_points = 61, bs_nhi = 0;
  double bs_eta = 0.13, bs_lo = 1.4, bs_hi = 2.0;
  bool bs_robust = false;
  std::string bs_out;
  c_bound->add_option("--ions", bs_ions, "must be 3");
  c_bound->add_option("--tau-min", bs_lo, "scan start in periods");
  c_bound->add_option("--tau-max", bs_hi, "scan end in periods");
  c_bound->add_option("--points", bs_points, "grid size")->check(CLI::PositiveNumber);
  c_bound->add_option("--n-hi", bs_nhi, "harmonic truncation (0 = auto at tau-max)");
  c_bound->add_flag("--robust", bs_robust, "use the offset-insensitive feasible set");
  c_bound->add_option("--eta-com", bs_eta, "center-of-mass Lamb-Dicke factor");
  c_bound->add_option("-o,--output", bs_out,
                      "CSV path (columns tau_g_periods,lambda_min,lambda_max)");

  // ---- sample ----
  auto* c_sample = app.add_subcommand("sample", "discretize a harmonic waveform into segments");
  int sa_segments = 100;
  double sa_mu = 0.0;
  std::string sa_in, sa_method = "sinc", sa_out;
  c_sample->add_option("--in", sa_in, "fourier waveform JSON")->required();
  c_sample->add_option("--segments", sa_segments, "segment count")->check(CLI::PositiveNumber);
  c_sample->add_option("--method", sa_method, "sinc | midpoint | left")
      ->check(CLI::IsMember({"sinc", "midpoint", "left"}));
  c_sample->add_option("--mu", sa_mu, "carrier detuning (0 = use the file's hint)");
  c_sample->add_option("-o,--output", sa_out, "segmented waveform JSON path")->required();

  // ---- verify ----
  auto* c_verify = app.add_subcommand("verify", "evaluate a waveform against the gate target");
  int ve_ions = 2, ve_grid = 64;
  double ve_eta = 0.13, ve_threshold = 1e-6;
  std::string ve_in, ve_report, ve_traj;
  c_verify->add_option("--in", ve_in, "waveform JSON (either kind)")->required();
  c_verify->add_option("--ions", ve_ions, "number of ions")->required();
  c_verify->add_option("--threshold", ve_threshold, "exit 0 iff max gate error is below this");
  c_verify->add_option("--phase-grid", ve_grid,
                       "offset phases checked over one turn (1 = stored phase only)")
      ->check(CLI::PositiveNumber);
  c_verify->add_option("--eta-com", ve_eta, "center-of-mass Lamb-Dicke factor");
  c_verify->add_option("--report", ve_report, "gate report JSON path");
  c_verify->add_option("--trajectory", ve_traj,
                       "CSV path (columns t,mode,alpha_re,alpha_im,theta)");

  // ---- scan-gate-time ----
  auto* c_scan = app.add_subcommand("scan-gate-time",
                                    "redesign a gate over a grid of gate times");
  c_scan->set_config("--config", "", "flat key = value option file");
  int sc_ions = 2, sc_points = 20, sc_nhi = 0, sc_restarts = 0, sc_jobs = 0;
  double sc_eta = 0.13, sc_lo = 1.0, sc_hi = 3.0, sc_tol = 1e-6;
  bool sc_robust = false;
  std::string sc_objective = "max-rabi", sc_seed, sc_out;
  c_scan->add_option("--ions", sc_ions, "number of ions")->required();
  c_scan->add_option("--tau-min", sc_lo, "scan start in periods");
  c_scan->add_option("--tau-max", sc_hi, "scan end in periods");
  c_scan->add_option("--points", sc_points, "grid size")->check(CLI::PositiveNumber);
  c_scan->add_option("--objective", sc_objective, "infidelity | max-rabi | pulse-area")
      ->check(CLI::IsMember({"infidelity", "max-rabi", "pulse-area"}));
  c_scan->add_flag("--robust", sc_robust, "make each gate offset-phase insensitive");
  c_scan->add_option("--n-hi", sc_nhi, "harmonic truncation (0 = auto at tau-max)");
  c_scan->add_option("--restarts", sc_restarts, "restart count per point (0 = default)");
  c_scan->add_option("--seed", sc_seed, "RNG seed (also via GATEFORGE_SEED)");
  c_scan->add_option("--tol", sc_tol, "convergence threshold on the gate error");
  c_scan->add_option("--jobs", sc_jobs, "worker cap, 0 = all cores");
  c_scan->add_option("--eta-com", sc_eta, "center-of-mass Lamb-Dicke factor");
  c_scan->add_option("-o,--output", sc_out,
                     "CSV path (columns tau_g_periods,objective,epsilon,converged)")
      ->required();

  // ---- ellipse ----
  auto* c_ellipse = app.add_subcommand(
      "ellipse", "emit the phase-space chord endpoints of a constant drive tone");
  int el_points = 256;
  double el_mu = 1.2, el_nu = 1.0, el_t0 = 0.0, el_tau = 0.5;
  std::string el_out;
  c_ellipse->add_option("--mu", el_mu, "drive detuning in lowest-mode units");
  c_ellipse->add_option("--nu", el_nu, "mode frequency in lowest-mode units");
  c_ellipse->add_option("--t0", el_t0, "window start in periods");
  c_ellipse->add_option("--tau", el_tau, "window length in periods");
  c_ellipse->add_option("--points", el_points, "phase grid size")->check(CLI::PositiveNumber);
  c_ellipse->add_option("-o,--output", el_out, "CSV path (columns phi,re,im)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  Session ses(argc, argv);
  try {
    if (app.got_subcommand(c_modes)) {
      const gf::ModeStructure ms = gf::normal_modes({mo_ions, mo_eta});
      if (mo_out.empty())
        std::cout << frequencies_line(ms);
      else
        ses.emit(mo_out, gf::io::to_json(ms));
    } else if (app.got_subcommand(c_design)) {
      hash_config(ses, c_design);
      gf::DesignSpec spec;
      spec.chain = {de_ions, de_eta};
      spec.method = de_method == "fourier" ? gf::DesignMethod::fourier
                                           : gf::DesignMethod::segmented;
      spec.objective = de_objective == "max-rabi"     ? gf::DesignObjective::max_rabi
                       : de_objective == "pulse-area" ? gf::DesignObjective::pulse_area
                                                      : gf::DesignObjective::infidelity;
      if (spec.method == gf::DesignMethod::segmented &&
          spec.objective != gf::DesignObjective::infidelity)
        throw std::invalid_argument("segmented designs optimize infidelity only");
      spec.robust = de_robust;
      spec.restarts = de_restarts;
      spec.seed = resolve_seed(de_seed);
      spec.tol = de_tol;
      spec.jobs = de_jobs;
      spec.seg.n_seg = de_segments;
      spec.seg.tau_g = de_taug * kPeriod;
      spec.seg.omega_max = de_omega_max;
      spec.fr.tau_g = de_taug * kPeriod;
      spec.fr.n_hi = de_nhi;
      spec.fr.mu_hint = de_mu_hint;
      ses.man.seed = spec.seed;

      const gf::DesignResult res = gf::design(spec);
      ses.emit(de_out, res.method == gf::DesignMethod::segmented
                           ? gf::io::to_json(res.seg_waveform)
                           : gf::io::to_json(res.fourier_waveform));
      if (!de_report.empty()) ses.emit(de_report, gf::io::to_json(res.report));
      for (const std::string& w : res.warnings) std::cerr << "warning: " << w << "\n";
      std::cout << "epsilon=" << res.epsilon << " objective=" << res.objective_value
                << " converged=" << (res.converged ? 1 : 0)
                << " restart=" << res.restart_index << "\n";
    } else if (app.got_subcommand(c_bound)) {
      if (bs_ions != 3) throw std::invalid_argument("bound-scan is defined for --ions 3");
      if (bs_points < 2 || bs_hi <= bs_lo)
        throw std::invalid_argument("need tau-max > tau-min and at least 2 points");
      const gf::ModeStructure ms = gf::normal_modes({bs_ions, bs_eta});
      std::vector<double> taus(static_cast<size_t>(bs_points));
      for (int i = 0; i < bs_points; ++i)
        taus[static_cast<size_t>(i)] =
            (bs_lo + (bs_hi - bs_lo) * i / (bs_points - 1)) * kPeriod;
      const int nhi = bs_nhi > 0 ? bs_nhi : gf::default_truncation(ms, taus.back());
      const auto pts = gf::three_qubit_bound_scan(ms, taus, nhi, bs_robust);
      ses.emit_or_print(bs_out, gf::io::bound_scan_csv(pts, kPeriod));
    } else if (app.got_subcommand(c_sample)) {
      const gf::io::WaveformFile in = gf::io::parse_waveform(ses.input(sa_in));
      if (in.kind != "fourier")
        throw std::invalid_argument("sample needs a fourier waveform as input");
      double mu = sa_mu != 0.0 ? sa_mu : in.fourier.mu;
      if (mu <= 0.0)
        throw std::invalid_argument("no carrier detuning: pass --mu or store one in the file");
      const gf::SegmentedWaveform seg =
          sa_method == "sinc"
              ? gf::sample_sinc(in.fourier, sa_segments, mu)
              : gf::sample_naive(in.fourier, sa_segments, mu,
                                 sa_method == "left" ? gf::SampleRule::left
                                                     : gf::SampleRule::midpoint);
      ses.emit(sa_out, gf::io::to_json(seg));
    } else if (app.got_subcommand(c_verify)) {
      const gf::io::WaveformFile in = gf::io::parse_waveform(ses.input(ve_in));
      const gf::ModeStructure ms = gf::normal_modes({ve_ions, ve_eta});
      const gf::GateTarget tgt = gf::GateTarget::global_gate(ve_ions);
      const VerifySummary s =
          in.kind == "segmented"
              ? verify_one(in.seg, ms, tgt, ve_grid, ses, ve_report, ve_traj)
              : verify_one(in.fourier, ms, tgt, ve_grid, ses, ve_report, ve_traj);
      std::cout << "epsilon_max=" << s.eps_max << " epsilon_at_phi0=" << s.eps_at_phi0
                << " max_abs_alpha=" << s.max_abs_alpha << " threshold=" << ve_threshold
                << "\n";
      ses.finish();
      return s.eps_max < ve_threshold ? 0 : 1;
    } else if (app.got_subcommand(c_scan)) {
      hash_config(ses, c_scan);
      if (sc_points < 2 || sc_hi <= sc_lo)
        throw std::invalid_argument("need tau-max > tau-min and at least 2 points");
      gf::DesignSpec spec;
      spec.chain = {sc_ions, sc_eta};
      spec.method = gf::DesignMethod::fourier;
      spec.objective = sc_objective == "infidelity"  ? gf::DesignObjective::infidelity
                       : sc_objective == "pulse-area" ? gf::DesignObjective::pulse_area
                                                      : gf::DesignObjective::max_rabi;
      spec.robust = sc_robust;
      spec.restarts = sc_restarts;
      spec.seed = resolve_seed(sc_seed);
      spec.tol = sc_tol;
      spec.jobs = sc_jobs;
      spec.fr.n_hi = sc_nhi;
      ses.man.seed = spec.seed;
      std::vector<double> taus(static_cast<size_t>(sc_points));
      for (int i = 0; i < sc_points; ++i)
        taus[static_cast<size_t>(i)] =
            (sc_lo + (sc_hi - sc_lo) * i / (sc_points - 1)) * kPeriod;
      const auto pts = gf::scan_gate_time(spec, taus);
      ses.emit(sc_out, gf::io::gate_time_scan_csv(pts, kPeriod));
    } else if (app.got_subcommand(c_ellipse)) {
      const auto pts = gf::displacement_ellipse(el_mu, el_nu, el_t0 * kPeriod,
                                                el_tau * kPeriod, el_points);
      std::ostringstream csv;
      csv.precision(17);
      csv << "phi,re,im\n";
      for (const auto& [phi, z] : pts)
        csv << phi << ',' << z.real() << ',' << z.imag() << '\n';
      ses.emit_or_print(el_out, csv.str());
    }
    ses.finish();
    return 0;
  } catch (const gf::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
