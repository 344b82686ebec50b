#pragma once
// Waveform synthesis. Two search paths:
//   * segmented: quasi-Newton descent on the gate error over (detuning,
//     amplitudes, phases, segment fractions) with exact gradients; offset
//     phase insensitive designs instead solve the closure, carrier, and
//     pair-phase harmonic conditions as hard equalities.
//   * fourier: equality-constrained minimization of peak Rabi frequency or
//     pulse area over motional-closure kernel coordinates.
// Both run deterministic multi-starts; every returned design is re-scored
// by the dynamics module before the winner is chosen.

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "gateforge/chain.hpp"
#include "gateforge/dynamics.hpp"
#include "gateforge/fourier.hpp"
#include "gateforge/waveform.hpp"

namespace gateforge {

enum class DesignMethod { segmented, fourier };
enum class DesignObjective { infidelity, max_rabi, pulse_area };

struct SegmentedOptions {
  int n_seg = 10;
  double tau_g = 0.0;  // gate time, required > 0
  // detuning start window; both zero selects a chain-derived default
  double mu_lo = 0.0, mu_hi = 0.0;
  double omega_max = 8.0;        // amplitude start range cap
  bool shared_amplitude = true;  // one Rabi amplitude shared by all segments
  bool variable_durations = true;
  // > 0 pins every segment to this Rabi frequency (phase-only modulation)
  // and confines the detuning to the start window during the search
  double fixed_omega = 0.0;
};

struct FourierOptions {
  double tau_g = 0.0;    // gate time, required > 0
  int n_hi = 0;          // harmonic truncation; 0 -> default_truncation
  double mu_hint = -1.0; // resampling hint; < 0 -> dominant harmonic
  int grid_per_period = 64;  // objective grid density per shortest period
  // optional warm starts as full quadrature vectors (paired entries); they
  // occupy the lowest restart indices
  std::vector<Eigen::VectorXd> warm_c, warm_m;
};

struct DesignSpec {
  ChainConfig chain;
  GateTarget target;  // empty matrix -> global gate for chain.n_ions
  DesignMethod method = DesignMethod::segmented;
  DesignObjective objective = DesignObjective::infidelity;
  bool robust = false;
  int restarts = 0;  // 0 -> 64 for up to three ions, 256 beyond
  std::uint64_t seed = 20260819;
  double tol = 1e-6;  // converged iff the verified error <= tol
  int jobs = 0;       // worker cap; 0 -> hardware concurrency
  SegmentedOptions seg;
  FourierOptions fr;
};

struct DesignResult {
  DesignMethod method = DesignMethod::segmented;
  SegmentedWaveform seg_waveform;    // populated when method == segmented
  FourierWaveform fourier_waveform;  // populated when method == fourier
  GateReport report;                 // recomputed by dynamics at zero offset phase
  double objective_value = 0.0;
  // verification error: plain gate error, or the worst point of a 64-point
  // offset-phase grid for robust designs
  double epsilon = 0.0;
  bool converged = false;
  int restart_index = -1;
  int iterations = 0;
  // non-fatal quality notes, e.g. a solution whose motional excursion
  // leaves the Lamb-Dicke regime and is therefore not marked converged
  std::vector<std::string> warnings;
};

DesignResult design_segmented(const DesignSpec& spec);
DesignResult design_fourier(const DesignSpec& spec);
DesignResult design(const DesignSpec& spec);

struct ScanPoint {
  double tau_g = 0.0;
  double objective_value = 0.0;
  double epsilon = 0.0;
  bool converged = false;
};

// design_fourier per gate time, warm-starting each point with its
// predecessor's solution; per-point infeasibility is recorded rather than
// thrown
std::vector<ScanPoint> scan_gate_time(const DesignSpec& spec, const std::vector<double>& tau_list);

double pulse_area(const SegmentedWaveform& wf);
double pulse_area(const FourierWaveform& wf, int grid_per_period = 64);

}  // namespace gateforge
