#pragma once
// Ground-truth gate dynamics: per-mode displacement, accumulated two-ion
// phase, carrier phase, and the infidelity assembled from them. Everything
// is closed form (no ODE steps); both waveform representations are
// evaluated exactly.

#include <Eigen/Core>
#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include "gateforge/chain.hpp"
#include "gateforge/waveform.hpp"

namespace gateforge {

struct GateTarget {
  Eigen::MatrixXd theta;  // symmetric, zero diagonal, pairwise phase targets
  static GateTarget global_gate(int n_ions);  // pi/4 for every pair
  void validate(int n_ions) const;
};

// raw per-mode functionals at the end of the gate
struct GateQuantities {
  Eigen::VectorXcd alpha;  // alpha_m
  Eigen::VectorXd theta;   // Theta_m
  double carrier = 0.0;    // Phi
};

struct GateReport {
  double infidelity = 0.0;
  double closure_error = 0.0;  // (1/4) sum_{j,m} |alpha_{j,m}|^2
  double phase_error = 0.0;    // sum_{i<j} (Theta_ij - target_ij)^2
  double carrier_error = 0.0;  // 3 Phi^2
  double carrier_phase = 0.0;
  Eigen::MatrixXcd alpha;       // per-ion final displacements b_{j,m} alpha_m
  Eigen::VectorXd theta_modes;  // Theta_m
  Eigen::MatrixXd theta;        // pairwise Theta_ij
  double max_abs_alpha = 0.0;   // peak per-ion displacement max_{j,m,t} |b_{j,m} alpha_m(t)|
};

struct Trajectory {
  Eigen::VectorXd t;
  Eigen::MatrixXcd alpha;       // n_samples x n_modes
  Eigen::MatrixXd theta_modes;  // n_samples x n_modes
};

GateQuantities gate_quantities(const SegmentedWaveform& wf, const ModeStructure& ms);
GateQuantities gate_quantities(const FourierWaveform& wf, const ModeStructure& ms);

Eigen::VectorXcd displacement(const SegmentedWaveform& wf, const ModeStructure& ms);
Eigen::VectorXcd displacement(const FourierWaveform& wf, const ModeStructure& ms);
Eigen::VectorXd geometric_phase(const SegmentedWaveform& wf, const ModeStructure& ms);
Eigen::VectorXd geometric_phase(const FourierWaveform& wf, const ModeStructure& ms);
double carrier_phase(const SegmentedWaveform& wf);
double carrier_phase(const FourierWaveform& wf);

Eigen::MatrixXd pairwise_phases(const Eigen::VectorXd& theta_modes, const ModeStructure& ms);

double infidelity(const GateQuantities& q, const ModeStructure& ms, const GateTarget& target);

Trajectory trajectory(const SegmentedWaveform& wf, const ModeStructure& ms, int n_samples = 512);
Trajectory trajectory(const FourierWaveform& wf, const ModeStructure& ms, int n_samples = 512);

GateReport evaluate(const SegmentedWaveform& wf, const ModeStructure& ms, const GateTarget& target,
                    int n_samples = 512);
GateReport evaluate(const FourierWaveform& wf, const ModeStructure& ms, const GateTarget& target,
                    int n_samples = 512);

// mean infidelity over the offset phases {0, pi/4, pi/2}
double robust_infidelity(const SegmentedWaveform& wf, const ModeStructure& ms,
                         const GateTarget& target);
double robust_infidelity(const FourierWaveform& wf, const ModeStructure& ms,
                         const GateTarget& target);

// (phi0, infidelity) on a uniform grid over [lo, hi)
std::vector<std::pair<double, double>> phase_scan(const SegmentedWaveform& wf,
                                                  const ModeStructure& ms,
                                                  const GateTarget& target, int n_grid,
                                                  double lo = 0.0, double hi = 2.0 * M_PI);
std::vector<std::pair<double, double>> phase_scan(const FourierWaveform& wf,
                                                  const ModeStructure& ms,
                                                  const GateTarget& target, int n_grid,
                                                  double lo = 0.0, double hi = 2.0 * M_PI);

// phase-space chord of a unit-amplitude constant tone: endpoints of
// i integral_{t0}^{t0+tau} sin(mu t + phi) e^{i nu t} dt for phi on a
// uniform grid over (-pi, pi]
std::vector<std::pair<double, Cx>> displacement_ellipse(double mu, double nu, double t0,
                                                        double tau, int n_phi);

}  // namespace gateforge
