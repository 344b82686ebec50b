#pragma once
// Linear-algebra view of the gate conditions for Fourier-parametrized
// drives. The stacked quadrature vectors of waveform.hpp are the unknowns;
// this module builds, in closed form, the carrier functional T, the
// per-mode displacement functionals a_m, and the per-mode phase matrices
// whose quadratic forms give the entangling phases. Restricting to the
// null space of the displacement rows turns gate design into a small
// dense eigenvalue / quadratic-programming problem.

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "gateforge/chain.hpp"
#include "gateforge/waveform.hpp"

namespace gateforge {

// no drive at this gate time / truncation can meet the constraints
struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConstraintSystem {
  double tau_g = 0.0;
  int n_lo = 0, n_hi = 0;
  int m_max = 0;  // quadrature harmonic cap, max(|n_lo|, n_hi)

  // Phi = t_vec . omega_c; single nonzero entry (tau_g) at the constant
  // cosine slot
  Eigen::VectorXd t_vec;
  // alpha_m = a_vecs[m] . omega_m (plain dot, no conjugation)
  std::vector<Eigen::VectorXcd> a_vecs;
  // ordered double-integral matrices (asymmetric) and their symmetrized
  // halves; Theta_m = v' theta_sym[m] v
  std::vector<Eigen::MatrixXd> theta_mats;
  std::vector<Eigen::MatrixXd> theta_sym;
  // Re/Im rows of every a_m: the motional-closure conditions
  Eigen::MatrixXd l_mat;

  int dim() const { return 2 * (m_max + 1); }
  int n_modes() const { return static_cast<int>(a_vecs.size()); }
};

struct ReducedSystem {
  Eigen::MatrixXd kernel;  // K: orthonormal columns spanning the feasible space
  std::vector<Eigen::MatrixXd> a_mats;  // A_m = K' theta_sym[m] K
  int dim_kernel = 0;
  bool robust = false;  // kernel additionally annihilates the carrier row
};

// smallest n_hi whose band n_hi * (2 pi / tau_g) covers 4x the highest mode
int default_truncation(const ModeStructure& ms, double tau_g);

ConstraintSystem build_constraints(const ModeStructure& ms, double tau_g, int n_lo, int n_hi);

// Null space of the displacement rows (plus the dead sin-0 slot, plus the
// carrier row when robust). Throws InfeasibleError when empty.
ReducedSystem reduce(const ConstraintSystem& sys, bool robust = false);

// Waveforms from kernel coordinates. The one-argument form drives only the
// motional quadrature (carrier profile identically zero). mu_hint < 0
// selects the dominant-harmonic frequency automatically.
FourierWaveform kernel_waveform(const ConstraintSystem& sys, const ReducedSystem& red,
                                const Eigen::VectorXd& x_m, double mu_hint = -1.0);
FourierWaveform kernel_waveform(const ConstraintSystem& sys, const ReducedSystem& red,
                                const Eigen::VectorXd& x_c, const Eigen::VectorXd& x_m,
                                double mu_hint = -1.0);

struct TwoQubitSolution {
  Eigen::VectorXd x;    // kernel coordinates of the motional profile
  double lambda = 0.0;  // eigenvalue the scaling used
  double norm = 0.0;    // |x|, equals the quadrature-vector norm
  FourierWaveform waveform;
};

// Exact two-ion design: the top positive eigenpair of A_0 - A_1 scaled so
// the pair phase is pi/4; minimum-norm among exact solutions.
TwoQubitSolution two_qubit_optimal(const ModeStructure& ms, double tau_g, int n_lo, int n_hi);

struct BoundPoint {
  double tau_g = 0.0;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};

// Extreme eigenvalues of A_1 - A_2 (tilt minus zigzag) versus gate time for
// a three-ion chain: the global gate needs a null direction of this form,
// so a definite matrix certifies infeasibility. robust restricts to the
// phase-offset-insensitive kernel (linear conditions only). The lambda_max
// column doubles as the scan for the sign-flipped pair target.
std::vector<BoundPoint> three_qubit_bound_scan(const ModeStructure& ms,
                                               const std::vector<double>& tau_list, int n_hi,
                                               bool robust);

// Bisect the zero crossing of lambda_min (lambda_max when alt_target) of
// A_1 - A_2 inside (tau_lo, tau_hi); tol in the same time units.
double three_qubit_speed_limit(const ModeStructure& ms, double tau_lo, double tau_hi, int n_hi,
                               bool robust, double tol = 1e-4 * 2.0 * M_PI,
                               bool alt_target = false);

// Stacked deviation from a phase-offset-insensitive exact gate:
// [T.c, T.m, Re/Im a_m.c, Re/Im a_m.m, c'Sc - tgt, m'Sm - tgt, c'Sm]
// with tgt the intended per-mode phases. All zero means every gate
// functional is independent of the offset phase and on target.
Eigen::VectorXd robustness_residuals(const Eigen::VectorXd& omega_c,
                                     const Eigen::VectorXd& omega_m, const ConstraintSystem& sys,
                                     const Eigen::VectorXd& theta_targets);

}  // namespace gateforge
