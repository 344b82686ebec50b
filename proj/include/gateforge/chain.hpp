#pragma once
// Static structure of a linear ion chain in a harmonic trap: equilibrium
// positions, transverse-referenced normal modes and the per-ion coupling
// matrix. Dimensionless units throughout: lengths in the Coulomb length
// scale, frequencies in units of the lowest (center-of-mass) mode.

#include <Eigen/Core>

namespace gateforge {

struct ChainConfig {
  int n_ions = 2;
  double eta_com = 0.13;  // Lamb-Dicke parameter of the center-of-mass mode
};

struct ModeStructure {
  Eigen::VectorXd positions;    // ascending equilibrium positions
  Eigen::VectorXd frequencies;  // ascending, frequencies[0] == 1 by normalization
  Eigen::MatrixXd vectors;      // b(j, m): ion j, mode m; orthonormal columns,
                                // first nonzero entry of each column positive
  Eigen::MatrixXd lamb_dicke;   // eta(j, m) = b(j, m) * eta_com / sqrt(frequencies[m])
};

// Damped Newton on the force balance; residual below 1e-12.
Eigen::VectorXd equilibrium_positions(int n_ions);

ModeStructure normal_modes(const ChainConfig& cfg);

}  // namespace gateforge
