#include "gateforge/chain.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace gateforge {

namespace {

// gradient of the dimensionless potential sum(u_i^2)/2 + sum_{i<j} 1/|u_i-u_j|
Eigen::VectorXd force_residual(const Eigen::VectorXd& u) {
  const int n = int(u.size());
  Eigen::VectorXd g = u;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      double d = u[i] - u[j];
      g[i] -= (d > 0 ? 1.0 : -1.0) / (d * d);
    }
  return g;
}

Eigen::MatrixXd hessian(const Eigen::VectorXd& u) {
  const int n = int(u.size());
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      double c = 2.0 / std::pow(std::abs(u[i] - u[j]), 3.0);
      h(i, i) += c;
      h(i, j) -= c;
    }
  return h;
}

}  // namespace

Eigen::VectorXd equilibrium_positions(int n_ions) {
  if (n_ions < 1) throw std::invalid_argument("equilibrium_positions: n_ions must be >= 1");
  if (n_ions == 1) return Eigen::VectorXd::Zero(1);

  // uniform-spacing start; the asymptotic central spacing is a good scale
  const double d0 = 2.018 / std::pow(double(n_ions), 0.559);
  Eigen::VectorXd u(n_ions);
  for (int i = 0; i < n_ions; ++i) u[i] = d0 * (i - 0.5 * (n_ions - 1));

  Eigen::VectorXd g = force_residual(u);
  for (int iter = 0; iter < 200; ++iter) {
    if (g.norm() < 1e-13) break;
    Eigen::VectorXd step = hessian(u).ldlt().solve(g);
    double t = 1.0;
    for (int bt = 0; bt < 60; ++bt) {
      Eigen::VectorXd cand = u - t * step;
      bool ordered = true;
      for (int i = 0; i + 1 < n_ions; ++i)
        if (cand[i + 1] <= cand[i]) ordered = false;
      if (ordered) {
        Eigen::VectorXd gc = force_residual(cand);
        if (gc.norm() <= g.norm() * (1.0 - 1e-4 * t) || gc.norm() < 1e-13) {
          u = cand;
          g = gc;
          break;
        }
      }
      t *= 0.5;
    }
  }
  if (g.norm() >= 1e-12)
    throw std::runtime_error("equilibrium_positions: Newton did not reach residual 1e-12");
  return u;
}

ModeStructure normal_modes(const ChainConfig& cfg) {
  if (cfg.n_ions < 1) throw std::invalid_argument("normal_modes: n_ions must be >= 1");
  if (cfg.eta_com < 0) throw std::invalid_argument("normal_modes: eta_com must be >= 0");

  ModeStructure ms;
  ms.positions = equilibrium_positions(cfg.n_ions);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hessian(ms.positions));
  if (es.info() != Eigen::Success) throw std::runtime_error("normal_modes: eigensolver failed");

  const int n = cfg.n_ions;
  Eigen::VectorXd lam = es.eigenvalues();  // ascending; lam[0] is the COM value
  ms.vectors = es.eigenvectors();
  for (int m = 0; m < n; ++m) {
    for (int j = 0; j < n; ++j) {
      if (std::abs(ms.vectors(j, m)) > 1e-8) {
        if (ms.vectors(j, m) < 0) ms.vectors.col(m) *= -1.0;
        break;
      }
    }
  }

  ms.frequencies.resize(n);
  for (int m = 0; m < n; ++m) ms.frequencies[m] = std::sqrt(lam[m] / lam[0]);
  ms.frequencies[0] = 1.0;

  ms.lamb_dicke.resize(n, n);
  for (int m = 0; m < n; ++m)
    ms.lamb_dicke.col(m) = ms.vectors.col(m) * (cfg.eta_com / std::sqrt(ms.frequencies[m]));
  return ms;
}

}  // namespace gateforge
