#include "gateforge/fourier.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "gateforge/oscint.hpp"

namespace gateforge {

namespace {

using oscint::CVal;
using oscint::ordered_tones;
using oscint::tone;

Cx to_cx(const CVal<double>& z) { return {z.re, z.im}; }

// plain (unconjugated) complex . real dot product
Cx dotu(const Eigen::VectorXcd& a, const Eigen::VectorXd& v) {
  Cx acc{0.0, 0.0};
  for (Eigen::Index i = 0; i < a.size(); ++i) acc += a[i] * v[i];
  return acc;
}

// exponential weights of the stacked basis functions: sin(j w t) carries
// -i s / 2 at frequency s j w, cos(j w t) carries 1/2
Cx basis_weight(bool is_sin, int s) {
  return is_sin ? Cx{0.0, -0.5 * static_cast<double>(s)} : Cx{0.5, 0.0};
}

Eigen::VectorXcd displacement_vector(double nu, double eta, double w, double tau_g, int m_max) {
  Eigen::VectorXcd a(2 * (m_max + 1));
  for (int j = 0; j <= m_max; ++j) {
    const Cx tp = to_cx(tone(nu + j * w, 0.0, tau_g));
    const Cx tm = to_cx(tone(nu - j * w, 0.0, tau_g));
    a[j] = -0.5 * eta * (tp - tm);
    a[m_max + 1 + j] = Cx{0.0, -0.5 * eta} * (tp + tm);
  }
  return a;
}

Eigen::MatrixXd phase_matrix(double nu, double eta, double w, double tau_g, int m_max) {
  const int M = m_max;
  const int n = 2 * (M + 1);
  // ordered tone table over signed harmonics and the two sin(nu dt) branches
  Eigen::MatrixXcd tab_p(2 * M + 1, 2 * M + 1), tab_m(2 * M + 1, 2 * M + 1);
  for (int a = -M; a <= M; ++a)
    for (int b = -M; b <= M; ++b) {
      tab_p(a + M, b + M) = to_cx(ordered_tones(a * w + nu, b * w - nu, 0.0, tau_g));
      tab_m(a + M, b + M) = to_cx(ordered_tones(a * w - nu, b * w + nu, 0.0, tau_g));
    }
  Eigen::MatrixXd th(n, n);
  for (int p = 0; p < n; ++p) {
    const bool sin1 = p <= M;
    const int j1 = sin1 ? p : p - (M + 1);
    for (int q = 0; q < n; ++q) {
      const bool sin2 = q <= M;
      const int j2 = sin2 ? q : q - (M + 1);
      Cx acc{0.0, 0.0};
      for (int s1 = -1; s1 <= 1; s1 += 2)
        for (int s2 = -1; s2 <= 1; s2 += 2) {
          const Cx k12 = basis_weight(sin1, s1) * basis_weight(sin2, s2);
          // s3 = +1 branch carries -i/2, s3 = -1 carries +i/2
          acc += k12 * (Cx{0.0, -0.5} * tab_p(s1 * j1 + M, s2 * j2 + M) +
                        Cx{0.0, 0.5} * tab_m(s1 * j1 + M, s2 * j2 + M));
        }
      th(p, q) = 2.0 * eta * eta * acc.real();
    }
  }
  return th;
}

double auto_mu(const FourierWaveform& wf) {
  double best = -1.0;
  int n_peak = 0;
  for (int n = wf.n_lo; n <= wf.n_hi; ++n) {
    const double a = std::abs(wf.coeff(n));
    if (a > best) {  // first maximum wins: deterministic
      best = a;
      n_peak = n;
    }
  }
  return wf.omega() * n_peak;
}

FourierWaveform assemble(const ConstraintSystem& sys, const Eigen::VectorXd& omega_c,
                         const Eigen::VectorXd& omega_m, double mu_hint) {
  QuadratureVectors q;
  q.m_max = sys.m_max;
  q.omega_c = omega_c;
  q.omega_m = omega_m;
  FourierWaveform wf = from_quadratures(q, sys.tau_g, 0.0);
  wf.mu = (mu_hint < 0.0) ? auto_mu(wf) : mu_hint;
  return wf;
}

Eigen::MatrixXd difference_form(const ModeStructure& ms, double tau_g, int n_hi, bool robust) {
  const ConstraintSystem sys = build_constraints(ms, tau_g, -n_hi, n_hi);
  const ReducedSystem red = reduce(sys, robust);
  return red.a_mats[1] - red.a_mats[2];
}

}  // namespace

int default_truncation(const ModeStructure& ms, double tau_g) {
  if (tau_g <= 0.0) throw std::invalid_argument("gate time must be positive");
  const double nu_max = ms.frequencies[ms.frequencies.size() - 1];
  const int n = static_cast<int>(std::ceil(4.0 * nu_max * tau_g / (2.0 * M_PI)));
  return std::max(n, 1);
}

ConstraintSystem build_constraints(const ModeStructure& ms, double tau_g, int n_lo, int n_hi) {
  if (tau_g <= 0.0) throw std::invalid_argument("gate time must be positive");
  if (n_lo > n_hi) throw std::invalid_argument("empty harmonic range");
  ConstraintSystem sys;
  sys.tau_g = tau_g;
  sys.n_lo = n_lo;
  sys.n_hi = n_hi;
  sys.m_max = std::max(std::abs(n_lo), std::abs(n_hi));
  const int n = sys.dim();
  const double w = 2.0 * M_PI / tau_g;
  const int n_modes = static_cast<int>(ms.frequencies.size());

  sys.t_vec = Eigen::VectorXd::Zero(n);
  sys.t_vec[sys.m_max + 1] = tau_g;  // constant cosine term of the carrier profile

  sys.a_vecs.resize(static_cast<size_t>(n_modes));
  sys.theta_mats.resize(static_cast<size_t>(n_modes));
  sys.theta_sym.resize(static_cast<size_t>(n_modes));
  sys.l_mat.resize(2 * n_modes, n);
  for (int m = 0; m < n_modes; ++m) {
    const double nu = ms.frequencies[m];
    const double eta = ms.lamb_dicke.col(m).norm();
    const auto mm = static_cast<size_t>(m);
    sys.a_vecs[mm] = displacement_vector(nu, eta, w, tau_g, sys.m_max);
    sys.theta_mats[mm] = phase_matrix(nu, eta, w, tau_g, sys.m_max);
    sys.theta_sym[mm] = 0.5 * (sys.theta_mats[mm] + sys.theta_mats[mm].transpose());
    sys.l_mat.row(2 * m) = sys.a_vecs[mm].real();
    sys.l_mat.row(2 * m + 1) = sys.a_vecs[mm].imag();
  }
  return sys;
}

ReducedSystem reduce(const ConstraintSystem& sys, bool robust) {
  const int n = sys.dim();
  const int extra = robust ? 2 : 1;
  Eigen::MatrixXd rows(sys.l_mat.rows() + extra, n);
  rows.topRows(sys.l_mat.rows()) = sys.l_mat;
  // pin the dead sin-0 slot so it never pollutes the kernel
  rows.row(sys.l_mat.rows()).setZero();
  rows(sys.l_mat.rows(), 0) = 1.0;
  if (robust) {
    // carrier row: same slot reads Phi from omega_c and the offset-phase
    // leakage from omega_m, so one kernel serves both profiles
    rows.row(sys.l_mat.rows() + 1).setZero();
    rows(sys.l_mat.rows() + 1, sys.m_max + 1) = 1.0;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(rows, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cut = (sv.size() > 0 ? sv[0] : 0.0) * 1e-10;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > cut) ++rank;
  const int d = n - rank;
  if (d <= 0)
    throw InfeasibleError("no closed-trajectory drive exists at this gate time and truncation");

  ReducedSystem red;
  red.kernel = svd.matrixV().rightCols(d);
  red.dim_kernel = d;
  red.robust = robust;
  red.a_mats.reserve(sys.theta_sym.size());
  for (const auto& s : sys.theta_sym) {
    Eigen::MatrixXd a = red.kernel.transpose() * s * red.kernel;
    red.a_mats.push_back(0.5 * (a + a.transpose()));
  }
  return red;
}

FourierWaveform kernel_waveform(const ConstraintSystem& sys, const ReducedSystem& red,
                                const Eigen::VectorXd& x_m, double mu_hint) {
  if (x_m.size() != red.dim_kernel) throw std::invalid_argument("kernel coordinate size mismatch");
  return assemble(sys, Eigen::VectorXd::Zero(sys.dim()), red.kernel * x_m, mu_hint);
}

FourierWaveform kernel_waveform(const ConstraintSystem& sys, const ReducedSystem& red,
                                const Eigen::VectorXd& x_c, const Eigen::VectorXd& x_m,
                                double mu_hint) {
  if (x_c.size() != red.dim_kernel || x_m.size() != red.dim_kernel)
    throw std::invalid_argument("kernel coordinate size mismatch");
  return assemble(sys, red.kernel * x_c, red.kernel * x_m, mu_hint);
}

TwoQubitSolution two_qubit_optimal(const ModeStructure& ms, double tau_g, int n_lo, int n_hi) {
  if (ms.frequencies.size() != 2)
    throw std::invalid_argument("two-ion designer needs a two-ion chain");
  const ConstraintSystem sys = build_constraints(ms, tau_g, n_lo, n_hi);
  const ReducedSystem red = reduce(sys, false);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(red.a_mats[0] - red.a_mats[1]);
  const Eigen::Index top = es.eigenvalues().size() - 1;
  const double lambda = es.eigenvalues()[top];
  if (lambda <= 0.0)
    throw InfeasibleError("pair-phase form has no positive direction at this gate time");

  TwoQubitSolution sol;
  Eigen::VectorXd v = es.eigenvectors().col(top);
  Eigen::Index i_big = 0;
  v.cwiseAbs().maxCoeff(&i_big);
  if (v[i_big] < 0.0) v = -v;  // canonical sign
  sol.lambda = lambda;
  sol.x = v * std::sqrt(M_PI / (2.0 * lambda));
  sol.norm = sol.x.norm();
  sol.waveform = kernel_waveform(sys, red, sol.x);
  return sol;
}

std::vector<BoundPoint> three_qubit_bound_scan(const ModeStructure& ms,
                                               const std::vector<double>& tau_list, int n_hi,
                                               bool robust) {
  if (ms.frequencies.size() != 3)
    throw std::invalid_argument("three-ion bound scan needs a three-ion chain");
  std::vector<BoundPoint> out;
  out.reserve(tau_list.size());
  for (double tau_g : tau_list) {
    const Eigen::MatrixXd d = difference_form(ms, tau_g, n_hi, robust);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d);
    out.push_back({tau_g, es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()});
  }
  return out;
}

double three_qubit_speed_limit(const ModeStructure& ms, double tau_lo, double tau_hi, int n_hi,
                               bool robust, double tol, bool alt_target) {
  if (ms.frequencies.size() != 3)
    throw std::invalid_argument("three-ion bound scan needs a three-ion chain");
  if (!(tau_lo > 0.0) || !(tau_hi > tau_lo)) throw std::invalid_argument("bad bracket");
  auto tail = [&](double tau_g) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(difference_form(ms, tau_g, n_hi, robust));
    return alt_target ? es.eigenvalues().maxCoeff() : es.eigenvalues().minCoeff();
  };
  double f_lo = tail(tau_lo), f_hi = tail(tau_hi);
  if (f_lo == 0.0) return tau_lo;
  if (f_hi == 0.0) return tau_hi;
  if ((f_lo > 0.0) == (f_hi > 0.0))
    throw std::invalid_argument("eigenvalue tail does not change sign inside the bracket");
  while (tau_hi - tau_lo > tol) {
    const double mid = 0.5 * (tau_lo + tau_hi);
    const double f_mid = tail(mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      tau_lo = mid;
      f_lo = f_mid;
    } else {
      tau_hi = mid;
    }
  }
  return 0.5 * (tau_lo + tau_hi);
}

Eigen::VectorXd robustness_residuals(const Eigen::VectorXd& omega_c,
                                     const Eigen::VectorXd& omega_m, const ConstraintSystem& sys,
                                     const Eigen::VectorXd& theta_targets) {
  const int n = sys.dim();
  const int nm = sys.n_modes();
  if (omega_c.size() != n || omega_m.size() != n)
    throw std::invalid_argument("quadrature vector size mismatch");
  if (theta_targets.size() != nm) throw std::invalid_argument("need one phase target per mode");
  Eigen::VectorXd r(2 + 7 * nm);
  int at = 0;
  r[at++] = sys.t_vec.dot(omega_c);
  r[at++] = sys.t_vec.dot(omega_m);
  for (int m = 0; m < nm; ++m) {
    const Cx ac = dotu(sys.a_vecs[static_cast<size_t>(m)], omega_c);
    r[at++] = ac.real();
    r[at++] = ac.imag();
  }
  for (int m = 0; m < nm; ++m) {
    const Cx am = dotu(sys.a_vecs[static_cast<size_t>(m)], omega_m);
    r[at++] = am.real();
    r[at++] = am.imag();
  }
  for (int m = 0; m < nm; ++m)
    r[at++] = omega_c.dot(sys.theta_sym[static_cast<size_t>(m)] * omega_c) - theta_targets[m];
  for (int m = 0; m < nm; ++m)
    r[at++] = omega_m.dot(sys.theta_sym[static_cast<size_t>(m)] * omega_m) - theta_targets[m];
  for (int m = 0; m < nm; ++m)
    r[at++] = omega_c.dot(sys.theta_sym[static_cast<size_t>(m)] * omega_m);
  return r;
}

}  // namespace gateforge
