#include "gateforge/dynamics.hpp"

#include <cmath>
#include <stdexcept>

#include "gateforge/gate_kernel.hpp"

namespace gateforge {

namespace {

using kernel::detail::rect_term;
using kernel::detail::tri_term;
using oscint::CVal;
using oscint::cexp;
using oscint::conj;
using oscint::ordered_tones;
using oscint::tone;

Cx to_cx(const CVal<double>& z) { return {z.re, z.im}; }

kernel::SegParams<double> seg_params(const SegmentedWaveform& wf) {
  kernel::SegParams<double> p;
  p.mu = wf.mu;
  p.phi0 = wf.phi0;
  p.tau.reserve(wf.segments.size());
  p.omega.reserve(wf.segments.size());
  p.phi.reserve(wf.segments.size());
  for (const auto& s : wf.segments) {
    p.tau.push_back(s.tau);
    p.omega.push_back(s.omega);
    p.phi.push_back(s.phi);
  }
  return p;
}

std::vector<double> mode_couplings(const ModeStructure& ms) {
  std::vector<double> eta(static_cast<size_t>(ms.lamb_dicke.cols()));
  for (Eigen::Index m = 0; m < ms.lamb_dicke.cols(); ++m)
    eta[static_cast<size_t>(m)] = ms.lamb_dicke.col(m).norm();
  return eta;
}

std::vector<double> mode_freqs(const ModeStructure& ms) {
  return {ms.frequencies.data(), ms.frequencies.data() + ms.frequencies.size()};
}

// sin/cos quadrature profile of the motional drive after absorbing phi0
struct EffectiveQuadratures {
  int m_max = 0;
  Eigen::VectorXd omega_c;  // carrier profile
  Eigen::VectorXd omega_m;  // motional profile
};

EffectiveQuadratures effective_quadratures(const FourierWaveform& wf) {
  QuadratureVectors q = to_quadratures(wf);
  EffectiveQuadratures e;
  e.m_max = q.m_max;
  const double c = std::cos(wf.phi0), s = std::sin(wf.phi0);
  e.omega_c = c * q.omega_c + s * q.omega_m;
  e.omega_m = c * q.omega_m - s * q.omega_c;
  return e;
}

// alpha_m for the profile sum_j rm_j sin(j w t) + im_j cos(j w t) on [0, t_end]
Cx fourier_alpha(const EffectiveQuadratures& e, double w, double nu, double eta, double t_end) {
  const int M = e.m_max;
  CVal<double> acc{};
  for (int j = 0; j <= M; ++j) {
    const double rm = e.omega_m[j];
    const double im = e.omega_m[M + 1 + j];
    const CVal<double> tp = tone(nu + j * w, 0.0, t_end);
    const CVal<double> tm = tone(nu - j * w, 0.0, t_end);
    acc = acc + (tp - tm) * (-0.5 * eta * rm) + oscint::i_times(tp + tm) * (-0.5 * eta * im);
  }
  return to_cx(acc);
}

// Theta_m on [0, t_end]: expand the profile into complex exponentials
// gamma_{j,s} e^{i s j w t} and sin(nu dt) into its two exponentials, then
// sum ordered double integrals of pure tones.
double fourier_theta(const EffectiveQuadratures& e, double w, double nu, double eta,
                     double t_end) {
  const int M = e.m_max;
  std::vector<CVal<double>> gamma_p(static_cast<size_t>(M) + 1), gamma_m(static_cast<size_t>(M) + 1);
  for (int j = 0; j <= M; ++j) {
    const double rm = e.omega_m[j];
    const double im = e.omega_m[M + 1 + j];
    gamma_p[static_cast<size_t>(j)] = CVal<double>{0.5 * im, -0.5 * rm};  // (im - i rm)/2
    gamma_m[static_cast<size_t>(j)] = CVal<double>{0.5 * im, 0.5 * rm};   // (im + i rm)/2
  }
  CVal<double> acc{};
  for (int j1 = 0; j1 <= M; ++j1) {
    for (int s1 = -1; s1 <= 1; s1 += 2) {
      const CVal<double> g1 = (s1 > 0) ? gamma_p[static_cast<size_t>(j1)] : gamma_m[static_cast<size_t>(j1)];
      for (int j2 = 0; j2 <= M; ++j2) {
        for (int s2 = -1; s2 <= 1; s2 += 2) {
          const CVal<double> g2 = (s2 > 0) ? gamma_p[static_cast<size_t>(j2)] : gamma_m[static_cast<size_t>(j2)];
          const CVal<double> g12 = g1 * g2;
          for (int s3 = -1; s3 <= 1; s3 += 2) {
            const CVal<double> dt =
                ordered_tones(s1 * j1 * w + s3 * nu, s2 * j2 * w - s3 * nu, 0.0, t_end);
            // sin(nu dt) contributes s3 / (2i) = -i s3 / 2 per branch
            acc = acc + oscint::i_times(g12 * dt) * (-0.5 * s3);
          }
        }
      }
    }
  }
  return 2.0 * eta * eta * acc.re;
}

GateQuantities fourier_quantities(const FourierWaveform& wf, const ModeStructure& ms) {
  const EffectiveQuadratures e = effective_quadratures(wf);
  const double w = wf.omega();
  const auto nu = mode_freqs(ms);
  const auto eta = mode_couplings(ms);
  const int n_modes = static_cast<int>(nu.size());
  GateQuantities out;
  out.alpha.resize(n_modes);
  out.theta.resize(n_modes);
  for (int m = 0; m < n_modes; ++m) {
    const auto mm = static_cast<size_t>(m);
    out.alpha[m] = fourier_alpha(e, w, nu[mm], eta[mm], wf.tau_g);
    out.theta[m] = fourier_theta(e, w, nu[mm], eta[mm], wf.tau_g);
  }
  // only the constant cosine term of the carrier profile survives the full gate
  out.carrier = wf.tau_g * e.omega_c[e.m_max + 1];
  return out;
}

}  // namespace

GateTarget GateTarget::global_gate(int n_ions) {
  if (n_ions < 2) throw std::invalid_argument("global gate needs at least two ions");
  GateTarget t;
  t.theta = Eigen::MatrixXd::Constant(n_ions, n_ions, M_PI / 4.0);
  t.theta.diagonal().setZero();
  return t;
}

void GateTarget::validate(int n_ions) const {
  if (theta.rows() != n_ions || theta.cols() != n_ions)
    throw std::invalid_argument("target size does not match ion count");
  if ((theta - theta.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("target phases must be symmetric");
  if (theta.diagonal().cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("target phases must have zero diagonal");
}

GateQuantities gate_quantities(const SegmentedWaveform& wf, const ModeStructure& ms) {
  const auto vals = kernel::eval_gate<double>(seg_params(wf), mode_freqs(ms), mode_couplings(ms));
  const int n_modes = static_cast<int>(vals.theta.size());
  GateQuantities out;
  out.alpha.resize(n_modes);
  out.theta.resize(n_modes);
  for (int m = 0; m < n_modes; ++m) {
    out.alpha[m] = to_cx(vals.alpha[static_cast<size_t>(m)]);
    out.theta[m] = vals.theta[static_cast<size_t>(m)];
  }
  out.carrier = vals.carrier;
  return out;
}

GateQuantities gate_quantities(const FourierWaveform& wf, const ModeStructure& ms) {
  return fourier_quantities(wf, ms);
}

Eigen::VectorXcd displacement(const SegmentedWaveform& wf, const ModeStructure& ms) {
  return gate_quantities(wf, ms).alpha;
}
Eigen::VectorXcd displacement(const FourierWaveform& wf, const ModeStructure& ms) {
  return gate_quantities(wf, ms).alpha;
}
Eigen::VectorXd geometric_phase(const SegmentedWaveform& wf, const ModeStructure& ms) {
  return gate_quantities(wf, ms).theta;
}
Eigen::VectorXd geometric_phase(const FourierWaveform& wf, const ModeStructure& ms) {
  return gate_quantities(wf, ms).theta;
}

double carrier_phase(const SegmentedWaveform& wf) {
  kernel::SegParams<double> p = seg_params(wf);
  double acc = 0.0;
  double a = 0.0;
  for (size_t k = 0; k < p.tau.size(); ++k) {
    const double b = a + p.tau[k];
    const CVal<double> t0 = tone(p.mu, a, b);
    acc += p.omega[k] * (cexp(p.phi[k] + p.phi0) * t0).re;
    a = b;
  }
  return acc;
}

double carrier_phase(const FourierWaveform& wf) {
  const EffectiveQuadratures e = effective_quadratures(wf);
  return wf.tau_g * e.omega_c[e.m_max + 1];
}

Eigen::MatrixXd pairwise_phases(const Eigen::VectorXd& theta_modes, const ModeStructure& ms) {
  const Eigen::MatrixXd& b = ms.vectors;
  Eigen::MatrixXd out = b * theta_modes.asDiagonal() * b.transpose();
  out.diagonal().setZero();
  return out;
}

double infidelity(const GateQuantities& q, const ModeStructure& ms, const GateTarget& target) {
  const Eigen::MatrixXd& b = ms.vectors;
  target.validate(static_cast<int>(b.rows()));
  double closure = 0.0;
  for (Eigen::Index j = 0; j < b.rows(); ++j)
    for (Eigen::Index m = 0; m < b.cols(); ++m) closure += std::norm(b(j, m) * q.alpha[m]);
  closure *= 0.25;
  const Eigen::MatrixXd theta = pairwise_phases(q.theta, ms);
  double phase = 0.0;
  for (Eigen::Index i = 0; i < theta.rows(); ++i)
    for (Eigen::Index j = i + 1; j < theta.cols(); ++j) {
      const double d = theta(i, j) - target.theta(i, j);
      phase += d * d;
    }
  return closure + phase + 3.0 * q.carrier * q.carrier;
}

Trajectory trajectory(const SegmentedWaveform& wf, const ModeStructure& ms, int n_samples) {
  if (n_samples < 2) throw std::invalid_argument("trajectory needs at least two samples");
  const kernel::SegParams<double> p = seg_params(wf);
  const auto nu = mode_freqs(ms);
  const auto eta = mode_couplings(ms);
  const int n_modes = static_cast<int>(nu.size());
  const size_t n_seg = p.tau.size();
  const double tau_g = wf.duration();

  std::vector<double> seg_start(n_seg), seg_end(n_seg), c(n_seg);
  {
    double a = 0.0;
    for (size_t k = 0; k < n_seg; ++k) {
      seg_start[k] = a;
      a += p.tau[k];
      seg_end[k] = a;
      c[k] = p.phi[k] + p.phi0;
    }
  }

  Trajectory out;
  out.t.resize(n_samples);
  out.alpha.resize(n_samples, n_modes);
  out.theta_modes.resize(n_samples, n_modes);

  // march per mode, accumulating strip contributions; earlier full segments
  // enter the phase integral through their cached tone pair
  for (int m = 0; m < n_modes; ++m) {
    const auto mm = static_cast<size_t>(m);
    const double wp = p.mu + nu[mm], wq = p.mu - nu[mm];
    std::vector<CVal<double>> p_done(n_seg), q_done(n_seg);
    CVal<double> alpha_acc{};
    double theta_acc = 0.0;
    size_t k = 0;
    double s = 0.0;
    for (int i = 0; i < n_samples; ++i) {
      const double t_i = tau_g * static_cast<double>(i) / static_cast<double>(n_samples - 1);
      while (s < t_i && k < n_seg) {
        const double e = std::min(t_i, seg_end[k]);
        if (e > s) {
          const CVal<double> ps = tone(wp, s, e), qs = tone(wq, s, e);
          const CVal<double> ph = cexp(c[k]);
          alpha_acc = alpha_acc + (ph * ps - conj(ph) * conj(qs)) * (0.5 * eta[mm] * p.omega[k]);
          double j_acc = 0.0;
          for (size_t k2 = 0; k2 < k; ++k2)
            j_acc += p.omega[k2] *
                     rect_term(ps, qs, p_done[k2], q_done[k2], c[k], c[k2]);
          if (s > seg_start[k]) {
            const CVal<double> p_pre = tone(wp, seg_start[k], s), q_pre = tone(wq, seg_start[k], s);
            j_acc += p.omega[k] * rect_term(ps, qs, p_pre, q_pre, c[k], c[k]);
          }
          j_acc += p.omega[k] * tri_term(p.mu, nu[mm], s, e, c[k]);
          theta_acc += 2.0 * eta[mm] * eta[mm] * p.omega[k] * j_acc;
        }
        s = e;
        if (s >= seg_end[k]) {
          p_done[k] = tone(wp, seg_start[k], seg_end[k]);
          q_done[k] = tone(wq, seg_start[k], seg_end[k]);
          ++k;
        }
      }
      out.t[i] = t_i;
      out.alpha(i, m) = to_cx(alpha_acc);
      out.theta_modes(i, m) = theta_acc;
    }
  }
  return out;
}

Trajectory trajectory(const FourierWaveform& wf, const ModeStructure& ms, int n_samples) {
  if (n_samples < 2) throw std::invalid_argument("trajectory needs at least two samples");
  const EffectiveQuadratures e = effective_quadratures(wf);
  const double w = wf.omega();
  const auto nu = mode_freqs(ms);
  const auto eta = mode_couplings(ms);
  const int n_modes = static_cast<int>(nu.size());
  Trajectory out;
  out.t.resize(n_samples);
  out.alpha.resize(n_samples, n_modes);
  out.theta_modes.resize(n_samples, n_modes);
  for (int i = 0; i < n_samples; ++i) {
    const double t_i = wf.tau_g * static_cast<double>(i) / static_cast<double>(n_samples - 1);
    out.t[i] = t_i;
    for (int m = 0; m < n_modes; ++m) {
      const auto mm = static_cast<size_t>(m);
      out.alpha(i, m) = (i == 0) ? Cx{0.0, 0.0} : fourier_alpha(e, w, nu[mm], eta[mm], t_i);
      out.theta_modes(i, m) = (i == 0) ? 0.0 : fourier_theta(e, w, nu[mm], eta[mm], t_i);
    }
  }
  return out;
}

namespace {

template <class Waveform>
GateReport evaluate_impl(const Waveform& wf, const ModeStructure& ms, const GateTarget& target,
                         int n_samples) {
  const GateQuantities q = gate_quantities(wf, ms);
  const Eigen::MatrixXd& b = ms.vectors;
  target.validate(static_cast<int>(b.rows()));
  GateReport r;
  r.theta_modes = q.theta;
  r.theta = pairwise_phases(q.theta, ms);
  r.alpha.resize(b.rows(), b.cols());
  for (Eigen::Index j = 0; j < b.rows(); ++j)
    for (Eigen::Index m = 0; m < b.cols(); ++m) r.alpha(j, m) = b(j, m) * q.alpha[m];
  r.carrier_phase = q.carrier;
  r.closure_error = 0.25 * r.alpha.cwiseAbs2().sum();
  r.phase_error = 0.0;
  for (Eigen::Index i = 0; i < r.theta.rows(); ++i)
    for (Eigen::Index j = i + 1; j < r.theta.cols(); ++j) {
      const double d = r.theta(i, j) - target.theta(i, j);
      r.phase_error += d * d;
    }
  r.carrier_error = 3.0 * q.carrier * q.carrier;
  r.infidelity = r.closure_error + r.phase_error + r.carrier_error;
  const Trajectory traj = trajectory(wf, ms, n_samples);
  // validity of the linearized coupling is set by what each ion sees: the
  // per-ion displacement b_{j,m} alpha_m(t), not the mode amplitude alone
  r.max_abs_alpha = 0.0;
  for (Eigen::Index m = 0; m < b.cols(); ++m) {
    const double bmax = b.col(m).cwiseAbs().maxCoeff();
    r.max_abs_alpha = std::max(r.max_abs_alpha, bmax * traj.alpha.col(m).cwiseAbs().maxCoeff());
  }
  return r;
}

template <class Waveform>
double robust_infidelity_impl(const Waveform& wf, const ModeStructure& ms,
                              const GateTarget& target) {
  static const double offsets[] = {0.0, M_PI / 4.0, M_PI / 2.0};
  double acc = 0.0;
  for (double phi0 : offsets) {
    Waveform w = wf;
    w.phi0 = phi0;
    acc += infidelity(gate_quantities(w, ms), ms, target);
  }
  return acc / 3.0;
}

template <class Waveform>
std::vector<std::pair<double, double>> phase_scan_impl(const Waveform& wf,
                                                       const ModeStructure& ms,
                                                       const GateTarget& target, int n_grid,
                                                       double lo, double hi) {
  if (n_grid < 1) throw std::invalid_argument("phase scan needs at least one point");
  std::vector<std::pair<double, double>> out;
  out.reserve(static_cast<size_t>(n_grid));
  for (int i = 0; i < n_grid; ++i) {
    const double phi0 = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_grid);
    Waveform w = wf;
    w.phi0 = phi0;
    out.emplace_back(phi0, infidelity(gate_quantities(w, ms), ms, target));
  }
  return out;
}

}  // namespace

GateReport evaluate(const SegmentedWaveform& wf, const ModeStructure& ms, const GateTarget& target,
                    int n_samples) {
  return evaluate_impl(wf, ms, target, n_samples);
}
GateReport evaluate(const FourierWaveform& wf, const ModeStructure& ms, const GateTarget& target,
                    int n_samples) {
  return evaluate_impl(wf, ms, target, n_samples);
}

double robust_infidelity(const SegmentedWaveform& wf, const ModeStructure& ms,
                         const GateTarget& target) {
  return robust_infidelity_impl(wf, ms, target);
}
double robust_infidelity(const FourierWaveform& wf, const ModeStructure& ms,
                         const GateTarget& target) {
  return robust_infidelity_impl(wf, ms, target);
}

std::vector<std::pair<double, double>> phase_scan(const SegmentedWaveform& wf,
                                                  const ModeStructure& ms,
                                                  const GateTarget& target, int n_grid, double lo,
                                                  double hi) {
  return phase_scan_impl(wf, ms, target, n_grid, lo, hi);
}
std::vector<std::pair<double, double>> phase_scan(const FourierWaveform& wf,
                                                  const ModeStructure& ms,
                                                  const GateTarget& target, int n_grid, double lo,
                                                  double hi) {
  return phase_scan_impl(wf, ms, target, n_grid, lo, hi);
}

std::vector<std::pair<double, Cx>> displacement_ellipse(double mu, double nu, double t0,
                                                        double tau, int n_phi) {
  if (n_phi < 1) throw std::invalid_argument("ellipse needs at least one phase");
  if (tau <= 0.0) throw std::invalid_argument("ellipse needs a positive window");
  const CVal<double> tp = tone(mu + nu, t0, t0 + tau);
  const CVal<double> tm = tone(mu - nu, t0, t0 + tau);
  std::vector<std::pair<double, Cx>> out;
  out.reserve(static_cast<size_t>(n_phi));
  for (int k = 0; k < n_phi; ++k) {
    const double phi = -M_PI + 2.0 * M_PI * static_cast<double>(k + 1) / static_cast<double>(n_phi);
    const CVal<double> ph = cexp(phi);
    const CVal<double> a = (ph * tp - conj(ph) * conj(tm)) * 0.5;
    out.emplace_back(phi, to_cx(a));
  }
  return out;
}

}  // namespace gateforge
