#include "gateforge/waveform.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "gateforge/oscint.hpp"

namespace gateforge {

double wrap_phase(double p) {
  p = std::remainder(p, 2.0 * M_PI);
  if (p <= -M_PI) p += 2.0 * M_PI;
  return p;
}

double SegmentedWaveform::duration() const {
  double t = 0.0;
  for (const auto& s : segments) t += s.tau;
  return t;
}

Cx SegmentedWaveform::value(double t) const {
  double a = 0.0;
  for (size_t k = 0; k < segments.size(); ++k) {
    double b = a + segments[k].tau;
    if (t < b || k + 1 == segments.size()) {
      double arg = mu * t + segments[k].phi + phi0;
      return segments[k].omega * Cx(std::cos(arg), -std::sin(arg));
    }
    a = b;
  }
  return {0.0, 0.0};
}

void SegmentedWaveform::validate() const {
  if (segments.empty()) throw std::invalid_argument("waveform: no segments");
  for (const auto& s : segments) {
    if (!(s.tau > 0.0)) throw std::invalid_argument("waveform: segment duration must be > 0");
    if (s.omega < 0.0)
      throw std::invalid_argument("waveform: amplitude must be >= 0 (fold sign into phase)");
    if (!(s.phi > -M_PI - 1e-12) || !(s.phi <= M_PI + 1e-12))
      throw std::invalid_argument("waveform: phase outside (-pi, pi]");
  }
}

double FourierWaveform::omega() const { return 2.0 * M_PI / tau_g; }

Cx FourierWaveform::coeff(int n) const {
  if (n < n_lo || n > n_hi) return {0.0, 0.0};
  return coeffs[size_t(n - n_lo)];
}

Cx FourierWaveform::value(double t) const {
  Cx acc = 0.0;
  const double w = omega();
  for (int n = n_lo; n <= n_hi; ++n) {
    double arg = -n * w * t;
    acc += coeff(n) * Cx(std::cos(arg), std::sin(arg));
  }
  if (phi0 != 0.0) acc *= Cx(std::cos(phi0), -std::sin(phi0));
  return acc;
}

void FourierWaveform::validate() const {
  if (!(tau_g > 0.0)) throw std::invalid_argument("waveform: tau_g must be > 0");
  if (n_lo > n_hi) throw std::invalid_argument("waveform: empty harmonic range");
  if (coeffs.size() != size_t(n_hi - n_lo + 1))
    throw std::invalid_argument("waveform: coefficient count does not match harmonic range");
  if (std::abs(coeff(0).real()) > 0.0)
    throw std::invalid_argument(
        "waveform: Re coeff(0) must vanish (nonzero value leaves a net carrier rotation)");
}

QuadratureVectors to_quadratures(const FourierWaveform& wf) {
  wf.validate();
  const int m = std::max({std::abs(wf.n_lo), std::abs(wf.n_hi), 0});
  QuadratureVectors q;
  q.m_max = m;
  q.omega_c = Eigen::VectorXd::Zero(2 * (m + 1));
  q.omega_m = Eigen::VectorXd::Zero(2 * (m + 1));
  auto ic = [&](int j) -> double& { return q.omega_c[j]; };
  auto rc = [&](int j) -> double& { return q.omega_c[m + 1 + j]; };
  auto rm = [&](int j) -> double& { return q.omega_m[j]; };
  auto im = [&](int j) -> double& { return q.omega_m[m + 1 + j]; };

  rc(0) = wf.coeff(0).real();  // zero by the validated invariant
  im(0) = wf.coeff(0).imag();
  for (int j = 1; j <= m; ++j) {
    Cx p = wf.coeff(j), n = wf.coeff(-j);
    rc(j) = p.real() + n.real();
    ic(j) = p.imag() - n.imag();
    rm(j) = -p.real() + n.real();
    im(j) = p.imag() + n.imag();
  }
  return q;
}

FourierWaveform from_quadratures(const QuadratureVectors& q, double tau_g, double mu) {
  const int m = q.m_max;
  if (q.omega_c.size() != 2 * (m + 1) || q.omega_m.size() != 2 * (m + 1))
    throw std::invalid_argument("quadratures: stacked length must be 2 (m_max + 1)");
  auto ic = [&](int j) { return q.omega_c[j]; };
  auto rc = [&](int j) { return q.omega_c[m + 1 + j]; };
  auto rm = [&](int j) { return q.omega_m[j]; };
  auto im = [&](int j) { return q.omega_m[m + 1 + j]; };

  const double scale = std::max({1.0, q.omega_c.cwiseAbs().maxCoeff(),
                                 q.omega_m.cwiseAbs().maxCoeff()});
  if (std::abs(ic(0)) > 1e-10 * scale || std::abs(rm(0)) > 1e-10 * scale)
    throw std::invalid_argument("quadratures: sin-block entries at harmonic 0 must vanish");
  if (std::abs(rc(0)) > 1e-10 * scale)
    throw std::invalid_argument(
        "quadratures: cos-block carrier entry must vanish (net carrier rotation)");

  FourierWaveform wf;
  wf.tau_g = tau_g;
  wf.mu = mu;
  wf.n_lo = -m;
  wf.n_hi = m;
  wf.coeffs.assign(size_t(2 * m + 1), Cx{});
  auto set = [&](int n, Cx v) { wf.coeffs[size_t(n + m)] = v; };

  set(0, Cx(0.0, im(0)));
  for (int j = 1; j <= m; ++j) {
    set(j, Cx(0.5 * (rc(j) - rm(j)), 0.5 * (ic(j) + im(j))));
    set(-j, Cx(0.5 * (rc(j) + rm(j)), 0.5 * (im(j) - ic(j))));
  }
  wf.validate();
  return wf;
}

double quadrature_profile(const Eigen::VectorXd& stacked, double w, double t) {
  const int m = int(stacked.size()) / 2 - 1;
  double acc = 0.0;
  for (int j = 0; j <= m; ++j) {
    acc += stacked[j] * std::sin(j * w * t);
    acc += stacked[m + 1 + j] * std::cos(j * w * t);
  }
  return acc;
}

Cx segment_fourier_coeff(const SegmentedWaveform& wf, int m) {
  wf.validate();
  const double tau_g = wf.duration();
  const double w = 2.0 * M_PI / tau_g;
  Cx acc = 0.0;
  double a = 0.0;
  for (const auto& s : wf.segments) {
    double b = a + s.tau;
    // segment value of f: Omega e^{-i(mu t + phi + phi0)}; times e^{i m w t}
    double c = s.phi + wf.phi0;
    Cx v = s.omega * Cx(std::cos(c), -std::sin(c));
    acc += v * oscint::to_std(oscint::tone(m * w - wf.mu, a, b));
    a = b;
  }
  return acc / tau_g;
}

namespace {

SegmentedWaveform sample_common(const FourierWaveform& wf, int n_seg, double mu, int rule) {
  wf.validate();
  const int m_max = std::max(std::abs(wf.n_lo), std::abs(wf.n_hi));
  if (n_seg <= 2 * m_max)
    throw std::invalid_argument("sample: need more than 2 max|n| segments, got " +
                                std::to_string(n_seg));
  const double w = wf.omega();
  const double tau_s = wf.tau_g / n_seg;

  // rule: 0 = box-response-corrected midpoint, 1 = naive midpoint, 2 = left edge
  std::vector<Cx> boost(size_t(wf.n_hi - wf.n_lo + 1), Cx(1.0, 0.0));
  if (rule == 0) {
    for (int n = wf.n_lo; n <= wf.n_hi; ++n) {
      double resp = oscint::sinc((mu - n * w) * tau_s * 0.5);
      if (std::abs(resp) < 1e-9)
        throw std::domain_error("sample: box-filter response vanishes at harmonic " +
                                std::to_string(n));
      boost[size_t(n - wf.n_lo)] = 1.0 / resp;
    }
  }

  SegmentedWaveform out;
  out.mu = mu;
  out.phi0 = wf.phi0;
  out.segments.resize(size_t(n_seg));
  for (int k = 0; k < n_seg; ++k) {
    double t_k = (rule == 2) ? k * tau_s : (k + 0.5) * tau_s;
    Cx v = 0.0;
    for (int n = wf.n_lo; n <= wf.n_hi; ++n) {
      double arg = (mu - n * w) * t_k;
      v += wf.coeff(n) * boost[size_t(n - wf.n_lo)] * Cx(std::cos(arg), std::sin(arg));
    }
    Segment& s = out.segments[size_t(k)];
    s.tau = tau_s;
    s.omega = std::abs(v);
    s.phi = (s.omega > 0.0) ? wrap_phase(-std::arg(v)) : 0.0;
  }
  out.validate();
  return out;
}

}  // namespace

SegmentedWaveform sample_sinc(const FourierWaveform& wf, int n_seg, double mu) {
  return sample_common(wf, n_seg, mu, 0);
}

SegmentedWaveform sample_naive(const FourierWaveform& wf, int n_seg, double mu, SampleRule rule) {
  return sample_common(wf, n_seg, mu, rule == SampleRule::midpoint ? 1 : 2);
}

}  // namespace gateforge
