#pragma once
// Drive waveform representations and the maps between them.
//
// The physical drive is the complex function f(t) = Omega(t) e^{-i(mu t +
// phi(t) + phi0)} on [0, tau_g]. Two storable forms:
//   * SegmentedWaveform: piecewise-constant amplitude/phase segments.
//   * FourierWaveform:   f(t) = sum_n coeff(n) e^{-i n w t}, w = 2 pi/tau_g.
// The quadrature stacking splits Re f (carrier quadrature) and Im f
// (motional quadrature) into sin/cos coefficient blocks over harmonics
// 0..M; those stacked vectors are what the linear-algebra layer consumes.

#include <Eigen/Core>
#include <complex>
#include <vector>

namespace gateforge {

using Cx = std::complex<double>;

// wrap into (-pi, pi]
double wrap_phase(double p);

struct Segment {
  double tau = 0.0;    // duration, > 0
  double omega = 0.0;  // Rabi amplitude, >= 0 (sign belongs in the phase)
  double phi = 0.0;    // phase, in (-pi, pi]
};

struct SegmentedWaveform {
  double mu = 0.0;    // drive detuning, units of the COM frequency
  double phi0 = 0.0;  // global phase offset common to every segment
  std::vector<Segment> segments;

  double duration() const;
  Cx value(double t) const;  // f(t); t clamped to [0, duration]
  void validate() const;
};

struct FourierWaveform {
  double tau_g = 0.0;
  int n_lo = 0, n_hi = 0;
  std::vector<Cx> coeffs;  // index n_lo..n_hi
  double mu = 0.0;         // carrier detuning hint, used when resampling
  double phi0 = 0.0;

  double omega() const;  // fundamental 2 pi / tau_g
  Cx coeff(int n) const;
  Cx value(double t) const;
  void validate() const;  // requires Re coeff(0) == 0, see from-quadrature map
};

// Stacked quadrature coefficients over harmonics j = 0..m_max: first block
// multiplies sin(j w t), second block cos(j w t). omega_c reconstructs Re f,
// omega_m reconstructs Im f. The j = 0 entry of each sin block is
// identically zero (it multiplies sin 0).
struct QuadratureVectors {
  int m_max = 0;
  Eigen::VectorXd omega_c;  // [ic-block; rc-block], length 2 (m_max + 1)
  Eigen::VectorXd omega_m;  // [rm-block; im-block], length 2 (m_max + 1)
};

QuadratureVectors to_quadratures(const FourierWaveform& wf);
FourierWaveform from_quadratures(const QuadratureVectors& q, double tau_g, double mu = 0.0);

// sum_j v[j] sin(j w t) + v[m+1+j] cos(j w t) for a stacked vector v
double quadrature_profile(const Eigen::VectorXd& stacked, double w, double t);

// Fourier coefficient (1/tau_g) integral f(t) e^{i m w t} dt of a segmented
// record, closed form per segment
Cx segment_fourier_coeff(const SegmentedWaveform& wf, int m);

enum class SampleRule { midpoint, left };

// Piecewise-constant resampling whose Fourier content reproduces the
// low-order coefficients of wf exactly (amplitudes boosted by the inverse
// box-filter response). Requires n_seg > 2 max(|n_lo|, n_hi).
SegmentedWaveform sample_sinc(const FourierWaveform& wf, int n_seg, double mu);

// Pointwise sampling at the midpoint or left edge of each segment; kept as
// the baseline the boosted sampler is compared against.
SegmentedWaveform sample_naive(const FourierWaveform& wf, int n_seg, double mu, SampleRule rule);

}  // namespace gateforge
