#pragma once
// Closed-form gate functionals for piecewise-constant drives.
//
// For a drive f(t) = Omega_k e^{-i(mu t + phi_k + phi0)} on segment k and a
// mode at frequency nu with coupling eta, the gate is characterized by
//   alpha = i eta integral Omega(t) sin(mu t + phi(t) + phi0) e^{i nu t} dt
//   Theta = 2 eta^2 double-integral (t2 < t1) of
//             Omega(t1) Omega(t2) sin(arg t1) sin(arg t2) sin(nu (t1 - t2))
//   Phi   = integral Omega(t) cos(mu t + phi(t) + phi0) dt
// The sign of Theta is fixed so that a drive detuned between two modes
// accumulates a positive pair phase on the lower mode's side.
// Each segment (pair) reduces to products of single tones plus one ordered
// pair integral; see oscint. Templated on the scalar so the designer can
// evaluate on dual numbers for exact gradients.

#include <vector>

#include "gateforge/oscint.hpp"

namespace gateforge::kernel {

using oscint::CVal;
using oscint::cexp;

template <class S> struct SegParams {
  S mu{}, phi0{};
  std::vector<S> tau, omega, phi;
  int count() const { return int(tau.size()); }
};

template <class S> struct GateVals {
  std::vector<CVal<S>> alpha;  // per mode
  std::vector<S> theta;        // per mode
  S carrier{};                 // Phi
};

namespace detail {

// J for an ordered segment pair (t1 in segment 1, t2 in segment 2 entirely
// earlier): P/Q are tone(mu+nu)/tone(mu-nu) over each segment, c the total
// segment phases. Expansion of the triple sine product over sign triples,
// folded by conjugation symmetry.
template <class S>
S rect_term(const CVal<S>& p1, const CVal<S>& q1, const CVal<S>& p2, const CVal<S>& q2,
            const S& c1, const S& c2) {
  CVal<S> e_sum = cexp(c1 + c2);
  CVal<S> e_dif = cexp(c1 - c2);
  S im = (e_sum * (p1 * q2)).im - (e_sum * (q1 * p2)).im - (e_dif * (p1 * conj(p2))).im +
         (e_dif * (q1 * conj(q2))).im;
  return im * (-0.25);
}

// same-segment ordered contribution (both times in [a, b], phase c)
template <class S>
S tri_term(const S& mu, const S& nu, const S& a, const S& b, const S& c) {
  using oscint::ordered_tones;
  CVal<S> e2 = cexp(c + c);
  S im = (e2 * ordered_tones(mu + nu, mu - nu, a, b)).im -
         (e2 * ordered_tones(mu - nu, mu + nu, a, b)).im -
         ordered_tones(mu + nu, -mu - nu, a, b).im + ordered_tones(mu - nu, -mu + nu, a, b).im;
  return im * (-0.25);
}

}  // namespace detail

// Full-gate values for every mode. nu/eta are the mode frequencies and
// mode-level couplings (eta_m, not the per-ion matrix).
template <class S>
GateVals<S> eval_gate(const SegParams<S>& p, const std::vector<double>& nu,
                      const std::vector<double>& eta) {
  const int nk = p.count();
  const int nm = int(nu.size());
  GateVals<S> out;
  out.alpha.resize(nm);
  out.theta.assign(nm, S(0.0));

  // segment boundaries and total phases
  std::vector<S> a(nk), b(nk), c(nk);
  {
    S t(0.0);
    for (int k = 0; k < nk; ++k) {
      a[k] = t;
      t = t + p.tau[k];
      b[k] = t;
      c[k] = p.phi[k] + p.phi0;
    }
  }

  // carrier: Phi = sum_k Omega_k Re(e^{ic_k} tone(mu; a, b))
  S phi_acc(0.0);
  for (int k = 0; k < nk; ++k)
    phi_acc += p.omega[k] * (cexp(c[k]) * oscint::tone(p.mu, a[k], b[k])).re;
  out.carrier = phi_acc;

  std::vector<CVal<S>> P(nk), Q(nk);
  for (int m = 0; m < nm; ++m) {
    const S nu_m(nu[m]);
    for (int k = 0; k < nk; ++k) {
      P[k] = oscint::tone(p.mu + nu_m, a[k], b[k]);
      Q[k] = oscint::tone(p.mu - nu_m, a[k], b[k]);
    }

    // alpha = (eta/2) sum_k Omega_k [e^{ic} P - e^{-ic} conj(Q)]
    CVal<S> al{};
    for (int k = 0; k < nk; ++k) {
      CVal<S> e = cexp(c[k]);
      al = al + (e * P[k] - conj(e) * conj(Q[k])) * (p.omega[k] * (0.5 * eta[m]));
    }
    out.alpha[m] = al;

    S th(0.0);
    for (int k1 = 0; k1 < nk; ++k1) {
      for (int k2 = 0; k2 < k1; ++k2)
        th += p.omega[k1] * p.omega[k2] *
              detail::rect_term(P[k1], Q[k1], P[k2], Q[k2], c[k1], c[k2]);
      th += p.omega[k1] * p.omega[k1] * detail::tri_term(p.mu, nu_m, a[k1], b[k1], c[k1]);
    }
    out.theta[m] = th * (2.0 * eta[m] * eta[m]);
  }
  return out;
}

}  // namespace gateforge::kernel
