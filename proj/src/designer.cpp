#include "gateforge/designer.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <vector>

#include "gateforge/dual.hpp"
#include "gateforge/gate_kernel.hpp"
#include "gateforge/optim.hpp"

namespace gateforge {

namespace {

using ad::Dual;

constexpr double kInf = std::numeric_limits<double>::infinity();

int default_restarts(int n_ions) { return n_ions <= 3 ? 64 : 256; }

std::uint64_t restart_seed(std::uint64_t seed, int idx) {
  return seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(idx + 1);
}

GateTarget resolve_target(const DesignSpec& spec) {
  if (spec.target.theta.size() == 0) return GateTarget::global_gate(spec.chain.n_ions);
  spec.target.validate(spec.chain.n_ions);
  return spec.target;
}

bool uniform_offdiag(const Eigen::MatrixXd& t) {
  const double ref = t(0, 1);
  for (Eigen::Index i = 0; i < t.rows(); ++i)
    for (Eigen::Index j = 0; j < t.cols(); ++j)
      if (i != j && std::abs(t(i, j) - ref) > 1e-12) return false;
  return true;
}

void run_parallel(int n_tasks, int jobs, const std::function<void(int)>& work) {
  int nw = jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency());
  nw = std::max(1, std::min(nw, n_tasks));
  std::atomic<int> next{0};
  auto loop = [&]() {
    for (int i = next.fetch_add(1); i < n_tasks; i = next.fetch_add(1)) work(i);
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(nw) - 1);
  for (int w = 0; w + 1 < nw; ++w) pool.emplace_back(loop);
  loop();
  for (auto& t : pool) t.join();
}

// restart outcome; ordering is the deterministic winner rule
struct Candidate {
  bool valid = false;
  bool converged = false;
  double epsilon = kInf;
  double objective = kInf;
  int iterations = 0;
  Eigen::VectorXd z;
  // segmented restarts carry their waveform: the parameter-to-waveform map
  // can differ per restart (each owns its detuning window)
  SegmentedWaveform wf;
};

bool wins(const Candidate& a, int ia, const Candidate& b, int ib, DesignObjective obj) {
  if (a.valid != b.valid) return a.valid;
  if (!a.valid) return ia < ib;
  if (a.converged != b.converged) return a.converged;
  // converged objective runs compare by objective; everything else by the
  // verified error; restart index breaks exact ties
  const bool by_objective = a.converged && obj != DesignObjective::infidelity;
  const double ka = by_objective ? a.objective : a.epsilon;
  const double kb = by_objective ? b.objective : b.epsilon;
  if (ka != kb) return ka < kb;
  return ia < ib;
}

// ---------------------------------------------------------------------
// segmented path
// ---------------------------------------------------------------------

struct SegLayout {
  int n_seg = 0;
  bool shared = true;
  bool var_dur = true;
  // fixed_om > 0 pins every segment to that Rabi frequency (phase-only
  // modulation); the detuning is then confined to (mu_lo, mu_hi) through a
  // sigmoid so the search cannot leave the band
  double fixed_om = 0.0;
  // mu_sig confines the detuning the same way without pinning the amplitude;
  // the constrained searches use it because their feasible set extends far
  // outside the physical band
  bool mu_sig = false;
  double mu_lo = 0.0, mu_hi = 0.0;
  // amp_sig boxes every amplitude into (amp_lo, amp_hi); the floor keeps the
  // iterate off the zero pulse, where the pair-phase rows lose their
  // first-order handle (they are quadratic in the drive)
  bool amp_sig = false;
  double amp_lo = 0.0, amp_hi = 0.0;
  bool bounded_mu() const { return fixed_om > 0.0 || mu_sig; }
  int n_amp() const { return fixed_om > 0.0 ? 0 : (shared ? 1 : n_seg); }
  int n_params() const { return 1 + n_amp() + n_seg + (var_dur ? n_seg : 0); }
  int amp_at(int k) const { return 1 + (shared ? 0 : k); }
  int phase_at(int k) const { return 1 + n_amp() + k; }
  int logit_at(int k) const { return 1 + n_amp() + n_seg + k; }
};

template <class S>
S sigmoid(const S& x) {
  using std::exp;
  using ad::exp;
  if (x >= S(0.0)) return S(1.0) / (S(1.0) + exp(S(0.0) - x));
  const S e = exp(x);
  return e / (S(1.0) + e);
}

double logit(double u) { return std::log(u / (1.0 - u)); }

// raw parameter vector -> drive parameters carrying exact derivatives
kernel::SegParams<Dual> seg_params_from(const Eigen::VectorXd& z, const SegLayout& lay,
                                        double tau_g, double phi0) {
  const int np = lay.n_params();
  const int k_seg = lay.n_seg;
  kernel::SegParams<Dual> p;
  p.mu = lay.bounded_mu() ? Dual(lay.mu_lo) + Dual(lay.mu_hi - lay.mu_lo) *
                                                  sigmoid(Dual::var(z[0], 0, np))
                          : Dual::var(z[0], 0, np);
  p.phi0 = Dual(phi0);
  p.tau.resize(static_cast<size_t>(k_seg));
  p.omega.resize(static_cast<size_t>(k_seg));
  p.phi.resize(static_cast<size_t>(k_seg));

  if (lay.var_dur) {
    // softmax segment fractions, shifted for stability
    double zmax = -kInf;
    for (int k = 0; k < k_seg; ++k) zmax = std::max(zmax, z[lay.logit_at(k)]);
    std::vector<Dual> ex(static_cast<size_t>(k_seg));
    Dual denom(0.0);
    for (int k = 0; k < k_seg; ++k) {
      ex[static_cast<size_t>(k)] =
          ad::exp(Dual::var(z[lay.logit_at(k)], lay.logit_at(k), np) - Dual(zmax));
      denom += ex[static_cast<size_t>(k)];
    }
    for (int k = 0; k < k_seg; ++k)
      p.tau[static_cast<size_t>(k)] = ex[static_cast<size_t>(k)] / denom * Dual(tau_g);
  } else {
    for (int k = 0; k < k_seg; ++k) p.tau[static_cast<size_t>(k)] = Dual(tau_g / k_seg);
  }
  for (int k = 0; k < k_seg; ++k) {
    if (lay.fixed_om > 0.0)
      p.omega[static_cast<size_t>(k)] = Dual(lay.fixed_om);
    else if (lay.amp_sig)
      p.omega[static_cast<size_t>(k)] =
          Dual(lay.amp_lo) + Dual(lay.amp_hi - lay.amp_lo) *
                                 sigmoid(Dual::var(z[lay.amp_at(k)], lay.amp_at(k), np));
    else
      p.omega[static_cast<size_t>(k)] = Dual::var(z[lay.amp_at(k)], lay.amp_at(k), np);
    p.phi[static_cast<size_t>(k)] = Dual::var(z[lay.phase_at(k)], lay.phase_at(k), np);
  }
  return p;
}

// gate error at one offset phase, with gradients w.r.t. the raw parameters
Dual seg_epsilon(const Eigen::VectorXd& z, const SegLayout& lay, double tau_g, double phi0,
                 const ModeStructure& ms, const Eigen::MatrixXd& tgt,
                 const std::vector<double>& nu, const std::vector<double>& eta) {
  const kernel::SegParams<Dual> p = seg_params_from(z, lay, tau_g, phi0);
  const auto vals = kernel::eval_gate<Dual>(p, nu, eta);
  const Eigen::MatrixXd& b = ms.vectors;
  Dual eps(0.0);
  for (int m = 0; m < static_cast<int>(nu.size()); ++m) {
    const auto& al = vals.alpha[static_cast<size_t>(m)];
    const Dual n2 = al.re * al.re + al.im * al.im;
    eps += Dual(0.25 * b.col(m).squaredNorm()) * n2;
  }
  for (Eigen::Index i = 0; i < b.rows(); ++i)
    for (Eigen::Index j = i + 1; j < b.rows(); ++j) {
      Dual th(0.0);
      for (int m = 0; m < static_cast<int>(nu.size()); ++m)
        th += Dual(b(i, m) * b(j, m)) * vals.theta[static_cast<size_t>(m)];
      const Dual d = th - Dual(tgt(i, j));
      eps += d * d;
    }
  eps += Dual(3.0) * vals.carrier * vals.carrier;
  return eps;
}

// Offset-phase insensitivity solved as hard equalities. The displacement and
// carrier integrals split exactly over the offset quadratures,
//   alpha(phi0) = cos(phi0) alpha(0) + sin(phi0) alpha(pi/2),
// and each pair phase is an exact quadratic in the drive, so it carries only
// the harmonics {1, cos 2 phi0, sin 2 phi0}. Vanishing closure and carrier at
// both quadratures plus pinning the three harmonics of every pair phase make
// the gate error identically zero for every offset phase. The rows, per mode
// then per pair: Re/Im alpha at 0 and pi/2, carrier at 0 and pi/2, then
// (mean - target, cos amplitude, sin amplitude) of each pair phase.
int seg_robust_rows(int n_modes, int n_ions) {
  return 4 * n_modes + 2 + 3 * (n_ions * (n_ions - 1)) / 2;
}

void seg_robust_constraints(const Eigen::VectorXd& z, const SegLayout& lay, double tau_g,
                            const ModeStructure& ms, const Eigen::MatrixXd& tgt,
                            const std::vector<double>& nu, const std::vector<double>& eta,
                            Eigen::VectorXd& c, Eigen::MatrixXd* jac) {
  const int np = lay.n_params();
  const int n_modes = static_cast<int>(nu.size());
  const auto vals0 = kernel::eval_gate<Dual>(seg_params_from(z, lay, tau_g, 0.0), nu, eta);
  const auto vals4 = kernel::eval_gate<Dual>(seg_params_from(z, lay, tau_g, M_PI / 4.0), nu, eta);
  const auto vals2 = kernel::eval_gate<Dual>(seg_params_from(z, lay, tau_g, M_PI / 2.0), nu, eta);

  const int rows = seg_robust_rows(n_modes, static_cast<int>(ms.vectors.rows()));
  c.resize(rows);
  if (jac) jac->setZero(rows, np);
  int r = 0;
  const auto put = [&](const Dual& d) {
    c[r] = d.v;
    if (jac) jac->row(r).head(d.g.size()) = d.g.transpose();
    ++r;
  };
  for (int m = 0; m < n_modes; ++m) {
    put(vals0.alpha[static_cast<size_t>(m)].re);
    put(vals0.alpha[static_cast<size_t>(m)].im);
    put(vals2.alpha[static_cast<size_t>(m)].re);
    put(vals2.alpha[static_cast<size_t>(m)].im);
  }
  put(vals0.carrier);
  put(vals2.carrier);

  const Eigen::MatrixXd& b = ms.vectors;
  for (Eigen::Index i = 0; i < b.rows(); ++i)
    for (Eigen::Index j = i + 1; j < b.rows(); ++j) {
      Dual t0(0.0), t4(0.0), t2(0.0);
      for (int m = 0; m < n_modes; ++m) {
        const Dual w(b(i, m) * b(j, m));
        t0 += w * vals0.theta[static_cast<size_t>(m)];
        t4 += w * vals4.theta[static_cast<size_t>(m)];
        t2 += w * vals2.theta[static_cast<size_t>(m)];
      }
      const Dual mean = (t0 + t2) * Dual(0.5);
      put(mean - Dual(tgt(i, j)));
      put((t0 - t2) * Dual(0.5));
      put(t4 - mean);
    }
}

SegmentedWaveform seg_extract(const Eigen::VectorXd& z, const SegLayout& lay, double tau_g) {
  SegmentedWaveform wf;
  wf.mu = lay.bounded_mu() ? lay.mu_lo + (lay.mu_hi - lay.mu_lo) * sigmoid(z[0]) : z[0];
  wf.phi0 = 0.0;
  std::vector<double> frac(static_cast<size_t>(lay.n_seg), 1.0 / lay.n_seg);
  if (lay.var_dur) {
    double zmax = -kInf;
    for (int k = 0; k < lay.n_seg; ++k) zmax = std::max(zmax, z[lay.logit_at(k)]);
    double denom = 0.0;
    for (int k = 0; k < lay.n_seg; ++k) {
      frac[static_cast<size_t>(k)] = std::exp(z[lay.logit_at(k)] - zmax);
      denom += frac[static_cast<size_t>(k)];
    }
    for (auto& f : frac) f = std::max(f / denom, 1e-9);
    const double total = std::accumulate(frac.begin(), frac.end(), 0.0);
    for (auto& f : frac) f /= total;
  }
  wf.segments.reserve(static_cast<size_t>(lay.n_seg));
  for (int k = 0; k < lay.n_seg; ++k) {
    double om = lay.fixed_om > 0.0 ? lay.fixed_om
                : lay.amp_sig ? lay.amp_lo + (lay.amp_hi - lay.amp_lo) * sigmoid(z[lay.amp_at(k)])
                              : z[lay.amp_at(k)];
    double ph = z[lay.phase_at(k)];
    if (om < 0.0) {  // amplitude sign lives in the phase
      om = -om;
      ph += M_PI;
    }
    wf.segments.push_back({tau_g * frac[static_cast<size_t>(k)], om, wrap_phase(ph)});
  }
  return wf;
}

}  // namespace

DesignResult design_segmented(const DesignSpec& spec) {
  if (spec.seg.tau_g <= 0.0) throw std::invalid_argument("segmented design needs tau_g > 0");
  if (spec.seg.n_seg < 2) throw std::invalid_argument("need at least two segments");
  const ModeStructure ms = normal_modes(spec.chain);
  const GateTarget target = resolve_target(spec);
  if (spec.seg.fixed_omega < 0.0) throw std::invalid_argument("fixed amplitude must be >= 0");
  SegLayout lay{spec.seg.n_seg, spec.seg.shared_amplitude, spec.seg.variable_durations,
                spec.seg.fixed_omega};
  if (lay.n_params() > ad::kMaxParams)
    throw std::invalid_argument("segment count exceeds the gradient parameter capacity");

  std::vector<double> nu(ms.frequencies.data(), ms.frequencies.data() + ms.frequencies.size());
  std::vector<double> eta(static_cast<size_t>(ms.lamb_dicke.cols()));
  for (Eigen::Index m = 0; m < ms.lamb_dicke.cols(); ++m)
    eta[static_cast<size_t>(m)] = ms.lamb_dicke.col(m).norm();

  double mu_lo = spec.seg.mu_lo, mu_hi = spec.seg.mu_hi;
  if (mu_lo == 0.0 && mu_hi == 0.0) {
    if (spec.chain.n_ions == 2) {
      mu_lo = ms.frequencies[0];
      mu_hi = ms.frequencies[1];
    } else {
      mu_lo = 0.5 * ms.frequencies[0];
      mu_hi = 6.0 * ms.frequencies[0];
    }
  }
  lay.mu_lo = mu_lo;
  lay.mu_hi = mu_hi;
  // the feasible set of the hard flatness equalities stretches far outside
  // the physical band, so robust searches pin the detuning inside it; the
  // amplitudes stay raw (a second squashing transform saturates too easily
  // and freezes the restoration steps)
  lay.mu_sig = spec.robust;

  // soft walls keep the search in the physical region (amplitudes within the
  // cap, detuning near its window); they vanish identically inside it and
  // never enter the verified error
  const auto barrier = [&](const Eigen::VectorXd& z) -> Dual {
    Dual pen(0.0);
    if (lay.fixed_om > 0.0) return pen;
    const int np = lay.n_params();
    if (!lay.amp_sig)
      for (int k = 0; k < lay.n_amp(); ++k) {
        const Dual a = Dual::var(z[lay.amp_at(k)], lay.amp_at(k), np) *
                       Dual(1.0 / spec.seg.omega_max);
        const Dual ex = a * a - Dual(1.0);
        if (ex.v > 0.0) pen += ex * ex;
      }
    if (!lay.bounded_mu()) {
      const Dual mu = Dual::var(z[0], 0, np);
      const double w = mu_hi - mu_lo;
      const Dual lo = (Dual(mu_lo) - mu) * Dual(1.0 / w);
      const Dual hi = (mu - Dual(mu_hi)) * Dual(1.0 / w);
      if (lo.v > 0.0) pen += lo * lo;
      if (hi.v > 0.0) pen += hi * hi;
    }
    return pen;
  };
  const auto plain_objective = [&](const Eigen::VectorXd& z, Eigen::VectorXd* grad) {
    const Dual acc =
        seg_epsilon(z, lay, spec.seg.tau_g, 0.0, ms, target.theta, nu, eta) + barrier(z);
    if (grad) {
      *grad = Eigen::VectorXd::Zero(lay.n_params());
      grad->head(acc.g.size()) = acc.g;
    }
    return acc.v;
  };
  // robust searches solve the flatness conditions as hard equalities; the
  // objective is a whisper of regularization, so each start is essentially a
  // root find onto the feasible set near its own detuning sample
  const auto logit_reg = [&](const Eigen::VectorXd& z) {
    Dual acc(0.0);
    const int np = lay.n_params();
    if (lay.var_dur)
      for (int k = 0; k < lay.n_seg; ++k) {
        const Dual d = Dual::var(z[lay.logit_at(k)], lay.logit_at(k), np);
        acc += Dual(1e-6) * d * d;  // pins the softmax shift direction
      }
    return acc;
  };

  const int n_restarts = spec.restarts > 0 ? spec.restarts : default_restarts(spec.chain.n_ions);
  std::vector<Candidate> cands(static_cast<size_t>(n_restarts));

  run_parallel(n_restarts, spec.jobs, [&](int idx) {
    Candidate& cand = cands[static_cast<size_t>(idx)];
    try {
      std::mt19937_64 eng(restart_seed(spec.seed, idx));
      std::uniform_real_distribution<double> u01(0.0, 1.0);
      // each robust restart owns one detuning sample: the sigmoid window is
      // shrunk to a sliver around the draw, so the restarts tile the band
      // instead of every search drifting to the same edge
      SegLayout rlay = lay;
      Eigen::VectorXd z0 = Eigen::VectorXd::Zero(lay.n_params());
      if (spec.robust) {
        const double w = 0.02 * (mu_hi - mu_lo);
        const double mu_draw = mu_lo + w + (mu_hi - mu_lo - 2.0 * w) * u01(eng);
        rlay.mu_lo = mu_draw - w;
        rlay.mu_hi = mu_draw + w;
        z0[0] = 0.0;
      } else {
        z0[0] = lay.bounded_mu() ? logit(0.10 + 0.80 * u01(eng))
                                 : mu_lo + (mu_hi - mu_lo) * u01(eng);
      }
      for (int k = 0; k < lay.n_amp(); ++k)
        z0[lay.amp_at(k)] = lay.amp_sig ? logit(0.20 + 0.60 * u01(eng))
                                        : spec.seg.omega_max * (0.25 + 0.75 * u01(eng));
      for (int k = 0; k < lay.n_seg; ++k)
        z0[lay.phase_at(k)] = -M_PI + 2.0 * M_PI * u01(eng);
      // duration logits start at zero: equal segments

      Eigen::VectorXd z_fin;
      int iters = 0;
      if (spec.robust) {
        opt::SqpProblem sqp_feas;
        sqp_feas.n_vars = rlay.n_params();
        sqp_feas.n_cons = seg_robust_rows(static_cast<int>(nu.size()), spec.chain.n_ions);
        sqp_feas.objective = [&](const Eigen::VectorXd& z, Eigen::VectorXd* grad) {
          const Dual acc = logit_reg(z) + barrier(z);
          if (grad) {
            *grad = Eigen::VectorXd::Zero(rlay.n_params());
            grad->head(acc.g.size()) = acc.g;
          }
          return acc.v;
        };
        sqp_feas.constraints = [&](const Eigen::VectorXd& z, Eigen::VectorXd& c,
                                   Eigen::MatrixXd* jac) {
          seg_robust_constraints(z, rlay, spec.seg.tau_g, ms, target.theta, nu, eta, c, jac);
        };

        opt::SqpOptions so;
        so.max_iter = 200;
        so.c_tol = 1e-12;
        opt::SqpResult sr = opt::minimize_sqp(sqp_feas, z0, so);
        iters = sr.iterations;
        opt::feasibility_polish(sqp_feas.constraints, sr.x, 1e-13, 40);
        z_fin = sr.x;
      } else {
        opt::BfgsOptions bo;
        bo.max_iter = 400;
        bo.g_tol = 1e-11;
        bo.f_floor = 1e-17;
        opt::BfgsResult br = opt::minimize_bfgs(plain_objective, z0, bo);
        z_fin = br.x;
        iters = br.iterations;
      }

      const SegmentedWaveform wf = seg_extract(z_fin, rlay, spec.seg.tau_g);
      double eps = infidelity(gate_quantities(wf, ms), ms, target);
      if (spec.robust) {
        for (const auto& [ph, e] : phase_scan(wf, ms, target, 64)) {
          (void)ph;
          eps = std::max(eps, e);
        }
      }
      cand.valid = true;
      cand.epsilon = eps;
      cand.objective = eps;
      cand.iterations = iters;
      cand.z = z_fin;
      cand.wf = wf;
      // full convergence also demands a Lamb-Dicke compatible trajectory, so
      // an accurate but large-excursion candidate loses to a usable one
      cand.converged = eps <= spec.tol && evaluate(wf, ms, target).max_abs_alpha < 1.0;
    } catch (const std::exception&) {
      cand.valid = false;
    }
  });

  int best = 0;
  for (int i = 1; i < n_restarts; ++i)
    if (wins(cands[static_cast<size_t>(i)], i, cands[static_cast<size_t>(best)], best,
             DesignObjective::infidelity))
      best = i;
  const Candidate& win = cands[static_cast<size_t>(best)];
  if (!win.valid) throw std::runtime_error("all segmented restarts failed");

  DesignResult res;
  res.method = DesignMethod::segmented;
  res.seg_waveform = win.wf;
  res.seg_waveform.validate();
  res.report = evaluate(res.seg_waveform, ms, target);
  res.epsilon = win.epsilon;
  res.objective_value = win.epsilon;
  res.restart_index = best;
  res.iterations = win.iterations;
  res.converged = win.epsilon <= spec.tol && res.report.max_abs_alpha < 1.0;
  if (win.epsilon <= spec.tol && res.report.max_abs_alpha >= 1.0)
    res.warnings.push_back(
        "motional excursion leaves the Lamb-Dicke regime (peak per-ion displacement >= 1); "
        "design not marked converged");
  return res;
}

// ---------------------------------------------------------------------
// fourier path
// ---------------------------------------------------------------------

namespace {

// shared per-design precomputation for the constrained searches
struct FourierWork {
  ConstraintSystem sys;
  ReducedSystem red;
  int d = 0;        // kernel dimension
  int n_vars = 0;   // d, or 2d with the carrier profile in play
  bool robust = false;
  std::vector<Eigen::MatrixXd> pair_mats;  // pair-phase forms in kernel coords
  std::vector<double> pair_tgt;
  Eigen::MatrixXd grid;  // basis rows times kernel: |f| sampling operator
  double dt = 0.0;       // grid spacing
};

FourierWork make_work(const ModeStructure& ms, const GateTarget& target, double tau_g, int n_hi,
                      bool robust, int grid_per_period) {
  FourierWork w;
  w.sys = build_constraints(ms, tau_g, -n_hi, n_hi);
  w.red = reduce(w.sys, robust);
  w.d = w.red.dim_kernel;
  w.robust = robust;
  w.n_vars = robust ? 2 * w.d : w.d;

  const Eigen::MatrixXd& b = ms.vectors;
  for (Eigen::Index i = 0; i < b.rows(); ++i)
    for (Eigen::Index j = i + 1; j < b.rows(); ++j) {
      Eigen::MatrixXd p = Eigen::MatrixXd::Zero(w.d, w.d);
      for (Eigen::Index m = 0; m < b.cols(); ++m)
        p += b(i, m) * b(j, m) * w.red.a_mats[static_cast<size_t>(m)];
      w.pair_mats.push_back(0.5 * (p + p.transpose()));
      w.pair_tgt.push_back(target.theta(i, j));
    }

  const int m_max = w.sys.m_max;
  const int n_t = std::max(grid_per_period * std::max(m_max, 1), 256);
  const double wfreq = 2.0 * M_PI / tau_g;
  w.dt = tau_g / n_t;
  Eigen::MatrixXd basis(n_t, 2 * (m_max + 1));
  for (int k = 0; k < n_t; ++k) {
    const double t = (k + 0.5) * w.dt;  // midpoint grid: periodic-exact area
    for (int j = 0; j <= m_max; ++j) {
      basis(k, j) = std::sin(j * wfreq * t);
      basis(k, m_max + 1 + j) = std::cos(j * wfreq * t);
    }
  }
  w.grid = basis * w.red.kernel;
  return w;
}

// constraint residuals and Jacobian over the packed variable vector
opt::ConstraintFn make_constraints(const FourierWork& w, const ModeStructure& ms) {
  const int n_pairs = static_cast<int>(w.pair_mats.size());
  const int n_modes = static_cast<int>(ms.frequencies.size());
  const int n_cons = w.robust ? n_pairs + 2 * n_modes : n_pairs;
  const int d = w.d;
  return [&w, n_pairs, n_modes, n_cons, d](const Eigen::VectorXd& z, Eigen::VectorXd& c,
                                           Eigen::MatrixXd* jac) {
    c.resize(n_cons);
    if (jac) jac->setZero(n_cons, w.n_vars);
    const Eigen::VectorXd x_m = w.robust ? z.tail(d) : z;
    for (int p = 0; p < n_pairs; ++p) {
      const Eigen::VectorXd px = w.pair_mats[static_cast<size_t>(p)] * x_m;
      c[p] = x_m.dot(px) - w.pair_tgt[static_cast<size_t>(p)];
      if (jac) {
        if (w.robust)
          jac->row(p).tail(d) = 2.0 * px.transpose();
        else
          jac->row(p) = 2.0 * px.transpose();
      }
    }
    if (!w.robust) return;
    const Eigen::VectorXd x_c = z.head(d);
    for (int m = 0; m < n_modes; ++m) {
      const Eigen::MatrixXd& a = w.red.a_mats[static_cast<size_t>(m)];
      const Eigen::VectorXd ac = a * x_c;
      const Eigen::VectorXd am = a * x_m;
      const int r_eq = n_pairs + m;
      const int r_x = n_pairs + n_modes + m;
      c[r_eq] = x_c.dot(ac) - x_m.dot(am);  // equal phase from both quadratures
      c[r_x] = x_c.dot(am);                 // no cross term
      if (jac) {
        jac->row(r_eq).head(d) = 2.0 * ac.transpose();
        jac->row(r_eq).tail(d) = -2.0 * am.transpose();
        jac->row(r_x).head(d) = am.transpose();
        jac->row(r_x).tail(d) = ac.transpose();
      }
    }
  };
}

// squared drive magnitude on the grid and its gradient accumulation
struct GridEval {
  Eigen::VectorXd s;         // |f|^2 per grid point
  Eigen::VectorXd gc, gm;    // grid values of each quadrature profile
};

GridEval grid_eval(const FourierWork& w, const Eigen::VectorXd& z) {
  GridEval e;
  const int d = w.d;
  if (w.robust) {
    e.gc = w.grid * z.head(d);
    e.gm = w.grid * z.tail(d);
    e.s = e.gc.cwiseAbs2() + e.gm.cwiseAbs2();
  } else {
    e.gm = w.grid * z;
    e.s = e.gm.cwiseAbs2();
  }
  return e;
}

double true_max_rabi(const FourierWork& w, const Eigen::VectorXd& z) {
  return std::sqrt(grid_eval(w, z).s.maxCoeff());
}

double grid_area(const FourierWork& w, const Eigen::VectorXd& z) {
  return grid_eval(w, z).s.cwiseSqrt().sum() * w.dt;
}

// log-sum-exp softened maximum of |f|^2 at inverse temperature beta
opt::ObjectiveFn make_max_objective(const FourierWork& w, double beta) {
  return [&w, beta](const Eigen::VectorXd& z, Eigen::VectorXd* grad) {
    const GridEval e = grid_eval(w, z);
    const double s_max = e.s.maxCoeff();
    const Eigen::ArrayXd ex = ((e.s.array() - s_max) * beta).exp();
    const double sum = ex.sum();
    const double f = s_max + std::log(sum) / beta;
    if (grad) {
      const Eigen::VectorXd wgt = (ex / sum).matrix();
      grad->resize(w.n_vars);
      if (w.robust) {
        grad->head(w.d) = 2.0 * w.grid.transpose() * wgt.cwiseProduct(e.gc);
        grad->tail(w.d) = 2.0 * w.grid.transpose() * wgt.cwiseProduct(e.gm);
      } else {
        *grad = 2.0 * w.grid.transpose() * wgt.cwiseProduct(e.gm);
      }
    }
    return f;
  };
}

// smoothed pulse area: dt * sum sqrt(|f|^2 + delta^2)
opt::ObjectiveFn make_area_objective(const FourierWork& w, double delta2) {
  return [&w, delta2](const Eigen::VectorXd& z, Eigen::VectorXd* grad) {
    const GridEval e = grid_eval(w, z);
    const Eigen::ArrayXd root = (e.s.array() + delta2).sqrt();
    if (grad) {
      const Eigen::VectorXd inv = root.inverse().matrix();
      grad->resize(w.n_vars);
      if (w.robust) {
        grad->head(w.d) = w.dt * (w.grid.transpose() * inv.cwiseProduct(e.gc));
        grad->tail(w.d) = w.dt * (w.grid.transpose() * inv.cwiseProduct(e.gm));
      } else {
        *grad = w.dt * (w.grid.transpose() * inv.cwiseProduct(e.gm));
      }
    }
    return w.dt * root.sum();
  };
}

opt::ObjectiveFn make_norm_objective() {
  return [](const Eigen::VectorXd& z, Eigen::VectorXd* grad) {
    if (grad) *grad = 2.0 * z;
    return z.squaredNorm();
  };
}

FourierWaveform work_waveform(const FourierWork& w, const Eigen::VectorXd& z, double mu_hint) {
  if (w.robust) return kernel_waveform(w.sys, w.red, z.head(w.d), z.tail(w.d), mu_hint);
  return kernel_waveform(w.sys, w.red, z, mu_hint);
}

// scale a direction so its largest pair phase matches the gate target scale
void scale_to_phase(const FourierWork& w, Eigen::VectorXd& v) {
  double ph = 0.0;
  for (const auto& p : w.pair_mats) ph = std::max(ph, std::abs(v.dot(p * v)));
  double tgt = 0.0;
  for (double t : w.pair_tgt) tgt = std::max(tgt, std::abs(t));
  if (tgt == 0.0) tgt = M_PI / 4.0;
  if (ph > 1e-12) v *= std::sqrt(tgt / ph);
}

}  // namespace

DesignResult design_fourier(const DesignSpec& spec) {
  if (spec.fr.tau_g <= 0.0) throw std::invalid_argument("fourier design needs tau_g > 0");
  const ModeStructure ms = normal_modes(spec.chain);
  const GateTarget target = resolve_target(spec);
  const int n_hi = spec.fr.n_hi > 0 ? spec.fr.n_hi : default_truncation(ms, spec.fr.tau_g);
  const FourierWork work =
      make_work(ms, target, spec.fr.tau_g, n_hi, spec.robust, spec.fr.grid_per_period);

  // cheap infeasibility certificates for the uniform-target gate
  if (uniform_offdiag(target.theta)) {
    if (spec.chain.n_ions == 2) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(work.red.a_mats[0] - work.red.a_mats[1]);
      if (es.eigenvalues().maxCoeff() <= 0.0)
        throw InfeasibleError("pair-phase form has no positive direction at this gate time");
    } else if (spec.chain.n_ions == 3) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(work.red.a_mats[1] - work.red.a_mats[2]);
      const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
      if (lo > 0.0 || hi < 0.0) {
        std::ostringstream msg;
        msg << "gate time below the three-ion speed limit";
        try {
          const double far = 2.5 * 2.0 * M_PI / ms.frequencies[0];
          const double bound = three_qubit_speed_limit(ms, spec.fr.tau_g, far,
                                                       default_truncation(ms, far), spec.robust);
          msg << " (feasible above ~" << bound / (2.0 * M_PI / ms.frequencies[0])
              << " motional periods)";
        } catch (const std::exception&) {
        }
        throw InfeasibleError(msg.str());
      }
    }
  }

  const opt::ConstraintFn constraints = make_constraints(work, ms);
  const int n_pairs = static_cast<int>(work.pair_mats.size());
  const int n_cons = work.robust ? n_pairs + 2 * static_cast<int>(ms.frequencies.size()) : n_pairs;

  const int n_random = spec.restarts > 0 ? spec.restarts : default_restarts(spec.chain.n_ions);
  const int n_warm = static_cast<int>(std::min(spec.fr.warm_c.size(), spec.fr.warm_m.size()));
  const int n_total = n_warm + n_random;
  std::vector<Candidate> cands(static_cast<size_t>(n_total));

  run_parallel(n_total, spec.jobs, [&](int idx) {
    Candidate& cand = cands[static_cast<size_t>(idx)];
    try {
      Eigen::VectorXd z0(work.n_vars);
      if (idx < n_warm) {  // warm starts occupy the lowest indices
        const Eigen::VectorXd& wc = spec.fr.warm_c[static_cast<size_t>(idx)];
        const Eigen::VectorXd& wm = spec.fr.warm_m[static_cast<size_t>(idx)];
        if (wc.size() != work.red.kernel.rows() || wm.size() != work.red.kernel.rows())
          throw std::runtime_error("warm start dimension mismatch");
        const Eigen::VectorXd xc = work.red.kernel.transpose() * wc;
        const Eigen::VectorXd xm = work.red.kernel.transpose() * wm;
        if (work.robust) {
          z0.head(work.d) = xc;
          z0.tail(work.d) = xm;
        } else {
          z0 = xm;
        }
      } else {
        std::mt19937_64 eng(restart_seed(spec.seed, idx - n_warm));
        std::normal_distribution<double> gauss(0.0, 1.0);
        Eigen::VectorXd xm(work.d);
        for (int i = 0; i < work.d; ++i) xm[i] = gauss(eng);
        scale_to_phase(work, xm);
        if (work.robust) {
          Eigen::VectorXd xc(work.d);
          for (int i = 0; i < work.d; ++i) xc[i] = gauss(eng);
          scale_to_phase(work, xc);
          z0.head(work.d) = xc;
          z0.tail(work.d) = xm;
        } else {
          z0 = xm;
        }
      }

      opt::SqpProblem prob;
      prob.constraints = constraints;
      prob.n_vars = work.n_vars;
      prob.n_cons = n_cons;
      opt::SqpOptions so;
      so.max_iter = 120;
      so.c_tol = 1e-11;
      so.g_tol = 1e-7;

      Eigen::VectorXd z = z0;
      int iters = 0;
      if (spec.objective == DesignObjective::max_rabi) {
        const GridEval e0 = grid_eval(work, z);
        for (double beta_rel : {16.0, 64.0, 256.0, 1024.0, 4096.0}) {
          const double s_ref = std::max(grid_eval(work, z).s.maxCoeff(), 1e-12);
          prob.objective = make_max_objective(work, beta_rel / s_ref);
          const opt::SqpResult sr = opt::minimize_sqp(prob, z, so);
          z = sr.x;
          iters += sr.iterations;
        }
        (void)e0;
      } else if (spec.objective == DesignObjective::pulse_area) {
        const double s0 = std::max(grid_eval(work, z).s.maxCoeff(), 1e-12);
        prob.objective = make_area_objective(work, 1e-12 * s0);
        const opt::SqpResult sr = opt::minimize_sqp(prob, z, so);
        z = sr.x;
        iters += sr.iterations;
      } else {
        prob.objective = make_norm_objective();
        const opt::SqpResult sr = opt::minimize_sqp(prob, z, so);
        z = sr.x;
        iters += sr.iterations;
      }
      opt::feasibility_polish(constraints, z, 1e-12, 60);

      const FourierWaveform wf = work_waveform(work, z, spec.fr.mu_hint);
      double eps = infidelity(gate_quantities(wf, ms), ms, target);
      if (spec.robust) {
        for (const auto& [ph, e] : phase_scan(wf, ms, target, 64)) {
          (void)ph;
          eps = std::max(eps, e);
        }
      }
      cand.valid = true;
      cand.epsilon = eps;
      cand.objective = spec.objective == DesignObjective::max_rabi  ? true_max_rabi(work, z)
                       : spec.objective == DesignObjective::pulse_area ? grid_area(work, z)
                                                                       : eps;
      cand.converged = eps <= spec.tol;
      cand.iterations = iters;
      cand.z = z;
    } catch (const std::exception&) {
      cand.valid = false;
    }
  });

  int best = 0;
  for (int i = 1; i < n_total; ++i)
    if (wins(cands[static_cast<size_t>(i)], i, cands[static_cast<size_t>(best)], best,
             spec.objective))
      best = i;
  const Candidate& win = cands[static_cast<size_t>(best)];
  if (!win.valid) throw std::runtime_error("all fourier restarts failed");

  DesignResult res;
  res.method = DesignMethod::fourier;
  res.fourier_waveform = work_waveform(work, win.z, spec.fr.mu_hint);
  res.fourier_waveform.validate();
  res.report = evaluate(res.fourier_waveform, ms, target);
  res.epsilon = win.epsilon;
  res.objective_value = win.objective;
  res.restart_index = best;
  res.iterations = win.iterations;
  res.converged = win.converged && res.report.max_abs_alpha < 1.0;
  return res;
}

DesignResult design(const DesignSpec& spec) {
  return spec.method == DesignMethod::segmented ? design_segmented(spec) : design_fourier(spec);
}

std::vector<ScanPoint> scan_gate_time(const DesignSpec& spec, const std::vector<double>& tau_list) {
  std::vector<ScanPoint> out;
  out.reserve(tau_list.size());
  DesignSpec cur = spec;
  cur.method = DesignMethod::fourier;
  if (cur.fr.n_hi <= 0 && !tau_list.empty()) {
    // pin one truncation for the whole scan so warm starts stay compatible
    const double tau_max = *std::max_element(tau_list.begin(), tau_list.end());
    cur.fr.n_hi = default_truncation(normal_modes(spec.chain), tau_max);
  }
  for (double tau_g : tau_list) {
    cur.fr.tau_g = tau_g;
    ScanPoint pt;
    pt.tau_g = tau_g;
    try {
      const DesignResult r = design_fourier(cur);
      pt.objective_value = r.objective_value;
      pt.epsilon = r.epsilon;
      pt.converged = r.converged;
      // warm-start the next grid point with this solution
      const QuadratureVectors q = to_quadratures(r.fourier_waveform);
      cur.fr.warm_c.assign(1, q.omega_c);
      cur.fr.warm_m.assign(1, q.omega_m);
    } catch (const InfeasibleError&) {
      pt.objective_value = kInf;
      pt.epsilon = kInf;
      pt.converged = false;
    }
    out.push_back(pt);
  }
  return out;
}

double pulse_area(const SegmentedWaveform& wf) {
  double acc = 0.0;
  for (const auto& s : wf.segments) acc += s.tau * s.omega;
  return acc;
}

double pulse_area(const FourierWaveform& wf, int grid_per_period) {
  const int m_max = std::max(std::abs(wf.n_lo), std::abs(wf.n_hi));
  const int n_t = std::max(grid_per_period * std::max(m_max, 1), 256);
  const double dt = wf.tau_g / n_t;
  double acc = 0.0;
  for (int k = 0; k < n_t; ++k) acc += std::abs(wf.value((k + 0.5) * dt));
  return acc * dt;
}

}  // namespace gateforge
