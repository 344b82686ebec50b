#include "gateforge/optim.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gateforge::opt {

namespace {

// min-norm least-squares solve through a precomputed SVD with relative cutoff
Eigen::VectorXd svd_solve(const Eigen::JacobiSVD<Eigen::MatrixXd>& svd,
                          const Eigen::VectorXd& rhs) {
  const auto& sv = svd.singularValues();
  const double cut = (sv.size() > 0 ? sv[0] : 0.0) * 1e-12;
  Eigen::VectorXd t = svd.matrixU().transpose() * rhs;
  for (Eigen::Index i = 0; i < sv.size(); ++i) t[i] = (sv[i] > cut) ? t[i] / sv[i] : 0.0;
  return svd.matrixV().leftCols(sv.size()) * t;
}

int svd_rank(const Eigen::JacobiSVD<Eigen::MatrixXd>& svd) {
  const auto& sv = svd.singularValues();
  const double cut = (sv.size() > 0 ? sv[0] : 0.0) * 1e-12;
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > cut) ++r;
  return r;
}

}  // namespace

BfgsResult minimize_bfgs(const ObjectiveFn& fg, Eigen::VectorXd x0, const BfgsOptions& opt) {
  const int n = static_cast<int>(x0.size());
  BfgsResult res;
  res.x = std::move(x0);
  Eigen::VectorXd g(n);
  res.f = fg(res.x, &g);
  res.g_inf = g.lpNorm<Eigen::Infinity>();
  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(n, n);

  for (int it = 0; it < opt.max_iter; ++it) {
    res.iterations = it;
    if (res.g_inf <= opt.g_tol || res.f <= opt.f_floor) {
      res.converged = true;
      return res;
    }
    Eigen::VectorXd p = -(h_inv * g);
    double gp = g.dot(p);
    if (gp >= 0.0) {  // curvature lost, restart from steepest descent
      h_inv.setIdentity();
      p = -g;
      gp = g.dot(p);
    }
    // Armijo backtracking
    double alpha = 1.0;
    double f_new = res.f;
    Eigen::VectorXd g_new(n), x_new;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = res.x + alpha * p;
      f_new = fg(x_new, &g_new);
      if (f_new <= res.f + 1e-4 * alpha * gp) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) return res;  // no decrease along a descent direction: stuck
    const Eigen::VectorXd s = x_new - res.x;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd i_mat = Eigen::MatrixXd::Identity(n, n);
      h_inv = (i_mat - rho * s * y.transpose()) * h_inv * (i_mat - rho * y * s.transpose()) +
              rho * s * s.transpose();
    }
    const double step = s.norm();
    res.x = std::move(x_new);
    res.f = f_new;
    g = g_new;
    res.g_inf = g.lpNorm<Eigen::Infinity>();
    if (step < opt.step_tol) break;
  }
  res.converged = res.g_inf <= opt.g_tol || res.f <= opt.f_floor;
  return res;
}

namespace {

// least-squares multipliers: y minimizing |g + jac' y|, via the SVD of jac
Eigen::VectorXd multipliers(const Eigen::JacobiSVD<Eigen::MatrixXd>& svd,
                            const Eigen::VectorXd& g) {
  const auto& sv = svd.singularValues();
  const double cut = (sv.size() > 0 ? sv[0] : 0.0) * 1e-12;
  Eigen::VectorXd t = svd.matrixV().leftCols(sv.size()).transpose() * (-g);
  for (Eigen::Index i = 0; i < sv.size(); ++i) t[i] = (sv[i] > cut) ? t[i] / sv[i] : 0.0;
  return svd.matrixU().leftCols(sv.size()) * t;
}

}  // namespace

SqpResult minimize_sqp(const SqpProblem& prob, Eigen::VectorXd x0, const SqpOptions& opt) {
  const int n = prob.n_vars;
  const int m = prob.n_cons;
  if (x0.size() != n) throw std::invalid_argument("sqp start size mismatch");

  SqpResult res;
  res.x = std::move(x0);
  Eigen::VectorXd g(n), c(m);
  Eigen::MatrixXd jac(m, n);
  res.f = prob.objective(res.x, &g);
  prob.constraints(res.x, c, &jac);
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
  double rho = 1.0;

  for (int it = 0; it < opt.max_iter; ++it) {
    res.iterations = it + 1;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const int rank = svd_rank(svd);
    const Eigen::VectorXd y = multipliers(svd, g);
    const Eigen::VectorXd grad_l = g + jac.transpose() * y;
    res.c_inf = c.lpNorm<Eigen::Infinity>();
    res.stat_inf = grad_l.lpNorm<Eigen::Infinity>();
    if (res.c_inf <= opt.c_tol && res.stat_inf <= opt.g_tol * (1.0 + std::abs(res.f))) {
      res.converged = true;
      return res;
    }

    // step: minimum-norm restoration plus a reduced quasi-Newton move in
    // the constraint null space (eigenvalue-clamped to stay descent-safe)
    Eigen::VectorXd p = -svd_solve(svd, c);
    if (n - rank > 0) {
      const Eigen::MatrixXd z = svd.matrixV().rightCols(n - rank);
      const Eigen::MatrixXd w = z.transpose() * h * z;
      const Eigen::VectorXd rhs = -(z.transpose() * (g + h * p));
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (w + w.transpose()));
      const double floor =
          std::max(es.eigenvalues().cwiseAbs().maxCoeff() * 1e-10, 1e-300);
      Eigen::VectorXd q = es.eigenvectors().transpose() * rhs;
      for (Eigen::Index i = 0; i < q.size(); ++i) q[i] /= std::max(es.eigenvalues()[i], floor);
      p += z * (es.eigenvectors() * q);
    }

    rho = std::max(rho, 2.0 * y.lpNorm<Eigen::Infinity>() + 1e-6);
    const double c_l1 = c.lpNorm<1>();
    const double merit0 = res.f + rho * c_l1;
    double dir = g.dot(p) - rho * c_l1;
    if (dir > 0.0) dir = 0.0;  // keep the Armijo test meaningful near stationarity

    double alpha = 1.0;
    bool accepted = false;
    Eigen::VectorXd x_try, g_try(n), c_try(m);
    Eigen::MatrixXd jac_try(m, n);
    double f_try = 0.0;
    for (int ls = 0; ls < 60; ++ls) {
      x_try = res.x + alpha * p;
      f_try = prob.objective(x_try, &g_try);
      prob.constraints(x_try, c_try, &jac_try);
      const double merit_try = f_try + rho * c_try.lpNorm<1>();
      if (merit_try <= merit0 + 1e-4 * alpha * dir - 1e-16 * std::abs(merit0)) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;  // merit cannot decrease: treat as converged-as-is

    // damped BFGS on the Lagrangian gradient (Powell's correction keeps h
    // positive definite under nonconvex curvature)
    const Eigen::VectorXd s = x_try - res.x;
    const Eigen::VectorXd y_l = (g_try + jac_try.transpose() * y) - (g + jac.transpose() * y);
    const Eigen::VectorXd hs = h * s;
    const double shs = s.dot(hs);
    const double sy = s.dot(y_l);
    if (shs > 1e-300) {
      const double theta = (sy >= 0.2 * shs) ? 1.0 : (0.8 * shs / (shs - sy));
      const Eigen::VectorXd y_t = theta * y_l + (1.0 - theta) * hs;
      const double syt = s.dot(y_t);
      if (syt > 1e-300)
        h += y_t * y_t.transpose() / syt - hs * hs.transpose() / shs;
    }

    const double step = s.norm();
    res.x = std::move(x_try);
    res.f = f_try;
    g = g_try;
    c = c_try;
    jac = jac_try;
    if (step < opt.step_tol) break;
  }

  // report the state actually reached
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd y = multipliers(svd, g);
  res.c_inf = c.lpNorm<Eigen::Infinity>();
  res.stat_inf = (g + jac.transpose() * y).lpNorm<Eigen::Infinity>();
  res.converged =
      res.c_inf <= opt.c_tol && res.stat_inf <= opt.g_tol * (1.0 + std::abs(res.f));
  return res;
}

double feasibility_polish(const ConstraintFn& constraints, Eigen::VectorXd& x, double c_tol,
                          int max_iter) {
  const int n = static_cast<int>(x.size());
  Eigen::VectorXd c;
  Eigen::MatrixXd jac;
  constraints(x, c, &jac);
  double c_inf = c.lpNorm<Eigen::Infinity>();
  for (int it = 0; it < max_iter && c_inf > c_tol; ++it) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::VectorXd step = -svd_solve(svd, c);
    double scale = 1.0;
    Eigen::VectorXd x_try(n);
    Eigen::VectorXd c_try;
    Eigen::MatrixXd jac_try;
    bool ok = false;
    for (int h = 0; h < 25; ++h) {
      x_try = x + scale * step;
      constraints(x_try, c_try, &jac_try);
      if (c_try.lpNorm<Eigen::Infinity>() < c_inf) {
        ok = true;
        break;
      }
      scale *= 0.5;
    }
    if (!ok) break;
    x = x_try;
    c = c_try;
    jac = jac_try;
    c_inf = c.lpNorm<Eigen::Infinity>();
  }
  return c_inf;
}

}  // namespace gateforge::opt
