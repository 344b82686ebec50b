#pragma once
// Small dense optimizers used by the waveform designers: inverse-BFGS for
// unconstrained smooth minimization, and an equality-constrained SQP with
// a damped BFGS Lagrangian Hessian and an l1 merit line search. Constraint
// Jacobians may be rank deficient (redundant pair-phase conditions);
// every linear solve goes through an SVD with a relative cutoff so steps
// stay deterministic.

#include <Eigen/Core>
#include <functional>
#include <limits>

namespace gateforge::opt {

// returns f(x); writes the gradient when grad != nullptr
using ObjectiveFn = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;
// writes c(x); writes the Jacobian (n_cons x n_vars) when jac != nullptr
using ConstraintFn =
    std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& c, Eigen::MatrixXd* jac)>;

struct BfgsOptions {
  int max_iter = 300;
  double g_tol = 1e-10;  // stop when |grad|_inf falls below
  // stop early once f <= f_floor (useful for nonnegative objectives)
  double f_floor = -std::numeric_limits<double>::infinity();
  double step_tol = 1e-15;  // stop when the accepted step shrinks below
};

struct BfgsResult {
  Eigen::VectorXd x;
  double f = 0.0;
  double g_inf = 0.0;
  int iterations = 0;
  bool converged = false;  // gradient or floor criterion met
};

BfgsResult minimize_bfgs(const ObjectiveFn& fg, Eigen::VectorXd x0, const BfgsOptions& opt = {});

struct SqpProblem {
  ObjectiveFn objective;
  ConstraintFn constraints;
  int n_vars = 0;
  int n_cons = 0;
};

struct SqpOptions {
  int max_iter = 200;
  double c_tol = 1e-11;  // |c|_inf feasibility target
  double g_tol = 1e-8;   // stationarity |grad L|_inf, relative to 1 + |f|
  double step_tol = 1e-14;
};

struct SqpResult {
  Eigen::VectorXd x;
  double f = 0.0;
  double c_inf = 0.0;
  double stat_inf = 0.0;  // |grad f + J' y|_inf at the returned point
  int iterations = 0;
  bool converged = false;
};

SqpResult minimize_sqp(const SqpProblem& prob, Eigen::VectorXd x0, const SqpOptions& opt = {});

// Gauss-Newton iteration on the constraints alone (minimum-norm steps);
// returns the achieved |c|_inf. Used to drive a near-feasible design onto
// the constraint manifold to machine precision.
double feasibility_polish(const ConstraintFn& constraints, Eigen::VectorXd& x,
                          double c_tol = 1e-12, int max_iter = 60);

}  // namespace gateforge::opt
