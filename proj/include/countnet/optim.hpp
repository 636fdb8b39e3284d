#ifndef COUNTNET_OPTIM_HPP
#define COUNTNET_OPTIM_HPP

// Quasi-Newton minimizer: BFGS on the inverse Hessian with a strong Wolfe
// line search (bracket + zoom). Objectives supply the value and gradient in
// one call; the caller is responsible for making the objective finite on the
// region of interest (the line search backtracks away from NaN/Inf values).

#include <Eigen/Dense>
#include <functional>
#include <string>

namespace countnet {
namespace optim {

// Returns f(x) and fills grad (resized by the callee if needed).
using ValueGradFn =
    std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct BfgsOptions {
  int max_iter = 500;
  double grad_tol = 1e-8;    // max-norm of the gradient
  double step_tol = 1e-12;   // relative function decrease below which we stop
  int max_line_iter = 50;
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
};

struct BfgsResult {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd grad;
  int iterations = 0;
  int n_evals = 0;
  bool converged = false;
  bool line_search_failed = false;
  std::string message;
};

BfgsResult minimize_bfgs(const ValueGradFn& fn, const Eigen::VectorXd& x0,
                         const BfgsOptions& opts = BfgsOptions());

}  // namespace optim
}  // namespace countnet

#endif
