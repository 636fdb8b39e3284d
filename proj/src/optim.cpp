#include "countnet/optim.hpp"

#include <cmath>
#include <limits>

namespace countnet {
namespace optim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct LineEval {
  double alpha;
  double f;
  double dg;  // directional derivative g'p at alpha
};

// One-dimensional helper that evaluates the objective along x + alpha p,
// counting evaluations and caching the gradient of the accepted point.
class LineFn {
public:
  LineFn(const ValueGradFn& fn, const Eigen::VectorXd& x, const Eigen::VectorXd& p)
      : fn_(fn), x_(x), p_(p), grad_(x.size()) {}

  LineEval operator()(double alpha) {
    xt_ = x_ + alpha * p_;
    const double f = fn_(xt_, grad_);
    ++n_evals;
    return {alpha, f, grad_.dot(p_)};
  }

  const Eigen::VectorXd& last_x() const { return xt_; }
  const Eigen::VectorXd& last_grad() const { return grad_; }
  int n_evals = 0;

private:
  const ValueGradFn& fn_;
  const Eigen::VectorXd& x_;
  const Eigen::VectorXd& p_;
  Eigen::VectorXd grad_;
  Eigen::VectorXd xt_;
};

// Cubic interpolation of a minimizer between two line evaluations, falling
// back to bisection when the cubic is degenerate or outside the bracket.
double interp_step(const LineEval& lo, const LineEval& hi) {
  const double d1 = lo.dg + hi.dg - 3.0 * (lo.f - hi.f) / (lo.alpha - hi.alpha);
  const double disc = d1 * d1 - lo.dg * hi.dg;
  if (disc >= 0.0) {
    const double d2 = std::copysign(std::sqrt(disc), hi.alpha - lo.alpha);
    const double denom = hi.dg - lo.dg + 2.0 * d2;
    if (denom != 0.0) {
      double t = hi.alpha - (hi.alpha - lo.alpha) * (hi.dg + d2 - d1) / denom;
      const double a = std::min(lo.alpha, hi.alpha);
      const double b = std::max(lo.alpha, hi.alpha);
      const double margin = 0.1 * (b - a);
      if (std::isfinite(t) && t > a + margin && t < b - margin) return t;
    }
  }
  return 0.5 * (lo.alpha + hi.alpha);
}

}  // namespace

BfgsResult minimize_bfgs(const ValueGradFn& fn, const Eigen::VectorXd& x0,
                         const BfgsOptions& opts) {
  const int n = static_cast<int>(x0.size());
  BfgsResult res;
  res.x = x0;
  res.grad.resize(n);
  res.f = fn(res.x, res.grad);
  res.n_evals = 1;
  if (!std::isfinite(res.f)) {
    res.message = "objective not finite at the starting point";
    return res;
  }

  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
  bool first_update = true;

  for (res.iterations = 0; res.iterations < opts.max_iter; ++res.iterations) {
    if (res.grad.cwiseAbs().maxCoeff() < opts.grad_tol) {
      res.converged = true;
      res.message = "gradient below tolerance";
      return res;
    }

    Eigen::VectorXd p = -(H * res.grad);
    double dg0 = p.dot(res.grad);
    if (!(dg0 < 0.0)) {
      // Not a descent direction; reset to steepest descent.
      H.setIdentity();
      p = -res.grad;
      dg0 = p.dot(res.grad);
      first_update = true;
    }

    // Strong Wolfe line search (bracketing phase, then zoom).
    LineFn line(fn, res.x, p);
    const double f0 = res.f;
    const double c1 = opts.wolfe_c1, c2 = opts.wolfe_c2;
    LineEval prev{0.0, f0, dg0};
    double alpha = 1.0;
    LineEval lo{0.0, f0, dg0}, hi{0.0, kInf, 0.0};
    bool bracketed = false;
    bool accepted = false;
    LineEval cur{0.0, f0, dg0};

    for (int it = 0; it < opts.max_line_iter && !bracketed && !accepted; ++it) {
      cur = line(alpha);
      if (!std::isfinite(cur.f)) {
        alpha *= 0.5;  // walked outside the finite region, shrink
        continue;
      }
      if (cur.f > f0 + c1 * alpha * dg0 || (it > 0 && cur.f >= prev.f)) {
        lo = prev;
        hi = cur;
        bracketed = true;
        break;
      }
      if (std::fabs(cur.dg) <= -c2 * dg0) {
        accepted = true;
        break;
      }
      if (cur.dg >= 0.0) {
        lo = cur;
        hi = prev;
        bracketed = true;
        break;
      }
      prev = cur;
      alpha = std::min(alpha * 2.0, 1e10);
    }

    if (bracketed) {
      for (int it = 0; it < opts.max_line_iter && !accepted; ++it) {
        const double a = interp_step(lo, hi);
        cur = line(a);
        if (!std::isfinite(cur.f)) {
          hi = {a, kInf, 0.0};
          continue;
        }
        if (cur.f > f0 + c1 * a * dg0 || cur.f >= lo.f) {
          hi = cur;
        } else {
          if (std::fabs(cur.dg) <= -c2 * dg0) {
            accepted = true;
            break;
          }
          if (cur.dg * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
          lo = cur;
        }
        if (std::fabs(hi.alpha - lo.alpha) < 1e-14 * std::max(1.0, std::fabs(lo.alpha))) {
          cur = lo.alpha > 0.0 ? line(lo.alpha) : lo;
          accepted = lo.alpha > 0.0 && std::isfinite(cur.f) && cur.f < f0;
          break;
        }
      }
    }

    res.n_evals += line.n_evals;

    if (!accepted) {
      // Could not satisfy strong Wolfe; take the best strictly decreasing
      // point if there is one, otherwise report failure.
      if (bracketed && std::isfinite(lo.f) && lo.f < f0 && lo.alpha > 0.0) {
        cur = line(lo.alpha);
        ++res.n_evals;
      } else {
        res.line_search_failed = true;
        res.message = "line search failed to find an acceptable step";
        return res;
      }
    }

    const Eigen::VectorXd s = cur.alpha * p;
    const Eigen::VectorXd x_new = line.last_x();
    const Eigen::VectorXd g_new = line.last_grad();
    const Eigen::VectorXd y = g_new - res.grad;
    const double rel_decrease = (f0 - cur.f) / std::max(1.0, std::fabs(f0));

    const double sy = s.dot(y);
    if (sy > 1e-10 * s.norm() * y.norm()) {
      if (first_update) {
        H *= sy / y.squaredNorm();  // standard initial scaling
        first_update = false;
      }
      const double rho = 1.0 / sy;
      const Eigen::VectorXd Hy = H * y;
      // H <- (I - rho s y') H (I - rho y s') + rho s s'
      H -= rho * (s * Hy.transpose() + Hy * s.transpose());
      H += (rho * rho * (y.dot(Hy)) + rho) * (s * s.transpose());
    }

    res.x = x_new;
    res.f = cur.f;
    res.grad = g_new;

    if (rel_decrease >= 0.0 && rel_decrease < opts.step_tol &&
        res.grad.cwiseAbs().maxCoeff() < 1e3 * opts.grad_tol) {
      res.converged = true;
      res.message = "function decrease below tolerance";
      ++res.iterations;
      return res;
    }
  }

  res.converged = res.grad.cwiseAbs().maxCoeff() < opts.grad_tol;
  res.message = res.converged ? "gradient below tolerance"
                              : "iteration limit reached";
  return res;
}

}  // namespace optim
}  // namespace countnet
