#include "countnet/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace countnet {

namespace {

constexpr double kLogFloor = -690.77552789821368;  // log(1e-300)
constexpr int kHardCapR = 1000000;

double utility_index(double lambda, double gy, double psi) {
  return lambda * gy + psi;
}

Eigen::VectorXd utility_vector(const ModelParams& params,
                               const InteractionNetwork& g,
                               const Eigen::MatrixXd& z,
                               const Eigen::VectorXd& y_e) {
  if (z.rows() != g.size()) throw ValidationError("design/network size mismatch");
  if (z.cols() != params.gamma.size()) {
    throw ValidationError("gamma has " + std::to_string(params.gamma.size()) +
                          " entries but the design has " + std::to_string(z.cols()) +
                          " columns");
  }
  if (y_e.size() != g.size()) throw ValidationError("beliefs/network size mismatch");
  Eigen::VectorXd u = z * params.gamma;
  if (params.ladder.lambda != 0.0) {
    u += params.ladder.lambda * g.multiply(y_e);
  }
  return u;
}

}  // namespace

double log_prob_band(double a, double b) {
  if (!(a > b)) throw ValidationError("log_prob_band requires a > b");
  double lp;
  if (std::isinf(a)) {
    // P(y = 0) band: 1 - Phi(b).
    lp = math::norm_logcdf(-b);
  } else if (a + b <= 0.0) {
    // Left tail: work with Phi(a) - Phi(b) directly.
    const double la = math::norm_logcdf(a);
    const double lb = math::norm_logcdf(b);
    lp = la + math::log1mexp(std::min(lb - la, 0.0));
  } else {
    // Right tail: mirror to Phi(-b) - Phi(-a).
    const double lb = math::norm_logcdf(-b);
    const double la = math::norm_logcdf(-a);
    lp = lb + math::log1mexp(std::min(la - lb, 0.0));
  }
  return std::max(lp, kLogFloor);
}

Eigen::VectorXd choice_probabilities(double u, const CostLadder& ladder,
                                     int r_max, double tail_tol) {
  if (r_max < 1) throw ValidationError("choice_probabilities: r_max must be >= 1");
  ladder.validate();
  // Grow the support until the mass above the top cut point is negligible.
  int cap = r_max;
  std::vector<double> a = ladder.cut_points(cap + 1);
  while (math::norm_cdf(u - a[static_cast<std::size_t>(cap)]) >= tail_tol) {
    cap *= 2;
    if (cap > kHardCapR) {
      throw NumericalError("choice_probabilities: support exceeded " +
                           std::to_string(kHardCapR) + " counts");
    }
    a = ladder.cut_points(cap + 1);
  }
  int top = r_max;
  while (top < cap &&
         math::norm_cdf(u - a[static_cast<std::size_t>(top)]) >= tail_tol) {
    ++top;
  }
  Eigen::VectorXd p(top + 1);
  double upper = math::norm_cdf(u - a[0]);
  p[0] = 1.0 - upper;
  for (int r = 1; r < top; ++r) {
    const double next = math::norm_cdf(u - a[static_cast<std::size_t>(r)]);
    p[r] = std::max(upper - next, 0.0);
    upper = next;
  }
  // Top bin keeps the whole remaining tail so the vector sums to one.
  p[top] = upper;
  return p;
}

Eigen::MatrixXd choice_probability_matrix(const ModelParams& params,
                                          const InteractionNetwork& g,
                                          const Eigen::MatrixXd& z,
                                          const Eigen::VectorXd& y_e,
                                          int r_max, double tail_tol) {
  if (r_max < 1) throw ValidationError("choice_probability_matrix: r_max must be >= 1");
  params.ladder.validate();
  const Eigen::VectorXd u = utility_vector(params, g, z, y_e);
  const double u_max = u.size() > 0 ? u.maxCoeff() : 0.0;

  int top = r_max;
  std::vector<double> a = params.ladder.cut_points(top + 1);
  while (math::norm_cdf(u_max - a[static_cast<std::size_t>(top)]) >= tail_tol) {
    ++top;
    if (top > kHardCapR) {
      throw NumericalError("choice_probability_matrix: support exceeded " +
                           std::to_string(kHardCapR) + " counts");
    }
    a = params.ladder.cut_points(top + 1);
  }

  Eigen::MatrixXd p(u.size(), top + 1);
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    double upper = math::norm_cdf(u[i] - a[0]);
    p(i, 0) = 1.0 - upper;
    for (int r = 1; r < top; ++r) {
      const double next = math::norm_cdf(u[i] - a[static_cast<std::size_t>(r)]);
      p(i, r) = std::max(upper - next, 0.0);
      upper = next;
    }
    p(i, top) = upper;
  }
  return p;
}

Eigen::VectorXd expected_outcome_map_psi(const CostLadder& ladder,
                                         const InteractionNetwork& g,
                                         const Eigen::VectorXd& psi,
                                         const Eigen::VectorXd& y_e,
                                         double tail_tol) {
  if (psi.size() != g.size() || y_e.size() != g.size()) {
    throw ValidationError("expected_outcome_map: size mismatch");
  }
  Eigen::VectorXd u = psi;
  if (ladder.lambda != 0.0) u += ladder.lambda * g.multiply(y_e);
  const double u_max = u.size() > 0 ? u.maxCoeff() : 0.0;

  Eigen::VectorXd out = Eigen::VectorXd::Zero(u.size());
  double a_r = 0.0;  // a_1
  for (int r = 1;; ++r) {
    if (r > 1) a_r += ladder.increment(r);
    if (math::norm_cdf(u_max - a_r) < tail_tol) break;
    if (r > kHardCapR) {
      throw NumericalError("expected_outcome_map: support exceeded " +
                           std::to_string(kHardCapR) + " counts");
    }
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      out[i] += math::norm_cdf(u[i] - a_r);
    }
  }
  return out;
}

Eigen::VectorXd expected_outcome_map(const ModelParams& params,
                                     const InteractionNetwork& g,
                                     const Eigen::MatrixXd& z,
                                     const Eigen::VectorXd& y_e,
                                     double tail_tol) {
  params.ladder.validate();
  if (z.rows() != g.size()) throw ValidationError("design/network size mismatch");
  if (z.cols() != params.gamma.size()) {
    throw ValidationError("gamma/design column mismatch");
  }
  const Eigen::VectorXd psi = z * params.gamma;
  return expected_outcome_map_psi(params.ladder, g, psi, y_e, tail_tol);
}

EquilibriumResult solve_equilibrium(const ModelParams& params,
                                    const InteractionNetwork& g,
                                    const Eigen::MatrixXd& z,
                                    const std::optional<Eigen::VectorXd>& init,
                                    double tol, int max_iter) {
  params.ladder.validate();
  if (tol <= 0.0) throw ValidationError("solve_equilibrium: tol must be > 0");
  if (max_iter < 1) throw ValidationError("solve_equilibrium: max_iter must be >= 1");
  const Eigen::VectorXd psi = z * params.gamma;
  if (psi.size() != g.size()) throw ValidationError("design/network size mismatch");

  EquilibriumResult res;
  res.bound = peer_effect_bound(params.ladder, g);
  res.above_bound = params.ladder.lambda >= res.bound;

  Eigen::VectorXd y = init ? *init
                           : Eigen::VectorXd::Zero(g.size());
  if (y.size() != g.size()) throw ValidationError("solve_equilibrium: bad init size");

  double prev_res = std::numeric_limits<double>::infinity();
  for (int t = 0; t <= max_iter; ++t) {
    const Eigen::VectorXd ly = expected_outcome_map_psi(params.ladder, g, psi, y);
    const double dist = (ly - y).lpNorm<1>();
    if (dist < tol) {
      res.beliefs = y;
      res.iterations = t;
      res.residual = dist;
      res.converged = true;
      return res;
    }
    if (t == max_iter) break;
    if (dist > prev_res) res.damped = true;  // oscillation: keep averaging
    prev_res = dist;
    y = res.damped ? Eigen::VectorXd(0.5 * y + 0.5 * ly) : ly;
  }

  throw FixedPointError(
      "equilibrium iteration did not converge after " + std::to_string(max_iter) +
          " updates (last L1 residual " + std::to_string(prev_res) +
          (res.above_bound ? ", lambda is above the uniqueness bound " +
                                 std::to_string(res.bound)
                           : "") +
          ")",
      y, prev_res);
}

double bc_constant(const CostLadder& ladder) {
  ladder.validate();
  // The slope of the map is bounded by lambda * sup_u sum_r phi(u - a_r).
  // The sup sits near the densest stretch of cut points: scan windows around
  // the head and the first tail cuts, then polish with golden section.
  const int n_cuts = ladder.r_bar() + 25;
  const std::vector<double> a = ladder.cut_points(n_cuts);

  auto density_sum = [&](double u) {
    double s = 0.0;
    for (double ar : a) s += math::norm_pdf(u - ar);
    // Cuts past the window only matter if u is near them; the scan windows
    // cover every cut we evaluate, and spacing grows beyond the last one.
    return s;
  };

  double best_u = a[0];
  double best = density_sum(best_u);
  for (double ar : a) {
    // Cuts are increasing, so one overflowed tail value ends the scan. Step
    // by index, not by adding to u: for huge cuts u + 0.01 rounds to u and a
    // value-stepped loop would never terminate.
    if (!std::isfinite(ar)) break;
    for (int s = -400; s <= 400; ++s) {
      const double u = ar + 0.01 * static_cast<double>(s);
      const double d = density_sum(u);
      if (d > best) {
        best = d;
        best_u = u;
      }
    }
  }

  // Golden-section polish on [best_u - 0.02, best_u + 0.02].
  const double gr = 0.61803398874989485;
  double lo = best_u - 0.02, hi = best_u + 0.02;
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = density_sum(x1), f2 = density_sum(x2);
  for (int it = 0; it < 80; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = density_sum(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = density_sum(x1);
    }
  }
  best = std::max(best, std::max(f1, f2));
  return 1.0 / best;
}

double peer_effect_bound(const CostLadder& ladder, const InteractionNetwork& g) {
  const double row = g.max_abs_row_sum();
  if (row == 0.0) return std::numeric_limits<double>::infinity();
  return bc_constant(ladder) / row;
}

}  // namespace countnet
