#include "countnet/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "countnet/simulate.hpp"

namespace countnet {

Eigen::VectorXd ParamVector::flat() const {
  Eigen::VectorXd v(dim());
  v[0] = log_lambda;
  v.segment(1, n_gamma()) = gamma;
  if (log_delta_free.size() > 0) {
    v.segment(1 + n_gamma(), log_delta_free.size()) = log_delta_free;
  }
  v[dim() - 2] = log_delta_bar;
  v[dim() - 1] = log_rho;
  return v;
}

ParamVector ParamVector::from_flat(const Eigen::VectorXd& v, int n_gamma) {
  if (n_gamma < 1) throw ValidationError("parameter vector needs n_gamma >= 1");
  const int r_bar = static_cast<int>(v.size()) - n_gamma - 2;
  if (r_bar < 1) {
    throw ValidationError("parameter vector too short for " +
                          std::to_string(n_gamma) + " design columns");
  }
  ParamVector p;
  p.log_lambda = v[0];
  p.gamma = v.segment(1, n_gamma);
  p.log_delta_free = v.segment(1 + n_gamma, r_bar - 1);
  p.log_delta_bar = v[v.size() - 2];
  p.log_rho = v[v.size() - 1];
  return p;
}

ModelParams ParamVector::to_model() const {
  ModelParams m;
  m.ladder.lambda = std::exp(log_lambda);
  m.ladder.free_increments.resize(static_cast<std::size_t>(log_delta_free.size()));
  for (Eigen::Index k = 0; k < log_delta_free.size(); ++k) {
    m.ladder.free_increments[static_cast<std::size_t>(k)] =
        std::exp(log_delta_free[k]) + m.ladder.lambda;
  }
  m.ladder.delta_bar = std::exp(log_delta_bar);
  m.ladder.rho = std::exp(log_rho);
  m.gamma = gamma;
  return m;
}

ParamVector ParamVector::from_model(const ModelParams& m) {
  m.ladder.validate();
  if (m.ladder.lambda <= 0.0) {
    throw ValidationError("from_model: lambda must be > 0 on the transformed scale");
  }
  ParamVector p;
  p.log_lambda = std::log(m.ladder.lambda);
  p.gamma = m.gamma;
  p.log_delta_free.resize(static_cast<Eigen::Index>(m.ladder.free_increments.size()));
  for (std::size_t k = 0; k < m.ladder.free_increments.size(); ++k) {
    p.log_delta_free[static_cast<Eigen::Index>(k)] =
        std::log(m.ladder.free_increments[k] - m.ladder.lambda);
  }
  p.log_delta_bar = std::log(m.ladder.delta_bar);
  p.log_rho = std::log(m.ladder.rho);
  return p;
}

Eigen::VectorXd ParamVector::natural() const {
  const double lambda = std::exp(log_lambda);
  Eigen::VectorXd v(dim());
  v[0] = lambda;
  v.segment(1, n_gamma()) = gamma;
  for (Eigen::Index k = 0; k < log_delta_free.size(); ++k) {
    v[1 + n_gamma() + k] = std::exp(log_delta_free[k]) + lambda;
  }
  v[dim() - 2] = std::exp(log_delta_bar);
  v[dim() - 1] = std::exp(log_rho);
  return v;
}

Eigen::MatrixXd ParamVector::natural_jacobian() const {
  const int p = dim();
  const double lambda = std::exp(log_lambda);
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(p, p);
  j(0, 0) = lambda;
  for (int k = 0; k < n_gamma(); ++k) j(1 + k, 1 + k) = 1.0;
  for (Eigen::Index k = 0; k < log_delta_free.size(); ++k) {
    const int row = 1 + n_gamma() + static_cast<int>(k);
    j(row, row) = std::exp(log_delta_free[k]);  // d delta_r / d log(delta_r - lambda)
    j(row, 0) = lambda;                         // delta_r moves one-for-one with lambda
  }
  j(p - 2, p - 2) = std::exp(log_delta_bar);
  j(p - 1, p - 1) = std::exp(log_rho);
  return j;
}

std::vector<std::string> parameter_labels(const std::vector<std::string>& z_labels,
                                          int r_bar) {
  std::vector<std::string> out;
  out.reserve(z_labels.size() + static_cast<std::size_t>(r_bar) + 2);
  out.push_back("lambda");
  out.insert(out.end(), z_labels.begin(), z_labels.end());
  for (int r = 2; r <= r_bar; ++r) out.push_back("delta_" + std::to_string(r));
  out.push_back("delta_bar");
  out.push_back("rho");
  return out;
}

namespace {

// Everything the inner optimizer needs at fixed beliefs: observed counts,
// the design, and the aggregated neighbor beliefs.
class LikelihoodPack {
public:
  LikelihoodPack(const Eigen::VectorXi& y, const Eigen::MatrixXd& z,
                 Eigen::VectorXd gy, int r_bar)
      : y_(y), z_(z), gy_(std::move(gy)), r_bar_(r_bar) {
    n_ = static_cast<int>(y.size());
    m_ = static_cast<int>(z.cols());
    max_y_ = 0;
    for (int i = 0; i < n_; ++i) max_y_ = std::max(max_y_, y_[i]);
    dim_ = m_ + r_bar_ + 2;
  }

  int dim() const { return dim_; }
  int n() const { return n_; }

  // Mean log likelihood and its gradient on the transformed scale. Returns
  // false when the parameter point is unusable (the line search treats that
  // as +inf). per_obs, when given, receives the n x dim per-observation
  // scores (not divided by n).
  bool eval(const Eigen::VectorXd& flat, double& value, Eigen::VectorXd* grad,
            Eigen::MatrixXd* per_obs) const {
    try {
      return eval_inner(flat, value, grad, per_obs);
    } catch (const NumericalError&) {
      return false;
    }
  }

private:
  bool eval_inner(const Eigen::VectorXd& flat, double& value,
                  Eigen::VectorXd* grad, Eigen::MatrixXd* per_obs) const {
    if (flat.size() != dim_) throw ValidationError("parameter dimension mismatch");
    for (Eigen::Index k = 1; k < flat.size(); ++k) {
      if (!std::isfinite(flat[k]) || std::fabs(flat[k]) > 1e4) return false;
    }
    const double lambda = std::exp(flat[0]);
    if (!std::isfinite(lambda)) return false;

    const int top = max_y_ + 1;
    // Cut points a_1..a_top plus the tail derivative sums
    //   s[r] = d a_r / d delta_bar,  t[r] = d a_r / d rho.
    std::vector<double> a(static_cast<std::size_t>(top) + 1, 0.0);
    std::vector<double> s(static_cast<std::size_t>(top) + 1, 0.0);
    std::vector<double> t(static_cast<std::size_t>(top) + 1, 0.0);
    const double delta_bar = std::exp(flat[dim_ - 2]);
    const double rho = std::exp(flat[dim_ - 1]);
    if (!std::isfinite(delta_bar) || !std::isfinite(rho)) return false;
    std::vector<double> dfree(static_cast<std::size_t>(r_bar_) + 1, 0.0);
    for (int r = 2; r <= top; ++r) {
      double inc;
      if (r <= r_bar_) {
        dfree[static_cast<std::size_t>(r)] = std::exp(flat[m_ + r - 1]);
        inc = dfree[static_cast<std::size_t>(r)] + lambda;
      } else {
        const double base = std::pow(static_cast<double>(r - 1), rho);
        inc = base * delta_bar + lambda;
        s[static_cast<std::size_t>(r)] = s[static_cast<std::size_t>(r - 1)] + base;
        t[static_cast<std::size_t>(r)] = t[static_cast<std::size_t>(r - 1)] +
                                         delta_bar * base * std::log(static_cast<double>(r - 1));
      }
      if (!std::isfinite(inc)) return false;
      a[static_cast<std::size_t>(r)] = a[static_cast<std::size_t>(r - 1)] + inc;
    }

    const Eigen::VectorXd gamma = flat.segment(1, m_);
    const Eigen::VectorXd psi = z_ * gamma;

    value = 0.0;
    Eigen::VectorXd cvec;
    if (grad) {
      grad->setZero(dim_);
      cvec.setZero(n_);
    }
    if (per_obs) per_obs->setZero(n_, dim_);

    for (int i = 0; i < n_; ++i) {
      const double u = lambda * gy_[i] + psi[i];
      const int yi = y_[i];
      const double big_a = yi == 0 ? std::numeric_limits<double>::infinity()
                                   : u - a[static_cast<std::size_t>(yi)];
      const double big_b = u - a[static_cast<std::size_t>(yi) + 1];
      if (!(big_a > big_b)) return false;  // increments underflowed to zero
      const double lp = log_prob_band(big_a, big_b);
      value += lp;
      if (!grad && !per_obs) continue;

      // exp is clamped so a floored band cannot overflow the ratios
      const double ra =
          yi == 0 ? 0.0 : std::exp(std::min(math::norm_logpdf(big_a) - lp, 500.0));
      const double rb = std::exp(std::min(math::norm_logpdf(big_b) - lp, 500.0));
      const double c = ra - rb;

      const double dlam = c * gy_[i] - ra * static_cast<double>(yi - 1) +
                          rb * static_cast<double>(yi);
      const double glam = lambda * dlam;
      const double gdbar = delta_bar * (-ra * s[static_cast<std::size_t>(yi)] +
                                        rb * s[static_cast<std::size_t>(yi) + 1]);
      const double grho = rho * (-ra * t[static_cast<std::size_t>(yi)] +
                                 rb * t[static_cast<std::size_t>(yi) + 1]);

      if (grad) {
        (*grad)[0] += glam;
        cvec[i] = c;
        (*grad)[dim_ - 2] += gdbar;
        (*grad)[dim_ - 1] += grho;
      }
      if (per_obs) {
        (*per_obs)(i, 0) = glam;
        per_obs->row(i).segment(1, m_) = c * z_.row(i);
        (*per_obs)(i, dim_ - 2) = gdbar;
        (*per_obs)(i, dim_ - 1) = grho;
      }
      // free increments: delta_k shifts a_r for every r >= k
      const int k_hi = std::min(yi + 1, r_bar_);
      for (int k = 2; k <= k_hi; ++k) {
        const double val = (k <= yi ? rb - ra : rb) * dfree[static_cast<std::size_t>(k)];
        if (grad) (*grad)[m_ + k - 1] += val;
        if (per_obs) (*per_obs)(i, m_ + k - 1) = val;
      }
    }

    if (grad) {
      grad->segment(1, m_) = z_.transpose() * cvec;
      *grad /= static_cast<double>(n_);
    }
    value /= static_cast<double>(n_);
    return std::isfinite(value);
  }

  const Eigen::VectorXi& y_;
  const Eigen::MatrixXd& z_;
  Eigen::VectorXd gy_;
  int r_bar_;
  int n_ = 0, m_ = 0, max_y_ = 0, dim_ = 0;
};

optim::ValueGradFn negated_objective(const LikelihoodPack& pack) {
  return [&pack](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    double value = 0.0;
    Eigen::VectorXd g;
    if (!pack.eval(x, value, &g, nullptr)) {
      grad.setZero(x.size());
      return std::numeric_limits<double>::infinity();
    }
    grad = -g;
    return -value;
  };
}

void validate_fit_inputs(const Eigen::VectorXi& y, const InteractionNetwork& g,
                         const Eigen::MatrixXd& z, int r_bar) {
  const int n = static_cast<int>(y.size());
  if (n == 0) throw ValidationError("no observations");
  if (g.size() != n || z.rows() != n) {
    throw ValidationError("outcomes, network and design must have matching sizes");
  }
  if (z.cols() < 1) throw ValidationError("design has no columns");
  int max_y = 0;
  for (int i = 0; i < n; ++i) {
    if (y[i] < 0) throw ValidationError("outcomes must be non-negative counts");
    max_y = std::max(max_y, y[i]);
  }
  if (max_y < 1) throw ValidationError("all outcomes are zero; nothing to fit");
  const int r_cap = std::max(max_y - 1, 1);
  if (r_bar < 1 || r_bar > r_cap) {
    throw ValidationError("r_bar = " + std::to_string(r_bar) +
                          " is outside [1, " + std::to_string(r_cap) +
                          "] for outcomes with maximum " + std::to_string(max_y));
  }
  if (!z.allFinite()) throw ValidationError("design contains non-finite values");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(z);
  qr.setThreshold(1e-10);
  if (qr.rank() < z.cols()) {
    throw ValidationError("design matrix is rank deficient (rank " +
                          std::to_string(qr.rank()) + " of " +
                          std::to_string(z.cols()) +
                          "); drop collinear columns");
  }
}

}  // namespace

double pseudo_loglik(const ParamVector& theta, const Eigen::VectorXi& y,
                     const InteractionNetwork& g, const Eigen::MatrixXd& z,
                     const Eigen::VectorXd& beliefs) {
  if (beliefs.size() != g.size()) throw ValidationError("beliefs/network size mismatch");
  if (theta.n_gamma() != z.cols()) throw ValidationError("gamma/design column mismatch");
  LikelihoodPack pack(y, z, g.multiply(beliefs), theta.r_bar());
  double value = 0.0;
  if (!pack.eval(theta.flat(), value, nullptr, nullptr)) {
    throw NumericalError("pseudo_loglik: parameter point is not usable");
  }
  return value;
}

ScoreResult pseudo_loglik_score(const ParamVector& theta, const Eigen::VectorXi& y,
                                const InteractionNetwork& g, const Eigen::MatrixXd& z,
                                const Eigen::VectorXd& beliefs, bool want_per_obs) {
  if (beliefs.size() != g.size()) throw ValidationError("beliefs/network size mismatch");
  if (theta.n_gamma() != z.cols()) throw ValidationError("gamma/design column mismatch");
  LikelihoodPack pack(y, z, g.multiply(beliefs), theta.r_bar());
  ScoreResult out;
  Eigen::MatrixXd per_obs;
  if (!pack.eval(theta.flat(), out.value, &out.grad,
                 want_per_obs ? &per_obs : nullptr)) {
    throw NumericalError("pseudo_loglik_score: parameter point is not usable");
  }
  if (want_per_obs) out.per_obs = std::move(per_obs);
  return out;
}

ParamVector initial_values(const Eigen::VectorXi& y, const Eigen::MatrixXd& z,
                           int r_bar, const NplOptions& opts) {
  const int n = static_cast<int>(y.size());
  if (n == 0) throw ValidationError("no observations");
  const int m = static_cast<int>(z.cols());
  int max_y = 0;
  for (int i = 0; i < n; ++i) max_y = std::max(max_y, y[i]);

  // Spacing of the empirical outcome distribution on the latent scale.
  std::vector<double> cum(static_cast<std::size_t>(max_y) + 1, 0.0);
  for (int i = 0; i < n; ++i) cum[static_cast<std::size_t>(std::min(y[i], max_y))] += 1.0;
  for (std::size_t r = 1; r < cum.size(); ++r) cum[r] += cum[r - 1];
  auto ahat = [&](int r) {
    const double f = std::clamp(cum[static_cast<std::size_t>(r - 1)] / n, 1e-4, 1.0 - 1e-4);
    return math::norm_quantile(f);
  };

  ParamVector init;
  init.gamma = Eigen::VectorXd::Zero(m);
  init.log_delta_free.resize(r_bar - 1);
  double last_spacing = 0.3;
  for (int r = 2; r <= r_bar; ++r) {
    const double spacing = r <= max_y ? std::max(ahat(r) - ahat(r - 1), 0.05) : 0.3;
    init.log_delta_free[r - 2] = std::log(spacing);
    last_spacing = spacing;
  }
  double tail = last_spacing;
  if (r_bar + 1 <= max_y) tail = std::max(ahat(r_bar + 1) - ahat(r_bar), 0.05);
  init.log_delta_bar = std::log(std::max(tail, 0.05));
  init.log_rho = 0.0;

  // Ordered fit with the peer effect pinned at zero. exp(-800) underflows to
  // exactly 0, which zeroes the log-lambda gradient, so BFGS never moves the
  // coordinate.
  init.log_lambda = -800.0;
  LikelihoodPack pack(y, z, Eigen::VectorXd::Zero(n), r_bar);
  optim::BfgsResult res = optim::minimize_bfgs(negated_objective(pack), init.flat(),
                                               opts.inner);
  ParamVector fitted = ParamVector::from_flat(res.x, m);
  fitted.log_lambda = std::log(0.01);
  return fitted;
}

FitResult npl_fit(const Eigen::VectorXi& y, const InteractionNetwork& g,
                  const Eigen::MatrixXd& z, int r_bar, const NplOptions& opts,
                  const std::optional<ParamVector>& init,
                  const std::optional<Eigen::VectorXd>& init_beliefs) {
  validate_fit_inputs(y, g, z, r_bar);
  const int m = static_cast<int>(z.cols());
  if (opts.tol <= 0.0) throw ValidationError("npl_fit: tol must be > 0");

  ParamVector theta = init ? *init : initial_values(y, z, r_bar, opts);
  if (theta.n_gamma() != m || theta.r_bar() != r_bar) {
    throw ValidationError("npl_fit: initial parameter has the wrong shape");
  }
  // Raw counts make a poor starting point: the neighbor average of the
  // noise correlates with the peer term and can pull the first inner fit
  // into a spurious pseudo-likelihood fixed point. One application of the
  // expected-outcome map at the initial parameters smooths that away.
  Eigen::VectorXd beliefs =
      init_beliefs ? *init_beliefs
                   : expected_outcome_map(theta.to_model(), g, z,
                                          y.cast<double>(), opts.tail_tol);
  if (beliefs.size() != g.size()) {
    throw ValidationError("npl_fit: initial beliefs have the wrong length");
  }

  FitResult out;
  out.r_bar = r_bar;
  Eigen::VectorXd flat = theta.flat();

  for (int iter = 1; iter <= opts.max_outer; ++iter) {
    LikelihoodPack pack(y, z, g.multiply(beliefs), r_bar);
    const optim::BfgsResult res =
        optim::minimize_bfgs(negated_objective(pack), flat, opts.inner);
    if (res.line_search_failed || !std::isfinite(res.f)) {
      out.inner_ok = false;
      out.message = "inner optimizer stalled at outer iteration " +
                    std::to_string(iter) + ": " + res.message;
    }
    const Eigen::VectorXd flat_new = res.x;
    const ParamVector theta_new = ParamVector::from_flat(flat_new, m);

    // Exactly one application of the expected-outcome map.
    const Eigen::VectorXd beliefs_new = expected_outcome_map(
        theta_new.to_model(), g, z, beliefs, opts.tail_tol);

    const double dtheta = (flat_new - flat).lpNorm<1>();
    const double dbel = (beliefs_new - beliefs).lpNorm<1>();
    out.trace.push_back({iter, -res.f * static_cast<double>(pack.n()), dtheta, dbel});
    flat = flat_new;
    beliefs = beliefs_new;
    out.iterations = iter;
    if (dtheta < opts.tol && dbel < opts.tol) {
      out.converged = true;
      break;
    }
  }

  out.theta = ParamVector::from_flat(flat, m);
  out.beliefs = beliefs;
  {
    LikelihoodPack pack(y, z, g.multiply(beliefs), r_bar);
    double value = 0.0;
    if (pack.eval(flat, value, nullptr, nullptr)) {
      out.loglik = value * static_cast<double>(y.size());
    }
  }
  if (!out.converged && out.message.empty()) {
    out.message = "stopped after " + std::to_string(opts.max_outer) +
                  " outer iterations without meeting tol";
  }
  return out;
}

int select_r_bar(const Eigen::VectorXi& y, const InteractionNetwork& g,
                 const Eigen::MatrixXd& z, const NplOptions& opts,
                 double stability_tol, int start) {
  if (start < 1) throw ValidationError("select_r_bar: start must be >= 1");
  int max_y = 0;
  for (int i = 0; i < y.size(); ++i) max_y = std::max(max_y, y[i]);
  const int cap = std::max(max_y - 2, 1);
  if (start > cap) return cap;

  const int m = static_cast<int>(z.cols());
  FitResult prev = npl_fit(y, g, z, start, opts);
  for (int r = start; r < cap; ++r) {
    // Warm start the larger ladder from the smaller fit; the new increment
    // begins at the tail value the smaller ladder implied for it.
    ParamVector init = prev.theta;
    const ModelParams model = prev.theta.to_model();
    const double inc = model.ladder.increment(r + 1) - model.ladder.lambda;
    Eigen::VectorXd extended(r);
    extended.head(r - 1) = init.log_delta_free;
    extended[r - 1] = std::log(std::max(inc, 1e-3));
    init.log_delta_free = extended;

    const FitResult next = npl_fit(y, g, z, r + 1, opts, init, prev.beliefs);
    const int shared = m + r;  // log lambda, gamma, common free increments
    const double gap = (prev.theta.flat().head(shared) -
                        next.theta.flat().head(shared))
                           .cwiseAbs()
                           .maxCoeff();
    if (gap < stability_tol) return r;
    prev = next;
  }
  return cap;
}

namespace {

Eigen::MatrixXd natural_covariance(const ParamVector& theta,
                                   const Eigen::MatrixXd& cov_trans) {
  const Eigen::MatrixXd j = theta.natural_jacobian();
  return j * cov_trans * j.transpose();
}

Eigen::VectorXd se_from_cov(const Eigen::MatrixXd& cov) {
  return cov.diagonal().cwiseMax(0.0).cwiseSqrt();
}

}  // namespace

CovarianceResult sandwich_covariance(const FitResult& fit, const Eigen::VectorXi& y,
                                     const InteractionNetwork& g,
                                     const Eigen::MatrixXd& z,
                                     const NplOptions& opts) {
  const int m = static_cast<int>(z.cols());
  const int p = fit.theta.dim();
  const int n = static_cast<int>(y.size());
  const double eq_tol = 1e-10;

  // Tight fixed point at the estimate, then the per-observation scores.
  const EquilibriumResult base =
      solve_equilibrium(fit.theta.to_model(), g, z, fit.beliefs, eq_tol, 20000);
  const ScoreResult at_fit =
      pseudo_loglik_score(fit.theta, y, g, z, base.beliefs, true);
  const Eigen::MatrixXd s_mat =
      at_fit.per_obs.transpose() * at_fit.per_obs / static_cast<double>(n);

  // First-order conditions as a function of theta, with the fixed point
  // re-solved at every evaluation.
  auto foc = [&](const Eigen::VectorXd& th) {
    const ParamVector pv = ParamVector::from_flat(th, m);
    const EquilibriumResult eq =
        solve_equilibrium(pv.to_model(), g, z, base.beliefs, eq_tol, 20000);
    return pseudo_loglik_score(pv, y, g, z, eq.beliefs, false).grad;
  };

  const Eigen::VectorXd flat = fit.theta.flat();
  Eigen::MatrixXd k_mat(p, p);
  for (int k = 0; k < p; ++k) {
    const double h = 1e-5 * std::max(1.0, std::fabs(flat[k]));
    Eigen::VectorXd hi = flat, lo = flat;
    hi[k] += h;
    lo[k] -= h;
    k_mat.col(k) = (foc(hi) - foc(lo)) / (2.0 * h);
  }
  k_mat = 0.5 * (k_mat + k_mat.transpose()).eval();

  // Equilibrate before inverting; the log-lambda block scales like lambda^2
  // and would otherwise swamp the factorization when lambda is tiny.
  CovarianceResult out;
  out.method = "sandwich";
  Eigen::VectorXd d(p);
  std::vector<int> dead;
  for (int k = 0; k < p; ++k) {
    const double diag = std::fabs(k_mat(k, k));
    if (diag < 1e-300) {
      d[k] = 1.0;
      dead.push_back(k);
    } else {
      d[k] = 1.0 / std::sqrt(diag);
    }
  }
  Eigen::MatrixXd kt = d.asDiagonal() * k_mat * d.asDiagonal();
  Eigen::MatrixXd st = s_mat;
  for (int k : dead) {
    kt.row(k).setZero();
    kt.col(k).setZero();
    kt(k, k) = 1.0;
    st.row(k).setZero();
    st.col(k).setZero();
    out.message = "some coordinates carry no information; their variance is reported as zero";
  }
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(kt);
  if (!lu.isInvertible()) {
    throw NumericalError("sandwich_covariance: singular first-order condition Jacobian");
  }
  const Eigen::MatrixXd kt_inv = lu.inverse();
  const Eigen::MatrixXd k_inv = d.asDiagonal() * kt_inv * d.asDiagonal();
  out.cov_transformed = k_inv * st * k_inv.transpose() / static_cast<double>(n);
  out.cov_transformed = 0.5 * (out.cov_transformed + out.cov_transformed.transpose()).eval();
  out.cov_natural = natural_covariance(fit.theta, out.cov_transformed);
  out.se_natural = se_from_cov(out.cov_natural);
  (void)opts;
  return out;
}

CovarianceResult bootstrap_covariance(const FitResult& fit,
                                      const InteractionNetwork& g,
                                      const Eigen::MatrixXd& z, int n_reps,
                                      std::uint64_t seed, const NplOptions& opts) {
  if (n_reps < 2) {
    throw ValidationError("bootstrap_covariance: insufficient replications (need >= 2)");
  }
  const int p = fit.theta.dim();
  const ModelParams model = fit.theta.to_model();

  CovarianceResult out;
  out.method = "bootstrap";
  Eigen::MatrixXd samples(n_reps, p);
  int used = 0;
  for (int b = 0; b < n_reps; ++b) {
    Rng rng(seed, static_cast<std::uint64_t>(b) + 1);
    try {
      const OutcomeDraw draw = simulate_outcomes(model, g, z, rng);
      const FitResult refit =
          npl_fit(draw.y, g, z, fit.r_bar, opts, fit.theta, fit.beliefs);
      if (!refit.converged) {
        ++out.n_dropped;
        continue;
      }
      samples.row(used++) = refit.theta.flat();
    } catch (const ValidationError&) {
      ++out.n_dropped;
    } catch (const NumericalError&) {
      ++out.n_dropped;
    }
  }
  out.n_used = used;
  if (used < 2) {
    throw NumericalError("bootstrap_covariance: fewer than 2 usable replications");
  }
  const Eigen::MatrixXd kept = samples.topRows(used);
  const Eigen::RowVectorXd mean = kept.colwise().mean();
  const Eigen::MatrixXd centered = kept.rowwise() - mean;
  out.cov_transformed = centered.transpose() * centered / static_cast<double>(used - 1);
  out.cov_natural = natural_covariance(fit.theta, out.cov_transformed);
  out.se_natural = se_from_cov(out.cov_natural);
  out.drop_warning = out.n_dropped > n_reps / 5;
  if (out.drop_warning) {
    out.message = "more than 20% of bootstrap replications were dropped (" +
                  std::to_string(out.n_dropped) + " of " + std::to_string(n_reps) + ")";
  }
  return out;
}

double wald_pvalue(double estimate, double se) {
  if (!(se > 0.0)) return estimate == 0.0 ? 1.0 : 0.0;
  const double zstat = std::fabs(estimate / se);
  return 2.0 * math::norm_cdf(-zstat);
}

std::string significance_stars(double pvalue) {
  if (pvalue < 0.01) return "***";
  if (pvalue < 0.05) return "**";
  if (pvalue < 0.1) return "*";
  return "";
}

}  // namespace countnet
