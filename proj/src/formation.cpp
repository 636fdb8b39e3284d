#include "countnet/formation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "countnet/math.hpp"

namespace countnet {

DyadFrame::DyadFrame(std::vector<ScholarFeatures> features)
    : features_(std::move(features)) {
  if (features_.size() < 2) {
    throw ValidationError("dyad frame needs at least two scholars");
  }
  for (auto& f : features_) {
    std::sort(f.fields.begin(), f.fields.end());
    f.fields.erase(std::unique(f.fields.begin(), f.fields.end()), f.fields.end());
  }
  labels_ = {"const",
             "same_department",
             "same_ranking",
             "abs_diff_experience",
             "abs_diff_citations",
             "abs_diff_productivity",
             "both_female",
             "any_female",
             "both_african_american",
             "common_fields"};
}

void DyadFrame::fill(int i, int j, double* out) const {
  const ScholarFeatures& a = features_[static_cast<std::size_t>(i)];
  const ScholarFeatures& b = features_[static_cast<std::size_t>(j)];
  out[0] = 1.0;
  out[1] = a.department == b.department ? 1.0 : 0.0;
  out[2] = a.ranking_bucket == b.ranking_bucket ? 1.0 : 0.0;
  out[3] = std::fabs(a.experience - b.experience);
  out[4] = std::fabs(a.citations - b.citations);
  out[5] = std::fabs(a.avg_pubs - b.avg_pubs);
  out[6] = (a.female && b.female) ? 1.0 : 0.0;
  out[7] = (a.female || b.female) ? 1.0 : 0.0;
  out[8] = (a.african_american && b.african_american) ? 1.0 : 0.0;
  // fields are sorted and unique, count the overlap
  double common = 0.0;
  auto it_a = a.fields.begin();
  auto it_b = b.fields.begin();
  while (it_a != a.fields.end() && it_b != b.fields.end()) {
    if (*it_a < *it_b) {
      ++it_a;
    } else if (*it_b < *it_a) {
      ++it_b;
    } else {
      common += 1.0;
      ++it_a;
      ++it_b;
    }
  }
  out[9] = common;
}

Eigen::MatrixXd DyadFrame::dense() const {
  const int nn = n();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(nn) * (nn - 1), n_cols());
  Eigen::Index row = 0;
  std::vector<double> buf(static_cast<std::size_t>(n_cols()));
  for (int i = 0; i < nn; ++i) {
    for (int j = 0; j < nn; ++j) {
      if (i == j) continue;
      fill(i, j, buf.data());
      for (int c = 0; c < n_cols(); ++c) out(row, c) = buf[static_cast<std::size_t>(c)];
      ++row;
    }
  }
  return out;
}

namespace {

// Dense 0/1 link indicator from the sparse network.
std::vector<char> link_matrix(const InteractionNetwork& links, int n) {
  std::vector<char> w(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    for (const auto& [j, wt] : links.row(i)) {
      if (wt != 0.0) w[static_cast<std::size_t>(i) * n + j] = 1;
    }
  }
  return w;
}

}  // namespace

FormationFit fit_dyadic_logit(const DyadFrame& frame,
                              const InteractionNetwork& links,
                              const FormationOptions& opts) {
  const int n = frame.n();
  const int q = frame.n_cols();
  if (links.size() != n) {
    throw ValidationError("fit_dyadic_logit: network size does not match the features");
  }
  const std::vector<char> w = link_matrix(links, n);

  long n_links = 0;
  std::vector<int> out_deg(static_cast<std::size_t>(n), 0);
  std::vector<int> in_deg(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      if (w[static_cast<std::size_t>(i) * n + j]) {
        ++n_links;
        ++out_deg[static_cast<std::size_t>(i)];
        ++in_deg[static_cast<std::size_t>(j)];
      }
    }
  }
  const double n_dyads = static_cast<double>(n) * (n - 1);
  if (n_links == 0 || n_links == static_cast<long>(n_dyads)) {
    throw ValidationError("fit_dyadic_logit: network has no variation (all links " +
                          std::string(n_links == 0 ? "absent" : "present") + ")");
  }

  FormationFit fit;
  fit.mu = Eigen::VectorXd::Zero(n);
  fit.nu = Eigen::VectorXd::Zero(n);
  fit.beta = Eigen::VectorXd::Zero(q);
  const double density = static_cast<double>(n_links) / n_dyads;
  fit.beta[0] = std::log(density / (1.0 - density));

  // Scholars whose row or column is constant have no interior optimum;
  // pin their effect at the cap.
  std::vector<char> mu_free(static_cast<std::size_t>(n), 1);
  std::vector<char> nu_free(static_cast<std::size_t>(n), 1);
  for (int i = 0; i < n; ++i) {
    if (out_deg[static_cast<std::size_t>(i)] == 0 ||
        out_deg[static_cast<std::size_t>(i)] == n - 1) {
      mu_free[static_cast<std::size_t>(i)] = 0;
      fit.mu[i] = out_deg[static_cast<std::size_t>(i)] == 0 ? -opts.fe_cap : opts.fe_cap;
      fit.capped_mu.push_back(i);
    }
    if (in_deg[static_cast<std::size_t>(i)] == 0 ||
        in_deg[static_cast<std::size_t>(i)] == n - 1) {
      nu_free[static_cast<std::size_t>(i)] = 0;
      fit.nu[i] = in_deg[static_cast<std::size_t>(i)] == 0 ? -opts.fe_cap : opts.fe_cap;
      fit.capped_nu.push_back(i);
    }
  }

  // Cache of x'beta per dyad, refreshed after every beta update.
  Eigen::MatrixXd xb(n, n);
  std::vector<double> buf(static_cast<std::size_t>(q));
  auto refresh_xb = [&]() {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        frame.fill(i, j, buf.data());
        double s = 0.0;
        for (int c = 0; c < q; ++c) s += buf[static_cast<std::size_t>(c)] * fit.beta[c];
        xb(i, j) = s;
      }
    }
  };
  refresh_xb();

  auto loglik = [&]() {
    double ll = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const double idx = xb(i, j) + fit.mu[i] + fit.nu[j];
        ll += w[static_cast<std::size_t>(i) * n + j] ? math::log_logistic(idx)
                                                     : math::log_logistic(-idx);
      }
    }
    return ll;
  };

  Eigen::MatrixXd hess(q, q);
  Eigen::VectorXd grad(q);
  double ll = loglik();

  for (fit.iterations = 1; fit.iterations <= opts.max_iter; ++fit.iterations) {
    double max_change = 0.0;

    // Newton step on beta at fixed effects, halved until the likelihood
    // does not fall.
    grad.setZero();
    hess.setZero();
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        frame.fill(i, j, buf.data());
        const double p = math::logistic(xb(i, j) + fit.mu[i] + fit.nu[j]);
        const double res = (w[static_cast<std::size_t>(i) * n + j] ? 1.0 : 0.0) - p;
        const double wgt = p * (1.0 - p);
        for (int c = 0; c < q; ++c) {
          grad[c] += res * buf[static_cast<std::size_t>(c)];
          for (int d = c; d < q; ++d) {
            hess(c, d) += wgt * buf[static_cast<std::size_t>(c)] * buf[static_cast<std::size_t>(d)];
          }
        }
      }
    }
    hess = hess.selfadjointView<Eigen::Upper>();
    double sweep_grad = grad.cwiseAbs().maxCoeff();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
    if (ldlt.info() != Eigen::Success) {
      throw NumericalError("fit_dyadic_logit: singular information matrix for beta");
    }
    const Eigen::VectorXd full_step = ldlt.solve(grad);
    double scale = 1.0;
    const Eigen::VectorXd beta_old = fit.beta;
    for (int h = 0; h < 30; ++h) {
      fit.beta = beta_old + scale * full_step;
      refresh_xb();
      const double ll_new = loglik();
      if (ll_new >= ll - 1e-12) {
        ll = ll_new;
        break;
      }
      scale *= 0.5;
      if (h == 29) {
        fit.beta = beta_old;
        refresh_xb();
        scale = 0.0;
      }
    }
    max_change = std::max(max_change, (scale * full_step).cwiseAbs().maxCoeff());

    // One-dimensional Newton updates per scholar effect. Each step is capped
    // at one unit: in the logistic tails the local curvature understates the
    // curvature toward the optimum and the raw step can overshoot by orders
    // of magnitude, landing in a flat region it cannot leave.
    for (int i = 0; i < n; ++i) {
      if (!mu_free[static_cast<std::size_t>(i)]) continue;
      double gg = 0.0, hh = 0.0;
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const double p = math::logistic(xb(i, j) + fit.mu[i] + fit.nu[j]);
        gg += (w[static_cast<std::size_t>(i) * n + j] ? 1.0 : 0.0) - p;
        hh += p * (1.0 - p);
      }
      sweep_grad = std::max(sweep_grad, std::fabs(gg));
      if (hh < 1e-12) continue;
      const double step = std::clamp(gg / hh, -1.0, 1.0);
      fit.mu[i] += step;
      max_change = std::max(max_change, std::fabs(step));
    }
    for (int j = 0; j < n; ++j) {
      if (!nu_free[static_cast<std::size_t>(j)]) continue;
      double gg = 0.0, hh = 0.0;
      for (int i = 0; i < n; ++i) {
        if (i == j) continue;
        const double p = math::logistic(xb(i, j) + fit.mu[i] + fit.nu[j]);
        gg += (w[static_cast<std::size_t>(i) * n + j] ? 1.0 : 0.0) - p;
        hh += p * (1.0 - p);
      }
      sweep_grad = std::max(sweep_grad, std::fabs(gg));
      if (hh < 1e-12) continue;
      const double step = std::clamp(gg / hh, -1.0, 1.0);
      fit.nu[j] += step;
      max_change = std::max(max_change, std::fabs(step));
    }
    ll = loglik();

    // The step test alone can stall: with dyad covariates on very different
    // scales the beta Hessian is ill conditioned, and once the score is down
    // to rounding noise the Newton step amplifies that noise to above tol.
    // A stationary score settles the question either way.
    if (max_change < opts.tol || sweep_grad < opts.grad_tol) {
      fit.converged = true;
      break;
    }
  }

  // Location normalization: both effect blocks to mean zero, shifts absorbed
  // into the intercept. Probabilities are untouched.
  const double mu_shift = fit.mu.mean();
  const double nu_shift = fit.nu.mean();
  fit.mu.array() -= mu_shift;
  fit.nu.array() -= nu_shift;
  fit.beta[0] += mu_shift + nu_shift;
  refresh_xb();

  fit.loglik = loglik();

  // Final diagnostics: gradient over the free coordinates and beta standard
  // errors from the observed information.
  grad.setZero();
  hess.setZero();
  Eigen::VectorXd mu_grad = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd nu_grad = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      frame.fill(i, j, buf.data());
      const double p = math::logistic(xb(i, j) + fit.mu[i] + fit.nu[j]);
      const double res = (w[static_cast<std::size_t>(i) * n + j] ? 1.0 : 0.0) - p;
      const double wgt = p * (1.0 - p);
      for (int c = 0; c < q; ++c) {
        grad[c] += res * buf[static_cast<std::size_t>(c)];
        for (int d = c; d < q; ++d) {
          hess(c, d) += wgt * buf[static_cast<std::size_t>(c)] * buf[static_cast<std::size_t>(d)];
        }
      }
      mu_grad[i] += res;
      nu_grad[j] += res;
    }
  }
  fit.max_grad = grad.cwiseAbs().maxCoeff();
  for (int i = 0; i < n; ++i) {
    if (mu_free[static_cast<std::size_t>(i)]) {
      fit.max_grad = std::max(fit.max_grad, std::fabs(mu_grad[i]));
    }
    if (nu_free[static_cast<std::size_t>(i)]) {
      fit.max_grad = std::max(fit.max_grad, std::fabs(nu_grad[i]));
    }
  }
  hess = hess.selfadjointView<Eigen::Upper>();
  const Eigen::MatrixXd hinv =
      hess.ldlt().solve(Eigen::MatrixXd::Identity(q, q));
  fit.se_beta = hinv.diagonal().cwiseMax(0.0).cwiseSqrt();

  return fit;
}

SieveBasis sieve_terms(const Eigen::VectorXd& mu, const Eigen::VectorXd& nu,
                       const InteractionNetwork& g, int degree) {
  const int n = static_cast<int>(mu.size());
  if (nu.size() != n || g.size() != n) {
    throw ValidationError("sieve_terms: size mismatch");
  }
  if (degree < 1 || degree > 4) {
    throw ValidationError("sieve_terms: degree must lie in [1, 4]");
  }

  Eigen::MatrixXd base(n, 4);
  base.col(0) = mu;
  base.col(1) = nu;
  base.col(2) = g.multiply(mu);  // neighbor averages; zero rows stay zero
  base.col(3) = g.multiply(nu);
  const std::vector<std::string> names = {"mu", "nu", "mu_nbr", "nu_nbr"};

  SieveBasis out;
  std::vector<Eigen::VectorXd> cols;
  for (int total = 1; total <= degree; ++total) {
    for (int e0 = total; e0 >= 0; --e0) {
      for (int e1 = total - e0; e1 >= 0; --e1) {
        for (int e2 = total - e0 - e1; e2 >= 0; --e2) {
          const int e3 = total - e0 - e1 - e2;
          const int expo[4] = {e0, e1, e2, e3};
          Eigen::VectorXd col = Eigen::VectorXd::Ones(n);
          std::string label;
          for (int v = 0; v < 4; ++v) {
            for (int rep = 0; rep < expo[v]; ++rep) {
              col = col.cwiseProduct(base.col(v));
            }
            if (expo[v] > 0) {
              if (!label.empty()) label += "*";
              label += names[static_cast<std::size_t>(v)];
              if (expo[v] > 1) label += "^" + std::to_string(expo[v]);
            }
          }
          cols.push_back(std::move(col));
          out.labels.push_back(label);
        }
      }
    }
  }

  out.h.resize(n, static_cast<int>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    Eigen::VectorXd col = cols[c];
    const double mean = col.mean();
    col.array() -= mean;
    const double sd = n > 1 ? std::sqrt(col.squaredNorm() / (n - 1)) : 0.0;
    if (sd < 1e-12) {
      out.h.col(static_cast<int>(c)).setZero();
    } else {
      out.h.col(static_cast<int>(c)) = col / sd;
    }
  }
  return out;
}

InteractionNetwork simulate_dyads(const DyadFrame& frame,
                                  const Eigen::VectorXd& beta,
                                  const Eigen::VectorXd& mu,
                                  const Eigen::VectorXd& nu, Rng& rng) {
  const int n = frame.n();
  if (beta.size() != frame.n_cols()) {
    throw ValidationError("simulate_dyads: beta size does not match the frame");
  }
  if (mu.size() != n || nu.size() != n) {
    throw ValidationError("simulate_dyads: effect vectors must have length n");
  }
  InteractionNetwork links(n);
  std::vector<double> buf(static_cast<std::size_t>(frame.n_cols()));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      frame.fill(i, j, buf.data());
      double idx = mu[i] + nu[j];
      for (int c = 0; c < frame.n_cols(); ++c) {
        idx += buf[static_cast<std::size_t>(c)] * beta[c];
      }
      if (rng.bernoulli(math::logistic(idx))) links.push_entry(i, j, 1.0);
    }
  }
  links.sort_rows();
  return links;
}

}  // namespace countnet
