#ifndef COUNTNET_ESTIMATE_HPP
#define COUNTNET_ESTIMATE_HPP

// Nested pseudo-likelihood estimation. The optimizer works on a transformed
// parameter vector
//   (log lambda, gamma', log(delta_2 - lambda), ..., log(delta_rbar - lambda),
//    log delta_bar, log rho)'
// so every ladder constraint holds by construction. Each outer iteration
// maximizes the pseudo likelihood at fixed beliefs, then applies the
// expected-outcome map once to update the beliefs; the loop stops when both
// L1 changes fall below tol.

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "countnet/game.hpp"
#include "countnet/ladder.hpp"
#include "countnet/network.hpp"
#include "countnet/optim.hpp"

namespace countnet {

struct ParamVector {
  double log_lambda = 0.0;
  Eigen::VectorXd gamma;
  Eigen::VectorXd log_delta_free;  // log(delta_r - lambda) for r = 2..r_bar
  double log_delta_bar = 0.0;
  double log_rho = 0.0;

  int r_bar() const { return static_cast<int>(log_delta_free.size()) + 1; }
  int n_gamma() const { return static_cast<int>(gamma.size()); }
  int dim() const { return n_gamma() + r_bar() + 2; }

  Eigen::VectorXd flat() const;
  static ParamVector from_flat(const Eigen::VectorXd& v, int n_gamma);

  ModelParams to_model() const;
  static ParamVector from_model(const ModelParams& m);

  // (lambda, gamma, delta_2..delta_rbar, delta_bar, rho): the scale results
  // are reported on. delta_r are the actual increments, lambda included.
  Eigen::VectorXd natural() const;
  // Jacobian d natural / d flat, for the delta method.
  Eigen::MatrixXd natural_jacobian() const;
};

// Names aligned with natural(): "lambda", the design labels, "delta_2", ...,
// "delta_bar", "rho".
std::vector<std::string> parameter_labels(const std::vector<std::string>& z_labels,
                                          int r_bar);

// Mean log pseudo-likelihood (1/n) sum_i log P(y_i | beliefs).
double pseudo_loglik(const ParamVector& theta, const Eigen::VectorXi& y,
                     const InteractionNetwork& g, const Eigen::MatrixXd& z,
                     const Eigen::VectorXd& beliefs);

struct ScoreResult {
  double value = 0.0;       // mean log likelihood
  Eigen::VectorXd grad;     // gradient of the mean, transformed scale
  Eigen::MatrixXd per_obs;  // n x dim per-observation scores (optional)
};

ScoreResult pseudo_loglik_score(const ParamVector& theta, const Eigen::VectorXi& y,
                                const InteractionNetwork& g, const Eigen::MatrixXd& z,
                                const Eigen::VectorXd& beliefs,
                                bool want_per_obs = false);

struct NplOptions {
  double tol = 1e-4;   // L1 tolerance on both the parameter and belief updates
  int max_outer = 200;
  optim::BfgsOptions inner = {400, 1e-7, 1e-14, 50, 1e-4, 0.9};
  double tail_tol = 1e-12;
};

struct NplTraceRow {
  int iteration;
  double loglik;        // total log pseudo-likelihood after the inner step
  double dtheta;        // L1 change of the transformed parameters
  double dbeliefs;      // L1 change of the beliefs
};

struct FitResult {
  ParamVector theta;
  Eigen::VectorXd beliefs;
  double loglik = 0.0;  // total log pseudo-likelihood at the final iterate
  bool converged = false;
  bool inner_ok = true;
  int iterations = 0;
  int r_bar = 1;
  std::vector<NplTraceRow> trace;
  std::string message;
};

// Ordered fit with the peer effect pinned at zero; used to initialize the
// NPL loop and useful as a no-interactions baseline.
ParamVector initial_values(const Eigen::VectorXi& y, const Eigen::MatrixXd& z,
                           int r_bar, const NplOptions& opts = NplOptions());

FitResult npl_fit(const Eigen::VectorXi& y, const InteractionNetwork& g,
                  const Eigen::MatrixXd& z, int r_bar,
                  const NplOptions& opts = NplOptions(),
                  const std::optional<ParamVector>& init = std::nullopt,
                  const std::optional<Eigen::VectorXd>& init_beliefs = std::nullopt);

// Smallest r_bar (starting from `start`) whose refit at r_bar + 1 moves the
// shared transformed coordinates by less than stability_tol in max norm,
// capped at max(max(y) - 2, 1).
int select_r_bar(const Eigen::VectorXi& y, const InteractionNetwork& g,
                 const Eigen::MatrixXd& z, const NplOptions& opts = NplOptions(),
                 double stability_tol = 0.01, int start = 2);

struct CovarianceResult {
  Eigen::MatrixXd cov_transformed;
  Eigen::MatrixXd cov_natural;
  Eigen::VectorXd se_natural;
  std::string method;
  int n_used = 0;      // bootstrap replications kept
  int n_dropped = 0;   // bootstrap replications that failed to converge
  bool drop_warning = false;  // more than 20% dropped
  std::string message;
};

// Numerical sandwich: outer products of the analytic per-observation scores
// around a finite-difference Jacobian of the estimator's first-order
// conditions (the fixed point is re-solved at every perturbed point).
CovarianceResult sandwich_covariance(const FitResult& fit, const Eigen::VectorXi& y,
                                     const InteractionNetwork& g,
                                     const Eigen::MatrixXd& z,
                                     const NplOptions& opts = NplOptions());

// Parametric bootstrap: re-simulate outcomes at the fitted parameters on the
// fixed network and design, refit, and take the empirical covariance.
CovarianceResult bootstrap_covariance(const FitResult& fit,
                                      const InteractionNetwork& g,
                                      const Eigen::MatrixXd& z, int n_reps,
                                      std::uint64_t seed,
                                      const NplOptions& opts = NplOptions());

// Two-sided normal p-value and significance stars at 0.1 / 0.05 / 0.01.
double wald_pvalue(double estimate, double se);
std::string significance_stars(double pvalue);

}  // namespace countnet

#endif
