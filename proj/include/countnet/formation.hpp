#ifndef COUNTNET_FORMATION_HPP
#define COUNTNET_FORMATION_HPP

// Dyadic link regression with two-way scholar effects and the sieve basis
// used to control for network endogeneity downstream. Link probabilities are
//   P(w_ij = 1) = logistic(xdyad_ij' beta + mu_i + nu_j)
// over ordered pairs i != j; an undirected network is fitted by passing both
// ordered copies of each pair.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "countnet/network.hpp"
#include "countnet/rng.hpp"

namespace countnet {

struct ScholarFeatures {
  std::string id;
  int department = 0;      // integer code, equal codes mean same department
  int ranking_bucket = 0;  // integer code of the institution ranking band
  bool female = false;
  bool african_american = false;
  double experience = 0.0;
  double citations = 0.0;
  double avg_pubs = 0.0;   // mean yearly publications over the lookback window
  double total_pubs = 0.0;
  std::vector<std::string> fields;  // research fields, free-form tags
};

// Pair-level covariates derived on the fly from per-scholar features:
// an intercept followed by similarity and distance terms. Nothing is
// materialized unless dense() is called.
class DyadFrame {
public:
  explicit DyadFrame(std::vector<ScholarFeatures> features);

  int n() const { return static_cast<int>(features_.size()); }
  int n_cols() const { return static_cast<int>(labels_.size()); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<ScholarFeatures>& features() const { return features_; }

  // Fills out[0..n_cols) with the covariates of the ordered dyad (i, j).
  void fill(int i, int j, double* out) const;

  // All ordered dyads, row order (0,1), (0,2), ..., (1,0), ... Useful for
  // tests; quadratic in n.
  Eigen::MatrixXd dense() const;

private:
  std::vector<ScholarFeatures> features_;  // fields sorted for intersection
  std::vector<std::string> labels_;
};

struct FormationOptions {
  double tol = 1e-8;       // max absolute coefficient change across a sweep
  double grad_tol = 1e-7;  // max absolute score across beta and free effects
  int max_iter = 500;      // alternating sweeps
  double fe_cap = 15.0;    // clamp for separated scholar effects
};

struct FormationFit {
  Eigen::VectorXd beta;     // dyad coefficients, intercept first
  Eigen::VectorXd se_beta;  // from the observed information of the beta block
  Eigen::VectorXd mu;       // sender effects, mean zero
  Eigen::VectorXd nu;       // receiver effects, mean zero
  std::vector<int> capped_mu;  // scholars with no (or all) outgoing links
  std::vector<int> capped_nu;
  bool converged = false;
  int iterations = 0;
  double loglik = 0.0;
  double max_grad = 0.0;  // final gradient max-norm over free coordinates
};

// Alternating Newton: full-step updates on beta given the effects, then
// one-dimensional updates per scholar effect. Scholars whose links are all
// present or all absent get their effect pinned at +-fe_cap and flagged.
FormationFit fit_dyadic_logit(const DyadFrame& frame,
                              const InteractionNetwork& links,
                              const FormationOptions& opts = FormationOptions());

struct SieveBasis {
  Eigen::MatrixXd h;  // n x n_terms, each column standardized
  std::vector<std::string> labels;
};

// Polynomial sieve in (mu_i, nu_i, and their network-weighted neighbor
// averages): every monomial of total degree 1..degree, each column scaled to
// zero mean and unit variance. Constant columns are zeroed out.
SieveBasis sieve_terms(const Eigen::VectorXd& mu, const Eigen::VectorXd& nu,
                       const InteractionNetwork& g, int degree);

// Directed 0/1 network drawn from the dyadic logit model itself.
InteractionNetwork simulate_dyads(const DyadFrame& frame,
                                  const Eigen::VectorXd& beta,
                                  const Eigen::VectorXd& mu,
                                  const Eigen::VectorXd& nu, Rng& rng);

}  // namespace countnet

#endif
