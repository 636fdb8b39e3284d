#ifndef COUNTNET_SIMULATE_HPP
#define COUNTNET_SIMULATE_HPP

// Synthetic data from the exact data generating process of the game:
// networks (Erdos-Renyi or dyadic with homophily and degree heterogeneity),
// covariates, and equilibrium count outcomes drawn by inverting the taste
// shock cdf.

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "countnet/game.hpp"
#include "countnet/ladder.hpp"
#include "countnet/network.hpp"
#include "countnet/rng.hpp"

namespace countnet {

// Symmetric 0/1 network with P(link) = mean_degree / (n - 1) per unordered
// pair. Returned un-normalized; call row_normalized() for the game.
InteractionNetwork simulate_network_er(int n, double mean_degree, Rng& rng);

struct DyadicNetConfig {
  double intercept = 0.0;   // baseline log-odds of a link
  double homophily = 0.0;   // weight on -|trait_i - trait_j|
  double sigma_mu = 0.0;    // sd of the symmetric degree effect
};

struct DyadicNetworkDraw {
  InteractionNetwork w;   // symmetric 0/1
  Eigen::VectorXd mu;     // degree effects, one per node
  Eigen::VectorXd trait;  // homophily trait, one per node
};

// Undirected dyadic network: one Bernoulli draw per unordered pair with
// log-odds  intercept - homophily * |trait_i - trait_j| + mu_i + mu_j.
DyadicNetworkDraw simulate_network_dyadic(int n, const DyadicNetConfig& cfg,
                                          Rng& rng);

struct OutcomeDraw {
  Eigen::VectorXi y;
  Eigen::VectorXd beliefs;  // equilibrium expected counts used for the draw
  EquilibriumResult eq;
};

// Solves the equilibrium, then sets y_i = #{r >= 1 : a_r <= u_i + eps_i}
// with eps_i drawn by inverse cdf. An optional shock_shift is added to the
// deterministic utility before the equilibrium is solved, so agents respond
// to it like any other observable shifter.
OutcomeDraw simulate_outcomes(const ModelParams& params,
                              const InteractionNetwork& g,
                              const Eigen::MatrixXd& z, Rng& rng,
                              const std::optional<Eigen::VectorXd>& shock_shift =
                                  std::nullopt,
                              double eq_tol = 1e-9, int eq_max_iter = 10000);

struct CovariateSpec {
  std::string kind;   // "intercept", "normal" or "bernoulli"
  double mean = 0.0;  // normal only
  double sd = 1.0;    // normal only
  double p = 0.5;     // bernoulli only
};

struct SimConfig {
  int n = 100;
  std::uint64_t seed = 1;
  std::string network_mode = "er";  // "er" or "dyadic"
  double mean_degree = 5.0;
  DyadicNetConfig dyadic;
  std::vector<CovariateSpec> covariates;
  bool contextual = true;      // append neighbor averages of the non-constant columns
  Eigen::VectorXd gamma;       // one coefficient per design column
  CostLadder ladder;
  double shock_load_mu = 0.0;  // adds shock_load_mu * mu to the utility (dyadic mode)
  double eq_tol = 1e-9;
  int eq_max_iter = 10000;
};

struct SimulatedDataset {
  InteractionNetwork w;  // raw links
  InteractionNetwork g;  // row normalized
  Eigen::MatrixXd x;     // drawn covariates
  Eigen::MatrixXd z;     // design: x plus neighbor averages
  std::vector<std::string> x_labels;
  std::vector<std::string> z_labels;
  Eigen::VectorXi y;
  Eigen::VectorXd beliefs;
  Eigen::VectorXd mu;  // degree effects (empty in er mode)
  EquilibriumResult eq;
};

// One full draw of (network, covariates, outcomes). rep picks an independent
// substream of the seed so replications can run in any order.
SimulatedDataset simulate_dataset(const SimConfig& cfg, std::uint64_t rep = 0);

}  // namespace countnet

#endif
