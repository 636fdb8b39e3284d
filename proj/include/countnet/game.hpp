#ifndef COUNTNET_GAME_HPP
#define COUNTNET_GAME_HPP

// The simultaneous count game. Each agent i observes its deterministic
// utility index u_i = lambda * gbar_i' y_e + z_i' gamma and chooses the count
// y_i = r whenever the taste shock lands between the cut points, so
//   P(y_i = r) = Phi(u_i - a_r) - Phi(u_i - a_{r+1}),  a_0 = -inf.
// Beliefs about the average neighbor choice are consistent in equilibrium:
// y_e must be a fixed point of the expected-outcome map
//   l_i(y_e) = sum_{r>=1} Phi(u_i - a_r).

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "countnet/ladder.hpp"
#include "countnet/math.hpp"
#include "countnet/network.hpp"

namespace countnet {

// Thrown when a fixed-point iteration runs out of iterations; carries the
// last iterate so callers can inspect or restart it.
class FixedPointError : public NumericalError {
public:
  FixedPointError(const std::string& msg, Eigen::VectorXd last, double res)
      : NumericalError(msg), last_iterate(std::move(last)), residual(res) {}

  Eigen::VectorXd last_iterate;
  double residual;
};

// log(Phi(a) - Phi(b)) for a > b, evaluated on whichever tail is better
// conditioned; a may be +inf. The result is floored at log(1e-300).
double log_prob_band(double a, double b);

// Distribution (p_0, ..., p_R) of one agent's count given its utility
// index u. R starts at r_max and grows until Phi(u - a_{R+1}) < tail_tol;
// the residual tail is folded into the top bin, so the vector sums to one.
Eigen::VectorXd choice_probabilities(double u, const CostLadder& ladder,
                                     int r_max, double tail_tol = 1e-12);

// Stacked version: row i is the count distribution of agent i given beliefs
// y_e. All rows share the same top bin.
Eigen::MatrixXd choice_probability_matrix(const ModelParams& params,
                                          const InteractionNetwork& g,
                                          const Eigen::MatrixXd& z,
                                          const Eigen::VectorXd& y_e,
                                          int r_max, double tail_tol = 1e-12);

// Expected count of every agent under beliefs y_e: sum_{r>=1} Phi(u_i - a_r),
// truncated once the largest summand drops below tail_tol.
Eigen::VectorXd expected_outcome_map(const ModelParams& params,
                                     const InteractionNetwork& g,
                                     const Eigen::MatrixXd& z,
                                     const Eigen::VectorXd& y_e,
                                     double tail_tol = 1e-12);

// Same map evaluated from a precomputed utility shifter psi = Z * gamma.
Eigen::VectorXd expected_outcome_map_psi(const CostLadder& ladder,
                                         const InteractionNetwork& g,
                                         const Eigen::VectorXd& psi,
                                         const Eigen::VectorXd& y_e,
                                         double tail_tol = 1e-12);

struct EquilibriumResult {
  Eigen::VectorXd beliefs;
  int iterations = 0;      // belief updates performed
  double residual = 0.0;   // L1 distance of the final check
  bool converged = false;
  bool damped = false;     // averaging kicked in after an oscillation
  double bound = 0.0;      // peer-effect uniqueness bound for this instance
  bool above_bound = false;
};

// Plain fixed-point iteration on the expected-outcome map, with 0.5
// averaging switched on permanently the first time the L1 residual grows.
// Throws FixedPointError after max_iter updates without convergence.
EquilibriumResult solve_equilibrium(
    const ModelParams& params, const InteractionNetwork& g,
    const Eigen::MatrixXd& z,
    const std::optional<Eigen::VectorXd>& init = std::nullopt,
    double tol = 1e-9, int max_iter = 10000);

// 1 / max_u sum_r phi(u - a_r): the largest slope constant of the map
// with respect to beliefs, before scaling by the network.
double bc_constant(const CostLadder& ladder);

// Uniqueness threshold for lambda: bc_constant / max absolute row sum.
// Infinite for an empty network.
double peer_effect_bound(const CostLadder& ladder, const InteractionNetwork& g);

}  // namespace countnet

#endif
