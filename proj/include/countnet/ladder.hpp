#ifndef COUNTNET_LADDER_HPP
#define COUNTNET_LADDER_HPP

// Cut points of the count model. The thresholds a_r satisfy a_1 = 0 and
// a_r = a_{r-1} + delta_r. Increments for r = 2..r_bar are free parameters,
// each strictly above lambda so the cost stays strictly convex; beyond r_bar
// the increments follow the polynomial tail
//   delta_r = (r - 1)^rho * delta_bar + lambda.

#include <Eigen/Dense>
#include <vector>

namespace countnet {

struct CostLadder {
  double lambda = 0.0;                  // peer taste for conformity, >= 0
  std::vector<double> free_increments;  // delta_r for r = 2..r_bar, each > lambda
  double delta_bar = 1.0;               // tail scale, > 0
  double rho = 1.0;                     // tail exponent, > 0

  int r_bar() const { return static_cast<int>(free_increments.size()) + 1; }

  void validate() const;

  // delta_r for r >= 2.
  double increment(int r) const;

  // (a_1, ..., a_rmax); a_1 = 0. r_max >= 1.
  std::vector<double> cut_points(int r_max) const;
};

// Natural-scale model parameters: the ladder plus coefficients on the
// design columns (own effects first, contextual effects after).
struct ModelParams {
  CostLadder ladder;
  Eigen::VectorXd gamma;
};

}  // namespace countnet

#endif
