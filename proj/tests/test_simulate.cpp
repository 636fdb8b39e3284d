#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "countnet/math.hpp"
#include "countnet/math.hpp"
#include "countnet/simulate.hpp"
#include "doctest.h"

using namespace countnet;

namespace {

CostLadder reference_ladder() {
  CostLadder ladder;
  ladder.lambda = 0.1;
  ladder.free_increments = {0.5};
  ladder.delta_bar = 0.3;
  ladder.rho = 1.0;
  return ladder;
}

SimConfig small_config() {
  SimConfig cfg;
  cfg.n = 40;
  cfg.seed = 9;
  cfg.mean_degree = 4.0;
  cfg.covariates = {{"intercept"}, {"normal", 0.0, 1.0}, {"bernoulli", 0, 1, 0.4}};
  cfg.gamma = Eigen::VectorXd(5);
  cfg.gamma << 0.4, 0.5, -0.3, 0.2, 0.1;
  cfg.ladder = reference_ladder();
  return cfg;
}

}  // namespace

TEST_CASE("er network is symmetric with the expected edge count") {
  Rng rng(31);
  const int n = 300;
  InteractionNetwork w = simulate_network_er(n, 6.0, rng);
  Eigen::MatrixXd dense = w.to_dense();
  CHECK((dense - dense.transpose()).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(dense.diagonal().isZero());
  // n * mean_degree directed entries on average; allow 4 sd of slack.
  const double expect = n * 6.0;
  const double sd = std::sqrt(2.0 * (n * (n - 1) / 2.0) * (6.0 / (n - 1)) *
                              (1.0 - 6.0 / (n - 1)));
  CHECK(std::fabs(w.n_edges() - expect) < 4.0 * sd + 1.0);
}

TEST_CASE("er draws are reproducible and differ across seeds") {
  Rng a(5), b(5), c(6);
  Eigen::MatrixXd wa = simulate_network_er(50, 4.0, a).to_dense();
  Eigen::MatrixXd wb = simulate_network_er(50, 4.0, b).to_dense();
  Eigen::MatrixXd wc = simulate_network_er(50, 4.0, c).to_dense();
  CHECK((wa - wb).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((wa - wc).lpNorm<Eigen::Infinity>() > 0.0);
}

TEST_CASE("dyadic network responds to homophily and degree effects") {
  DyadicNetConfig cfg;
  cfg.intercept = -1.0;
  cfg.homophily = 2.0;
  cfg.sigma_mu = 0.8;
  Rng rng(12);
  DyadicNetworkDraw draw = simulate_network_dyadic(400, cfg, rng);
  Eigen::MatrixXd dense = draw.w.to_dense();
  CHECK((dense - dense.transpose()).lpNorm<Eigen::Infinity>() == 0.0);
  REQUIRE(draw.mu.size() == 400);
  REQUIRE(draw.trait.size() == 400);

  // Nodes with larger mu should collect more links.
  Eigen::VectorXd degree = dense.rowwise().sum();
  double cov = 0.0;
  const double mu_mean = draw.mu.mean();
  const double deg_mean = degree.mean();
  for (int i = 0; i < 400; ++i) {
    cov += (draw.mu[i] - mu_mean) * (degree[i] - deg_mean);
  }
  CHECK(cov > 0.0);

  // Similar traits should link more often than dissimilar ones.
  double near_hits = 0, near_n = 0, far_hits = 0, far_n = 0;
  for (int i = 0; i < 400; ++i) {
    for (int j = i + 1; j < 400; ++j) {
      const double d = std::fabs(draw.trait[i] - draw.trait[j]);
      if (d < 0.5) {
        near_n += 1;
        near_hits += dense(i, j);
      } else if (d > 1.5) {
        far_n += 1;
        far_hits += dense(i, j);
      }
    }
  }
  REQUIRE(near_n > 0);
  REQUIRE(far_n > 0);
  CHECK(near_hits / near_n > far_hits / far_n);
}

TEST_CASE("outcome frequencies match the model distribution for one agent") {
  // A single isolated agent draws straight from choice_probabilities(u).
  ModelParams params;
  params.ladder = reference_ladder();
  params.gamma = Eigen::VectorXd(1);
  params.gamma << 0.7;
  InteractionNetwork g(1);
  Eigen::MatrixXd z = Eigen::MatrixXd::Ones(1, 1);

  Rng rng(77);
  const int n_draws = 100000;
  std::vector<long> counts;
  for (int k = 0; k < n_draws; ++k) {
    OutcomeDraw draw = simulate_outcomes(params, g, z, rng);
    const int y = draw.y[0];
    if (static_cast<std::size_t>(y) >= counts.size()) counts.resize(y + 1, 0);
    counts[static_cast<std::size_t>(y)] += 1;
  }

  // Pearson chi-square on cells 0..4 plus a tail cell for y >= 5; every
  // expected count is comfortably above 5 at u = 0.7.
  Eigen::VectorXd p = choice_probabilities(0.7, params.ladder, 16);
  REQUIRE(p.size() > 5);
  double chi2 = 0.0;
  double tail_obs = n_draws;
  for (int r = 0; r < 5; ++r) {
    const double obs =
        (static_cast<std::size_t>(r) < counts.size()) ? counts[static_cast<std::size_t>(r)] : 0.0;
    const double expect = n_draws * p[r];
    REQUIRE(expect > 5.0);
    chi2 += (obs - expect) * (obs - expect) / expect;
    tail_obs -= obs;
  }
  const double tail_expect = n_draws * (1.0 - p.head(5).sum());
  REQUIRE(tail_expect > 5.0);
  chi2 += (tail_obs - tail_expect) * (tail_obs - tail_expect) / tail_expect;
  CHECK(math::chi2_sf(chi2, 5) > 0.001);
}

TEST_CASE("shock shift raises outcomes through the equilibrium") {
  ModelParams params;
  params.ladder = reference_ladder();
  params.gamma = Eigen::VectorXd(1);
  params.gamma << 0.3;
  Rng net_rng(3);
  InteractionNetwork g = simulate_network_er(60, 4.0, net_rng).row_normalized();
  Eigen::MatrixXd z = Eigen::MatrixXd::Ones(60, 1);

  Rng rng_a(21), rng_b(21);
  OutcomeDraw base = simulate_outcomes(params, g, z, rng_a);
  Eigen::VectorXd shift = Eigen::VectorXd::Constant(60, 1.5);
  OutcomeDraw shifted = simulate_outcomes(params, g, z, rng_b, shift);
  CHECK(shifted.beliefs.mean() > base.beliefs.mean());
  CHECK(shifted.y.cast<double>().mean() > base.y.cast<double>().mean());
}

TEST_CASE("dataset draw has consistent shapes and labels") {
  SimConfig cfg = small_config();
  SimulatedDataset data = simulate_dataset(cfg);
  CHECK(data.w.size() == cfg.n);
  CHECK(data.g.is_row_stochastic());
  CHECK(data.x.rows() == cfg.n);
  CHECK(data.x.cols() == 3);
  CHECK(data.z.cols() == 5);  // intercept, x1, x2, g:x1, g:x2
  REQUIRE(data.x_labels.size() == 3);
  CHECK(data.x_labels[0] == "const");
  CHECK(data.x_labels[1] == "x1");
  CHECK(data.x_labels[2] == "x2");
  REQUIRE(data.z_labels.size() == 5);
  CHECK(data.z_labels[3] == "g:x1");
  CHECK(data.z_labels[4] == "g:x2");
  CHECK(data.y.size() == cfg.n);
  CHECK(data.y.minCoeff() >= 0);
  CHECK(data.beliefs.size() == cfg.n);
  CHECK(data.mu.size() == 0);
  CHECK(data.eq.converged);

  // Contextual columns really are neighbor averages of x.
  Eigen::MatrixXd gx = data.g.multiply(Eigen::MatrixXd(data.x.rightCols(2)));
  CHECK((data.z.rightCols(2) - gx).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK((data.z.leftCols(3) - data.x).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("dataset replications are independent but reproducible") {
  SimConfig cfg = small_config();
  SimulatedDataset rep0 = simulate_dataset(cfg, 0);
  SimulatedDataset rep0b = simulate_dataset(cfg, 0);
  SimulatedDataset rep1 = simulate_dataset(cfg, 1);
  CHECK(rep0.y == rep0b.y);
  CHECK((rep0.x - rep0b.x).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(rep0.y != rep1.y);
}

TEST_CASE("dyadic mode exposes degree effects and can load them on shocks") {
  SimConfig cfg = small_config();
  cfg.network_mode = "dyadic";
  cfg.dyadic.intercept = -2.0;
  cfg.dyadic.homophily = 0.5;
  cfg.dyadic.sigma_mu = 0.8;
  SimulatedDataset plain = simulate_dataset(cfg);
  REQUIRE(plain.mu.size() == cfg.n);

  cfg.shock_load_mu = 2.0;
  SimulatedDataset loaded = simulate_dataset(cfg);
  // Same seed, same network draw; the loaded run shifts utilities by mu.
  CHECK((plain.mu - loaded.mu).lpNorm<Eigen::Infinity>() == 0.0);
  double cov = 0.0;
  const double mu_mean = loaded.mu.mean();
  const double y_mean = loaded.y.cast<double>().mean();
  for (int i = 0; i < cfg.n; ++i) {
    cov += (loaded.mu[i] - mu_mean) * (loaded.y[i] - y_mean);
  }
  cov /= cfg.n;
  double cov_plain = 0.0;
  const double mu_mean_p = plain.mu.mean();
  const double y_mean_p = plain.y.cast<double>().mean();
  for (int i = 0; i < cfg.n; ++i) {
    cov_plain += (plain.mu[i] - mu_mean_p) * (plain.y[i] - y_mean_p);
  }
  cov_plain /= cfg.n;
  CHECK(cov > cov_plain);
}

TEST_CASE("config validation catches shape mistakes") {
  SimConfig cfg = small_config();
  cfg.gamma = Eigen::VectorXd::Ones(2);  // needs 5 columns
  CHECK_THROWS_AS(simulate_dataset(cfg), ValidationError);

  cfg = small_config();
  cfg.network_mode = "ring";
  CHECK_THROWS_AS(simulate_dataset(cfg), ValidationError);

  cfg = small_config();
  cfg.shock_load_mu = 1.0;  // er mode has no mu
  CHECK_THROWS_AS(simulate_dataset(cfg), ValidationError);

  cfg = small_config();
  cfg.covariates[1].kind = "poisson";
  CHECK_THROWS_AS(simulate_dataset(cfg), ValidationError);

  cfg = small_config();
  cfg.n = 0;
  CHECK_THROWS_AS(simulate_dataset(cfg), ValidationError);
}
