#include "countnet/simulate.hpp"

#include <cmath>
#include <string>

#include "countnet/math.hpp"

namespace countnet {

InteractionNetwork simulate_network_er(int n, double mean_degree, Rng& rng) {
  if (n < 1) throw ValidationError("simulate_network_er: n must be >= 1");
  if (!(mean_degree >= 0.0) || (n > 1 && mean_degree > static_cast<double>(n - 1))) {
    throw ValidationError("simulate_network_er: mean degree must lie in [0, n-1]");
  }
  InteractionNetwork w(n);
  if (n == 1 || mean_degree == 0.0) return w;
  const double p = mean_degree / static_cast<double>(n - 1);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (rng.bernoulli(p)) {
        w.push_entry(i, j, 1.0);
        w.push_entry(j, i, 1.0);
      }
    }
  }
  w.sort_rows();
  return w;
}

DyadicNetworkDraw simulate_network_dyadic(int n, const DyadicNetConfig& cfg,
                                          Rng& rng) {
  if (n < 1) throw ValidationError("simulate_network_dyadic: n must be >= 1");
  if (cfg.sigma_mu < 0.0) {
    throw ValidationError("simulate_network_dyadic: sigma_mu must be >= 0");
  }
  DyadicNetworkDraw draw;
  draw.w = InteractionNetwork(n);
  draw.mu.resize(n);
  draw.trait.resize(n);
  for (int i = 0; i < n; ++i) draw.mu[i] = cfg.sigma_mu * rng.normal();
  for (int i = 0; i < n; ++i) draw.trait[i] = rng.normal();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double index = cfg.intercept -
                           cfg.homophily * std::fabs(draw.trait[i] - draw.trait[j]) +
                           draw.mu[i] + draw.mu[j];
      if (rng.bernoulli(math::logistic(index))) {
        draw.w.push_entry(i, j, 1.0);
        draw.w.push_entry(j, i, 1.0);
      }
    }
  }
  draw.w.sort_rows();
  return draw;
}

OutcomeDraw simulate_outcomes(const ModelParams& params,
                              const InteractionNetwork& g,
                              const Eigen::MatrixXd& z, Rng& rng,
                              const std::optional<Eigen::VectorXd>& shock_shift,
                              double eq_tol, int eq_max_iter) {
  params.ladder.validate();
  if (z.rows() != g.size()) throw ValidationError("simulate_outcomes: design/network size mismatch");
  if (z.cols() != params.gamma.size()) {
    throw ValidationError("simulate_outcomes: gamma/design column mismatch");
  }
  Eigen::VectorXd psi = z * params.gamma;
  if (shock_shift) {
    if (shock_shift->size() != psi.size()) {
      throw ValidationError("simulate_outcomes: shock shift has the wrong length");
    }
    psi += *shock_shift;
  }

  // Equilibrium under the full deterministic utility (agents observe the
  // shift), starting from zero beliefs.
  ModelParams shifted = params;
  OutcomeDraw out;
  {
    // Reuse the psi-level map through a one-column design.
    Eigen::MatrixXd psi_col = psi;
    shifted.gamma = Eigen::VectorXd::Ones(1);
    EquilibriumResult eq;
    Eigen::VectorXd y_e = Eigen::VectorXd::Zero(g.size());
    eq = solve_equilibrium(shifted, g, psi_col, y_e, eq_tol, eq_max_iter);
    out.eq = eq;
    out.beliefs = eq.beliefs;
  }

  const Eigen::VectorXd gy = g.multiply(out.beliefs);
  out.y.resize(g.size());
  const double lambda = params.ladder.lambda;
  for (int i = 0; i < g.size(); ++i) {
    const double u = lambda * gy[i] + psi[i] + rng.normal();
    // Count the cut points at or below u; a_1 = 0.
    int r = 0;
    double a = 0.0;
    while (u >= a) {
      ++r;
      if (r > 1000000) {
        throw NumericalError("simulate_outcomes: outcome exceeded 1000000");
      }
      a += params.ladder.increment(r + 1);
    }
    out.y[i] = r;
  }
  return out;
}

SimulatedDataset simulate_dataset(const SimConfig& cfg, std::uint64_t rep) {
  if (cfg.n < 2) throw ValidationError("simulate_dataset: n must be >= 2");
  if (cfg.covariates.empty()) {
    throw ValidationError("simulate_dataset: at least one covariate is required");
  }
  cfg.ladder.validate();

  Rng rng(cfg.seed, rep);
  SimulatedDataset out;

  if (cfg.network_mode == "er") {
    out.w = simulate_network_er(cfg.n, cfg.mean_degree, rng);
  } else if (cfg.network_mode == "dyadic") {
    DyadicNetworkDraw draw = simulate_network_dyadic(cfg.n, cfg.dyadic, rng);
    out.w = std::move(draw.w);
    out.mu = std::move(draw.mu);
  } else {
    throw ValidationError("simulate_dataset: unknown network mode '" +
                          cfg.network_mode + "' (expected er or dyadic)");
  }
  out.g = out.w.row_normalized();

  const int k = static_cast<int>(cfg.covariates.size());
  out.x.resize(cfg.n, k);
  int n_intercept = 0;
  for (int c = 0; c < k; ++c) {
    const CovariateSpec& spec = cfg.covariates[static_cast<std::size_t>(c)];
    if (spec.kind == "intercept") {
      ++n_intercept;
      out.x.col(c).setOnes();
      out.x_labels.push_back("const");
    } else if (spec.kind == "normal") {
      if (!(spec.sd >= 0.0)) throw ValidationError("simulate_dataset: sd must be >= 0");
      for (int i = 0; i < cfg.n; ++i) out.x(i, c) = spec.mean + spec.sd * rng.normal();
      out.x_labels.push_back("x" + std::to_string(c));
    } else if (spec.kind == "bernoulli") {
      if (!(spec.p >= 0.0 && spec.p <= 1.0)) {
        throw ValidationError("simulate_dataset: bernoulli p must lie in [0, 1]");
      }
      for (int i = 0; i < cfg.n; ++i) out.x(i, c) = rng.bernoulli(spec.p) ? 1.0 : 0.0;
      out.x_labels.push_back("x" + std::to_string(c));
    } else {
      throw ValidationError("simulate_dataset: unknown covariate kind '" + spec.kind + "'");
    }
  }
  if (n_intercept > 1) {
    throw ValidationError("simulate_dataset: more than one intercept column");
  }

  // Design: all columns, then neighbor averages of the non-constant ones.
  // The constant gets no contextual twin; G * 1 = 1 on every non-isolated
  // row, which would duplicate the intercept.
  std::vector<int> ctx_cols;
  for (int c = 0; c < k; ++c) {
    if (cfg.covariates[static_cast<std::size_t>(c)].kind != "intercept") {
      ctx_cols.push_back(c);
    }
  }
  const int kz = cfg.contextual ? k + static_cast<int>(ctx_cols.size()) : k;
  out.z.resize(cfg.n, kz);
  out.z.leftCols(k) = out.x;
  out.z_labels = out.x_labels;
  if (cfg.contextual) {
    Eigen::MatrixXd own(cfg.n, static_cast<int>(ctx_cols.size()));
    for (std::size_t c = 0; c < ctx_cols.size(); ++c) {
      own.col(static_cast<int>(c)) = out.x.col(ctx_cols[c]);
    }
    out.z.rightCols(static_cast<int>(ctx_cols.size())) = out.g.multiply(own);
    for (int c : ctx_cols) {
      out.z_labels.push_back("g:" + out.x_labels[static_cast<std::size_t>(c)]);
    }
  }

  if (cfg.gamma.size() != out.z.cols()) {
    throw ValidationError("simulate_dataset: gamma has " +
                          std::to_string(cfg.gamma.size()) + " entries, design has " +
                          std::to_string(out.z.cols()) + " columns");
  }

  std::optional<Eigen::VectorXd> shift;
  if (cfg.shock_load_mu != 0.0) {
    if (out.mu.size() != cfg.n) {
      throw ValidationError("simulate_dataset: shock_load_mu needs the dyadic network mode");
    }
    shift = (cfg.shock_load_mu * out.mu).eval();
  }

  ModelParams params{cfg.ladder, cfg.gamma};
  OutcomeDraw draw = simulate_outcomes(params, out.g, out.z, rng, shift,
                                       cfg.eq_tol, cfg.eq_max_iter);
  out.y = std::move(draw.y);
  out.beliefs = std::move(draw.beliefs);
  out.eq = draw.eq;
  return out;
}

}  // namespace countnet
