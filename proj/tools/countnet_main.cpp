// Command line front end. Subcommands:
//   build      co-authorship network and covariates from publication records
//   simulate   synthetic datasets from the exact data generating process
//   formation  dyadic link regression and the sieve control columns
//   fit        nested pseudo-likelihood estimation on prepared files
//   run        the full pipeline driven by one JSON config
// Input problems exit with 1, numerical failures with 2.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "countnet/estimate.hpp"
#include "countnet/formation.hpp"
#include "countnet/io.hpp"
#include "countnet/math.hpp"
#include "countnet/netbuild.hpp"
#include "countnet/pipeline.hpp"
#include "countnet/simulate.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using njson = nlohmann::ordered_json;
using namespace countnet;

namespace {

Period parse_period_arg(const std::string& text, const std::string& what) {
  std::size_t sep = text.find(':');
  if (sep == std::string::npos || sep == 0 || sep + 1 >= text.size()) {
    throw ValidationError(what + " must look like start:end, got '" + text + "'");
  }
  Period p;
  try {
    p.start = std::stoi(text.substr(0, sep));
    p.end = std::stoi(text.substr(sep + 1));
  } catch (const std::exception&) {
    throw ValidationError(what + " must hold two years, got '" + text + "'");
  }
  if (p.end < p.start) {
    throw ValidationError(what + ": end year precedes start year");
  }
  return p;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw ValidationError("cannot create output directory: " + dir);
  }
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void write_roster_csv(const std::string& path, const std::vector<std::string>& ids) {
  std::string text = "id\n";
  for (const std::string& id : ids) {
    text += io::csv_escape(id) + "\n";
  }
  io::write_text(path, text);
}

njson parameter_table_json(const FitResult& fit, const CovarianceResult& cov,
                           const std::vector<std::string>& design_labels) {
  const Eigen::VectorXd natural = fit.theta.natural();
  const std::vector<std::string> names =
      parameter_labels(design_labels, fit.r_bar);
  njson rows = njson::array();
  for (Eigen::Index i = 0; i < natural.size(); ++i) {
    double se = cov.se_natural[i];
    double p = wald_pvalue(natural[i], se);
    rows.push_back({{"name", names[static_cast<std::size_t>(i)]},
                    {"estimate", natural[i]},
                    {"se", se},
                    {"p", p},
                    {"stars", significance_stars(p)}});
  }
  return rows;
}

njson fit_json(const FitResult& fit, const CovarianceResult& cov,
               const std::vector<std::string>& design_labels, int n,
               double lambda_bound, bool r_bar_selected) {
  njson j;
  j["n"] = n;
  j["r_bar"] = fit.r_bar;
  j["r_bar_selected"] = r_bar_selected;
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["loglik"] = fit.loglik;
  j["lambda_bound"] = lambda_bound;
  if (!fit.message.empty()) j["message"] = fit.message;
  njson cj;
  cj["method"] = cov.method;
  if (cov.method == "bootstrap") {
    cj["n_used"] = cov.n_used;
    cj["n_dropped"] = cov.n_dropped;
    cj["drop_warning"] = cov.drop_warning;
  }
  if (!cov.message.empty()) cj["message"] = cov.message;
  j["covariance"] = cj;
  j["parameters"] = parameter_table_json(fit, cov, design_labels);
  njson trace = njson::array();
  for (const NplTraceRow& row : fit.trace) {
    trace.push_back({{"iteration", row.iteration},
                     {"loglik", row.loglik},
                     {"dtheta", row.dtheta},
                     {"dbeliefs", row.dbeliefs}});
  }
  j["trace"] = trace;
  return j;
}

// -- build -------------------------------------------------------------------

struct BuildArgs {
  std::string scholars;
  std::string publications;
  std::string period;
  std::string network_period;
  int min_joint_papers = 2;
  int lookback = 3;
  std::string out;
};

int cmd_build(const BuildArgs& a) {
  Period period = parse_period_arg(a.period, "--period");
  Period window = a.network_period.empty()
                      ? period
                      : parse_period_arg(a.network_period, "--network-period");

  std::vector<ScholarProfile> profiles = io::read_scholars(a.scholars);
  std::vector<std::string> roster = roster_ids(profiles);
  std::vector<PublicationRecord> records =
      filter_to_roster(io::read_publications(a.publications), roster);

  InteractionNetwork w = build_adjacency(records, roster, window,
                                         a.min_joint_papers);
  InteractionNetwork g = w.row_normalized();
  std::vector<ScholarFeatures> features =
      derive_features(profiles, records, period, a.lookback);
  CovariateBuild cb = build_covariates(features, BucketConfig(), g);
  Eigen::VectorXi y = outcome_counts(records, roster, period);

  ensure_dir(a.out);
  io::write_edge_list(join_path(a.out, "network.txt"), w);
  io::write_matrix_csv(join_path(a.out, "X.csv"), cb.x, cb.labels);
  io::write_matrix_csv(join_path(a.out, "Z.csv"), cb.z, cb.z_labels);
  write_roster_csv(join_path(a.out, "roster.csv"), roster);
  io::write_outcomes_csv(join_path(a.out, "outcomes.csv"), roster, y);
  io::write_features_csv(join_path(a.out, "features.csv"), features);

  std::cout << "n = " << w.size() << ", edges = " << w.n_edges()
            << ", covariates = " << cb.x.cols() << ", outputs in " << a.out
            << "\n";
  return 0;
}

// -- simulate ----------------------------------------------------------------

struct SimulateArgs {
  std::string config;
  int reps = 1;
  std::string out;
};

int cmd_simulate(const SimulateArgs& a) {
  if (a.reps < 1) {
    throw ValidationError("--reps must be positive");
  }
  SimConfig cfg = load_sim_config(a.config);
  ensure_dir(a.out);

  njson reps = njson::array();
  for (int rep = 0; rep < a.reps; ++rep) {
    SimulatedDataset ds = simulate_dataset(cfg, static_cast<std::uint64_t>(rep));
    std::string dir = join_path(a.out, "rep" + std::to_string(rep));
    ensure_dir(dir);

    std::vector<std::string> ids;
    ids.reserve(static_cast<std::size_t>(cfg.n));
    for (int i = 0; i < cfg.n; ++i) ids.push_back("a" + std::to_string(i));

    io::write_edge_list(join_path(dir, "network.txt"), ds.w);
    io::write_matrix_csv(join_path(dir, "X.csv"), ds.x, ds.x_labels);
    io::write_matrix_csv(join_path(dir, "Z.csv"), ds.z, ds.z_labels);
    io::write_outcomes_csv(join_path(dir, "outcomes.csv"), ids, ds.y);
    io::write_matrix_csv(join_path(dir, "beliefs.csv"), ds.beliefs, {"belief"});
    if (ds.mu.size() > 0) {
      io::write_matrix_csv(join_path(dir, "mu.csv"), ds.mu, {"mu"});
    }

    double mean_y =
        ds.y.size() > 0 ? ds.y.cast<double>().mean() : 0.0;
    reps.push_back({{"rep", rep},
                    {"edges", ds.w.n_edges()},
                    {"mean_outcome", mean_y},
                    {"max_outcome", ds.y.size() > 0 ? ds.y.maxCoeff() : 0},
                    {"eq_iterations", ds.eq.iterations},
                    {"eq_residual", ds.eq.residual}});
  }

  njson manifest;
  manifest["n"] = cfg.n;
  manifest["seed"] = cfg.seed;
  manifest["network_mode"] = cfg.network_mode;
  manifest["reps"] = reps;
  io::write_text(join_path(a.out, "manifest.json"), manifest.dump(2) + "\n");

  std::cout << a.reps << " replication(s) written to " << a.out << "\n";
  return 0;
}

// -- formation ---------------------------------------------------------------

struct FormationArgs {
  std::string scholars;
  std::string publications;
  std::string period;
  std::string network;
  int min_joint_papers = 2;
  int lookback = 3;
  int sieve_degree = 2;
  std::string out;
};

int cmd_formation(const FormationArgs& a) {
  Period window = parse_period_arg(a.period, "--period");
  std::vector<ScholarProfile> profiles = io::read_scholars(a.scholars);
  std::vector<std::string> roster = roster_ids(profiles);
  std::vector<PublicationRecord> records =
      filter_to_roster(io::read_publications(a.publications), roster);

  InteractionNetwork w;
  if (a.network.empty()) {
    w = build_adjacency(records, roster, window, a.min_joint_papers);
  } else {
    w = io::read_edge_list(a.network);
    if (w.size() != static_cast<int>(roster.size())) {
      throw ValidationError("--network has " + std::to_string(w.size()) +
                            " nodes but the roster has " +
                            std::to_string(roster.size()));
    }
  }

  std::vector<ScholarFeatures> features =
      derive_features(profiles, records, window, a.lookback);
  DyadFrame frame(features);
  FormationFit fit = fit_dyadic_logit(frame, w);

  InteractionNetwork g = w.row_normalized();
  SieveBasis sieve = sieve_terms(fit.mu, fit.nu, g, a.sieve_degree);

  ensure_dir(a.out);

  njson j;
  j["n"] = w.size();
  j["edges"] = w.n_edges();
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["loglik"] = fit.loglik;
  j["max_grad"] = fit.max_grad;
  njson beta = njson::array();
  for (Eigen::Index i = 0; i < fit.beta.size(); ++i) {
    beta.push_back({{"name", frame.labels()[static_cast<std::size_t>(i)]},
                    {"estimate", fit.beta[i]},
                    {"se", fit.se_beta[i]}});
  }
  j["beta"] = beta;
  njson capped_mu = njson::array();
  for (int i : fit.capped_mu) capped_mu.push_back(roster[static_cast<std::size_t>(i)]);
  njson capped_nu = njson::array();
  for (int i : fit.capped_nu) capped_nu.push_back(roster[static_cast<std::size_t>(i)]);
  j["capped_mu"] = capped_mu;
  j["capped_nu"] = capped_nu;
  j["sieve_degree"] = a.sieve_degree;
  j["sieve_terms"] = sieve.labels;
  io::write_text(join_path(a.out, "formation.json"), j.dump(2) + "\n");

  Eigen::MatrixXd effects(w.size(), 2);
  effects.col(0) = fit.mu;
  effects.col(1) = fit.nu;
  io::write_matrix_csv(join_path(a.out, "effects.csv"), effects, {"mu", "nu"});
  io::write_matrix_csv(join_path(a.out, "sieve.csv"), sieve.h, sieve.labels);

  std::cout << "formation " << (fit.converged ? "converged" : "DID NOT converge")
            << ", loglik = " << fit.loglik << ", outputs in " << a.out << "\n";
  return 0;
}

// -- fit ---------------------------------------------------------------------

struct FitArgs {
  std::string network;
  std::string covariates;
  std::string outcomes;
  std::string controls;
  std::string r_bar = "auto";
  double tol = 1e-4;
  int bootstrap = 0;
  std::uint64_t seed = 12345;
  bool no_intercept = false;
  std::string out;
};

int cmd_fit(const FitArgs& a) {
  InteractionNetwork w = io::read_edge_list(a.network);
  InteractionNetwork g = w.row_normalized();
  auto [x, x_labels] = io::read_matrix_csv(a.covariates);
  Eigen::VectorXi y = io::read_outcomes_csv(a.outcomes);

  if (x.rows() != w.size() || y.size() != w.size()) {
    throw ValidationError("network, covariates and outcomes disagree on n");
  }

  Eigen::MatrixXd controls(w.size(), 0);
  std::vector<std::string> control_labels;
  if (!a.controls.empty()) {
    auto [h, h_labels] = io::read_matrix_csv(a.controls);
    if (h.rows() != w.size()) {
      throw ValidationError("--controls disagrees with the network on n");
    }
    controls = std::move(h);
    control_labels = std::move(h_labels);
  }

  const Eigen::Index k = x.cols();
  const Eigen::Index ic = a.no_intercept ? 0 : 1;
  Eigen::MatrixXd design(w.size(), ic + k + controls.cols() + k);
  std::vector<std::string> labels;
  if (ic == 1) {
    design.col(0).setOnes();
    labels.push_back("const");
  }
  design.middleCols(ic, k) = x;
  labels.insert(labels.end(), x_labels.begin(), x_labels.end());
  design.middleCols(ic + k, controls.cols()) = controls;
  labels.insert(labels.end(), control_labels.begin(), control_labels.end());
  design.rightCols(k) = g.multiply(x);
  for (const std::string& l : x_labels) labels.push_back("g:" + l);

  NplOptions opts;
  opts.tol = a.tol;

  int r_bar = 0;
  bool selected = false;
  if (a.r_bar == "auto") {
    r_bar = select_r_bar(y, g, design, opts);
    selected = true;
  } else {
    try {
      r_bar = std::stoi(a.r_bar);
    } catch (const std::exception&) {
      throw ValidationError("--r-bar must be a positive integer or 'auto'");
    }
    if (r_bar < 1) {
      throw ValidationError("--r-bar must be a positive integer or 'auto'");
    }
  }

  FitResult fit = npl_fit(y, g, design, r_bar, opts);
  double bound = peer_effect_bound(fit.theta.to_model().ladder, g);

  CovarianceResult cov;
  if (a.bootstrap > 0) {
    cov = bootstrap_covariance(fit, g, design, a.bootstrap, a.seed, opts);
  } else {
    cov = sandwich_covariance(fit, y, g, design, opts);
  }

  ensure_dir(a.out);
  njson j = fit_json(fit, cov, labels, w.size(), bound, selected);
  io::write_text(join_path(a.out, "fit.json"), j.dump(2) + "\n");
  io::write_matrix_csv(join_path(a.out, "beliefs.csv"), fit.beliefs, {"belief"});

  std::cout << "fit " << (fit.converged ? "converged" : "DID NOT converge")
            << " after " << fit.iterations << " outer iteration(s), loglik = "
            << fit.loglik << ", outputs in " << a.out << "\n";
  return 0;
}

// -- run ---------------------------------------------------------------------

int cmd_run(const std::string& config_path) {
  RunConfig cfg = load_run_config(config_path);
  RunResult result = run_pipeline(cfg);
  write_run_outputs(result);
  std::cout << render_table(result);

  int failed = 0;
  for (const PeriodResult& p : result.periods) {
    if (!p.ok) ++failed;
  }
  if (failed == static_cast<int>(result.periods.size())) {
    std::cerr << "error: every period failed\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"count outcomes on interaction networks"};
  app.require_subcommand(1);

  BuildArgs build_args;
  CLI::App* build = app.add_subcommand(
      "build", "derive the network, covariates and outcomes from records");
  build->add_option("--scholars", build_args.scholars, "scholar roster CSV")
      ->required()
      ->check(CLI::ExistingFile);
  build->add_option("--publications", build_args.publications,
                    "publication records CSV")
      ->required()
      ->check(CLI::ExistingFile);
  build->add_option("--period", build_args.period, "outcome window start:end")
      ->required();
  build->add_option("--network-period", build_args.network_period,
                    "co-authorship window start:end (default: the period)");
  build->add_option("--min-joint-papers", build_args.min_joint_papers,
                    "joint papers needed for a link")
      ->capture_default_str();
  build->add_option("--lookback", build_args.lookback,
                    "productivity lookback years")
      ->capture_default_str();
  build->add_option("--out", build_args.out, "output directory")->required();

  SimulateArgs sim_args;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "draw synthetic datasets from the model");
  simulate->add_option("--config", sim_args.config, "simulation config JSON")
      ->required()
      ->check(CLI::ExistingFile);
  simulate->add_option("--reps", sim_args.reps, "number of replications")
      ->capture_default_str();
  simulate->add_option("--out", sim_args.out, "output directory")->required();

  FormationArgs formation_args;
  CLI::App* formation = app.add_subcommand(
      "formation", "dyadic link regression and sieve controls");
  formation->add_option("--scholars", formation_args.scholars, "scholar roster CSV")
      ->required()
      ->check(CLI::ExistingFile);
  formation->add_option("--publications", formation_args.publications,
                        "publication records CSV")
      ->required()
      ->check(CLI::ExistingFile);
  formation->add_option("--period", formation_args.period,
                        "co-authorship window start:end")
      ->required();
  formation->add_option("--network", formation_args.network,
                        "edge list overriding the built network")
      ->check(CLI::ExistingFile);
  formation->add_option("--min-joint-papers", formation_args.min_joint_papers,
                        "joint papers needed for a link")
      ->capture_default_str();
  formation->add_option("--lookback", formation_args.lookback,
                        "productivity lookback years")
      ->capture_default_str();
  formation->add_option("--sieve-degree", formation_args.sieve_degree,
                        "polynomial degree of the sieve basis")
      ->capture_default_str();
  formation->add_option("--out", formation_args.out, "output directory")
      ->required();

  FitArgs fit_args;
  CLI::App* fit = app.add_subcommand(
      "fit", "nested pseudo-likelihood estimation from prepared files");
  fit->add_option("--network", fit_args.network, "edge list file")
      ->required()
      ->check(CLI::ExistingFile);
  fit->add_option("--covariates", fit_args.covariates, "own covariates CSV")
      ->required()
      ->check(CLI::ExistingFile);
  fit->add_option("--outcomes", fit_args.outcomes, "outcome counts CSV")
      ->required()
      ->check(CLI::ExistingFile);
  fit->add_option("--controls", fit_args.controls,
                  "extra own-effect columns CSV (no neighbor averages)")
      ->check(CLI::ExistingFile);
  fit->add_option("--r-bar", fit_args.r_bar,
                  "free cut increments: positive integer or 'auto'")
      ->capture_default_str();
  fit->add_option("--tol", fit_args.tol, "outer loop L1 tolerance")
      ->capture_default_str();
  fit->add_option("--bootstrap", fit_args.bootstrap,
                  "bootstrap replications (0 uses the sandwich)")
      ->capture_default_str();
  fit->add_option("--seed", fit_args.seed, "bootstrap seed")
      ->capture_default_str();
  fit->add_flag("--no-intercept", fit_args.no_intercept,
                "do not prepend a constant column");
  fit->add_option("--out", fit_args.out, "output directory")->required();

  std::string run_config;
  CLI::App* run = app.add_subcommand("run", "full pipeline from a JSON config");
  run->add_option("--config", run_config, "run config JSON")
      ->required()
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (build->parsed()) return cmd_build(build_args);
    if (simulate->parsed()) return cmd_simulate(sim_args);
    if (formation->parsed()) return cmd_formation(formation_args);
    if (fit->parsed()) return cmd_fit(fit_args);
    if (run->parsed()) return cmd_run(run_config);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
