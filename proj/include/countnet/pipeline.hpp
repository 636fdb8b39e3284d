#ifndef COUNTNET_PIPELINE_HPP
#define COUNTNET_PIPELINE_HPP

// End-to-end run driver: publication records in, estimation tables out. One
// JSON config describes the data files, the analysis periods and the
// estimation knobs; every period is processed independently so a failure in
// one leaves the others standing. Outputs carry no timestamps, so a rerun
// with the same inputs reproduces every file byte for byte.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "countnet/estimate.hpp"
#include "countnet/formation.hpp"
#include "countnet/netbuild.hpp"
#include "countnet/simulate.hpp"

namespace countnet {

struct PeriodConfig {
  std::string name;                // directory-safe label
  Period outcomes;                 // counting window for the outcome
  std::optional<Period> network;   // co-authorship window, defaults to outcomes
};

struct CovidConfig {
  bool enabled = false;
  double threshold = 0.5;          // topic probability cutoff
  std::optional<Period> window;    // defaults to each period's network window
};

struct RunConfig {
  std::string scholars_path;
  std::string publications_path;
  std::string output_dir = "out";
  std::vector<PeriodConfig> periods;
  int min_joint_papers = 2;
  int lookback_years = 3;
  bool formation = true;           // dyadic logit + sieve controls
  int sieve_degree = 2;
  int r_bar = 0;                   // 0 selects automatically
  double tol = 1e-4;
  int bootstrap_reps = 0;          // 0 uses the sandwich covariance
  std::uint64_t seed = 12345;      // bootstrap resampling seed
  BucketConfig buckets;
  CovidConfig covid;
};

RunConfig parse_run_config(const std::string& json_text,
                           const std::string& base_dir);
RunConfig load_run_config(const std::string& path);

// Simulation configs share the same JSON idiom; ladder increments are given
// on the natural scale ("delta": actual increments for r = 2.., each above
// lambda).
SimConfig parse_sim_config(const std::string& json_text);
SimConfig load_sim_config(const std::string& path);

struct ParameterRow {
  std::string name;
  double estimate = 0.0;
  double se = 0.0;
  double pvalue = 1.0;
  std::string stars;
};

// Inputs the period's fit actually consumed, kept so the output writer can
// materialize them next to the results.
struct PeriodData {
  std::vector<std::string> roster;
  InteractionNetwork w;                // raw co-authorship links
  Eigen::MatrixXd design;              // intercept, own, sieve, neighbor block
  std::vector<std::string> design_labels;
  Eigen::VectorXi y;
  std::vector<ScholarFeatures> features;
};

struct PeriodResult {
  std::string name;
  Period outcomes;
  Period network_window;
  bool ok = false;
  std::string error;                 // set when ok is false

  int n = 0;
  int n_edges = 0;
  int n_isolated = 0;
  int max_outcome = 0;
  int r_bar = 1;
  bool r_bar_selected = false;       // true when chosen by the stability scan
  double lambda_bound = 0.0;         // uniqueness threshold at the estimate

  PeriodData data;
  FitResult fit;
  CovarianceResult cov;
  std::vector<ParameterRow> table;   // natural scale, one row per parameter

  bool formation_used = false;
  FormationFit formation;
  std::vector<std::string> formation_labels;
  std::vector<std::string> sieve_labels;   // columns kept in the design
  std::vector<std::string> sieve_dropped;  // zero or linearly dependent columns
};

struct RunResult {
  RunConfig config;
  std::vector<PeriodResult> periods;
};

// Estimates every period; never throws for per-period data or numerical
// problems (those land in PeriodResult::error).
RunResult run_pipeline(const RunConfig& cfg);

// Writes results.json, table.txt, manifest.json and the per-period data
// files under cfg.output_dir. Returns the paths written.
std::vector<std::string> write_run_outputs(const RunResult& result);

std::string render_table(const RunResult& result);
std::string results_json(const RunResult& result);

}  // namespace countnet

#endif
