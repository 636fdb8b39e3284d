#include "countnet/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <initializer_list>
#include <string>

#include "countnet/io.hpp"
#include "countnet/math.hpp"
#include "json.hpp"

namespace countnet {

namespace {

namespace fs = std::filesystem;
using njson = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// config parsing

[[noreturn]] void config_error(const std::string& msg) {
  throw ValidationError("config: " + msg);
}

void check_keys(const njson& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* k : allowed) {
      if (item.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) {
      config_error("unknown key '" + item.key() + "' in " + where);
    }
  }
}

const njson* find_key(const njson& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &it.value();
}

double require_number(const njson& obj, const char* key, const std::string& where) {
  const njson* v = find_key(obj, key);
  if (v == nullptr || !v->is_number()) {
    config_error(where + ": '" + key + "' must be a number");
  }
  return v->get<double>();
}

double number_or(const njson& obj, const char* key, double dflt,
                 const std::string& where) {
  const njson* v = find_key(obj, key);
  if (v == nullptr) return dflt;
  if (!v->is_number()) config_error(where + ": '" + key + "' must be a number");
  return v->get<double>();
}

int require_int(const njson& obj, const char* key, const std::string& where) {
  const njson* v = find_key(obj, key);
  if (v == nullptr || !v->is_number_integer()) {
    config_error(where + ": '" + key + "' must be an integer");
  }
  return v->get<int>();
}

int int_or(const njson& obj, const char* key, int dflt, const std::string& where) {
  const njson* v = find_key(obj, key);
  if (v == nullptr) return dflt;
  if (!v->is_number_integer()) {
    config_error(where + ": '" + key + "' must be an integer");
  }
  return v->get<int>();
}

bool bool_or(const njson& obj, const char* key, bool dflt, const std::string& where) {
  const njson* v = find_key(obj, key);
  if (v == nullptr) return dflt;
  if (!v->is_boolean()) config_error(where + ": '" + key + "' must be a boolean");
  return v->get<bool>();
}

std::string require_string(const njson& obj, const char* key,
                           const std::string& where) {
  const njson* v = find_key(obj, key);
  if (v == nullptr || !v->is_string()) {
    config_error(where + ": '" + key + "' must be a string");
  }
  return v->get<std::string>();
}

std::vector<double> require_number_array(const njson& v, const std::string& where) {
  if (!v.is_array() || v.empty()) {
    config_error(where + " must be a non-empty array of numbers");
  }
  std::vector<double> out;
  out.reserve(v.size());
  for (const njson& e : v) {
    if (!e.is_number()) config_error(where + " must hold numbers only");
    out.push_back(e.get<double>());
  }
  return out;
}

njson parse_json_text(const std::string& text) {
  njson j = njson::parse(text, nullptr, false);
  if (j.is_discarded()) {
    config_error("not valid JSON");
  }
  return j;
}

std::string resolve_path(const std::string& p, const std::string& base_dir) {
  if (p.empty() || base_dir.empty() || fs::path(p).is_absolute()) {
    return p;
  }
  return (fs::path(base_dir) / p).string();
}

std::string default_period_name(const Period& p) {
  return std::to_string(p.start) + "_" + std::to_string(p.end);
}

void validate_period_name(const std::string& name) {
  if (name.empty()) config_error("period names must be non-empty");
  for (char c : name) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
              (c >= '0' && c <= '9') || c == '_' || c == '-';
    if (!ok) {
      config_error("period name '" + name +
                   "' may only use letters, digits, '_' and '-'");
    }
  }
}

Period parse_period_bounds(const njson& obj, const char* start_key,
                           const char* end_key, const std::string& where) {
  Period p;
  p.start = require_int(obj, start_key, where);
  p.end = require_int(obj, end_key, where);
  if (p.end < p.start) {
    config_error(where + ": end year precedes start year");
  }
  return p;
}

BucketSpec parse_bucket_spec(const njson& v, const std::string& where) {
  BucketSpec spec;
  spec.cuts = require_number_array(v, where);
  for (std::size_t k = 1; k < spec.cuts.size(); ++k) {
    if (spec.cuts[k] <= spec.cuts[k - 1]) {
      config_error(where + ": cuts must be strictly increasing");
    }
  }
  return spec;
}

// ---------------------------------------------------------------------------
// estimation helpers

// Keeps the sieve columns that still point somewhere new once the base
// design (and the sieve columns already kept) are projected out. Two passes
// of Gram-Schmidt keep the test stable for nearly dependent columns; the
// undirected case, where sender and receiver effects coincide, is the reason
// this exists.
std::vector<int> independent_sieve_columns(const Eigen::MatrixXd& base,
                                           const Eigen::MatrixXd& h) {
  std::vector<Eigen::VectorXd> basis;
  auto try_extend = [&](const Eigen::VectorXd& col) -> bool {
    double norm0 = col.norm();
    if (norm0 <= 1e-12) return false;
    Eigen::VectorXd v = col;
    for (int pass = 0; pass < 2; ++pass) {
      for (const Eigen::VectorXd& u : basis) {
        v -= u.dot(v) * u;
      }
    }
    double norm = v.norm();
    if (norm <= 1e-6 * norm0) return false;
    basis.push_back(v / norm);
    return true;
  };
  for (Eigen::Index c = 0; c < base.cols(); ++c) {
    try_extend(base.col(c));
  }
  std::vector<int> kept;
  for (Eigen::Index c = 0; c < h.cols(); ++c) {
    if (try_extend(h.col(c))) {
      kept.push_back(static_cast<int>(c));
    }
  }
  return kept;
}

void estimate_period(const RunConfig& cfg, const std::vector<ScholarProfile>& profiles,
                     const std::vector<PublicationRecord>& records,
                     const PeriodConfig& period, std::uint64_t boot_seed,
                     PeriodResult& out) {
  const std::vector<std::string> roster = roster_ids(profiles);
  const Period window = period.network.value_or(period.outcomes);
  out.network_window = window;

  InteractionNetwork w =
      build_adjacency(records, roster, window, cfg.min_joint_papers);
  InteractionNetwork g = w.row_normalized();
  Eigen::VectorXi y = outcome_counts(records, roster, period.outcomes);

  std::vector<ScholarFeatures> features =
      derive_features(profiles, records, period.outcomes, cfg.lookback_years);

  std::optional<Eigen::VectorXd> covid;
  if (cfg.covid.enabled) {
    Period cwin = cfg.covid.window.value_or(window);
    covid = covid_index(records, roster, cwin, cfg.covid.threshold);
  }
  CovariateBuild cb = build_covariates(features, cfg.buckets, g, covid);

  const int n = static_cast<int>(roster.size());
  const int k = static_cast<int>(cb.x.cols());

  // Base design: intercept, own covariates, neighbor averages. The intercept
  // gets no neighbor twin (row sums are one wherever a neighbor exists).
  Eigen::MatrixXd base(n, 1 + 2 * k);
  base.col(0).setOnes();
  base.middleCols(1, k) = cb.x;
  base.rightCols(k) = cb.z.rightCols(k);

  Eigen::MatrixXd h(n, 0);
  std::vector<std::string> h_labels;
  if (cfg.formation) {
    DyadFrame frame(features);
    out.formation = fit_dyadic_logit(frame, w);
    out.formation_used = true;
    out.formation_labels = frame.labels();

    SieveBasis sieve =
        sieve_terms(out.formation.mu, out.formation.nu, g, cfg.sieve_degree);
    std::vector<int> kept = independent_sieve_columns(base, sieve.h);
    h.resize(n, static_cast<Eigen::Index>(kept.size()));
    for (std::size_t c = 0; c < kept.size(); ++c) {
      h.col(static_cast<Eigen::Index>(c)) = sieve.h.col(kept[c]);
      h_labels.push_back(sieve.labels[static_cast<std::size_t>(kept[c])]);
    }
    std::vector<bool> is_kept(sieve.labels.size(), false);
    for (int c : kept) is_kept[static_cast<std::size_t>(c)] = true;
    for (std::size_t c = 0; c < sieve.labels.size(); ++c) {
      if (!is_kept[c]) out.sieve_dropped.push_back(sieve.labels[c]);
    }
  }
  out.sieve_labels = h_labels;

  Eigen::MatrixXd design(n, base.cols() + h.cols());
  design.leftCols(1 + k) = base.leftCols(1 + k);
  design.middleCols(1 + k, h.cols()) = h;
  design.rightCols(k) = base.rightCols(k);

  std::vector<std::string> labels;
  labels.push_back("const");
  labels.insert(labels.end(), cb.labels.begin(), cb.labels.end());
  labels.insert(labels.end(), h_labels.begin(), h_labels.end());
  for (const std::string& l : cb.labels) labels.push_back("g:" + l);

  out.data.roster = roster;
  out.data.w = w;
  out.data.design = design;
  out.data.design_labels = labels;
  out.data.y = y;
  out.data.features = features;
  out.n = n;
  out.n_edges = w.n_edges();
  out.n_isolated = static_cast<int>(w.isolated_rows().size());
  out.max_outcome = y.size() > 0 ? y.maxCoeff() : 0;

  NplOptions opts;
  opts.tol = cfg.tol;

  if (cfg.r_bar > 0) {
    out.r_bar = cfg.r_bar;
  } else {
    out.r_bar = select_r_bar(y, g, design, opts);
    out.r_bar_selected = true;
  }

  out.fit = npl_fit(y, g, design, out.r_bar, opts);
  out.lambda_bound = peer_effect_bound(out.fit.theta.to_model().ladder, g);

  if (cfg.bootstrap_reps > 0) {
    out.cov = bootstrap_covariance(out.fit, g, design, cfg.bootstrap_reps,
                                   boot_seed, opts);
  } else {
    out.cov = sandwich_covariance(out.fit, y, g, design, opts);
  }

  const Eigen::VectorXd natural = out.fit.theta.natural();
  const std::vector<std::string> names = parameter_labels(labels, out.r_bar);
  out.table.clear();
  for (Eigen::Index i = 0; i < natural.size(); ++i) {
    ParameterRow row;
    row.name = names[static_cast<std::size_t>(i)];
    row.estimate = natural[i];
    row.se = out.cov.se_natural[i];
    row.pvalue = wald_pvalue(row.estimate, row.se);
    row.stars = significance_stars(row.pvalue);
    out.table.push_back(std::move(row));
  }
  out.ok = true;
}

// ---------------------------------------------------------------------------
// output rendering

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return std::string(buf);
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

njson period_json(const PeriodResult& p) {
  njson j;
  j["name"] = p.name;
  j["ok"] = p.ok;
  j["outcomes"] = {{"start", p.outcomes.start}, {"end", p.outcomes.end}};
  j["network_window"] = {{"start", p.network_window.start},
                         {"end", p.network_window.end}};
  if (!p.ok) {
    j["error"] = p.error;
    return j;
  }
  j["n"] = p.n;
  j["edges"] = p.n_edges;
  j["isolated"] = p.n_isolated;
  j["max_outcome"] = p.max_outcome;
  j["r_bar"] = p.r_bar;
  j["r_bar_selected"] = p.r_bar_selected;
  j["converged"] = p.fit.converged;
  j["iterations"] = p.fit.iterations;
  j["loglik"] = p.fit.loglik;
  j["lambda_bound"] = p.lambda_bound;

  njson cov;
  cov["method"] = p.cov.method;
  if (p.cov.method == "bootstrap") {
    cov["n_used"] = p.cov.n_used;
    cov["n_dropped"] = p.cov.n_dropped;
    cov["drop_warning"] = p.cov.drop_warning;
  }
  if (!p.cov.message.empty()) cov["message"] = p.cov.message;
  j["covariance"] = cov;

  njson params = njson::array();
  for (const ParameterRow& row : p.table) {
    params.push_back({{"name", row.name},
                      {"estimate", row.estimate},
                      {"se", row.se},
                      {"p", row.pvalue},
                      {"stars", row.stars}});
  }
  j["parameters"] = params;

  if (p.formation_used) {
    njson f;
    f["converged"] = p.formation.converged;
    f["iterations"] = p.formation.iterations;
    f["loglik"] = p.formation.loglik;
    f["max_grad"] = p.formation.max_grad;
    f["capped_mu"] = static_cast<int>(p.formation.capped_mu.size());
    f["capped_nu"] = static_cast<int>(p.formation.capped_nu.size());
    njson beta = njson::array();
    for (Eigen::Index i = 0; i < p.formation.beta.size(); ++i) {
      beta.push_back({{"name", p.formation_labels[static_cast<std::size_t>(i)]},
                      {"estimate", p.formation.beta[i]},
                      {"se", p.formation.se_beta[i]}});
    }
    f["beta"] = beta;
    j["formation"] = f;
    j["sieve"] = {{"kept", p.sieve_labels}, {"dropped", p.sieve_dropped}};
  }

  njson trace = njson::array();
  for (const NplTraceRow& row : p.fit.trace) {
    trace.push_back({{"iteration", row.iteration},
                     {"loglik", row.loglik},
                     {"dtheta", row.dtheta},
                     {"dbeliefs", row.dbeliefs}});
  }
  j["trace"] = trace;
  return j;
}

void render_period(const PeriodResult& p, std::string& out) {
  std::string head = "== period " + p.name + " ";
  if (head.size() < 60) head += std::string(60 - head.size(), '=');
  out += head + "\n";
  out += "outcomes " + std::to_string(p.outcomes.start) + "-" +
         std::to_string(p.outcomes.end) + ", network " +
         std::to_string(p.network_window.start) + "-" +
         std::to_string(p.network_window.end) + "\n";
  if (!p.ok) {
    out += "FAILED: " + p.error + "\n\n";
    return;
  }
  out += "n = " + std::to_string(p.n) + "   edges = " + std::to_string(p.n_edges) +
         "   isolated = " + std::to_string(p.n_isolated) +
         "   max count = " + std::to_string(p.max_outcome) + "\n";
  out += "r_bar = " + std::to_string(p.r_bar) +
         (p.r_bar_selected ? " (selected)" : " (fixed)") +
         "   iterations = " + std::to_string(p.fit.iterations) +
         "   converged = " + (p.fit.converged ? "yes" : "no") + "\n";
  out += "log pseudo-likelihood = " + fmt("%.4f", p.fit.loglik) + "\n";
  out += "covariance: " + p.cov.method;
  if (p.cov.method == "bootstrap") {
    out += " (" + std::to_string(p.cov.n_used) + " kept, " +
           std::to_string(p.cov.n_dropped) + " dropped)";
  }
  out += "\n";
  out += "uniqueness bound for lambda = " + fmt("%.4f", p.lambda_bound) + "\n\n";

  out += pad("parameter", 30) + pad("estimate", 13) + pad("std.err.", 13) +
         pad("p-value", 13) + "\n";
  for (const ParameterRow& row : p.table) {
    out += pad(row.name, 30) + pad(fmt("%10.4f", row.estimate), 13) +
           pad(fmt("%10.4f", row.se), 13) + pad(fmt("%10.4f", row.pvalue), 13) +
           row.stars + "\n";
  }
  out += "\n";

  if (p.formation_used) {
    out += "formation: converged = ";
    out += (p.formation.converged ? "yes" : "no");
    out += "   loglik = " + fmt("%.4f", p.formation.loglik) +
           "   capped effects = " +
           std::to_string(p.formation.capped_mu.size() +
                          p.formation.capped_nu.size()) +
           "\n";
    for (Eigen::Index i = 0; i < p.formation.beta.size(); ++i) {
      out += "  " + pad(p.formation_labels[static_cast<std::size_t>(i)], 28) +
             pad(fmt("%10.4f", p.formation.beta[i]), 13) +
             fmt("%10.4f", p.formation.se_beta[i]) + "\n";
    }
    out += "sieve terms kept: ";
    if (p.sieve_labels.empty()) {
      out += "(none)";
    } else {
      for (std::size_t k = 0; k < p.sieve_labels.size(); ++k) {
        if (k > 0) out += ", ";
        out += p.sieve_labels[k];
      }
    }
    if (!p.sieve_dropped.empty()) {
      out += "  [dropped: ";
      for (std::size_t k = 0; k < p.sieve_dropped.size(); ++k) {
        if (k > 0) out += ", ";
        out += p.sieve_dropped[k];
      }
      out += "]";
    }
    out += "\n\n";
  }
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text,
                           const std::string& base_dir) {
  njson j = parse_json_text(json_text);
  if (!j.is_object()) config_error("top level must be an object");
  check_keys(j, "the top level",
             {"scholars", "publications", "output", "periods", "min_joint_papers",
              "lookback_years", "formation", "sieve_degree", "r_bar", "tol",
              "bootstrap", "seed", "buckets", "covid"});

  RunConfig cfg;
  cfg.scholars_path = resolve_path(require_string(j, "scholars", "top level"),
                                   base_dir);
  cfg.publications_path =
      resolve_path(require_string(j, "publications", "top level"), base_dir);
  const njson* out = find_key(j, "output");
  if (out != nullptr) {
    if (!out->is_string()) config_error("'output' must be a string");
    cfg.output_dir = out->get<std::string>();
  }
  cfg.output_dir = resolve_path(cfg.output_dir, base_dir);

  const njson* periods = find_key(j, "periods");
  if (periods == nullptr || !periods->is_array() || periods->empty()) {
    config_error("'periods' must be a non-empty array");
  }
  for (std::size_t k = 0; k < periods->size(); ++k) {
    const njson& pj = (*periods)[k];
    std::string where = "periods[" + std::to_string(k) + "]";
    if (!pj.is_object()) config_error(where + " must be an object");
    check_keys(pj, where,
               {"name", "start", "end", "network_start", "network_end"});
    PeriodConfig pc;
    pc.outcomes = parse_period_bounds(pj, "start", "end", where);
    bool has_ns = find_key(pj, "network_start") != nullptr;
    bool has_ne = find_key(pj, "network_end") != nullptr;
    if (has_ns != has_ne) {
      config_error(where + ": network_start and network_end come together");
    }
    if (has_ns) {
      pc.network = parse_period_bounds(pj, "network_start", "network_end", where);
    }
    const njson* name = find_key(pj, "name");
    if (name != nullptr) {
      if (!name->is_string()) config_error(where + ": 'name' must be a string");
      pc.name = name->get<std::string>();
    } else {
      pc.name = default_period_name(pc.outcomes);
    }
    validate_period_name(pc.name);
    cfg.periods.push_back(std::move(pc));
  }
  for (std::size_t a = 0; a < cfg.periods.size(); ++a) {
    for (std::size_t b = a + 1; b < cfg.periods.size(); ++b) {
      if (cfg.periods[a].name == cfg.periods[b].name) {
        config_error("duplicate period name '" + cfg.periods[a].name + "'");
      }
    }
  }

  cfg.min_joint_papers = int_or(j, "min_joint_papers", 2, "top level");
  if (cfg.min_joint_papers < 1) config_error("'min_joint_papers' must be >= 1");
  cfg.lookback_years = int_or(j, "lookback_years", 3, "top level");
  if (cfg.lookback_years < 1) config_error("'lookback_years' must be >= 1");
  cfg.formation = bool_or(j, "formation", true, "top level");
  cfg.sieve_degree = int_or(j, "sieve_degree", 2, "top level");
  if (cfg.sieve_degree < 1) config_error("'sieve_degree' must be >= 1");

  const njson* rb = find_key(j, "r_bar");
  if (rb != nullptr) {
    if (rb->is_string()) {
      if (rb->get<std::string>() != "auto") {
        config_error("'r_bar' must be a positive integer or \"auto\"");
      }
      cfg.r_bar = 0;
    } else if (rb->is_number_integer()) {
      cfg.r_bar = rb->get<int>();
      if (cfg.r_bar < 1) {
        config_error("'r_bar' must be a positive integer or \"auto\"");
      }
    } else {
      config_error("'r_bar' must be a positive integer or \"auto\"");
    }
  }

  cfg.tol = number_or(j, "tol", 1e-4, "top level");
  if (!(cfg.tol > 0.0)) config_error("'tol' must be positive");
  cfg.bootstrap_reps = int_or(j, "bootstrap", 0, "top level");
  if (cfg.bootstrap_reps < 0) config_error("'bootstrap' must be >= 0");
  const njson* seed = find_key(j, "seed");
  if (seed != nullptr) {
    if (!seed->is_number_unsigned() && !seed->is_number_integer()) {
      config_error("'seed' must be a non-negative integer");
    }
    long long s = seed->get<long long>();
    if (s < 0) config_error("'seed' must be a non-negative integer");
    cfg.seed = static_cast<std::uint64_t>(s);
  }

  const njson* buckets = find_key(j, "buckets");
  if (buckets != nullptr) {
    if (!buckets->is_object()) config_error("'buckets' must be an object");
    check_keys(*buckets, "'buckets'", {"productivity", "citations", "experience"});
    if (const njson* v = find_key(*buckets, "productivity")) {
      cfg.buckets.productivity = parse_bucket_spec(*v, "buckets.productivity");
    }
    if (const njson* v = find_key(*buckets, "citations")) {
      cfg.buckets.citations = parse_bucket_spec(*v, "buckets.citations");
    }
    if (const njson* v = find_key(*buckets, "experience")) {
      cfg.buckets.experience = parse_bucket_spec(*v, "buckets.experience");
    }
  }

  const njson* covid = find_key(j, "covid");
  if (covid != nullptr) {
    if (!covid->is_object()) config_error("'covid' must be an object");
    check_keys(*covid, "'covid'", {"threshold", "start", "end"});
    cfg.covid.enabled = true;
    cfg.covid.threshold = number_or(*covid, "threshold", 0.5, "'covid'");
    if (cfg.covid.threshold < 0.0 || cfg.covid.threshold > 1.0) {
      config_error("'covid.threshold' must lie in [0, 1]");
    }
    bool has_s = find_key(*covid, "start") != nullptr;
    bool has_e = find_key(*covid, "end") != nullptr;
    if (has_s != has_e) {
      config_error("'covid': start and end come together");
    }
    if (has_s) {
      cfg.covid.window = parse_period_bounds(*covid, "start", "end", "'covid'");
    }
  }

  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::string text = io::read_text(path);
  std::string base = fs::path(path).parent_path().string();
  return parse_run_config(text, base);
}

SimConfig parse_sim_config(const std::string& json_text) {
  njson j = parse_json_text(json_text);
  if (!j.is_object()) config_error("top level must be an object");
  check_keys(j, "the top level",
             {"n", "seed", "network", "covariates", "contextual", "gamma",
              "lambda", "delta", "delta_bar", "rho", "shock_load_mu", "eq_tol",
              "eq_max_iter"});

  SimConfig cfg;
  cfg.n = require_int(j, "n", "top level");
  if (cfg.n < 1) config_error("'n' must be positive");
  const njson* seed = find_key(j, "seed");
  if (seed != nullptr) {
    long long s = seed->is_number() ? seed->get<long long>() : -1;
    if (s < 0) config_error("'seed' must be a non-negative integer");
    cfg.seed = static_cast<std::uint64_t>(s);
  }

  const njson* net = find_key(j, "network");
  if (net == nullptr || !net->is_object()) {
    config_error("'network' must be an object");
  }
  cfg.network_mode = require_string(*net, "mode", "'network'");
  if (cfg.network_mode == "er") {
    check_keys(*net, "'network'", {"mode", "mean_degree"});
    cfg.mean_degree = require_number(*net, "mean_degree", "'network'");
    if (!(cfg.mean_degree > 0.0)) config_error("'mean_degree' must be positive");
  } else if (cfg.network_mode == "dyadic") {
    check_keys(*net, "'network'", {"mode", "intercept", "homophily", "sigma_mu"});
    cfg.dyadic.intercept = require_number(*net, "intercept", "'network'");
    cfg.dyadic.homophily = number_or(*net, "homophily", 0.0, "'network'");
    cfg.dyadic.sigma_mu = number_or(*net, "sigma_mu", 0.0, "'network'");
    if (cfg.dyadic.sigma_mu < 0.0) config_error("'sigma_mu' must be >= 0");
  } else {
    config_error("'network.mode' must be \"er\" or \"dyadic\"");
  }

  const njson* covs = find_key(j, "covariates");
  if (covs == nullptr || !covs->is_array() || covs->empty()) {
    config_error("'covariates' must be a non-empty array");
  }
  for (std::size_t k = 0; k < covs->size(); ++k) {
    const njson& cj = (*covs)[k];
    std::string where = "covariates[" + std::to_string(k) + "]";
    if (!cj.is_object()) config_error(where + " must be an object");
    check_keys(cj, where, {"kind", "mean", "sd", "p"});
    CovariateSpec spec;
    spec.kind = require_string(cj, "kind", where);
    if (spec.kind != "intercept" && spec.kind != "normal" &&
        spec.kind != "bernoulli") {
      config_error(where + ": kind must be intercept, normal or bernoulli");
    }
    spec.mean = number_or(cj, "mean", 0.0, where);
    spec.sd = number_or(cj, "sd", 1.0, where);
    spec.p = number_or(cj, "p", 0.5, where);
    if (spec.kind == "normal" && !(spec.sd > 0.0)) {
      config_error(where + ": sd must be positive");
    }
    if (spec.kind == "bernoulli" && (spec.p <= 0.0 || spec.p >= 1.0)) {
      config_error(where + ": p must lie strictly inside (0, 1)");
    }
    cfg.covariates.push_back(std::move(spec));
  }

  cfg.contextual = bool_or(j, "contextual", true, "top level");

  const njson* gamma = find_key(j, "gamma");
  if (gamma == nullptr) config_error("'gamma' is required");
  std::vector<double> gvals = require_number_array(*gamma, "'gamma'");
  cfg.gamma = Eigen::Map<const Eigen::VectorXd>(gvals.data(),
                                                static_cast<Eigen::Index>(gvals.size()));

  cfg.ladder.lambda = require_number(j, "lambda", "top level");
  const njson* delta = find_key(j, "delta");
  if (delta != nullptr) {
    cfg.ladder.free_increments = require_number_array(*delta, "'delta'");
  }
  cfg.ladder.delta_bar = number_or(j, "delta_bar", 1.0, "top level");
  cfg.ladder.rho = number_or(j, "rho", 1.0, "top level");
  try {
    cfg.ladder.validate();
  } catch (const ValidationError& e) {
    config_error(e.what());
  }

  cfg.shock_load_mu = number_or(j, "shock_load_mu", 0.0, "top level");
  if (cfg.shock_load_mu != 0.0 && cfg.network_mode != "dyadic") {
    config_error("'shock_load_mu' needs the dyadic network mode");
  }
  cfg.eq_tol = number_or(j, "eq_tol", 1e-9, "top level");
  if (!(cfg.eq_tol > 0.0)) config_error("'eq_tol' must be positive");
  cfg.eq_max_iter = int_or(j, "eq_max_iter", 10000, "top level");
  if (cfg.eq_max_iter < 1) config_error("'eq_max_iter' must be positive");

  return cfg;
}

SimConfig load_sim_config(const std::string& path) {
  return parse_sim_config(io::read_text(path));
}

RunResult run_pipeline(const RunConfig& cfg) {
  RunResult result;
  result.config = cfg;

  std::vector<ScholarProfile> profiles = io::read_scholars(cfg.scholars_path);
  std::vector<PublicationRecord> raw = io::read_publications(cfg.publications_path);
  std::vector<PublicationRecord> records =
      filter_to_roster(raw, roster_ids(profiles));

  for (std::size_t k = 0; k < cfg.periods.size(); ++k) {
    PeriodResult per;
    per.name = cfg.periods[k].name;
    per.outcomes = cfg.periods[k].outcomes;
    per.network_window = cfg.periods[k].network.value_or(cfg.periods[k].outcomes);
    try {
      estimate_period(cfg, profiles, records, cfg.periods[k],
                      cfg.seed + static_cast<std::uint64_t>(k), per);
    } catch (const std::exception& e) {
      per.ok = false;
      per.error = e.what();
    }
    result.periods.push_back(std::move(per));
  }
  return result;
}

std::string render_table(const RunResult& result) {
  std::string out;
  for (const PeriodResult& p : result.periods) {
    render_period(p, out);
  }
  out += "stars: *** p<0.01, ** p<0.05, * p<0.1\n";
  return out;
}

std::string results_json(const RunResult& result) {
  const RunConfig& cfg = result.config;
  njson j;
  njson settings;
  settings["min_joint_papers"] = cfg.min_joint_papers;
  settings["lookback_years"] = cfg.lookback_years;
  settings["formation"] = cfg.formation;
  settings["sieve_degree"] = cfg.sieve_degree;
  if (cfg.r_bar > 0) {
    settings["r_bar"] = cfg.r_bar;
  } else {
    settings["r_bar"] = "auto";
  }
  settings["tol"] = cfg.tol;
  settings["bootstrap"] = cfg.bootstrap_reps;
  settings["seed"] = cfg.seed;
  settings["buckets"] = {{"productivity", cfg.buckets.productivity.cuts},
                         {"citations", cfg.buckets.citations.cuts},
                         {"experience", cfg.buckets.experience.cuts}};
  if (cfg.covid.enabled) {
    njson cj;
    cj["threshold"] = cfg.covid.threshold;
    if (cfg.covid.window.has_value()) {
      cj["start"] = cfg.covid.window->start;
      cj["end"] = cfg.covid.window->end;
    }
    settings["covid"] = cj;
  }
  j["settings"] = settings;

  njson periods = njson::array();
  for (const PeriodResult& p : result.periods) {
    periods.push_back(period_json(p));
  }
  j["periods"] = periods;
  return j.dump(2) + "\n";
}

std::vector<std::string> write_run_outputs(const RunResult& result) {
  const std::string& dir = result.config.output_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw ValidationError("cannot create output directory: " + dir);
  }

  std::vector<std::string> written;
  auto emit = [&](const std::string& rel, const std::string& content) {
    std::string path = (fs::path(dir) / rel).string();
    io::write_text(path, content);
    written.push_back(rel);
  };

  emit("results.json", results_json(result));
  emit("table.txt", render_table(result));

  for (const PeriodResult& p : result.periods) {
    if (!p.ok) continue;
    fs::create_directories(fs::path(dir) / p.name, ec);
    if (ec) {
      throw ValidationError("cannot create output directory: " +
                            (fs::path(dir) / p.name).string());
    }
    std::string base = p.name + "/";
    io::write_edge_list((fs::path(dir) / p.name / "network.txt").string(), p.data.w);
    written.push_back(base + "network.txt");
    io::write_matrix_csv((fs::path(dir) / p.name / "design.csv").string(),
                         p.data.design, p.data.design_labels);
    written.push_back(base + "design.csv");
    io::write_outcomes_csv((fs::path(dir) / p.name / "outcomes.csv").string(),
                           p.data.roster, p.data.y);
    written.push_back(base + "outcomes.csv");
    io::write_features_csv((fs::path(dir) / p.name / "features.csv").string(),
                           p.data.features);
    written.push_back(base + "features.csv");
  }

  njson manifest;
  manifest["output_dir"] = fs::path(dir).filename().string();
  njson periods = njson::array();
  for (const PeriodResult& p : result.periods) {
    periods.push_back({{"name", p.name}, {"ok", p.ok}});
  }
  manifest["periods"] = periods;
  njson files = njson::array();
  for (const std::string& f : written) files.push_back(f);
  manifest["files"] = files;
  std::string manifest_text = manifest.dump(2) + "\n";
  io::write_text((fs::path(dir) / "manifest.json").string(), manifest_text);
  written.push_back("manifest.json");

  std::vector<std::string> paths;
  paths.reserve(written.size());
  for (const std::string& rel : written) {
    paths.push_back((fs::path(dir) / rel).string());
  }
  return paths;
}

}  // namespace countnet
