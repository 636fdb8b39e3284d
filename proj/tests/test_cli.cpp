// Spawns the installed command line binary against the synthetic corpus and
// checks outputs, exit codes and determinism. COUNTNET_CLI_PATH is injected
// by the build so the test always runs the binary it was compiled next to.

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "countnet/io.hpp"
#include "countnet/network.hpp"
#include "doctest.h"
#include "json.hpp"
#include "support/corpus.hpp"

using namespace countnet;
using njson = nlohmann::json;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Runs the binary with the temp dir as working directory so relative paths in
// arguments and configs resolve against the corpus files.
CliResult run_cli(const corpus::TempDir& dir, const std::string& args) {
  const std::string out_path = dir.file("cli_stdout.txt");
  const std::string err_path = dir.file("cli_stderr.txt");
  const std::string cmd = "cd '" + dir.path.string() + "' && '" +
                          COUNTNET_CLI_PATH + "' " + args + " > '" + out_path +
                          "' 2> '" + err_path + "'";
  const int status = std::system(cmd.c_str());
  CliResult r;
  if (WIFEXITED(status)) r.code = WEXITSTATUS(status);
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  return r;
}

}  // namespace

TEST_CASE("cli build derives network, covariate and outcome files") {
  corpus::TempDir dir;
  corpus::write_corpus(dir);

  CliResult r = run_cli(dir,
                        "build --scholars scholars.csv "
                        "--publications publications.csv "
                        "--period 2020:2021 --network-period 2019:2020 "
                        "--out built");
  INFO("stderr: ", r.err);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("n = 60") != std::string::npos);

  InteractionNetwork w = io::read_edge_list(dir.file("built/network.txt"));
  CHECK(w.size() == 60);
  CHECK(w.n_edges() > 0);

  auto [x, x_labels] = io::read_matrix_csv(dir.file("built/X.csv"));
  CHECK(x.rows() == 60);
  REQUIRE(!x_labels.empty());

  auto [z, z_labels] = io::read_matrix_csv(dir.file("built/Z.csv"));
  CHECK(z.rows() == 60);
  CHECK(z.cols() == 2 * x.cols());
  CHECK(z_labels.back() == "g:" + x_labels.back());

  Eigen::VectorXi y = io::read_outcomes_csv(dir.file("built/outcomes.csv"));
  CHECK(y.size() == 60);
  CHECK(y.maxCoeff() >= 3);

  std::vector<ScholarFeatures> features =
      io::read_features_csv(dir.file("built/features.csv"));
  CHECK(features.size() == 60);

  CHECK(slurp(dir.file("built/roster.csv")).rfind("id\ns0\ns1\n", 0) == 0);
}

TEST_CASE("cli simulate feeds cli fit") {
  corpus::TempDir dir;
  corpus::write_file(dir.file("sim.json"),
                     "{\n"
                     "  \"n\": 200,\n"
                     "  \"seed\": 11,\n"
                     "  \"network\": {\"mode\": \"er\", \"mean_degree\": 5.0},\n"
                     "  \"covariates\": [\n"
                     "    {\"kind\": \"normal\", \"mean\": 0.0, \"sd\": 1.0},\n"
                     "    {\"kind\": \"bernoulli\", \"p\": 0.4}\n"
                     "  ],\n"
                     "  \"contextual\": true,\n"
                     "  \"gamma\": [0.6, -0.4, 0.3, 0.2],\n"
                     "  \"lambda\": 0.1,\n"
                     "  \"delta\": [0.6],\n"
                     "  \"delta_bar\": 0.5,\n"
                     "  \"rho\": 0.8\n"
                     "}\n");

  CliResult sim = run_cli(dir, "simulate --config sim.json --reps 2 --out sims");
  INFO("stderr: ", sim.err);
  REQUIRE(sim.code == 0);

  njson manifest = njson::parse(slurp(dir.file("sims/manifest.json")));
  CHECK(manifest["n"].get<int>() == 200);
  REQUIRE(manifest["reps"].size() == 2);
  CHECK(manifest["reps"][0]["eq_residual"].get<double>() < 1e-9);

  // Replications use distinct streams, so the drawn outcomes differ.
  CHECK(slurp(dir.file("sims/rep0/outcomes.csv")) !=
        slurp(dir.file("sims/rep1/outcomes.csv")));

  CliResult fit = run_cli(dir,
                          "fit --network sims/rep0/network.txt "
                          "--covariates sims/rep0/X.csv "
                          "--outcomes sims/rep0/outcomes.csv "
                          "--r-bar 2 --out fitdir");
  INFO("stderr: ", fit.err);
  REQUIRE(fit.code == 0);
  CHECK(fit.out.find("converged") != std::string::npos);

  njson j = njson::parse(slurp(dir.file("fitdir/fit.json")));
  CHECK(j["n"].get<int>() == 200);
  CHECK(j["r_bar"].get<int>() == 2);
  CHECK_FALSE(j["r_bar_selected"].get<bool>());
  CHECK(j["converged"].get<bool>());
  CHECK(j["covariance"]["method"].get<std::string>() == "sandwich");

  REQUIRE(!j["parameters"].empty());
  CHECK(j["parameters"][0]["name"].get<std::string>() == "lambda");
  const double lambda_hat = j["parameters"][0]["estimate"].get<double>();
  CHECK(lambda_hat > 0.0);
  CHECK(lambda_hat < 0.45);
  const double lambda_se = j["parameters"][0]["se"].get<double>();
  CHECK(lambda_se > 0.0);
  CHECK(lambda_se < 1.0);

  auto [beliefs, labels] = io::read_matrix_csv(dir.file("fitdir/beliefs.csv"));
  CHECK(beliefs.rows() == 200);
  CHECK(labels == std::vector<std::string>{"belief"});
}

TEST_CASE("cli formation writes effects and the sieve basis") {
  corpus::TempDir dir;
  corpus::write_corpus(dir);

  CliResult r = run_cli(dir,
                        "formation --scholars scholars.csv "
                        "--publications publications.csv "
                        "--period 2019:2020 --sieve-degree 2 --out form");
  INFO("stderr: ", r.err);
  REQUIRE(r.code == 0);

  njson j = njson::parse(slurp(dir.file("form/formation.json")));
  CHECK(j["n"].get<int>() == 60);
  CHECK(j["converged"].get<bool>());
  REQUIRE(!j["beta"].empty());
  CHECK(j["beta"][0]["name"].get<std::string>() == "const");
  CHECK(j["sieve_terms"].size() == 14);

  auto [effects, e_labels] = io::read_matrix_csv(dir.file("form/effects.csv"));
  CHECK(effects.rows() == 60);
  CHECK(effects.cols() == 2);
  CHECK(e_labels == std::vector<std::string>{"mu", "nu"});
  // The fitted effects are normalized to mean zero.
  CHECK(std::abs(effects.col(0).mean() + effects.col(1).mean()) < 1e-8);

  auto [h, h_labels] = io::read_matrix_csv(dir.file("form/sieve.csv"));
  CHECK(h.rows() == 60);
  CHECK(h.cols() == 14);
}

TEST_CASE("cli run reproduces its outputs byte for byte") {
  corpus::TempDir dir;
  corpus::write_corpus(dir);
  corpus::write_file(dir.file("run.json"), corpus::run_config_json(false, true));

  CliResult first = run_cli(dir, "run --config run.json");
  INFO("stderr: ", first.err);
  REQUIRE(first.code == 0);
  CHECK(first.out.find("lambda") != std::string::npos);

  const std::string results = slurp(dir.file("out/results.json"));
  const std::string table = slurp(dir.file("out/table.txt"));
  REQUIRE(!results.empty());
  REQUIRE(!table.empty());

  CliResult second = run_cli(dir, "run --config run.json");
  REQUIRE(second.code == 0);
  CHECK(second.out == first.out);
  CHECK(slurp(dir.file("out/results.json")) == results);
  CHECK(slurp(dir.file("out/table.txt")) == table);
}

TEST_CASE("cli exit codes separate usage, input and numerical failures") {
  corpus::TempDir dir;
  corpus::write_corpus(dir);

  SUBCASE("help exits zero") {
    CliResult r = run_cli(dir, "--help");
    CHECK(r.code == 0);
    CHECK(r.out.find("build") != std::string::npos);
  }

  SUBCASE("missing required options exit one") {
    CliResult r = run_cli(dir, "fit");
    CHECK(r.code == 1);
  }

  SUBCASE("unknown subcommands exit one") {
    CliResult r = run_cli(dir, "frobnicate");
    CHECK(r.code == 1);
  }

  SUBCASE("missing config files exit one") {
    CliResult r = run_cli(dir, "simulate --config nope.json --out simdir");
    CHECK(r.code == 1);
  }

  SUBCASE("malformed period arguments exit one") {
    CliResult r = run_cli(dir,
                          "build --scholars scholars.csv "
                          "--publications publications.csv "
                          "--period 2020 --out built");
    CHECK(r.code == 1);
    CHECK(r.err.find("start:end") != std::string::npos);
  }

  SUBCASE("invalid input data exits one") {
    corpus::write_file(
        dir.file("bad_scholars.csv"),
        "id,name,department,ranking_bucket,female,african_american,"
        "first_pub_year,citations_by_year,fields\n"
        "s0,A,d0,Top5,0,0,2010,2019:10,f0\n"
        "s1,B,d0,Top10,1,0,2011,2019:20,f1\n");
    CliResult r = run_cli(dir,
                          "build --scholars bad_scholars.csv "
                          "--publications publications.csv "
                          "--period 2020:2021 --out built");
    CHECK(r.code == 1);
    CHECK(r.err.find("error:") != std::string::npos);
    CHECK(r.err.find("unknown ranking bucket") != std::string::npos);
  }

  SUBCASE("numerical failures exit two") {
    corpus::write_file(dir.file("sim_bad.json"),
                       "{\n"
                       "  \"n\": 30,\n"
                       "  \"seed\": 3,\n"
                       "  \"network\": {\"mode\": \"er\", \"mean_degree\": 4.0},\n"
                       "  \"covariates\": [{\"kind\": \"normal\", \"mean\": 0.5, \"sd\": 1.0}],\n"
                       "  \"contextual\": false,\n"
                       "  \"gamma\": [0.8],\n"
                       "  \"lambda\": 0.2,\n"
                       "  \"delta\": [0.8],\n"
                       "  \"delta_bar\": 0.5,\n"
                       "  \"rho\": 1.0,\n"
                       "  \"eq_tol\": 1e-12,\n"
                       "  \"eq_max_iter\": 1\n"
                       "}\n");
    CliResult r = run_cli(dir, "simulate --config sim_bad.json --out simdir");
    CHECK(r.code == 2);
    CHECK(r.err.find("numerical error:") != std::string::npos);
  }

  SUBCASE("a run where every period fails exits two") {
    corpus::write_file(
        dir.file("run_stale.json"),
        "{\n"
        "  \"scholars\": \"scholars.csv\",\n"
        "  \"publications\": \"publications.csv\",\n"
        "  \"output\": \"out_stale\",\n"
        "  \"periods\": [{\"name\": \"stale\", \"start\": 2020, \"end\": 2021,\n"
        "                 \"network_start\": 1990, \"network_end\": 1991}],\n"
        "  \"formation\": true,\n"
        "  \"r_bar\": 2\n"
        "}\n");
    CliResult r = run_cli(dir, "run --config run_stale.json");
    CHECK(r.code == 2);
    CHECK(r.err.find("every period failed") != std::string::npos);
  }
}
