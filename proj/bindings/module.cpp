// Python face of the library. Networks cross the boundary as dense numpy
// arrays and are row normalized internally, estimation designs as 2-d arrays,
// results as plain dicts, so the module needs nothing beyond numpy.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <optional>

#include "countnet/estimate.hpp"
#include "countnet/formation.hpp"
#include "countnet/game.hpp"
#include "countnet/ladder.hpp"
#include "countnet/pipeline.hpp"
#include "countnet/simulate.hpp"

namespace py = pybind11;
using namespace countnet;

namespace {

CostLadder make_ladder(double lam, const std::vector<double>& delta,
                       double delta_bar, double rho) {
  CostLadder ladder;
  ladder.lambda = lam;
  ladder.free_increments = delta;
  ladder.delta_bar = delta_bar;
  ladder.rho = rho;
  ladder.validate();
  return ladder;
}

InteractionNetwork network_from_dense(const Eigen::MatrixXd& w) {
  if (w.rows() != w.cols()) {
    throw ValidationError("adjacency matrix must be square");
  }
  std::vector<std::tuple<int, int, double>> triplets;
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      if (w(i, j) != 0.0) {
        triplets.emplace_back(static_cast<int>(i), static_cast<int>(j), w(i, j));
      }
    }
  }
  return InteractionNetwork::from_triplets(static_cast<int>(w.rows()), triplets);
}

py::dict fit_to_dict(const FitResult& fit,
                     const std::vector<std::string>& z_labels) {
  py::dict out;
  out["labels"] = parameter_labels(z_labels, fit.r_bar);
  out["estimates"] = fit.theta.natural();
  out["beliefs"] = fit.beliefs;
  out["loglik"] = fit.loglik;
  out["converged"] = fit.converged;
  out["iterations"] = fit.iterations;
  out["r_bar"] = fit.r_bar;
  return out;
}

std::vector<std::string> default_labels(Eigen::Index k) {
  std::vector<std::string> labels;
  labels.reserve(static_cast<std::size_t>(k));
  for (Eigen::Index c = 0; c < k; ++c) {
    labels.push_back("z" + std::to_string(c));
  }
  return labels;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "count outcomes on interaction networks";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

  m.def(
      "cut_points",
      [](double lam, const std::vector<double>& delta, double delta_bar,
         double rho, int r_max) {
        return make_ladder(lam, delta, delta_bar, rho).cut_points(r_max);
      },
      py::arg("lam"), py::arg("delta"), py::arg("delta_bar"), py::arg("rho"),
      py::arg("r_max"), "Thresholds a_1..a_rmax, a_1 = 0.");

  m.def(
      "choice_probabilities",
      [](double u, double lam, const std::vector<double>& delta,
         double delta_bar, double rho, int r_max) {
        return choice_probabilities(u, make_ladder(lam, delta, delta_bar, rho),
                                    r_max);
      },
      py::arg("u"), py::arg("lam"), py::arg("delta"), py::arg("delta_bar"),
      py::arg("rho"), py::arg("r_max") = 32,
      "Count distribution (p_0, ..., p_R) for one utility index.");

  m.def(
      "equilibrium",
      [](const Eigen::MatrixXd& w, const Eigen::MatrixXd& z,
         const Eigen::VectorXd& gamma, double lam,
         const std::vector<double>& delta, double delta_bar, double rho,
         double tol, int max_iter) {
        ModelParams params;
        params.ladder = make_ladder(lam, delta, delta_bar, rho);
        params.gamma = gamma;
        InteractionNetwork g = network_from_dense(w).row_normalized();
        EquilibriumResult eq =
            solve_equilibrium(params, g, z, std::nullopt, tol, max_iter);
        py::dict out;
        out["beliefs"] = eq.beliefs;
        out["iterations"] = eq.iterations;
        out["residual"] = eq.residual;
        out["unique"] = !eq.above_bound;
        return out;
      },
      py::arg("w"), py::arg("z"), py::arg("gamma"), py::arg("lam"),
      py::arg("delta"), py::arg("delta_bar"), py::arg("rho"),
      py::arg("tol") = 1e-9, py::arg("max_iter") = 10000,
      "Equilibrium expected counts on the row-normalized network.");

  m.def(
      "peer_effect_bound",
      [](const Eigen::MatrixXd& w, double lam, const std::vector<double>& delta,
         double delta_bar, double rho) {
        return peer_effect_bound(make_ladder(lam, delta, delta_bar, rho),
                                 network_from_dense(w).row_normalized());
      },
      py::arg("w"), py::arg("lam"), py::arg("delta"), py::arg("delta_bar"),
      py::arg("rho"), "Uniqueness threshold for the peer effect.");

  m.def(
      "simulate",
      [](const std::string& config_json, std::uint64_t rep) {
        SimConfig cfg = parse_sim_config(config_json);
        SimulatedDataset ds = simulate_dataset(cfg, rep);
        py::dict out;
        out["w"] = ds.w.to_dense();
        out["x"] = ds.x;
        out["z"] = ds.z;
        out["x_labels"] = ds.x_labels;
        out["z_labels"] = ds.z_labels;
        out["y"] = ds.y;
        out["beliefs"] = ds.beliefs;
        if (ds.mu.size() > 0) out["mu"] = ds.mu;
        return out;
      },
      py::arg("config_json"), py::arg("rep") = 0,
      "One dataset draw from a JSON simulation config.");

  m.def(
      "fit",
      [](const Eigen::VectorXi& y, const Eigen::MatrixXd& w,
         const Eigen::MatrixXd& z, std::optional<std::vector<std::string>> labels,
         int r_bar, double tol, const std::string& cov, int bootstrap_reps,
         std::uint64_t seed) {
        InteractionNetwork g = network_from_dense(w).row_normalized();
        NplOptions opts;
        opts.tol = tol;
        bool selected = false;
        if (r_bar <= 0) {
          r_bar = select_r_bar(y, g, z, opts);
          selected = true;
        }
        FitResult fit = npl_fit(y, g, z, r_bar, opts);
        std::vector<std::string> z_labels =
            labels.has_value() ? *labels : default_labels(z.cols());
        py::dict out = fit_to_dict(fit, z_labels);
        out["r_bar_selected"] = selected;
        if (cov == "sandwich" || cov == "bootstrap") {
          CovarianceResult c =
              cov == "sandwich"
                  ? sandwich_covariance(fit, y, g, z, opts)
                  : bootstrap_covariance(fit, g, z, bootstrap_reps, seed, opts);
          out["se"] = c.se_natural;
          out["cov_method"] = c.method;
        } else if (cov != "none") {
          throw ValidationError("cov must be sandwich, bootstrap or none");
        }
        return out;
      },
      py::arg("y"), py::arg("w"), py::arg("z"), py::arg("labels") = std::nullopt,
      py::arg("r_bar") = 0, py::arg("tol") = 1e-4, py::arg("cov") = "none",
      py::arg("bootstrap_reps") = 50, py::arg("seed") = 12345,
      "Nested pseudo-likelihood fit; r_bar <= 0 selects it automatically.");

  m.def(
      "sieve",
      [](const Eigen::VectorXd& mu, const Eigen::VectorXd& nu,
         const Eigen::MatrixXd& w, int degree) {
        SieveBasis basis =
            sieve_terms(mu, nu, network_from_dense(w).row_normalized(), degree);
        return py::make_tuple(basis.h, basis.labels);
      },
      py::arg("mu"), py::arg("nu"), py::arg("w"), py::arg("degree") = 2,
      "Standardized polynomial controls in the scholar effects.");

  m.def(
      "dyadic_logit",
      [](const Eigen::MatrixXd& w, const std::vector<int>& department,
         const std::vector<int>& ranking, const std::vector<bool>& female,
         const std::vector<bool>& african_american,
         const Eigen::VectorXd& experience, const Eigen::VectorXd& citations,
         const Eigen::VectorXd& avg_pubs) {
        const std::size_t n = department.size();
        if (ranking.size() != n || female.size() != n ||
            african_american.size() != n ||
            experience.size() != static_cast<Eigen::Index>(n) ||
            citations.size() != static_cast<Eigen::Index>(n) ||
            avg_pubs.size() != static_cast<Eigen::Index>(n)) {
          throw ValidationError("feature arrays disagree on length");
        }
        std::vector<ScholarFeatures> features(n);
        for (std::size_t i = 0; i < n; ++i) {
          features[i].id = "a" + std::to_string(i);
          features[i].department = department[i];
          features[i].ranking_bucket = ranking[i];
          features[i].female = female[i];
          features[i].african_american = african_american[i];
          features[i].experience = experience[static_cast<Eigen::Index>(i)];
          features[i].citations = citations[static_cast<Eigen::Index>(i)];
          features[i].avg_pubs = avg_pubs[static_cast<Eigen::Index>(i)];
        }
        DyadFrame frame(std::move(features));
        FormationFit fit = fit_dyadic_logit(frame, network_from_dense(w));
        py::dict out;
        out["labels"] = frame.labels();
        out["beta"] = fit.beta;
        out["se_beta"] = fit.se_beta;
        out["mu"] = fit.mu;
        out["nu"] = fit.nu;
        out["converged"] = fit.converged;
        out["iterations"] = fit.iterations;
        out["loglik"] = fit.loglik;
        out["n_capped"] =
            static_cast<int>(fit.capped_mu.size() + fit.capped_nu.size());
        return out;
      },
      py::arg("w"), py::arg("department"), py::arg("ranking"), py::arg("female"),
      py::arg("african_american"), py::arg("experience"), py::arg("citations"),
      py::arg("avg_pubs"),
      "Dyadic logit with sender and receiver effects on a 0/1 network.");
}
