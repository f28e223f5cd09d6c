#include <optional>
#include <string>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "jsr/amp.hpp"
#include "jsr/errors.hpp"
#include "jsr/experiment.hpp"
#include "jsr/model.hpp"
#include "jsr/prior_denoiser.hpp"
#include "jsr/rbp.hpp"
#include "jsr/se.hpp"

namespace py = pybind11;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Lambda given as None (identity), a scalar variance or a J x J matrix.
jsr::PriorParams make_prior(double epsilon, int J, const py::object& lambda) {
  if (lambda.is_none()) return jsr::PriorParams::isotropic(epsilon, J);
  if (py::isinstance<py::float_>(lambda) || py::isinstance<py::int_>(lambda)) {
    return jsr::PriorParams::isotropic(epsilon, J, lambda.cast<double>());
  }
  return jsr::PriorParams(epsilon, lambda.cast<MatrixXd>());
}

py::dict solve_dict(const jsr::SolveResult& r) {
  py::list nse, sigma, gamma;
  for (const auto& rec : r.trace) {
    nse.append(rec.nse_db);
    sigma.append(rec.sigma_trace);
    gamma.append(rec.gamma_trace);
  }
  py::dict d;
  d["estimate"] = r.estimate;
  d["weights"] = r.weights;
  d["nse_db"] = nse;
  d["sigma_trace"] = sigma;
  d["gamma_trace"] = gamma;
  d["iterations"] = r.iterations;
  d["converged"] = r.converged;
  return d;
}

}  // namespace

PYBIND11_MODULE(_jointsparse, m) {
  m.doc() = "Joint sparse recovery: spike-and-slab denoiser, relaxed BP, AMP and state evolution";

  py::register_exception<jsr::NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<jsr::ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def(
      "denoise",
      [](const VectorXd& theta, double epsilon, const py::object& lambda, const MatrixXd& sigma) {
        const jsr::SpikeSlabDenoiser den(make_prior(epsilon, static_cast<int>(theta.size()), lambda),
                                         jsr::GaussianChannel(sigma));
        const auto r = den.denoise(theta);
        py::dict d;
        d["mean"] = r.mean;
        d["cov"] = r.cov;
        d["weight"] = r.weight;
        d["jacobian"] = den.jacobian(theta);
        return d;
      },
      py::arg("theta"), py::arg("epsilon"), py::arg("lambda_") = py::none(), py::arg("sigma"),
      "Posterior mean, covariance, slab weight and Jacobian of one row.");

  m.def(
      "scalar_shrinkage",
      [](const VectorXd& theta, double c, double epsilon) {
        const auto r = jsr::scalar_shrinkage(theta, c, epsilon);
        return py::make_tuple(r.mean, r.weight);
      },
      py::arg("theta"), py::arg("c"), py::arg("epsilon"), "(mean, t) for Lambda = I, Sigma = c I.");
  m.def("hard_threshold_limit", &jsr::hard_threshold_limit, py::arg("c"),
        "Limit of the support threshold on |theta|^2/J as J grows.");

  m.def("se_step", &jsr::se_step_scalar, py::arg("c"), py::arg("epsilon"), py::arg("delta"),
        py::arg("sigma2") = 0.0);
  m.def("se_trace", &jsr::se_predict_trace_from, py::arg("c1"), py::arg("epsilon"), py::arg("delta"),
        py::arg("sigma2"), py::arg("n_iters"));
  m.def(
      "se_fixed_point",
      [](double epsilon, double delta, double sigma2, double tol, double c1) {
        const auto r = jsr::se_fixed_point(epsilon, delta, sigma2, tol, c1);
        return py::make_tuple(r.c_star, r.iterations, r.converged);
      },
      py::arg("epsilon"), py::arg("delta"), py::arg("sigma2") = 0.0, py::arg("tol") = 1e-12,
      py::arg("c1") = 1.0);

  py::class_<jsr::Instance>(m, "Instance")
      .def_property_readonly("X", [](const jsr::Instance& i) { return i.signal.X; })
      .def_property_readonly("support", [](const jsr::Instance& i) { return i.signal.support; })
      .def_property_readonly("Y", [](const jsr::Instance& i) { return i.meas.Y; })
      .def_property_readonly("sigma2", [](const jsr::Instance& i) { return i.meas.sigma2; })
      .def_property_readonly("shape", [](const jsr::Instance& i) {
        return py::make_tuple(i.phi.rows(), i.phi.cols(), i.signal.X.cols());
      })
      .def("phi_dense", [](const jsr::Instance& i) { return i.phi.to_dense(); });

  m.def(
      "generate_instance",
      [](int N, int M, int J, int d, double epsilon, const py::object& lambda,
         std::optional<double> sigma2, double snr_db, std::uint64_t seed) {
        jsr::ModelConfig cfg;
        cfg.N = N;
        cfg.M = M;
        cfg.J = J;
        cfg.d = d;
        cfg.prior = make_prior(epsilon, J, lambda);
        if (sigma2) {
          cfg.noise = jsr::NoiseVariance{*sigma2};
        } else {
          cfg.noise = jsr::SnrDb{snr_db};
        }
        cfg.seed = seed;
        return jsr::generate_instance(cfg);
      },
      py::arg("N"), py::arg("M"), py::arg("J"), py::arg("d"), py::arg("epsilon"),
      py::arg("lambda_") = py::none(), py::arg("sigma2") = py::none(), py::arg("snr_db") = 30.0,
      py::arg("seed") = 0);

  m.def(
      "amp",
      [](const jsr::Instance& inst, double epsilon, const py::object& lambda, int max_iter, double tol,
         bool fast_path) {
        jsr::AmpConfig cfg;
        cfg.max_iter = max_iter;
        cfg.tol = tol;
        cfg.fast_path = fast_path;
        const auto prior = make_prior(epsilon, static_cast<int>(inst.signal.X.cols()), lambda);
        jsr::SolveResult r;
        {
          py::gil_scoped_release release;
          r = jsr::amp_solve(inst.phi, inst.meas, prior, cfg, &inst.signal.X);
        }
        return solve_dict(r);
      },
      py::arg("instance"), py::arg("epsilon"), py::arg("lambda_") = py::none(), py::arg("max_iter") = 500,
      py::arg("tol") = 1e-8, py::arg("fast_path") = false);

  m.def(
      "rbp",
      [](const jsr::Instance& inst, double epsilon, const py::object& lambda, bool edge_independent,
         int max_iter, double tol) {
        jsr::RbpConfig cfg;
        cfg.variant = edge_independent ? jsr::RbpVariant::kEdgeIndependent : jsr::RbpVariant::kEdgeDependent;
        cfg.max_iter = max_iter;
        cfg.tol = tol;
        const auto prior = make_prior(epsilon, static_cast<int>(inst.signal.X.cols()), lambda);
        jsr::SolveResult r;
        {
          py::gil_scoped_release release;
          r = jsr::rbp_solve(inst.phi, inst.meas, prior, cfg, &inst.signal.X);
        }
        return solve_dict(r);
      },
      py::arg("instance"), py::arg("epsilon"), py::arg("lambda_") = py::none(),
      py::arg("edge_independent") = false, py::arg("max_iter") = 500, py::arg("tol") = 1e-8);

  m.def(
      "run_config",
      [](const std::filesystem::path& path, std::optional<std::filesystem::path> outputs) {
        auto cfg = jsr::load_config(path);
        if (outputs) cfg.outputs = *outputs;
        jsr::ExperimentReport report;
        {
          py::gil_scoped_release release;
          report = jsr::run_experiment(cfg);
        }
        py::list rows;
        for (const auto& s : report.summaries) {
          py::dict d;
          d["solver"] = std::string(jsr::solver_name(s.solver));
          d["trials"] = s.trials;
          d["failed"] = s.failed;
          d["median_nse_db"] = s.median_nse_db;
          d["mean_iterations"] = s.mean_iterations;
          rows.append(d);
        }
        return rows;
      },
      py::arg("path"), py::arg("outputs") = py::none(),
      "Run an experiment config and return its per-solver summaries.");
}
