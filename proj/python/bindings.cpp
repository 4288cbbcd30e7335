// Copyright 2026 The optscale Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "optscale/analysis.hpp"
#include "optscale/cli.hpp"
#include "optscale/datagen.hpp"
#include "optscale/error.hpp"
#include "optscale/experiment.hpp"
#include "optscale/numerics.hpp"
#include "optscale/optim.hpp"
#include "optscale/theory.hpp"

#include <sstream>

namespace py = pybind11;
using namespace optscale;

namespace {

py::dict cell_result_dict(const CellResult& r) {
    py::dict d;
    d["s"] = r.s;
    d["N"] = r.n;
    d["optimizer"] = std::string(to_string(r.optimizer));
    d["seed"] = r.seed;
    d["test_loss"] = r.test_loss;
    d["train_residual_norm"] = r.train_residual_norm;
    d["lr_used"] = r.lr_used;
    d["oracle_test_loss"] = r.oracle_test_loss;
    d["convergence_gap"] = r.convergence_gap;
    d["diverged"] = r.diverged;
    d["data_digest"] = r.data_digest;
    d["teacher_digest"] = r.teacher_digest;
    return d;
}

py::dict train_result_dict(const TrainResult& r) {
    py::dict d;
    d["optimizer"] = std::string(to_string(r.kind));
    d["weights"] = r.weights;
    d["lr_used"] = r.lr_used;
    d["train_residual_norm"] = r.train_residual_norm;
    d["steps_run"] = r.steps_run;
    return d;
}

py::dict capacity_dict(const theory::CapacityReport& c) {
    py::dict d;
    d["N"] = c.n;
    d["effective_modes"] = c.effective_modes;
    d["wasted_fraction"] = c.wasted_fraction;
    d["epsilon"] = c.epsilon;
    return d;
}

}  // namespace

PYBIND11_MODULE(_optscale, m) {
    m.doc() = "Optimizer-dependent scaling laws in random-feature regression";
    m.attr("__version__") = kVersion;

    static py::exception<Error> error_type(m, "Error", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::InvalidInput) {
                PyErr_SetString(PyExc_ValueError, e.what());
            } else {
                py::set_error(error_type, e.what());
            }
        }
    });

    py::enum_<OptimizerKind>(m, "OptimizerKind")
        .value("GD", OptimizerKind::GD)
        .value("Diagonal", OptimizerKind::Diagonal)
        .value("FullNG", OptimizerKind::FullNG)
        .value("SignGD", OptimizerKind::SignGD)
        .value("MatrixSign", OptimizerKind::MatrixSign);

    // numerics
    m.def("sym_eig", [](const MatrixXd& a) {
        const auto eig = sym_eig(SymMatrix::from_dense(a));
        return py::make_tuple(eig.values, eig.vectors);
    }, py::arg("a"), "Eigenvalues (descending) and eigenvectors of a symmetric matrix.");
    m.def("ridge_solve", [](const MatrixXd& g, const VectorXd& rhs, double lambda_reg) {
        return ridge_solve(SymMatrix::from_dense(g), rhs, lambda_reg);
    }, py::arg("g"), py::arg("rhs"), py::arg("lambda_reg"));
    m.def("ols_fit", [](const std::vector<double>& xs, const std::vector<double>& ys) {
        const LinearFit f = ols_fit(xs, ys);
        py::dict d;
        d["slope"] = f.slope;
        d["intercept"] = f.intercept;
        d["slope_se"] = f.slope_se;
        d["r2"] = f.r2;
        d["n_points"] = f.n_points;
        return d;
    }, py::arg("xs"), py::arg("ys"));

    // datagen
    m.def("power_law_eigenvalues", [](int dim, double s) { return power_law_eigenvalues({dim, s}); },
          py::arg("dim"), py::arg("s"));
    m.def("train_size", &train_size, py::arg("n_features"));
    m.def("feature_matrix", &feature_matrix, py::arg("x"), py::arg("w"));

    // optim
    m.def("solve_full_ng", [](const MatrixXd& f, const VectorXd& y, double lambda_reg) {
        return train_result_dict(solve_full_ng(f, y, lambda_reg));
    }, py::arg("f"), py::arg("y"), py::arg("lambda_reg") = 1e-6);
    m.def("train_iterative", [](OptimizerKind kind, const MatrixXd& f, const VectorXd& y, int steps) {
        TrainConfig cfg;
        cfg.steps = steps;
        return train_result_dict(train_iterative(kind, f, y, cfg));
    }, py::arg("kind"), py::arg("f"), py::arg("y"), py::arg("steps") = 2000);
    m.def("test_loss", &optscale::test_loss, py::arg("f_test"), py::arg("a"), py::arg("y_test"));

    // theory
    m.def("conv_factor_gd", &theory::conv_factor_gd, py::arg("eta"), py::arg("lam"), py::arg("steps"));
    m.def("conv_factor_ng", &theory::conv_factor_ng, py::arg("eta"), py::arg("steps"));
    m.def("conv_factor_matrix_sign", &theory::conv_factor_matrix_sign, py::arg("eta"), py::arg("lam"),
          py::arg("lam_top"), py::arg("steps"));
    m.def("dynamic_range", &theory::dynamic_range, py::arg("n"), py::arg("s"));
    m.def("proposition_check", [](std::vector<double> s_grid, int n, int steps, double epsilon) {
        theory::PropositionConfig cfg;
        cfg.s_grid = std::move(s_grid);
        cfg.n = n;
        cfg.steps = steps;
        cfg.epsilon = epsilon;
        const auto rep = theory::proposition_check(cfg);
        py::list rows;
        for (const auto& r : rep.rows) {
            py::dict d;
            d["s"] = r.s;
            d["GD"] = capacity_dict(r.gd);
            d["FullNG"] = capacity_dict(r.ng);
            d["MatrixSign"] = capacity_dict(r.matrix_sign);
            rows.append(d);
        }
        py::dict out;
        out["rows"] = rows;
        out["flat_gap"] = rep.flat.ng_minus_gd();
        out["claim_i"] = rep.claim_i;
        out["claim_ii"] = rep.claim_ii;
        out["claim_iii"] = rep.claim_iii;
        out["violations"] = rep.violations;
        return out;
    }, py::arg("s_grid"), py::arg("n") = 1000, py::arg("steps") = 2000, py::arg("epsilon") = 0.01);

    // experiment
    py::class_<SweepPlan>(m, "SweepPlan")
        .def(py::init<>())
        .def_readwrite("s_values", &SweepPlan::s_values)
        .def_readwrite("N_values", &SweepPlan::n_values)
        .def_readwrite("optimizers", &SweepPlan::optimizers)
        .def_readwrite("seeds", &SweepPlan::seeds)
        .def_readwrite("D", &SweepPlan::dim)
        .def_readwrite("K_star", &SweepPlan::teacher_width)
        .def_readwrite("b", &SweepPlan::source_exponent)
        .def_readwrite("T", &SweepPlan::steps)
        .def_readwrite("lambda_reg", &SweepPlan::lambda_reg)
        .def_readwrite("n_test", &SweepPlan::n_test)
        .def_readwrite("master_seed", &SweepPlan::master_seed)
        .def("validate", &SweepPlan::validate)
        .def("run_count", &SweepPlan::run_count);
    m.def("preset", [](const std::string& name) { return preset(name); }, py::arg("name"));
    m.def("plan_cells", [](const SweepPlan& plan) {
        py::list out;
        for (const auto& c : plan_cells(plan)) out.append(py::make_tuple(c.s, c.seed, c.n));
        return out;
    }, py::arg("plan"));
    m.def("run_cell", [](const SweepPlan& plan, double s, int seed, int n) {
        std::vector<CellResult> rows;
        {
            py::gil_scoped_release release;
            rows = run_cell(plan, s, seed, n);
        }
        py::list out;
        for (const auto& r : rows) out.append(cell_result_dict(r));
        return out;
    }, py::arg("plan"), py::arg("s"), py::arg("seed"), py::arg("N"));
    m.def("run_sweep_csv", [](const SweepPlan& plan, int workers) {
        std::string csv;
        {
            py::gil_scoped_release release;
            csv = serialize_results(run_sweep(plan, workers).results);
        }
        return csv;
    }, py::arg("plan"), py::arg("workers") = 1, "Runs a sweep and returns the results file contents.");

    // analysis
    m.def("fit_power_law", [](const std::vector<double>& ns, const std::vector<double>& losses) {
        const PowerLawFit f = fit_power_law(ns, losses);
        py::dict d;
        d["alpha"] = f.alpha;
        d["ci95"] = f.ci95;
        d["r2"] = f.r2;
        d["intercept"] = f.intercept;
        d["n_points"] = f.n_points;
        return d;
    }, py::arg("ns"), py::arg("losses"));
    m.def("alpha_table_csv", [](const std::string& results_csv, int n_min) {
        std::istringstream in(results_csv);
        const AlphaTable t = alpha_table(read_results(in), n_min);
        py::list out;
        for (std::size_t i = 0; i < t.optimizers.size(); ++i) {
            for (std::size_t j = 0; j < t.s_values.size(); ++j) {
                const FitCell& c = t.cells[i][j];
                py::dict d;
                d["optimizer"] = std::string(to_string(t.optimizers[i]));
                d["s"] = t.s_values[j];
                d["alpha"] = c.fit ? py::cast(c.fit->alpha) : py::none();
                d["ci95"] = c.fit ? py::cast(c.fit->ci95) : py::none();
                d["r2"] = c.fit ? py::cast(c.fit->r2) : py::none();
                d["best"] = t.best[j] == static_cast<int>(i);
                out.append(d);
            }
        }
        return out;
    }, py::arg("results_csv"), py::arg("n_min") = kDefaultFitNMin);
    m.def("estimate_spectral_exponent", [](const std::vector<double>& eigs, int first, int last) {
        const DiagnosticReport r = estimate_spectral_exponent(eigs, {first, last});
        py::dict d;
        d["s_hat"] = r.s_hat;
        d["r2"] = r.r2;
        d["band"] = std::string(to_string(r.band));
        d["n_used"] = r.n_used;
        return d;
    }, py::arg("eigs"), py::arg("first") = 1, py::arg("last") = 0);

    m.def("cli", [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
    }, py::arg("args"), "Runs the command-line tool in-process; returns (exit_code, stdout, stderr).");
}
