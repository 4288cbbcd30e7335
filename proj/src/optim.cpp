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

#include "optscale/optim.hpp"

#include <cmath>
#include <optional>
#include <sstream>
#include <string>

#include "optscale/error.hpp"

namespace optscale {

namespace {

constexpr double kStepScale = 1.5;

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

VectorXd sym_times(const SymMatrix& k, const VectorXd& a) {
    return k.dense().selfadjointView<Eigen::Lower>() * a;
}

struct MatrixSignSetup {
    SymMatrix p;
    double lambda_max;
};

MatrixSignSetup matrix_sign_setup(const SymMatrix& k, double relative_floor) {
    EigenDecomposition eig = sym_eig(k);
    const double top = eig.values(0);
    if (!(top > 0.0)) fail(ErrorKind::DegenerateSpectrum, "matrix-sign preconditioner: largest eigenvalue is not positive");
    const double floor = relative_floor * top;
    VectorXd scale = eig.values.array().max(floor).rsqrt();
    MatrixXd p = eig.vectors * scale.asDiagonal() * eig.vectors.transpose();
    return {SymMatrix::from_lower(std::move(p)), top};
}

double positive_lambda_max(const SymMatrix& m) {
    const double top = largest_eigenvalue(m);
    if (!(top > 0.0)) fail(ErrorKind::DegenerateSpectrum, "step_size: largest eigenvalue is zero");
    return top;
}

TrainResult run_updates(OptimizerKind kind, const LeastSquaresProblem& problem, double lr, int steps,
                        const Preconditioner& pre, const StepObserver& observer) {
    require(steps >= 1, "training: steps must be >= 1");
    require(lr > 0.0 && std::isfinite(lr), "training: learning rate must be positive");
    const SymMatrix& k = problem.gram();
    const VectorXd& c = problem.moment();

    // Dense preconditioning is applied as a ← a − η (P K a − P c).
    std::optional<MatrixXd> pk;
    VectorXd pc;
    if (const auto* dense = std::get_if<precond::Dense>(&pre)) {
        pk = dense->matrix.dense() * k.dense();
        pc = dense->matrix.dense() * c;
    }
    const auto* diag = std::get_if<precond::Diagonal>(&pre);

    VectorXd a = VectorXd::Zero(problem.dim());
    VectorXd g(problem.dim());
    for (int t = 0; t < steps; ++t) {
        switch (kind) {
            case OptimizerKind::GD:
                g.noalias() = sym_times(k, a) - c;
                a -= lr * g;
                break;
            case OptimizerKind::Diagonal:
                g.noalias() = sym_times(k, a) - c;
                a -= lr * diag->scale.cwiseProduct(g);
                break;
            case OptimizerKind::MatrixSign:
                g.noalias() = *pk * a - pc;
                a -= lr * g;
                break;
            case OptimizerKind::SignGD:
                g.noalias() = sym_times(k, a) - c;
                a -= lr * g.unaryExpr(&sign_of);
                break;
            case OptimizerKind::FullNG:
                fail(ErrorKind::InvalidInput, "training: FullNG is a direct solve");
        }
        if (!a.allFinite()) {
            std::ostringstream os;
            os << to_string(kind) << " diverged at step " << t << " (lr=" << lr << ")";
            throw DivergenceError(t, os.str());
        }
        if (observer) observer(t, a);
    }

    TrainResult out;
    out.kind = kind;
    out.lr_used = lr;
    out.steps_run = steps;
    out.train_residual_norm = problem.residual_norm(a);
    out.weights = std::move(a);
    return out;
}

}  // namespace

std::string_view to_string(OptimizerKind kind) {
    switch (kind) {
        case OptimizerKind::GD: return "GD";
        case OptimizerKind::Diagonal: return "Diagonal";
        case OptimizerKind::FullNG: return "FullNG";
        case OptimizerKind::SignGD: return "SignGD";
        case OptimizerKind::MatrixSign: return "MatrixSign";
    }
    return "?";
}

OptimizerKind parse_optimizer(std::string_view name) {
    for (OptimizerKind k : kAllOptimizers)
        if (to_string(k) == name) return k;
    fail(ErrorKind::InvalidInput, "unknown optimizer '" + std::string(name) + "'");
}

SymMatrix gram(const MatrixXd& f, int n) {
    require(f.rows() == n && n >= 1, "gram: F must have n rows");
    MatrixXd g = MatrixXd::Zero(f.cols(), f.cols());
    g.selfadjointView<Eigen::Lower>().rankUpdate(f.transpose());
    g /= static_cast<double>(n);
    return SymMatrix::from_lower(std::move(g));
}

LeastSquaresProblem::LeastSquaresProblem(const MatrixXd& f, const VectorXd& y) : f_(&f), y_(&y) {
    require(f.rows() >= 1 && f.cols() >= 1, "LeastSquaresProblem: empty feature matrix");
    require(f.rows() == y.size(), "LeastSquaresProblem: F rows and y length differ");
    MatrixXd g = MatrixXd::Zero(f.cols(), f.cols());
    g.selfadjointView<Eigen::Lower>().rankUpdate(f.transpose());
    raw_gram_ = SymMatrix::from_lower(g);
    raw_moment_ = f.transpose() * y;
    const double n = static_cast<double>(f.rows());
    gram_ = SymMatrix::from_lower(g / n);
    moment_ = raw_moment_ / n;
}

double LeastSquaresProblem::residual_norm(const VectorXd& a) const {
    return (*f_ * a - *y_).norm();
}

VectorXd diagonal_scaling(const SymMatrix& k, double relative_floor) {
    const VectorXd d = k.dense().diagonal();
    const double top = d.maxCoeff();
    if (!(top > 0.0)) fail(ErrorKind::DegenerateSpectrum, "diagonal preconditioner: Gram diagonal is all zero");
    return d.array().max(relative_floor * top).rsqrt();
}

Preconditioner build_preconditioner(OptimizerKind kind, const SymMatrix& k, double relative_floor) {
    switch (kind) {
        case OptimizerKind::GD:
        case OptimizerKind::SignGD:
            return precond::Identity{};
        case OptimizerKind::Diagonal:
            return precond::Diagonal{diagonal_scaling(k, relative_floor)};
        case OptimizerKind::FullNG:
            return precond::DirectSolve{};
        case OptimizerKind::MatrixSign:
            return precond::Dense{matrix_sign_setup(k, relative_floor).p};
    }
    fail(ErrorKind::InvalidInput, "build_preconditioner: unknown optimizer");
}

Preconditioner build_preconditioner(OptimizerKind kind, const MatrixXd& f, double relative_floor) {
    require(f.size() > 0 && (f.array() != 0.0).any(), "build_preconditioner: F must be nonzero");
    return build_preconditioner(kind, gram(f, static_cast<int>(f.rows())), relative_floor);
}

double step_size(OptimizerKind kind, const SymMatrix& k, double relative_floor) {
    switch (kind) {
        case OptimizerKind::GD:
            return kStepScale / positive_lambda_max(k);
        case OptimizerKind::Diagonal: {
            // Spectrum of diag(d) K equals that of diag(sqrt d) K diag(sqrt d).
            const VectorXd root = diagonal_scaling(k, relative_floor).cwiseSqrt();
            MatrixXd sym = root.asDiagonal() * k.dense() * root.asDiagonal();
            return kStepScale / positive_lambda_max(SymMatrix::from_lower(std::move(sym)));
        }
        case OptimizerKind::MatrixSign:
            return kStepScale / std::sqrt(positive_lambda_max(k));
        case OptimizerKind::SignGD:
            fail(ErrorKind::InvalidInput, "step_size: SignGD rate comes from the grid search");
        case OptimizerKind::FullNG:
            fail(ErrorKind::InvalidInput, "step_size: FullNG is a direct solve");
    }
    fail(ErrorKind::InvalidInput, "step_size: unknown optimizer");
}

VectorXd gradient(const MatrixXd& f, const VectorXd& a, const VectorXd& y, int n) {
    require(f.cols() == a.size() && f.rows() == y.size() && n >= 1, "gradient: inconsistent shapes");
    return f.transpose() * (f * a - y) / static_cast<double>(n);
}

TrainResult train_with_lr(OptimizerKind kind, const LeastSquaresProblem& problem, double lr, int steps,
                          double relative_floor, const StepObserver& observer) {
    require(kind != OptimizerKind::FullNG, "train_with_lr: FullNG is a direct solve");
    return run_updates(kind, problem, lr, steps, build_preconditioner(kind, problem.gram(), relative_floor),
                       observer);
}

TrainResult train_iterative(OptimizerKind kind, const LeastSquaresProblem& problem, const TrainConfig& cfg) {
    switch (kind) {
        case OptimizerKind::FullNG:
            fail(ErrorKind::InvalidInput, "train_iterative: FullNG is a direct solve");
        case OptimizerKind::SignGD:
            return select_sign_lr(problem, cfg);
        case OptimizerKind::MatrixSign: {
            MatrixSignSetup setup = matrix_sign_setup(problem.gram(), cfg.relative_eig_floor);
            const double lr = kStepScale / std::sqrt(setup.lambda_max);
            return run_updates(kind, problem, lr, cfg.steps, precond::Dense{std::move(setup.p)}, {});
        }
        case OptimizerKind::GD:
        case OptimizerKind::Diagonal: {
            const double lr = step_size(kind, problem.gram(), cfg.relative_eig_floor);
            return run_updates(kind, problem, lr, cfg.steps,
                               build_preconditioner(kind, problem.gram(), cfg.relative_eig_floor), {});
        }
    }
    fail(ErrorKind::InvalidInput, "train_iterative: unknown optimizer");
}

TrainResult train_iterative(OptimizerKind kind, const MatrixXd& f_train, const VectorXd& y_train,
                            const TrainConfig& cfg) {
    return train_iterative(kind, LeastSquaresProblem(f_train, y_train), cfg);
}

TrainResult solve_full_ng(const LeastSquaresProblem& problem, double lambda_reg) {
    TrainResult out;
    out.kind = OptimizerKind::FullNG;
    out.weights = ridge_solve(problem.raw_gram(), problem.raw_moment(), lambda_reg);
    out.lr_used = 0.0;
    out.steps_run = 1;
    out.train_residual_norm = problem.residual_norm(out.weights);
    return out;
}

TrainResult solve_full_ng(const MatrixXd& f_train, const VectorXd& y_train, double lambda_reg) {
    return solve_full_ng(LeastSquaresProblem(f_train, y_train), lambda_reg);
}

TrainResult select_sign_lr(const LeastSquaresProblem& problem, const TrainConfig& cfg) {
    require(!cfg.sign_lr_grid.empty(), "select_sign_lr: learning-rate grid is empty");
    std::optional<TrainResult> best;
    std::optional<DivergenceError> last_error;
    for (double lr : cfg.sign_lr_grid) {
        try {
            TrainResult r = train_with_lr(OptimizerKind::SignGD, problem, lr, cfg.steps, cfg.relative_eig_floor);
            const bool better = !best || r.train_residual_norm < best->train_residual_norm ||
                                (r.train_residual_norm == best->train_residual_norm && r.lr_used < best->lr_used);
            if (better) best = std::move(r);
        } catch (const DivergenceError& e) {
            last_error = e;
        }
    }
    if (!best) throw *last_error;
    return std::move(*best);
}

TrainResult train(OptimizerKind kind, const LeastSquaresProblem& problem, const TrainConfig& cfg) {
    if (kind == OptimizerKind::FullNG) return solve_full_ng(problem, cfg.lambda_reg);
    return train_iterative(kind, problem, cfg);
}

double test_loss(const MatrixXd& f_test, const VectorXd& a, const VectorXd& y_test) {
    require(f_test.cols() == a.size() && f_test.rows() == y_test.size() && f_test.rows() >= 1,
            "test_loss: inconsistent shapes");
    return (f_test * a - y_test).squaredNorm() / static_cast<double>(f_test.rows());
}

void score(TrainResult& result, const MatrixXd& f_test, const VectorXd& y_test) {
    result.test_loss = test_loss(f_test, result.weights, y_test);
}

}  // namespace optscale
