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

#pragma once

#include <array>
#include <functional>
#include <limits>
#include <string_view>
#include <variant>
#include <vector>

#include "optscale/numerics.hpp"

namespace optscale {

enum class OptimizerKind { GD, Diagonal, FullNG, SignGD, MatrixSign };

inline constexpr std::array<OptimizerKind, 5> kAllOptimizers = {
    OptimizerKind::GD, OptimizerKind::Diagonal, OptimizerKind::FullNG, OptimizerKind::SignGD,
    OptimizerKind::MatrixSign};

/// Stable serialized name ("GD", "Diagonal", "FullNG", "SignGD", "MatrixSign").
std::string_view to_string(OptimizerKind kind);
/// Inverse of to_string; throws InvalidInput on unknown names.
OptimizerKind parse_optimizer(std::string_view name);

struct TrainConfig {
    int steps = 2000;
    double lambda_reg = 1e-6;
    std::vector<double> sign_lr_grid = {1e-4, 1e-3, 1e-2};
    /// Eigenvalue and Gram-diagonal floor, relative to the largest one.
    double relative_eig_floor = kRelativeEigFloor;
};

struct TrainResult {
    OptimizerKind kind = OptimizerKind::GD;
    VectorXd weights;
    double lr_used = 0.0;  // 0 for the direct solve
    double train_residual_norm = 0.0;
    double test_loss = std::numeric_limits<double>::quiet_NaN();  // filled by score()
    int steps_run = 0;
};

namespace precond {
struct Identity {};
struct Diagonal {
    VectorXd scale;
};
struct Dense {
    SymMatrix matrix;
};
struct DirectSolve {};
}  // namespace precond

using Preconditioner = std::variant<precond::Identity, precond::Diagonal, precond::Dense, precond::DirectSolve>;

/// K = F^T F / n, exactly symmetric.
SymMatrix gram(const MatrixXd& f, int n);

/// Training split of one cell together with the sufficient statistics every
/// optimizer needs. F and y are borrowed and must outlive the problem.
class LeastSquaresProblem {
public:
    LeastSquaresProblem(const MatrixXd& f, const VectorXd& y);

    const MatrixXd& features() const { return *f_; }
    const VectorXd& targets() const { return *y_; }
    int rows() const { return static_cast<int>(f_->rows()); }
    int dim() const { return static_cast<int>(f_->cols()); }

    /// F^T F, unnormalized.
    const SymMatrix& raw_gram() const { return raw_gram_; }
    /// F^T y, unnormalized.
    const VectorXd& raw_moment() const { return raw_moment_; }
    /// F^T F / n.
    const SymMatrix& gram() const { return gram_; }
    /// F^T y / n.
    const VectorXd& moment() const { return moment_; }

    double residual_norm(const VectorXd& a) const;

private:
    const MatrixXd* f_;
    const VectorXd* y_;
    SymMatrix raw_gram_;
    VectorXd raw_moment_;
    SymMatrix gram_;
    VectorXd moment_;
};

/// Per-coordinate K_jj^{-1/2}; dead coordinates are floored at
/// relative_floor * max_j K_jj.
VectorXd diagonal_scaling(const SymMatrix& k, double relative_floor = kRelativeEigFloor);

Preconditioner build_preconditioner(OptimizerKind kind, const SymMatrix& k,
                                    double relative_floor = kRelativeEigFloor);
Preconditioner build_preconditioner(OptimizerKind kind, const MatrixXd& f,
                                    double relative_floor = kRelativeEigFloor);

/// Deterministic spectral step size for GD, Diagonal and MatrixSign.
double step_size(OptimizerKind kind, const SymMatrix& k, double relative_floor = kRelativeEigFloor);

/// (1/n) F^T (F a - y).
VectorXd gradient(const MatrixXd& f, const VectorXd& a, const VectorXd& y, int n);

/// Called after every update with the zero-based step index and new weights.
using StepObserver = std::function<void(int, const VectorXd&)>;

/// Runs `steps` updates from a = 0 with a fixed learning rate. Throws
/// DivergenceError on the first non-finite weight.
TrainResult train_with_lr(OptimizerKind kind, const LeastSquaresProblem& problem, double lr, int steps,
                          double relative_floor = kRelativeEigFloor, const StepObserver& observer = {});

/// Iterative training with the optimizer's own step-size rule; SignGD goes
/// through select_sign_lr.
TrainResult train_iterative(OptimizerKind kind, const LeastSquaresProblem& problem, const TrainConfig& cfg);
TrainResult train_iterative(OptimizerKind kind, const MatrixXd& f_train, const VectorXd& y_train,
                            const TrainConfig& cfg);

/// Ridge solution (F^T F + lambda_reg I)^{-1} F^T y.
TrainResult solve_full_ng(const LeastSquaresProblem& problem, double lambda_reg);
TrainResult solve_full_ng(const MatrixXd& f_train, const VectorXd& y_train, double lambda_reg);

/// One SignGD run per grid value; keeps the smallest training residual,
/// preferring the smaller rate on ties. Diverged runs are skipped.
TrainResult select_sign_lr(const LeastSquaresProblem& problem, const TrainConfig& cfg);

/// Dispatches to solve_full_ng or train_iterative.
TrainResult train(OptimizerKind kind, const LeastSquaresProblem& problem, const TrainConfig& cfg);

/// Mean over rows of (F a - y)^2.
double test_loss(const MatrixXd& f_test, const VectorXd& a, const VectorXd& y_test);

void score(TrainResult& result, const MatrixXd& f_test, const VectorXd& y_test);

}  // namespace optscale
