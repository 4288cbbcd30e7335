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

#include "optscale/numerics.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "optscale/error.hpp"

namespace optscale {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidInput: return "invalid input";
        case ErrorKind::NumericFailure: return "numeric failure";
        case ErrorKind::DegenerateSpectrum: return "degenerate spectrum";
        case ErrorKind::DegenerateTarget: return "degenerate target";
        case ErrorKind::Divergence: return "divergence";
        case ErrorKind::InsufficientData: return "insufficient data";
        case ErrorKind::InvalidLoss: return "invalid loss";
    }
    return "unknown";
}

SymMatrix::SymMatrix(Eigen::Index order) : m_(MatrixXd::Zero(order, order)) {
    require(order >= 1, "SymMatrix: order must be >= 1");
}

SymMatrix SymMatrix::from_dense(MatrixXd m) {
    require(m.rows() >= 1 && m.rows() == m.cols(), "SymMatrix: matrix must be square and non-empty");
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = j + 1; i < m.rows(); ++i) {
            if (m(i, j) != m(j, i)) {
                std::ostringstream os;
                os << "SymMatrix: entry (" << i << "," << j << ") differs from its transpose";
                fail(ErrorKind::InvalidInput, os.str());
            }
        }
    }
    return SymMatrix(std::move(m), 0);
}

SymMatrix SymMatrix::from_lower(MatrixXd m) {
    require(m.rows() >= 1 && m.rows() == m.cols(), "SymMatrix: matrix must be square and non-empty");
    m.triangularView<Eigen::StrictlyUpper>() = m.transpose();
    return SymMatrix(std::move(m), 0);
}

SymMatrix SymMatrix::identity(Eigen::Index order) {
    require(order >= 1, "SymMatrix: order must be >= 1");
    return SymMatrix(MatrixXd::Identity(order, order), 0);
}

SymMatrix SymMatrix::diagonal(std::span<const double> values) {
    require(!values.empty(), "SymMatrix: diagonal must be non-empty");
    MatrixXd m = MatrixXd::Zero(values.size(), values.size());
    for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
    return SymMatrix(std::move(m), 0);
}

SymMatrix SymMatrix::scaled(double factor) const {
    return SymMatrix(m_ * factor, 0);
}

namespace {

void require_finite(const SymMatrix& a, const char* who) {
    if (!a.dense().allFinite()) fail(ErrorKind::InvalidInput, std::string(who) + ": non-finite entries");
}

template <typename Solver>
void check_converged(const Solver& solver, Eigen::Index order) {
    if (solver.info() != Eigen::Success) {
        std::ostringstream os;
        // Eigen's tridiagonal QR gives up after 30 sweeps per eigenvalue.
        os << "sym_eig: no convergence within " << 30 * order << " QR iterations";
        fail(ErrorKind::NumericFailure, os.str());
    }
}

}  // namespace

EigenDecomposition sym_eig(const SymMatrix& a) {
    require_finite(a, "sym_eig");
    Eigen::SelfAdjointEigenSolver<MatrixXd> solver(a.dense(), Eigen::ComputeEigenvectors);
    check_converged(solver, a.order());
    // Eigen returns ascending order.
    EigenDecomposition out;
    out.values = solver.eigenvalues().reverse();
    out.vectors = solver.eigenvectors().rowwise().reverse();
    return out;
}

VectorXd sym_eigenvalues(const SymMatrix& a) {
    require_finite(a, "sym_eigenvalues");
    Eigen::SelfAdjointEigenSolver<MatrixXd> solver(a.dense(), Eigen::EigenvaluesOnly);
    check_converged(solver, a.order());
    return solver.eigenvalues().reverse();
}

double largest_eigenvalue(const SymMatrix& a) {
    return sym_eigenvalues(a)(0);
}

VectorXd ridge_solve(const SymMatrix& g, const VectorXd& rhs, double lambda_reg) {
    require(rhs.size() == g.order(), "ridge_solve: rhs length must equal matrix order");
    require(lambda_reg >= 0.0, "ridge_solve: lambda_reg must be non-negative");
    MatrixXd shifted = g.dense();
    shifted.diagonal().array() += lambda_reg;
    Eigen::LLT<MatrixXd> llt(shifted);
    if (llt.info() != Eigen::Success) {
        fail(ErrorKind::NumericFailure, "ridge_solve: Cholesky factorization failed (matrix not positive definite)");
    }
    return llt.solve(rhs);
}

SymMatrix spd_inv_sqrt(const SymMatrix& k, std::optional<double> eig_floor) {
    EigenDecomposition eig = sym_eig(k);
    const double top = eig.values(0);
    const double floor = eig_floor.value_or(kRelativeEigFloor * top);
    require(floor > 0.0 || !eig_floor, "spd_inv_sqrt: eig_floor must be positive");
    if (!(top >= floor) || !(floor > 0.0)) {
        fail(ErrorKind::DegenerateSpectrum, "spd_inv_sqrt: every eigenvalue is below the floor");
    }
    VectorXd scale = eig.values.array().max(floor).rsqrt();
    MatrixXd p = eig.vectors * scale.asDiagonal() * eig.vectors.transpose();
    return SymMatrix::from_lower(std::move(p));
}

LinearFit ols_fit(std::span<const double> xs, std::span<const double> ys) {
    require(xs.size() == ys.size(), "ols_fit: xs and ys differ in length");
    require(xs.size() >= 2, "ols_fit: need at least two points");
    const double n = static_cast<double>(xs.size());

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;

    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0.0)) fail(ErrorKind::InvalidInput, "ols_fit: xs are all identical");

    LinearFit fit;
    fit.n_points = static_cast<int>(xs.size());
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;

    double ss_res = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
        ss_res += r * r;
    }
    // Two points always interpolate; rounding in the residuals is noise.
    if (xs.size() == 2) ss_res = 0.0;

    fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : (ss_res == 0.0 ? 1.0 : -INFINITY);
    fit.slope_se = ss_res == 0.0 ? 0.0 : std::sqrt(ss_res / (n - 2.0) / sxx);
    return fit;
}

}  // namespace optscale
