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

#include <optional>
#include <span>

#include <Eigen/Dense>

namespace optscale {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Dense symmetric matrix. Symmetry is exact in storage: every constructor
/// either verifies it bit-for-bit or mirrors the lower triangle.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(Eigen::Index order);

    /// Throws InvalidInput unless `m` is square, non-empty and exactly symmetric.
    static SymMatrix from_dense(MatrixXd m);
    /// Copies the lower triangle of `m` onto the upper one.
    static SymMatrix from_lower(MatrixXd m);
    static SymMatrix identity(Eigen::Index order);
    static SymMatrix diagonal(std::span<const double> values);

    Eigen::Index order() const { return m_.rows(); }
    const MatrixXd& dense() const { return m_; }
    double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

    SymMatrix scaled(double factor) const;

private:
    explicit SymMatrix(MatrixXd m, int) : m_(std::move(m)) {}
    MatrixXd m_;
};

struct EigenDecomposition {
    VectorXd values;   // descending
    MatrixXd vectors;  // column k pairs with values[k]
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double r2 = 1.0;
    int n_points = 0;
};

/// Full symmetric eigendecomposition, eigenvalues sorted descending.
EigenDecomposition sym_eig(const SymMatrix& a);

/// Eigenvalues only, descending. Cheaper than sym_eig when vectors are unused.
VectorXd sym_eigenvalues(const SymMatrix& a);

double largest_eigenvalue(const SymMatrix& a);

/// Solves (G + lambda_reg I) x = rhs by Cholesky.
VectorXd ridge_solve(const SymMatrix& g, const VectorXd& rhs, double lambda_reg);

/// V diag(max(values, eig_floor)^{-1/2}) V^T. When `eig_floor` is absent it
/// defaults to 1e-12 times the largest eigenvalue.
SymMatrix spd_inv_sqrt(const SymMatrix& k, std::optional<double> eig_floor = {});

inline constexpr double kRelativeEigFloor = 1e-12;

/// Ordinary least squares y = intercept + slope * x.
LinearFit ols_fit(std::span<const double> xs, std::span<const double> ys);

}  // namespace optscale
