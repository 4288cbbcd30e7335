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

#include "optscale/numerics.hpp"
#include "optscale/rng.hpp"

namespace optscale {

struct SpectrumConfig {
    int dim = 1000;
    double spectral_exponent = 1.0;  // s
};

struct TeacherConfig {
    int width = 100;               // K*
    double source_exponent = 1.0;  // b
};

/// Target function sum_k coeffs[k] * relu(weights.row(k) . x).
struct Teacher {
    MatrixXd weights;  // K* x D, rows ~ N(0, I/D)
    VectorXd coeffs;   // v_k = k^{-b/2}
};

struct NormStats {
    double mean = 0.0;
    double std = 1.0;
};

struct NormalizedTargets {
    VectorXd train;
    VectorXd test;
    NormStats stats;
};

/// One realized problem instance, shared by every optimizer that runs on it.
struct DatasetCell {
    MatrixXd f_train;  // n_train x N, ReLU features
    VectorXd y_train;  // normalized
    MatrixXd f_test;   // n_test x N
    VectorXd y_test;   // normalized with training statistics
    NormStats norm_stats;
};

/// lambda_i = i^{-(1+s)} for i = 1..D.
VectorXd power_law_eigenvalues(const SpectrumConfig& cfg);

/// n rows of N(0, diag(eigs)) drawn in row-major order.
MatrixXd sample_inputs(Stream& rng, int n, const VectorXd& eigs);

/// Random-feature weights: `rows` x `dim`, entries ~ N(0, 1/dim).
MatrixXd sample_feature_weights(Stream& rng, int rows, int dim);

Teacher sample_teacher(Stream& rng, const TeacherConfig& cfg, int dim);

VectorXd teacher_targets(const Teacher& teacher, const MatrixXd& x);

/// F_ij = max(0, x_i . w_j).
MatrixXd feature_matrix(const MatrixXd& x, const MatrixXd& w);

/// Standardizes both splits with the training split's mean and population std.
NormalizedTargets normalize_targets(const VectorXd& y_train_raw, const VectorXd& y_test_raw);

/// min(50000, max(10000, 20 N)).
int train_size(int n_features);

/// Independent streams for the three per-cell draws.
struct CellStreams {
    Stream train_inputs;
    Stream test_inputs;
    Stream student_weights;
};

DatasetCell realize_cell(const Teacher& teacher, const VectorXd& eigs, int n_features, int n_train,
                         int n_test, CellStreams& streams);

}  // namespace optscale
