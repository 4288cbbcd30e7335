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

#include "optscale/datagen.hpp"

#include <algorithm>
#include <cmath>

#include "optscale/error.hpp"

namespace optscale {

VectorXd power_law_eigenvalues(const SpectrumConfig& cfg) {
    require(cfg.dim >= 1, "power_law_eigenvalues: dim must be >= 1");
    require(cfg.spectral_exponent > 0.0 && std::isfinite(cfg.spectral_exponent),
            "power_law_eigenvalues: spectral exponent must be > 0");
    VectorXd eigs(cfg.dim);
    for (int i = 0; i < cfg.dim; ++i) eigs(i) = std::pow(static_cast<double>(i + 1), -(1.0 + cfg.spectral_exponent));
    return eigs;
}

MatrixXd sample_inputs(Stream& rng, int n, const VectorXd& eigs) {
    require(n >= 1, "sample_inputs: n must be >= 1");
    require(eigs.size() >= 1 && (eigs.array() > 0.0).all(), "sample_inputs: eigenvalues must be positive");
    const VectorXd scale = eigs.array().sqrt();
    MatrixXd x(n, eigs.size());
    for (int i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < eigs.size(); ++j) x(i, j) = scale(j) * rng.normal();
    return x;
}

MatrixXd sample_feature_weights(Stream& rng, int rows, int dim) {
    require(rows >= 1 && dim >= 1, "sample_feature_weights: shape must be positive");
    const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    MatrixXd w(rows, dim);
    for (int k = 0; k < rows; ++k)
        for (int j = 0; j < dim; ++j) w(k, j) = scale * rng.normal();
    return w;
}

Teacher sample_teacher(Stream& rng, const TeacherConfig& cfg, int dim) {
    require(cfg.width >= 1, "sample_teacher: width must be >= 1");
    require(cfg.source_exponent > 0.0, "sample_teacher: source exponent must be > 0");
    Teacher t;
    t.weights = sample_feature_weights(rng, cfg.width, dim);
    t.coeffs.resize(cfg.width);
    for (int k = 0; k < cfg.width; ++k) t.coeffs(k) = std::pow(static_cast<double>(k + 1), -cfg.source_exponent / 2.0);
    return t;
}

VectorXd teacher_targets(const Teacher& teacher, const MatrixXd& x) {
    require(x.cols() == teacher.weights.cols(), "teacher_targets: input dimension does not match teacher");
    return feature_matrix(x, teacher.weights) * teacher.coeffs;
}

MatrixXd feature_matrix(const MatrixXd& x, const MatrixXd& w) {
    require(x.cols() == w.cols(), "feature_matrix: inner dimensions differ");
    MatrixXd f = x * w.transpose();
    return f.cwiseMax(0.0);
}

NormalizedTargets normalize_targets(const VectorXd& y_train_raw, const VectorXd& y_test_raw) {
    require(y_train_raw.size() >= 2, "normalize_targets: need at least two training targets");
    const double mean = y_train_raw.mean();
    const double var = (y_train_raw.array() - mean).square().mean();
    if (!(var > 0.0) || !std::isfinite(var)) {
        fail(ErrorKind::DegenerateTarget, "normalize_targets: training targets have zero variance");
    }
    NormalizedTargets out;
    out.stats = {mean, std::sqrt(var)};
    out.train = (y_train_raw.array() - mean) / out.stats.std;
    out.test = (y_test_raw.array() - mean) / out.stats.std;
    return out;
}

int train_size(int n_features) {
    require(n_features >= 1, "train_size: N must be >= 1");
    const long long twenty_n = 20LL * n_features;
    return static_cast<int>(std::min<long long>(50000, std::max<long long>(10000, twenty_n)));
}

DatasetCell realize_cell(const Teacher& teacher, const VectorXd& eigs, int n_features, int n_train,
                         int n_test, CellStreams& streams) {
    require(eigs.size() == teacher.weights.cols(), "realize_cell: spectrum and teacher dimensions differ");
    DatasetCell cell;
    VectorXd y_train_raw, y_test_raw;
    const MatrixXd w = sample_feature_weights(streams.student_weights, n_features, static_cast<int>(eigs.size()));
    {
        MatrixXd x = sample_inputs(streams.train_inputs, n_train, eigs);
        y_train_raw = teacher_targets(teacher, x);
        cell.f_train = feature_matrix(x, w);
    }
    {
        MatrixXd x = sample_inputs(streams.test_inputs, n_test, eigs);
        y_test_raw = teacher_targets(teacher, x);
        cell.f_test = feature_matrix(x, w);
    }
    NormalizedTargets y = normalize_targets(y_train_raw, y_test_raw);
    cell.y_train = std::move(y.train);
    cell.y_test = std::move(y.test);
    cell.norm_stats = y.stats;
    return cell;
}

}  // namespace optscale
