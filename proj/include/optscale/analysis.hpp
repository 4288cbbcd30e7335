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
#include <string>
#include <utility>
#include <vector>

#include "optscale/experiment.hpp"

namespace optscale {

inline constexpr int kDefaultFitNMin = 200;
inline constexpr double kR2Flag = 0.8;

/// L(N) ~ exp(intercept) * N^{-alpha}, fitted on seed-averaged losses.
struct PowerLawFit {
    double alpha = 0.0;
    double ci95 = 0.0;  // half-width, Student-t with n-2 dof
    double r2 = 1.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    int n_points = 0;
    int n_min_used = 0;
    /// Some N level lost more than half of its seeds to divergence.
    bool low_confidence = false;
};

/// Two-sided 95% Student-t quantile with `dof` degrees of freedom.
double t_quantile_975(int dof);

/// OLS of ln(loss) on ln(N). Losses must be positive.
PowerLawFit fit_power_law(std::span<const double> ns, std::span<const double> losses);

/// Averages test loss over non-diverged seeds per N >= n_min, then fits.
PowerLawFit fit_alpha(const ResultsTable& results, double s, OptimizerKind optimizer, int n_min = kDefaultFitNMin);

struct FitCell {
    std::optional<PowerLawFit> fit;
    std::string error;  // set when the fit failed
};

struct AlphaTable {
    std::vector<OptimizerKind> optimizers;  // rows
    std::vector<double> s_values;           // columns
    std::vector<std::vector<FitCell>> cells;  // [row][column]
    std::vector<int> best;                    // per column: row of max alpha, -1 if none

    const FitCell& at(OptimizerKind optimizer, double s) const;
    bool has(OptimizerKind optimizer) const;
};

/// One fit per (optimizer, s) pair present in `results`.
AlphaTable alpha_table(const ResultsTable& results, int n_min = kDefaultFitNMin);

struct R2Entry {
    OptimizerKind optimizer;
    double s;
    std::optional<double> r2;
    bool flagged = false;  // r2 < 0.8
    std::string error;
};

std::vector<R2Entry> r2_table(const AlphaTable& table);
std::vector<R2Entry> r2_table(const ResultsTable& results, int n_min = kDefaultFitNMin);

/// (s, alpha_opt(s) - alpha_baseline(s)) per column.
std::vector<std::pair<double, double>> delta_alpha(const AlphaTable& table, OptimizerKind optimizer,
                                                   OptimizerKind baseline = OptimizerKind::GD);

struct Multiplier {
    double value = 1.0;
    /// GD's alpha is not distinguishable from zero, so extrapolation is unreliable.
    bool unbounded = false;
};

/// How many times larger the GD student must be to reach the loss `fit_opt`
/// predicts at n_ref, using both fitted lines.
Multiplier compute_multiplier(const PowerLawFit& fit_gd, const PowerLawFit& fit_opt, double n_ref);

struct GapRow {
    OptimizerKind optimizer;
    double s;
    int n;
    double mean_gap;
    int count;
};

/// Seed-averaged convergence gaps, FullNG excluded.
std::vector<GapRow> convergence_summary(const ResultsTable& results);

struct LossRow {
    OptimizerKind optimizer;
    double s;
    int n;
    double mean_loss;
    double stderr_loss;  // sample std / sqrt(count)
    int count;
};

std::vector<LossRow> loss_summary(const ResultsTable& results);

enum class PayoffBand { Negligible, Moderate, Large };
const char* to_string(PayoffBand band);

inline constexpr double kNegligibleBelow = 0.3;
inline constexpr double kLargeFrom = 0.75;

PayoffBand payoff_band(double s_hat);

struct DiagnosticReport {
    double s_hat = 0.0;
    double r2 = 1.0;
    PayoffBand band = PayoffBand::Negligible;
    int n_used = 0;
};

/// 1-based inclusive index range.
struct IndexRange {
    int first = 1;
    int last = 0;  // 0 means "through the end"
};

/// OLS of ln(lambda_i) on ln(i); s_hat = -slope - 1.
DiagnosticReport estimate_spectral_exponent(std::span<const double> eigs, IndexRange range = {});

}  // namespace optscale
