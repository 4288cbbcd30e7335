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

// Per-mode convergence calculators for preconditioned gradient descent on a
// quadratic with kernel spectrum lambda_1 >= lambda_2 >= ...
//
// After T steps from zero, mode i has removed the fraction
//   GD:          1 - (1 - eta lambda_i)^T
//   full NG:     1 - (1 - eta)^T                     (spectrum-free)
//   matrix sign: 1 - (1 - eta sqrt(lambda_i / lambda_1))^T
// of its initial error. A mode counts as learned when its factor exceeds
// 1 - epsilon.

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "optscale/numerics.hpp"

namespace optscale::theory {

struct ModeConvergence {
    int mode_index = 1;  // 1-based
    double eigenvalue = 0.0;
    double factor = 0.0;
};

struct CapacityReport {
    int n = 0;
    int effective_modes = 0;
    double wasted_fraction = 0.0;  // 1 - effective_modes / n
    double epsilon = 0.01;
};

inline constexpr double kDefaultEpsilon = 0.01;
/// Table-style GD rule: eta = 1.5 / lambda_1.
inline constexpr double kGdStepScale = 1.5;

double conv_factor_gd(double eta, double lambda, int steps);
/// True when eta * lambda > 2, i.e. the mode's error grows.
bool mode_diverges(double eta, double lambda);
double conv_factor_ng(double eta, int steps);
double conv_factor_matrix_sign(double eta, double lambda, double lambda_top, int steps);

/// lambda_1 / lambda_N = N^{1+s}.
double dynamic_range(int n, double s);

std::vector<ModeConvergence> gd_factors(std::span<const double> eigs, double eta, int steps);
std::vector<ModeConvergence> ng_factors(std::span<const double> eigs, double eta, int steps);
std::vector<ModeConvergence> matrix_sign_factors(std::span<const double> eigs, double eta, int steps);

CapacityReport capacity_report(std::span<const ModeConvergence> factors, int n, double epsilon);

struct PropositionRow {
    double s = 0.0;  // NaN marks the flat-spectrum reference row
    CapacityReport gd;
    CapacityReport ng;
    CapacityReport matrix_sign;
    int ng_minus_gd() const { return ng.effective_modes - gd.effective_modes; }
};

struct PropositionReport {
    std::vector<PropositionRow> rows;  // sorted by s
    PropositionRow flat;               // every eigenvalue equal
    bool claim_i = true;    // N_eff(NG) >= N_eff(GD) at every s
    bool claim_ii = true;   // GD wasted fraction non-decreasing in s
    bool claim_iii = true;  // NG-GD gap non-decreasing in s, smallest at the smallest s, zero when flat
    std::vector<std::string> violations;

    bool all_satisfied() const { return claim_i && claim_ii && claim_iii; }
};

struct PropositionConfig {
    std::vector<double> s_grid = {0.25, 0.5, 1.0, 1.5, 2.0};
    int n = 1000;
    int steps = 2000;
    double epsilon = kDefaultEpsilon;
    /// GD uses eta = gd_step_scale / lambda_1; NG and matrix sign use eta = 1.
    double gd_step_scale = kGdStepScale;
};

/// Evaluates the three spectral claims on the idealized spectrum
/// lambda_i = i^{-(1+s)}, i = 1..N.
PropositionReport proposition_check(const PropositionConfig& cfg);

/// Same three capacity reports for one measured spectrum (e.g. Gram
/// eigenvalues of a realized cell).
PropositionRow capacity_for_spectrum(std::span<const double> eigs, int steps, double epsilon,
                                     double gd_step_scale = kGdStepScale);

/// Delimited rows: s,optimizer,N,effective_modes,wasted_fraction,epsilon.
void write_proposition_csv(std::ostream& out, const PropositionReport& report);
/// Human-readable per-claim lines.
void print_proposition_report(std::ostream& out, const PropositionReport& report);

}  // namespace optscale::theory
