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

#include "optscale/theory.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "optscale/datagen.hpp"
#include "optscale/error.hpp"
#include "optscale/text.hpp"

namespace optscale::theory {

double conv_factor_gd(double eta, double lambda, int steps) {
    require(eta > 0.0 && lambda > 0.0 && steps >= 1, "conv_factor_gd: need eta > 0, lambda > 0, T >= 1");
    return 1.0 - std::pow(1.0 - eta * lambda, steps);
}

bool mode_diverges(double eta, double lambda) { return eta * lambda > 2.0; }

double conv_factor_ng(double eta, int steps) {
    require(eta > 0.0 && eta <= 1.0, "conv_factor_ng: eta must lie in (0, 1]");
    return conv_factor_gd(eta, 1.0, steps);
}

double conv_factor_matrix_sign(double eta, double lambda, double lambda_top, int steps) {
    require(eta > 0.0 && eta <= 1.0, "conv_factor_matrix_sign: eta must lie in (0, 1]");
    require(lambda > 0.0 && lambda <= lambda_top, "conv_factor_matrix_sign: need 0 < lambda <= lambda_top");
    return conv_factor_gd(eta, std::sqrt(lambda) / std::sqrt(lambda_top), steps);
}

double dynamic_range(int n, double s) {
    require(n >= 1 && s > 0.0, "dynamic_range: need N >= 1 and s > 0");
    return std::pow(static_cast<double>(n), 1.0 + s);
}

std::vector<ModeConvergence> gd_factors(std::span<const double> eigs, double eta, int steps) {
    std::vector<ModeConvergence> out;
    out.reserve(eigs.size());
    for (std::size_t i = 0; i < eigs.size(); ++i)
        out.push_back({static_cast<int>(i + 1), eigs[i], conv_factor_gd(eta, eigs[i], steps)});
    return out;
}

std::vector<ModeConvergence> ng_factors(std::span<const double> eigs, double eta, int steps) {
    const double c = conv_factor_ng(eta, steps);
    std::vector<ModeConvergence> out;
    out.reserve(eigs.size());
    for (std::size_t i = 0; i < eigs.size(); ++i) out.push_back({static_cast<int>(i + 1), eigs[i], c});
    return out;
}

std::vector<ModeConvergence> matrix_sign_factors(std::span<const double> eigs, double eta, int steps) {
    require(!eigs.empty(), "matrix_sign_factors: empty spectrum");
    const double top = *std::max_element(eigs.begin(), eigs.end());
    std::vector<ModeConvergence> out;
    out.reserve(eigs.size());
    for (std::size_t i = 0; i < eigs.size(); ++i)
        out.push_back({static_cast<int>(i + 1), eigs[i], conv_factor_matrix_sign(eta, eigs[i], top, steps)});
    return out;
}

CapacityReport capacity_report(std::span<const ModeConvergence> factors, int n, double epsilon) {
    require(n >= 1, "capacity_report: N must be >= 1");
    require(epsilon > 0.0 && epsilon < 1.0, "capacity_report: epsilon must lie in (0, 1)");
    CapacityReport r;
    r.n = n;
    r.epsilon = epsilon;
    const std::size_t limit = std::min<std::size_t>(factors.size(), static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < limit; ++i)
        if (factors[i].factor > 1.0 - epsilon) ++r.effective_modes;
    r.wasted_fraction = 1.0 - static_cast<double>(r.effective_modes) / n;
    return r;
}

PropositionRow capacity_for_spectrum(std::span<const double> eigs, int steps, double epsilon, double gd_step_scale) {
    require(!eigs.empty(), "capacity_for_spectrum: empty spectrum");
    const double top = *std::max_element(eigs.begin(), eigs.end());
    const int n = static_cast<int>(eigs.size());
    PropositionRow row;
    row.gd = capacity_report(gd_factors(eigs, gd_step_scale / top, steps), n, epsilon);
    row.ng = capacity_report(ng_factors(eigs, 1.0, steps), n, epsilon);
    row.matrix_sign = capacity_report(matrix_sign_factors(eigs, 1.0, steps), n, epsilon);
    return row;
}

PropositionReport proposition_check(const PropositionConfig& cfg) {
    require(!cfg.s_grid.empty(), "proposition_check: s grid is empty");
    require(cfg.n >= 1 && cfg.steps >= 1, "proposition_check: need N >= 1 and T >= 1");
    require(cfg.epsilon > 0.0 && cfg.epsilon < 1.0, "proposition_check: epsilon must lie in (0, 1)");
    std::vector<double> grid = cfg.s_grid;
    std::sort(grid.begin(), grid.end());

    PropositionReport report;
    for (double s : grid) {
        const VectorXd eigs = power_law_eigenvalues({cfg.n, s});
        PropositionRow row = capacity_for_spectrum(std::span(eigs.data(), eigs.size()), cfg.steps, cfg.epsilon,
                                                   cfg.gd_step_scale);
        row.s = s;
        report.rows.push_back(row);
    }
    const std::vector<double> flat(cfg.n, 1.0);
    report.flat = capacity_for_spectrum(flat, cfg.steps, cfg.epsilon, cfg.gd_step_scale);
    report.flat.s = std::nan("");

    auto violate = [&](bool& claim, const std::string& msg) {
        claim = false;
        report.violations.push_back(msg);
    };
    for (std::size_t k = 0; k < report.rows.size(); ++k) {
        const PropositionRow& r = report.rows[k];
        if (r.ng.effective_modes < r.gd.effective_modes)
            violate(report.claim_i, "claim (i): N_eff(NG) < N_eff(GD) at s=" + format_double(r.s));
        if (k == 0) continue;
        const PropositionRow& prev = report.rows[k - 1];
        if (r.gd.wasted_fraction < prev.gd.wasted_fraction)
            violate(report.claim_ii, "claim (ii): GD wasted fraction decreases from s=" + format_double(prev.s) +
                                         " to s=" + format_double(r.s));
        if (r.ng_minus_gd() < prev.ng_minus_gd())
            violate(report.claim_iii, "claim (iii): NG-GD gap shrinks from s=" + format_double(prev.s) +
                                          " to s=" + format_double(r.s));
    }
    if (report.flat.ng_minus_gd() != 0)
        violate(report.claim_iii, "claim (iii): NG-GD gap is nonzero on the flat spectrum");
    return report;
}

void write_proposition_csv(std::ostream& out, const PropositionReport& report) {
    out << "s,optimizer,N,effective_modes,wasted_fraction,epsilon\n";
    auto emit = [&](const std::string& s, const char* name, const CapacityReport& c) {
        out << s << ',' << name << ',' << c.n << ',' << c.effective_modes << ',' << format_double(c.wasted_fraction)
            << ',' << format_double(c.epsilon) << '\n';
    };
    auto emit_row = [&](const std::string& s, const PropositionRow& r) {
        emit(s, "GD", r.gd);
        emit(s, "FullNG", r.ng);
        emit(s, "MatrixSign", r.matrix_sign);
    };
    for (const auto& r : report.rows) emit_row(format_double(r.s), r);
    emit_row("flat", report.flat);
}

void print_proposition_report(std::ostream& out, const PropositionReport& report) {
    out << "      s   Neff(GD)  Neff(NG)  Neff(MS)  NG-GD  wasted(GD)\n";
    auto line = [&](const std::string& s, const PropositionRow& r) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%7s  %9d %9d %9d %6d  %10.4f\n", s.c_str(), r.gd.effective_modes,
                      r.ng.effective_modes, r.matrix_sign.effective_modes, r.ng_minus_gd(), r.gd.wasted_fraction);
        out << buf;
    };
    for (const auto& r : report.rows) line(format_double(r.s), r);
    line("flat", report.flat);
    out << "claim (i)   N_eff(NG) >= N_eff(GD) at every s: " << (report.claim_i ? "satisfied" : "violated") << '\n';
    out << "claim (ii)  GD wasted fraction non-decreasing in s: " << (report.claim_ii ? "satisfied" : "violated")
        << '\n';
    out << "claim (iii) NG-GD gap shrinks toward s -> 0 (flat gap " << report.flat.ng_minus_gd()
        << "): " << (report.claim_iii ? "satisfied" : "violated") << '\n';
    for (const auto& v : report.violations) out << "  " << v << '\n';
}

}  // namespace optscale::theory
