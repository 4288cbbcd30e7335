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

#include "optscale/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include <boost/math/distributions/students_t.hpp>

#include "optscale/error.hpp"
#include "optscale/text.hpp"

namespace optscale {

namespace {

std::string pair_name(OptimizerKind k, double s) {
    return "(" + std::string(to_string(k)) + ", s=" + format_double(s) + ")";
}

bool usable(const CellResult& r) { return !r.diverged && std::isfinite(r.test_loss); }

}  // namespace

double t_quantile_975(int dof) {
    if (dof <= 0) return INFINITY;
    boost::math::students_t dist(dof);
    return boost::math::quantile(dist, 0.975);
}

PowerLawFit fit_power_law(std::span<const double> ns, std::span<const double> losses) {
    require(ns.size() == losses.size(), "fit_power_law: N and loss lists differ in length");
    if (ns.size() < 2) fail(ErrorKind::InsufficientData, "fit_power_law: need at least two model sizes");
    std::vector<double> x, y;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        if (!(losses[i] > 0.0) || !std::isfinite(losses[i]))
            fail(ErrorKind::InvalidLoss, "fit_power_law: non-positive mean loss at N=" + format_double(ns[i]));
        x.push_back(std::log(ns[i]));
        y.push_back(std::log(losses[i]));
    }
    const LinearFit lf = ols_fit(x, y);
    PowerLawFit fit;
    fit.alpha = -lf.slope;
    fit.intercept = lf.intercept;
    fit.r2 = lf.r2;
    fit.slope_se = lf.slope_se;
    fit.n_points = lf.n_points;
    fit.ci95 = fit.n_points > 2 ? t_quantile_975(fit.n_points - 2) * lf.slope_se : INFINITY;
    fit.n_min_used = static_cast<int>(*std::min_element(ns.begin(), ns.end()));
    return fit;
}

PowerLawFit fit_alpha(const ResultsTable& results, double s, OptimizerKind optimizer, int n_min) {
    struct Level {
        double sum = 0.0;
        int used = 0;
        int total = 0;
    };
    std::map<int, Level> levels;
    for (const auto& r : results) {
        if (r.s != s || r.optimizer != optimizer || r.n < n_min) continue;
        Level& lv = levels[r.n];
        ++lv.total;
        if (usable(r)) {
            lv.sum += r.test_loss;
            ++lv.used;
        }
    }
    std::vector<double> ns, losses;
    bool low_confidence = false;
    for (const auto& [n, lv] : levels) {
        if (2 * lv.used < lv.total) low_confidence = true;
        if (lv.used == 0) continue;
        ns.push_back(n);
        losses.push_back(lv.sum / lv.used);
    }
    if (ns.size() < 2) {
        fail(ErrorKind::InsufficientData, "fit_alpha: fewer than two usable N >= " + std::to_string(n_min) + " for " +
                                              pair_name(optimizer, s));
    }
    PowerLawFit fit = fit_power_law(ns, losses);
    fit.low_confidence = low_confidence;
    return fit;
}

const FitCell& AlphaTable::at(OptimizerKind optimizer, double s) const {
    const auto row = std::find(optimizers.begin(), optimizers.end(), optimizer);
    const auto col = std::find(s_values.begin(), s_values.end(), s);
    if (row == optimizers.end() || col == s_values.end())
        fail(ErrorKind::InsufficientData, "no fit for " + pair_name(optimizer, s));
    return cells[row - optimizers.begin()][col - s_values.begin()];
}

bool AlphaTable::has(OptimizerKind optimizer) const {
    return std::find(optimizers.begin(), optimizers.end(), optimizer) != optimizers.end();
}

AlphaTable alpha_table(const ResultsTable& results, int n_min) {
    std::set<OptimizerKind> opts;
    std::set<double> ss;
    for (const auto& r : results) {
        opts.insert(r.optimizer);
        ss.insert(r.s);
    }
    if (opts.empty()) fail(ErrorKind::InsufficientData, "alpha_table: results are empty");
    AlphaTable t;
    t.optimizers.assign(opts.begin(), opts.end());
    t.s_values.assign(ss.begin(), ss.end());
    t.cells.assign(t.optimizers.size(), std::vector<FitCell>(t.s_values.size()));
    for (std::size_t i = 0; i < t.optimizers.size(); ++i) {
        for (std::size_t j = 0; j < t.s_values.size(); ++j) {
            try {
                t.cells[i][j].fit = fit_alpha(results, t.s_values[j], t.optimizers[i], n_min);
            } catch (const Error& e) {
                t.cells[i][j].error = e.what();
            }
        }
    }
    t.best.assign(t.s_values.size(), -1);
    for (std::size_t j = 0; j < t.s_values.size(); ++j) {
        for (std::size_t i = 0; i < t.optimizers.size(); ++i) {
            const auto& c = t.cells[i][j];
            if (!c.fit) continue;
            if (t.best[j] < 0 || c.fit->alpha > t.cells[t.best[j]][j].fit->alpha) t.best[j] = static_cast<int>(i);
        }
    }
    return t;
}

std::vector<R2Entry> r2_table(const AlphaTable& table) {
    std::vector<R2Entry> out;
    for (std::size_t i = 0; i < table.optimizers.size(); ++i) {
        for (std::size_t j = 0; j < table.s_values.size(); ++j) {
            const FitCell& c = table.cells[i][j];
            R2Entry e{table.optimizers[i], table.s_values[j], std::nullopt, false, c.error};
            if (c.fit) {
                e.r2 = c.fit->r2;
                e.flagged = c.fit->r2 < kR2Flag;
            }
            out.push_back(std::move(e));
        }
    }
    return out;
}

std::vector<R2Entry> r2_table(const ResultsTable& results, int n_min) {
    return r2_table(alpha_table(results, n_min));
}

std::vector<std::pair<double, double>> delta_alpha(const AlphaTable& table, OptimizerKind optimizer,
                                                   OptimizerKind baseline) {
    if (!table.has(optimizer) || !table.has(baseline)) {
        fail(ErrorKind::InsufficientData, "delta_alpha: results lack " +
                                              std::string(to_string(table.has(optimizer) ? baseline : optimizer)));
    }
    std::vector<std::pair<double, double>> out;
    for (double s : table.s_values) {
        const FitCell& a = table.at(optimizer, s);
        const FitCell& b = table.at(baseline, s);
        if (!a.fit) fail(ErrorKind::InsufficientData, "delta_alpha: missing fit " + pair_name(optimizer, s));
        if (!b.fit) fail(ErrorKind::InsufficientData, "delta_alpha: missing fit " + pair_name(baseline, s));
        out.emplace_back(s, a.fit->alpha - b.fit->alpha);
    }
    return out;
}

Multiplier compute_multiplier(const PowerLawFit& fit_gd, const PowerLawFit& fit_opt, double n_ref) {
    require(n_ref > 0.0, "compute_multiplier: reference N must be positive");
    Multiplier m;
    m.unbounded = !(fit_gd.alpha > 0.0) || fit_gd.alpha <= fit_gd.ci95;
    if (!(fit_gd.alpha > 0.0)) {
        m.value = INFINITY;
        return m;
    }
    // GD line: ln L = i_gd - a_gd ln N. Solve for the N matching the other
    // optimizer's fitted loss at n_ref.
    const double log_target = fit_opt.intercept - fit_opt.alpha * std::log(n_ref);
    const double log_n_gd = (fit_gd.intercept - log_target) / fit_gd.alpha;
    m.value = std::exp(log_n_gd - std::log(n_ref));
    return m;
}

std::vector<GapRow> convergence_summary(const ResultsTable& results) {
    std::map<std::tuple<int, double, int>, std::pair<double, int>> acc;
    for (const auto& r : results) {
        if (r.optimizer == OptimizerKind::FullNG || r.diverged || !std::isfinite(r.convergence_gap)) continue;
        auto& [sum, count] = acc[{static_cast<int>(r.optimizer), r.s, r.n}];
        sum += r.convergence_gap;
        ++count;
    }
    std::vector<GapRow> out;
    for (const auto& [key, v] : acc) {
        const auto& [opt, s, n] = key;
        out.push_back({static_cast<OptimizerKind>(opt), s, n, v.first / v.second, v.second});
    }
    return out;
}

std::vector<LossRow> loss_summary(const ResultsTable& results) {
    std::map<std::tuple<int, double, int>, std::vector<double>> acc;
    for (const auto& r : results)
        if (usable(r)) acc[{static_cast<int>(r.optimizer), r.s, r.n}].push_back(r.test_loss);
    std::vector<LossRow> out;
    for (const auto& [key, xs] : acc) {
        const auto& [opt, s, n] = key;
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= xs.size();
        double se = std::nan("");
        if (xs.size() > 1) {
            double ss = 0.0;
            for (double x : xs) ss += (x - mean) * (x - mean);
            se = std::sqrt(ss / (xs.size() - 1)) / std::sqrt(static_cast<double>(xs.size()));
        }
        out.push_back({static_cast<OptimizerKind>(opt), s, n, mean, se, static_cast<int>(xs.size())});
    }
    return out;
}

const char* to_string(PayoffBand band) {
    switch (band) {
        case PayoffBand::Negligible: return "negligible";
        case PayoffBand::Moderate: return "moderate";
        case PayoffBand::Large: return "large";
    }
    return "?";
}

PayoffBand payoff_band(double s_hat) {
    if (s_hat < kNegligibleBelow) return PayoffBand::Negligible;
    if (s_hat >= kLargeFrom) return PayoffBand::Large;
    return PayoffBand::Moderate;
}

DiagnosticReport estimate_spectral_exponent(std::span<const double> eigs, IndexRange range) {
    const int count = static_cast<int>(eigs.size());
    const int last = range.last == 0 ? count : range.last;
    require(range.first >= 1 && last <= count && last >= range.first,
            "estimate_spectral_exponent: index range outside the spectrum");
    std::vector<double> x, y;
    for (int i = range.first; i <= last; ++i) {
        const double lambda = eigs[i - 1];
        if (!(lambda > 0.0) || !std::isfinite(lambda)) {
            fail(ErrorKind::InvalidInput,
                 "estimate_spectral_exponent: eigenvalue " + std::to_string(i) + " is not positive");
        }
        x.push_back(std::log(static_cast<double>(i)));
        y.push_back(std::log(lambda));
    }
    if (x.size() < 2) fail(ErrorKind::InsufficientData, "estimate_spectral_exponent: need at least two eigenvalues");
    const LinearFit lf = ols_fit(x, y);
    DiagnosticReport rep;
    rep.s_hat = -lf.slope - 1.0;
    rep.r2 = lf.r2;
    rep.band = payoff_band(rep.s_hat);
    rep.n_used = lf.n_points;
    return rep;
}

}  // namespace optscale
