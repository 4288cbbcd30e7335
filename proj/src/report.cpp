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

#include "optscale/report.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>

#include "optscale/error.hpp"
#include "optscale/text.hpp"

namespace optscale {

namespace {

constexpr int kNameWidth = 12;
constexpr int kCellWidth = 17;

void header_row(std::ostream& out, const std::string& corner, const std::vector<double>& s_values) {
    out << std::left << std::setw(kNameWidth) << corner;
    for (double s : s_values) out << std::right << std::setw(kCellWidth) << ("s=" + format_double(s));
    out << '\n';
}

std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(ErrorKind::InvalidInput, "cannot write " + path.string());
    return f;
}

std::vector<double> distinct_s(const ResultsTable& results) {
    std::set<double> ss;
    for (const auto& r : results) ss.insert(r.s);
    return {ss.begin(), ss.end()};
}

}  // namespace

void render_alpha_table(std::ostream& out, const AlphaTable& t) {
    header_row(out, "optimizer", t.s_values);
    for (std::size_t i = 0; i < t.optimizers.size(); ++i) {
        out << std::left << std::setw(kNameWidth) << to_string(t.optimizers[i]);
        for (std::size_t j = 0; j < t.s_values.size(); ++j) {
            const FitCell& c = t.cells[i][j];
            std::string cell = "n/a";
            if (c.fit) {
                cell = format_fixed(c.fit->alpha, 3) + " +/- " + format_fixed(c.fit->ci95, 3);
                if (t.best[j] == static_cast<int>(i)) cell += '*';
                if (c.fit->low_confidence) cell += '?';
            }
            out << std::right << std::setw(kCellWidth) << cell;
        }
        out << '\n';
    }
    out << "alpha +/- 95% CI; * best per column; ? low confidence (seeds lost to divergence)\n";
}

void write_alpha_csv(std::ostream& out, const AlphaTable& t) {
    out << "optimizer,s,alpha,ci95,r2,intercept,n_points,N_min_used,low_confidence,best\n";
    for (std::size_t i = 0; i < t.optimizers.size(); ++i) {
        for (std::size_t j = 0; j < t.s_values.size(); ++j) {
            const FitCell& c = t.cells[i][j];
            out << to_string(t.optimizers[i]) << ',' << format_double(t.s_values[j]) << ',';
            if (c.fit) {
                out << format_double(c.fit->alpha) << ',' << format_double(c.fit->ci95) << ','
                    << format_double(c.fit->r2) << ',' << format_double(c.fit->intercept) << ',' << c.fit->n_points
                    << ',' << c.fit->n_min_used << ',' << (c.fit->low_confidence ? 1 : 0) << ','
                    << (t.best[j] == static_cast<int>(i) ? 1 : 0) << '\n';
            } else {
                out << ",,,,,,,0\n";
            }
        }
    }
}

void render_r2_table(std::ostream& out, const std::vector<R2Entry>& entries) {
    std::vector<OptimizerKind> opts;
    std::vector<double> ss;
    for (const auto& e : entries) {
        if (std::find(opts.begin(), opts.end(), e.optimizer) == opts.end()) opts.push_back(e.optimizer);
        if (std::find(ss.begin(), ss.end(), e.s) == ss.end()) ss.push_back(e.s);
    }
    header_row(out, "optimizer", ss);
    for (OptimizerKind k : opts) {
        out << std::left << std::setw(kNameWidth) << to_string(k);
        for (double s : ss) {
            std::string cell = "n/a";
            for (const auto& e : entries) {
                if (e.optimizer != k || e.s != s || !e.r2) continue;
                cell = format_fixed(*e.r2, 3) + (e.flagged ? "!" : "");
            }
            out << std::right << std::setw(kCellWidth) << cell;
        }
        out << '\n';
    }
    out << "R^2 of log-log fits; ! marks R^2 < " << format_double(kR2Flag) << '\n';
}

void write_r2_csv(std::ostream& out, const std::vector<R2Entry>& entries) {
    out << "optimizer,s,r2,flag_below_0.8\n";
    for (const auto& e : entries) {
        out << to_string(e.optimizer) << ',' << format_double(e.s) << ',' << (e.r2 ? format_double(*e.r2) : "") << ','
            << (e.flagged ? 1 : 0) << '\n';
    }
}

std::vector<DeltaRow> delta_series(const AlphaTable& table) {
    std::vector<DeltaRow> rows;
    for (OptimizerKind k : table.optimizers) {
        if (k == OptimizerKind::GD) continue;
        for (const auto& [s, d] : delta_alpha(table, k, OptimizerKind::GD)) rows.push_back({k, s, d});
    }
    return rows;
}

void render_delta(std::ostream& out, const std::vector<DeltaRow>& rows) {
    std::vector<double> ss;
    std::vector<OptimizerKind> opts;
    for (const auto& r : rows) {
        if (std::find(ss.begin(), ss.end(), r.s) == ss.end()) ss.push_back(r.s);
        if (std::find(opts.begin(), opts.end(), r.optimizer) == opts.end()) opts.push_back(r.optimizer);
    }
    header_row(out, "vs GD", ss);
    for (OptimizerKind k : opts) {
        out << std::left << std::setw(kNameWidth) << to_string(k);
        for (double s : ss)
            for (const auto& r : rows)
                if (r.optimizer == k && r.s == s) out << std::right << std::setw(kCellWidth) << format_fixed(r.delta, 3);
        out << '\n';
    }
}

void write_delta_csv(std::ostream& out, const std::vector<DeltaRow>& rows) {
    out << "optimizer,s,delta_alpha\n";
    for (const auto& r : rows) out << to_string(r.optimizer) << ',' << format_double(r.s) << ',' << format_double(r.delta) << '\n';
}

std::vector<MultiplierRow> multiplier_series(const AlphaTable& table, double n_ref) {
    if (!table.has(OptimizerKind::GD)) fail(ErrorKind::InsufficientData, "multiplier: GD baseline is missing");
    std::vector<MultiplierRow> rows;
    for (OptimizerKind k : table.optimizers) {
        if (k == OptimizerKind::GD) continue;
        for (double s : table.s_values) {
            const FitCell& gd = table.at(OptimizerKind::GD, s);
            const FitCell& opt = table.at(k, s);
            if (!gd.fit) fail(ErrorKind::InsufficientData, "multiplier: " + gd.error);
            if (!opt.fit) fail(ErrorKind::InsufficientData, "multiplier: " + opt.error);
            rows.push_back({k, s, compute_multiplier(*gd.fit, *opt.fit, n_ref)});
        }
    }
    return rows;
}

void render_multipliers(std::ostream& out, const std::vector<MultiplierRow>& rows, double n_ref) {
    std::vector<double> ss;
    std::vector<OptimizerKind> opts;
    for (const auto& r : rows) {
        if (std::find(ss.begin(), ss.end(), r.s) == ss.end()) ss.push_back(r.s);
        if (std::find(opts.begin(), opts.end(), r.optimizer) == opts.end()) opts.push_back(r.optimizer);
    }
    header_row(out, "x GD params", ss);
    for (OptimizerKind k : opts) {
        out << std::left << std::setw(kNameWidth) << to_string(k);
        for (double s : ss) {
            for (const auto& r : rows) {
                if (r.optimizer != k || r.s != s) continue;
                std::string cell = std::isfinite(r.multiplier.value) ? format_fixed(r.multiplier.value, 2) : "inf";
                if (r.multiplier.unbounded) cell += '^';
                out << std::right << std::setw(kCellWidth) << cell;
            }
        }
        out << '\n';
    }
    out << "reference N = " << format_double(n_ref) << "; ^ GD exponent not distinguishable from zero (unbounded)\n";
}

void write_multiplier_csv(std::ostream& out, const std::vector<MultiplierRow>& rows) {
    out << "optimizer,s,multiplier,unbounded\n";
    for (const auto& r : rows) {
        out << to_string(r.optimizer) << ',' << format_double(r.s) << ',' << format_double(r.multiplier.value) << ','
            << (r.multiplier.unbounded ? 1 : 0) << '\n';
    }
}

void render_gaps(std::ostream& out, const std::vector<GapRow>& rows) {
    out << std::left << std::setw(kNameWidth) << "optimizer" << std::right << std::setw(8) << "s" << std::setw(8)
        << "N" << std::setw(14) << "mean gap" << std::setw(7) << "seeds" << '\n';
    for (const auto& r : rows) {
        out << std::left << std::setw(kNameWidth) << to_string(r.optimizer) << std::right << std::setw(8)
            << format_double(r.s) << std::setw(8) << r.n << std::setw(14) << format_fixed(r.mean_gap, 4)
            << std::setw(7) << r.count << '\n';
    }
}

void write_gaps_csv(std::ostream& out, const std::vector<GapRow>& rows) {
    out << "optimizer,s,N,mean_gap,count\n";
    for (const auto& r : rows) {
        out << to_string(r.optimizer) << ',' << format_double(r.s) << ',' << r.n << ',' << format_double(r.mean_gap)
            << ',' << r.count << '\n';
    }
}

int largest_n(const ResultsTable& results) {
    int n = 0;
    for (const auto& r : results) n = std::max(n, r.n);
    return n;
}

std::vector<std::filesystem::path> write_plot_data(const ResultsTable& results, const std::string& figure,
                                                   const std::filesystem::path& dir, int n_min) {
    if (figure != "fig1" && figure != "fig2" && figure != "fig3" && figure != "fig4")
        fail(ErrorKind::InvalidInput, "unknown figure '" + figure + "'");
    if (results.empty()) fail(ErrorKind::InsufficientData, "plot-data: results are empty");
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;

    if (figure == "fig1") {
        const auto rows = loss_summary(results);
        for (double s : distinct_s(results)) {
            const auto path = dir / ("fig1_s" + format_double(s) + ".csv");
            auto f = open_for_write(path);
            f << "optimizer,N,mean_loss,stderr,count\n";
            for (const auto& r : rows) {
                if (r.s != s) continue;
                f << to_string(r.optimizer) << ',' << r.n << ',' << format_double(r.mean_loss) << ','
                  << format_double(r.stderr_loss) << ',' << r.count << '\n';
            }
            written.push_back(path);
        }
    } else if (figure == "fig2") {
        const AlphaTable table = alpha_table(results, n_min);
        const auto path = dir / "fig2.csv";
        auto f = open_for_write(path);
        f << "optimizer,s,alpha,ci95\n";
        for (std::size_t i = 0; i < table.optimizers.size(); ++i) {
            for (std::size_t j = 0; j < table.s_values.size(); ++j) {
                const FitCell& c = table.cells[i][j];
                if (!c.fit) fail(ErrorKind::InsufficientData, c.error);
                f << to_string(table.optimizers[i]) << ',' << format_double(table.s_values[j]) << ','
                  << format_double(c.fit->alpha) << ',' << format_double(c.fit->ci95) << '\n';
            }
        }
        written.push_back(path);
    } else if (figure == "fig3") {
        const AlphaTable table = alpha_table(results, n_min);
        const auto rows = multiplier_series(table, largest_n(results));
        const auto path = dir / "fig3.csv";
        auto f = open_for_write(path);
        write_multiplier_csv(f, rows);
        written.push_back(path);
    } else {
        const auto rows = convergence_summary(results);
        for (double s : distinct_s(results)) {
            const auto path = dir / ("fig4_s" + format_double(s) + ".csv");
            auto f = open_for_write(path);
            f << "optimizer,N,mean_gap,count\n";
            for (const auto& r : rows) {
                if (r.s != s) continue;
                f << to_string(r.optimizer) << ',' << r.n << ',' << format_double(r.mean_gap) << ',' << r.count << '\n';
            }
            written.push_back(path);
        }
    }
    return written;
}

}  // namespace optscale
