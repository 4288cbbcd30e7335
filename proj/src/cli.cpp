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

#include "optscale/cli.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "optscale/analysis.hpp"
#include "optscale/error.hpp"
#include "optscale/experiment.hpp"
#include "optscale/report.hpp"
#include "optscale/text.hpp"
#include "optscale/theory.hpp"

namespace optscale::cli {

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::NumericFailure:
        case ErrorKind::DegenerateSpectrum:
        case ErrorKind::Divergence:
            return kNumericFailure;
        default:
            return kDataError;
    }
}

struct RunOptions {
    std::string preset_name;
    std::string plan_file;
    std::string out_dir;
    int workers = 1;
    std::optional<std::uint64_t> seed;
    int verbosity = 0;
    bool dry_run = false;
};

struct ReportOptions {
    std::string results_file;
    std::string which;
    std::string out_dir;
    int n_min = kDefaultFitNMin;
};

struct TheoryOptions {
    std::vector<double> s_grid = {0.25, 0.5, 1.0, 1.5, 2.0};
    int n = 1000;
    int steps = 2000;
    double epsilon = theory::kDefaultEpsilon;
    std::string out_dir;
};

struct DiagnoseOptions {
    std::string eigen_file;
    std::string range;
};

struct PlotOptions {
    std::string results_file;
    std::string figure;
    std::string out_dir;
    int n_min = kDefaultFitNMin;
};

void ensure_writable_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    const fs::path probe = dir / ".optscale_write_probe";
    {
        std::ofstream f(probe);
        if (ec || !f) fail(ErrorKind::InvalidInput, "output directory is not writable: " + dir.string());
    }
    fs::remove(probe, ec);
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(ErrorKind::InvalidInput, "cannot write " + path.string());
    return f;
}

int cmd_run(const RunOptions& o, std::ostream& out, std::ostream& err) {
    SweepPlan plan;
    try {
        plan = preset(o.preset_name.empty() ? "main" : o.preset_name);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    if (!o.plan_file.empty()) plan = read_plan_file(o.plan_file, plan);
    if (o.seed) plan.master_seed = *o.seed;
    if (o.workers < 1) throw UsageError("--workers must be >= 1");
    plan.validate();

    const auto cells = plan_cells(plan);
    out << "planned runs: " << plan.run_count() << " (" << cells.size() << " cells x " << plan.optimizers.size()
        << " optimizers)" << std::endl;
    if (o.dry_run) return kOk;
    if (o.out_dir.empty()) throw UsageError("--out is required");
    ensure_writable_dir(o.out_dir);

    ProgressFn progress;
    if (o.verbosity >= 1) {
        progress = [&err](const Cell& c, std::size_t done, std::size_t total) {
            err << "[" << done << "/" << total << "] s=" << format_double(c.s) << " seed=" << c.seed << " N=" << c.n
                << std::endl;
        };
    }
    const SweepOutcome outcome = run_sweep(plan, o.workers, progress);
    write_outputs(o.out_dir, outcome);
    out << "cells run: " << outcome.cells_run << ", failures: " << outcome.cells_failed
        << ", wall time: " << format_fixed(outcome.wall_seconds, 1) << " s" << std::endl;
    return kOk;
}

int cmd_report(const ReportOptions& o, std::ostream& out, std::ostream& err) {
    static const std::set<std::string> kinds = {"alpha", "r2", "delta", "multiplier", "gaps"};
    if (!kinds.count(o.which)) throw UsageError("--which must be one of alpha, r2, delta, multiplier, gaps");
    const ResultsTable results = read_results_file(o.results_file);
    if (results.empty()) fail(ErrorKind::InsufficientData, "results file has no rows");
    if (!o.out_dir.empty()) ensure_writable_dir(o.out_dir);
    auto write_file = [&](const std::string& name, auto&& writer) {
        if (o.out_dir.empty()) return;
        auto f = open_out(fs::path(o.out_dir) / name);
        writer(f);
    };

    if (o.which == "gaps") {
        const auto rows = convergence_summary(results);
        render_gaps(out, rows);
        write_file("gaps.csv", [&](std::ostream& f) { write_gaps_csv(f, rows); });
        return kOk;
    }

    const AlphaTable table = alpha_table(results, o.n_min);
    std::string first_error;
    for (const auto& row : table.cells)
        for (const auto& c : row)
            if (!c.fit && first_error.empty()) first_error = c.error;

    if (o.which == "alpha") {
        render_alpha_table(out, table);
        write_file("alpha.csv", [&](std::ostream& f) { write_alpha_csv(f, table); });
    } else if (o.which == "r2") {
        const auto entries = r2_table(table);
        render_r2_table(out, entries);
        write_file("r2.csv", [&](std::ostream& f) { write_r2_csv(f, entries); });
    } else if (o.which == "delta") {
        const auto rows = delta_series(table);
        render_delta(out, rows);
        write_file("delta.csv", [&](std::ostream& f) { write_delta_csv(f, rows); });
    } else {
        const double n_ref = largest_n(results);
        const auto rows = multiplier_series(table, n_ref);
        render_multipliers(out, rows, n_ref);
        write_file("multiplier.csv", [&](std::ostream& f) { write_multiplier_csv(f, rows); });
    }
    if (!first_error.empty()) {
        err << "error: " << first_error << std::endl;
        return kDataError;
    }
    return kOk;
}

int cmd_theory_check(const TheoryOptions& o, std::ostream& out) {
    if (o.s_grid.empty()) throw UsageError("--s grid is empty");
    for (double s : o.s_grid)
        if (!(s > 0.0)) throw UsageError("--s values must be > 0");
    if (!(o.epsilon > 0.0 && o.epsilon < 1.0)) throw UsageError("--epsilon must lie in (0, 1)");
    if (o.n < 1 || o.steps < 1) throw UsageError("--N and --steps must be >= 1");

    theory::PropositionConfig cfg;
    cfg.s_grid = o.s_grid;
    cfg.n = o.n;
    cfg.steps = o.steps;
    cfg.epsilon = o.epsilon;
    const auto report = theory::proposition_check(cfg);
    theory::print_proposition_report(out, report);
    if (!o.out_dir.empty()) {
        ensure_writable_dir(o.out_dir);
        auto f = open_out(fs::path(o.out_dir) / "theory.csv");
        theory::write_proposition_csv(f, report);
    }
    return report.all_satisfied() ? kOk : kDataError;
}

IndexRange parse_range(const std::string& text) {
    if (text.empty()) return {};
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw UsageError("--range must look like FIRST:LAST");
    try {
        IndexRange r;
        r.first = static_cast<int>(parse_int(text.substr(0, colon)));
        const std::string last = text.substr(colon + 1);
        r.last = last.empty() ? 0 : static_cast<int>(parse_int(last));
        if (r.first < 1 || (r.last != 0 && r.last < r.first)) throw UsageError("--range is empty or starts below 1");
        return r;
    } catch (const Error&) {
        throw UsageError("--range must look like FIRST:LAST");
    }
}

int cmd_diagnose(const DiagnoseOptions& o, std::ostream& out) {
    const IndexRange range = parse_range(o.range);
    std::ifstream in(o.eigen_file);
    if (!in) fail(ErrorKind::InvalidInput, "cannot open " + o.eigen_file);
    std::vector<double> eigs;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        double v = 0.0;
        try {
            v = parse_double(t);
        } catch (const Error&) {
            fail(ErrorKind::InvalidInput, "line " + std::to_string(line_no) + ": not a number");
        }
        if (!(v > 0.0) || !std::isfinite(v))
            fail(ErrorKind::InvalidInput, "line " + std::to_string(line_no) + ": eigenvalue must be positive");
        eigs.push_back(v);
    }
    const DiagnosticReport rep = estimate_spectral_exponent(eigs, range);
    out << "s_hat: " << format_fixed(rep.s_hat, 4) << '\n';
    out << "fit r2: " << format_fixed(rep.r2, 4) << '\n';
    out << "eigenvalues used: " << rep.n_used << '\n';
    out << "payoff band: " << to_string(rep.band) << '\n';
    return kOk;
}

int cmd_plot_data(const PlotOptions& o, std::ostream& out) {
    if (o.figure != "fig1" && o.figure != "fig2" && o.figure != "fig3" && o.figure != "fig4")
        throw UsageError("--figure must be one of fig1, fig2, fig3, fig4");
    if (o.out_dir.empty()) throw UsageError("--out is required");
    const ResultsTable results = read_results_file(o.results_file);
    ensure_writable_dir(o.out_dir);
    for (const auto& p : write_plot_data(results, o.figure, o.out_dir, o.n_min)) out << p.string() << '\n';
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Optimizer-dependent scaling-law laboratory for random-feature regression", "optscale"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    RunOptions run_o;
    auto* run_cmd = app.add_subcommand("run", "Run a sweep and write results.csv + manifest.txt");
    run_cmd->add_option("--preset", run_o.preset_name, "main | robustness_D5000 | robustness_b2 | reduced");
    run_cmd->add_option("--plan", run_o.plan_file, "key=value plan file; overrides preset fields");
    run_cmd->add_option("--out", run_o.out_dir, "output directory");
    run_cmd->add_option("--workers", run_o.workers, "worker threads")->capture_default_str();
    run_cmd->add_option("--seed", run_o.seed, "override the master seed");
    run_cmd->add_option("--verbosity", run_o.verbosity, "1 = one progress line per cell");
    run_cmd->add_flag("--dry-run", run_o.dry_run, "print the planned run count and exit");

    ReportOptions rep_o;
    auto* rep_cmd = app.add_subcommand("report", "Render analysis tables from a results file");
    rep_cmd->add_option("results", rep_o.results_file, "results.csv")->required();
    rep_cmd->add_option("--which", rep_o.which, "alpha | r2 | delta | multiplier | gaps")->required();
    rep_cmd->add_option("--out", rep_o.out_dir, "also write the table as CSV here");
    rep_cmd->add_option("--n-min", rep_o.n_min, "smallest N used in fits")->capture_default_str();

    TheoryOptions th_o;
    auto* th_cmd = app.add_subcommand("theory-check", "Evaluate the spectral capacity claims");
    th_cmd->add_option("--s", th_o.s_grid, "spectral exponents")->delimiter(',')->capture_default_str();
    th_cmd->add_option("--N", th_o.n, "number of modes")->capture_default_str();
    th_cmd->add_option("--steps", th_o.steps, "training budget T")->capture_default_str();
    th_cmd->add_option("--epsilon", th_o.epsilon, "learned-mode threshold")->capture_default_str();
    th_cmd->add_option("--out", th_o.out_dir, "also write theory.csv here");

    DiagnoseOptions dg_o;
    auto* dg_cmd = app.add_subcommand("diagnose", "Estimate s from an eigenvalue file (one per line)");
    dg_cmd->add_option("eigenvalues", dg_o.eigen_file, "eigenvalue file")->required();
    dg_cmd->add_option("--range", dg_o.range, "1-based FIRST:LAST index range");

    PlotOptions pl_o;
    auto* pl_cmd = app.add_subcommand("plot-data", "Write per-panel figure data");
    pl_cmd->add_option("results", pl_o.results_file, "results.csv")->required();
    pl_cmd->add_option("--figure", pl_o.figure, "fig1 | fig2 | fig3 | fig4")->required();
    pl_cmd->add_option("--out", pl_o.out_dir, "output directory");
    pl_cmd->add_option("--n-min", pl_o.n_min, "smallest N used in fits")->capture_default_str();

    std::vector<const char*> argv{"optscale"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (run_cmd->parsed()) return cmd_run(run_o, out, err);
        if (rep_cmd->parsed()) return cmd_report(rep_o, out, err);
        if (th_cmd->parsed()) return cmd_theory_check(th_o, out);
        if (dg_cmd->parsed()) return cmd_diagnose(dg_o, out);
        if (pl_cmd->parsed()) return cmd_plot_data(pl_o, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << std::endl;
        return kUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << std::endl;
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << std::endl;
        return kDataError;
    }
    return kUsage;
}

}  // namespace optscale::cli
