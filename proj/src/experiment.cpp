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

#include "optscale/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "optscale/error.hpp"
#include "optscale/text.hpp"

namespace optscale {

namespace {

std::string digest_of(const MatrixXd& m, const VectorXd& v) {
    Fnv1a h;
    h.update(m.data(), m.size() * sizeof(double));
    h.update(v.data(), v.size() * sizeof(double));
    return h.hex();
}

std::string digest_of(const Teacher& t) { return digest_of(t.weights, t.coeffs); }

template <typename T, typename Fn>
std::string join(const std::vector<T>& xs, Fn&& fmt) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ',';
        out += fmt(xs[i]);
    }
    return out;
}

std::string fmt_opt_double(double x) { return std::isnan(x) ? std::string() : format_double(x); }

double parse_opt_double(const std::string& field) {
    return trim(field).empty() ? std::numeric_limits<double>::quiet_NaN() : parse_double(field);
}

int optimizer_rank(OptimizerKind k) { return static_cast<int>(k); }

}  // namespace

void SweepPlan::validate() const {
    require(!s_values.empty(), "plan: s_values is empty");
    require(!n_values.empty(), "plan: N_values is empty");
    require(!optimizers.empty(), "plan: optimizers is empty");
    require(!seeds.empty(), "plan: seeds is empty");
    for (double s : s_values) require(s > 0.0 && std::isfinite(s), "plan: every s must be > 0");
    for (std::size_t i = 0; i < n_values.size(); ++i) {
        require(n_values[i] >= 1, "plan: every N must be >= 1");
        if (i) require(n_values[i] > n_values[i - 1], "plan: N_values must be strictly increasing");
    }
    require(std::set<double>(s_values.begin(), s_values.end()).size() == s_values.size(), "plan: duplicate s value");
    require(std::set<int>(seeds.begin(), seeds.end()).size() == seeds.size(), "plan: duplicate seed");
    std::set<OptimizerKind> opts(optimizers.begin(), optimizers.end());
    require(opts.size() == optimizers.size(), "plan: duplicate optimizer");
    require(dim >= 1, "plan: D must be >= 1");
    require(teacher_width >= 1, "plan: K_star must be >= 1");
    require(source_exponent > 0.0, "plan: b must be > 0");
    require(steps >= 1, "plan: T must be >= 1");
    require(lambda_reg >= 0.0, "plan: lambda_reg must be >= 0");
    require(n_test >= 1, "plan: n_test must be >= 1");
}

std::size_t SweepPlan::run_count() const {
    return s_values.size() * n_values.size() * optimizers.size() * seeds.size();
}

TrainConfig SweepPlan::train_config() const {
    TrainConfig cfg;
    cfg.steps = steps;
    cfg.lambda_reg = lambda_reg;
    return cfg;
}

Stream derive_stream(std::uint64_t master_seed, StreamPurpose purpose, double s, int seed, int n) {
    const auto tag = static_cast<std::uint64_t>(purpose);
    const auto s_bits = std::bit_cast<std::uint64_t>(s);
    const auto seed_word = static_cast<std::uint64_t>(static_cast<std::int64_t>(seed));
    if (purpose == StreamPurpose::Teacher) return Stream(derive_stream_id(master_seed, {tag, s_bits, seed_word}));
    return Stream(derive_stream_id(master_seed, {tag, s_bits, seed_word, static_cast<std::uint64_t>(n)}));
}

std::vector<Cell> plan_cells(const SweepPlan& plan) {
    plan.validate();
    std::vector<Cell> cells;
    cells.reserve(plan.s_values.size() * plan.seeds.size() * plan.n_values.size());
    for (double s : plan.s_values)
        for (int seed : plan.seeds)
            for (int n : plan.n_values) cells.push_back({s, seed, n});
    return cells;
}

SweepPlan preset(std::string_view name) {
    SweepPlan main;
    main.s_values = {0.25, 0.5, 0.75, 1.0, 1.5, 2.0};
    main.n_values = {25, 50, 100, 200, 500, 1000, 2000, 5000};
    main.optimizers.assign(kAllOptimizers.begin(), kAllOptimizers.end());
    main.seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    main.dim = 1000;
    main.teacher_width = 100;
    main.source_exponent = 1.0;
    main.steps = 2000;
    main.lambda_reg = 1e-6;
    main.n_test = 5000;

    if (name == "main") return main;
    if (name == "robustness_D5000") {
        main.dim = 5000;
        return main;
    }
    if (name == "robustness_b2") {
        main.source_exponent = 2.0;
        return main;
    }
    if (name == "reduced") {
        SweepPlan r = main;
        r.dim = 400;
        r.teacher_width = 50;
        r.s_values = {0.25, 1.0};
        r.n_values = {100, 200, 400, 800};
        r.seeds = {0, 1, 2, 3, 4};
        return r;
    }
    fail(ErrorKind::InvalidInput, "unknown preset '" + std::string(name) + "'");
}

std::vector<std::string> preset_names() { return {"main", "robustness_D5000", "robustness_b2", "reduced"}; }

Teacher plan_teacher(const SweepPlan& plan, double s, int seed) {
    Stream rng = derive_stream(plan.master_seed, StreamPurpose::Teacher, s, seed, 0);
    return sample_teacher(rng, {plan.teacher_width, plan.source_exponent}, plan.dim);
}

DatasetCell realize_plan_cell(const SweepPlan& plan, const Cell& cell) {
    const Teacher teacher = plan_teacher(plan, cell.s, cell.seed);
    const VectorXd eigs = power_law_eigenvalues({plan.dim, cell.s});
    CellStreams streams{derive_stream(plan.master_seed, StreamPurpose::TrainInputs, cell.s, cell.seed, cell.n),
                        derive_stream(plan.master_seed, StreamPurpose::TestInputs, cell.s, cell.seed, cell.n),
                        derive_stream(plan.master_seed, StreamPurpose::StudentWeights, cell.s, cell.seed, cell.n)};
    return realize_cell(teacher, eigs, cell.n, train_size(cell.n), plan.n_test, streams);
}

std::vector<CellResult> run_cell(const SweepPlan& plan, double s, int seed, int n) {
    plan.validate();
    const Cell cell{s, seed, n};
    const Teacher teacher = plan_teacher(plan, s, seed);
    const std::string teacher_digest = digest_of(teacher);
    const DatasetCell data = realize_plan_cell(plan, cell);
    const std::string data_digest = digest_of(data.f_train, data.y_train);
    const LeastSquaresProblem problem(data.f_train, data.y_train);
    const TrainConfig cfg = plan.train_config();

    // The ridge oracle is the FullNG solution; computed once per cell.
    TrainResult oracle = solve_full_ng(problem, cfg.lambda_reg);
    score(oracle, data.f_test, data.y_test);

    std::vector<CellResult> out;
    out.reserve(plan.optimizers.size());
    for (OptimizerKind kind : plan.optimizers) {
        CellResult row;
        row.s = s;
        row.n = n;
        row.seed = seed;
        row.optimizer = kind;
        row.oracle_test_loss = oracle.test_loss;
        row.data_digest = data_digest;
        row.teacher_digest = teacher_digest;
        try {
            TrainResult r = kind == OptimizerKind::FullNG ? oracle : train(kind, problem, cfg);
            if (kind != OptimizerKind::FullNG) score(r, data.f_test, data.y_test);
            row.test_loss = r.test_loss;
            row.train_residual_norm = r.train_residual_norm;
            row.lr_used = r.lr_used;
            if (oracle.test_loss > 0.0) row.convergence_gap = (r.test_loss - oracle.test_loss) / oracle.test_loss;
        } catch (const DivergenceError& e) {
            row.diverged = true;
            row.message = e.what();
        }
        out.push_back(std::move(row));
    }
    return out;
}

void sort_results(ResultsTable& table) {
    std::stable_sort(table.begin(), table.end(), [](const CellResult& a, const CellResult& b) {
        return std::make_tuple(a.s, a.n, optimizer_rank(a.optimizer), a.seed) <
               std::make_tuple(b.s, b.n, optimizer_rank(b.optimizer), b.seed);
    });
}

SweepOutcome run_sweep(const SweepPlan& plan, int workers, const ProgressFn& progress, const CellRunner& runner) {
    require(workers >= 1, "run_sweep: worker count must be >= 1");
    const std::vector<Cell> cells = plan_cells(plan);
    const auto start = std::chrono::steady_clock::now();

    std::vector<std::vector<CellResult>> slots(cells.size());
    std::vector<char> failed(cells.size(), 0);
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::mutex progress_mutex;

    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            const Cell& c = cells[i];
            try {
                slots[i] = runner ? runner(plan, c) : run_cell(plan, c.s, c.seed, c.n);
            } catch (const std::exception& e) {
                failed[i] = 1;
                for (OptimizerKind kind : plan.optimizers) {
                    CellResult row;
                    row.s = c.s;
                    row.n = c.n;
                    row.seed = c.seed;
                    row.optimizer = kind;
                    row.diverged = true;
                    row.failed = true;
                    row.message = e.what();
                    slots[i].push_back(std::move(row));
                }
            }
            const std::size_t finished = ++done;
            if (progress) {
                std::lock_guard lock(progress_mutex);
                progress(c, finished, cells.size());
            }
        }
    };

    const int n_threads = std::min<int>(workers, static_cast<int>(cells.size()));
    std::vector<std::thread> pool;
    for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    SweepOutcome outcome;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        for (auto& row : slots[i]) outcome.results.push_back(std::move(row));
        if (failed[i]) {
            ++outcome.cells_failed;
            outcome.manifest.failed_cells.push_back("s=" + format_double(cells[i].s) + ";seed=" +
                                                    std::to_string(cells[i].seed) + ";N=" +
                                                    std::to_string(cells[i].n));
        }
    }
    sort_results(outcome.results);
    outcome.cells_run = cells.size();
    outcome.manifest.plan = plan;
    outcome.manifest.timestamp = utc_timestamp();
    outcome.manifest.results_digest = "fnv1a64:" + fnv1a_hex(serialize_results(outcome.results));
    outcome.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return outcome;
}

void write_results(std::ostream& out, const ResultsTable& table) {
    out << kResultsHeader << '\n';
    for (const auto& r : table) {
        out << format_double(r.s) << ',' << r.n << ',' << to_string(r.optimizer) << ',' << r.seed << ','
            << fmt_opt_double(r.test_loss) << ',' << fmt_opt_double(r.train_residual_norm) << ','
            << fmt_opt_double(r.lr_used) << ',' << fmt_opt_double(r.oracle_test_loss) << ','
            << fmt_opt_double(r.convergence_gap) << ',' << (r.diverged ? 1 : 0) << '\n';
    }
}

std::string serialize_results(const ResultsTable& table) {
    std::ostringstream os;
    write_results(os, table);
    return os.str();
}

ResultsTable read_results(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) fail(ErrorKind::InvalidInput, "results: file is empty");
    if (trim(line) != kResultsHeader) fail(ErrorKind::InvalidInput, "results: header does not match the schema");
    ResultsTable table;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 10) {
            fail(ErrorKind::InvalidInput, "results line " + std::to_string(line_no) + ": expected 10 fields, got " +
                                              std::to_string(f.size()));
        }
        try {
            CellResult r;
            r.s = parse_double(f[0]);
            r.n = static_cast<int>(parse_int(f[1]));
            r.optimizer = parse_optimizer(trim(f[2]));
            r.seed = static_cast<int>(parse_int(f[3]));
            r.test_loss = parse_opt_double(f[4]);
            r.train_residual_norm = parse_opt_double(f[5]);
            r.lr_used = parse_opt_double(f[6]);
            r.oracle_test_loss = parse_opt_double(f[7]);
            r.convergence_gap = parse_opt_double(f[8]);
            const long long d = parse_int(f[9]);
            require(d == 0 || d == 1, "diverged must be 0 or 1");
            r.diverged = d == 1;
            table.push_back(std::move(r));
        } catch (const Error& e) {
            fail(ErrorKind::InvalidInput, "results line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return table;
}

ResultsTable read_results_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::InvalidInput, "cannot open results file " + path.string());
    return read_results(in);
}

void write_manifest(std::ostream& out, const Manifest& m) {
    const SweepPlan& p = m.plan;
    out << "# optscale sweep manifest\n";
    out << "version=" << m.version << '\n';
    out << "timestamp=" << m.timestamp << '\n';
    out << "results_file=results.csv\n";
    out << "results_digest=" << m.results_digest << '\n';
    out << "failed_cells=" << join(m.failed_cells, [](const std::string& s) { return s; }) << '\n';
    out << "s_values=" << join(p.s_values, format_double) << '\n';
    out << "N_values=" << join(p.n_values, [](int n) { return std::to_string(n); }) << '\n';
    out << "optimizers=" << join(p.optimizers, [](OptimizerKind k) { return std::string(to_string(k)); }) << '\n';
    out << "seeds=" << join(p.seeds, [](int n) { return std::to_string(n); }) << '\n';
    out << "D=" << p.dim << '\n';
    out << "K_star=" << p.teacher_width << '\n';
    out << "b=" << format_double(p.source_exponent) << '\n';
    out << "T=" << p.steps << '\n';
    out << "lambda_reg=" << format_double(p.lambda_reg) << '\n';
    out << "n_test=" << p.n_test << '\n';
    out << "master_seed=" << p.master_seed << '\n';
}

SweepPlan read_plan(std::istream& in, SweepPlan p) {
    std::string line;
    int line_no = 0;
    auto ints = [](const std::string& v) {
        std::vector<int> out;
        for (const auto& f : split(v, ',')) out.push_back(static_cast<int>(parse_int(f)));
        return out;
    };
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string_view::npos) {
            fail(ErrorKind::InvalidInput, "plan line " + std::to_string(line_no) + ": expected key=value");
        }
        const std::string key(trim(t.substr(0, eq)));
        const std::string value(trim(t.substr(eq + 1)));
        try {
            if (key == "s_values") {
                p.s_values.clear();
                for (const auto& f : split(value, ',')) p.s_values.push_back(parse_double(f));
            } else if (key == "N_values") {
                p.n_values = ints(value);
            } else if (key == "optimizers") {
                p.optimizers.clear();
                for (const auto& f : split(value, ',')) p.optimizers.push_back(parse_optimizer(trim(f)));
            } else if (key == "seeds") {
                p.seeds = ints(value);
            } else if (key == "D") {
                p.dim = static_cast<int>(parse_int(value));
            } else if (key == "K_star") {
                p.teacher_width = static_cast<int>(parse_int(value));
            } else if (key == "b") {
                p.source_exponent = parse_double(value);
            } else if (key == "T") {
                p.steps = static_cast<int>(parse_int(value));
            } else if (key == "lambda_reg") {
                p.lambda_reg = parse_double(value);
            } else if (key == "n_test") {
                p.n_test = static_cast<int>(parse_int(value));
            } else if (key == "master_seed") {
                p.master_seed = static_cast<std::uint64_t>(parse_int(value));
            } else if (key == "version" || key == "timestamp" || key == "results_file" || key == "results_digest" ||
                       key == "failed_cells") {
                // manifest metadata
            } else {
                fail(ErrorKind::InvalidInput, "unknown key '" + key + "'");
            }
        } catch (const Error& e) {
            fail(ErrorKind::InvalidInput, "plan line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    p.validate();
    return p;
}

SweepPlan read_plan_file(const std::filesystem::path& path, SweepPlan base) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::InvalidInput, "cannot open plan file " + path.string());
    return read_plan(in, std::move(base));
}

void write_outputs(const std::filesystem::path& dir, const SweepOutcome& outcome) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    std::ofstream results(dir / "results.csv", std::ios::binary);
    std::ofstream manifest(dir / "manifest.txt", std::ios::binary);
    if (!results || !manifest) fail(ErrorKind::InvalidInput, "cannot write into " + dir.string());
    results << serialize_results(outcome.results);
    write_manifest(manifest, outcome.manifest);
    if (!results.flush() || !manifest.flush()) fail(ErrorKind::InvalidInput, "write failed in " + dir.string());
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace optscale
