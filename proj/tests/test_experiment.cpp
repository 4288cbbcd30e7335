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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>
#include <sstream>

#include "optscale/error.hpp"
#include "optscale/experiment.hpp"
#include "optscale/text.hpp"

using namespace optscale;
namespace fs = std::filesystem;

namespace {

SweepPlan tiny_plan() {
    SweepPlan p;
    p.s_values = {0.5, 1.0};
    p.n_values = {10, 20};
    p.optimizers.assign(kAllOptimizers.begin(), kAllOptimizers.end());
    p.seeds = {0, 1};
    p.dim = 20;
    p.teacher_width = 5;
    p.steps = 50;
    p.n_test = 200;
    return p;
}

bool same_row(const CellResult& a, const CellResult& b) {
    auto eq = [](double x, double y) { return (std::isnan(x) && std::isnan(y)) || x == y; };
    return a.s == b.s && a.n == b.n && a.optimizer == b.optimizer && a.seed == b.seed && eq(a.test_loss, b.test_loss) &&
           eq(a.train_residual_norm, b.train_residual_norm) && eq(a.lr_used, b.lr_used) &&
           eq(a.oracle_test_loss, b.oracle_test_loss) && eq(a.convergence_gap, b.convergence_gap) &&
           a.diverged == b.diverged;
}

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("optscale_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("presets") {
    const SweepPlan main = preset("main");
    CHECK(main.run_count() == 2400);
    CHECK(main.n_values == std::vector<int>{25, 50, 100, 200, 500, 1000, 2000, 5000});
    CHECK(main.s_values == std::vector<double>{0.25, 0.5, 0.75, 1.0, 1.5, 2.0});
    CHECK(main.seeds.size() == 10);
    CHECK(main.dim == 1000);
    CHECK(main.teacher_width == 100);
    CHECK(main.source_exponent == 1.0);
    CHECK(main.steps == 2000);
    CHECK(main.lambda_reg == 1e-6);
    CHECK(main.n_test == 5000);

    const SweepPlan b2 = preset("robustness_b2");
    CHECK(b2.source_exponent == 2.0);
    CHECK(b2.dim == main.dim);
    CHECK(b2.run_count() == main.run_count());
    const SweepPlan d5 = preset("robustness_D5000");
    CHECK(d5.dim == 5000);
    CHECK(d5.source_exponent == 1.0);

    const SweepPlan reduced = preset("reduced");
    CHECK(reduced.dim == 400);
    CHECK(reduced.teacher_width == 50);
    CHECK(reduced.s_values == std::vector<double>{0.25, 1.0});
    CHECK(reduced.n_values == std::vector<int>{100, 200, 400, 800});
    CHECK(reduced.seeds.size() == 5);
    CHECK(reduced.run_count() == 200);

    for (const auto& name : preset_names()) {
        const SweepPlan p = preset(name);
        CHECK_NOTHROW(p.validate());
        CHECK(plan_cells(p).size() * p.optimizers.size() == p.run_count());
    }
    CHECK_THROWS_AS(preset("nosuch"), Error);
}

TEST_CASE("plan validation and cell order") {
    SweepPlan p = tiny_plan();
    p.optimizers = {OptimizerKind::GD, OptimizerKind::FullNG};
    p.n_values = {10, 20, 30};
    CHECK(p.run_count() == 24);
    const auto cells = plan_cells(p);
    REQUIRE(cells.size() == 12);
    CHECK(cells[0].s == 0.5);
    CHECK(cells[0].seed == 0);
    CHECK(cells[0].n == 10);
    CHECK(cells[1].n == 20);
    CHECK(cells[3].seed == 1);
    CHECK(cells[6].s == 1.0);

    SweepPlan single = tiny_plan();
    single.s_values = {1.0};
    single.n_values = {10};
    single.seeds = {3};
    single.optimizers = {OptimizerKind::GD};
    CHECK(single.run_count() == 1);

    SweepPlan bad = tiny_plan();
    bad.optimizers.clear();
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = tiny_plan();
    bad.n_values = {20, 10};
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = tiny_plan();
    bad.s_values = {0.0};
    CHECK_THROWS_AS(bad.validate(), Error);
    CHECK_THROWS_AS(run_sweep(tiny_plan(), 0), Error);
}

TEST_CASE("stream derivation") {
    auto first = [](Stream s) { return s.uniform(); };
    CHECK(first(derive_stream(0, StreamPurpose::TrainInputs, 1.0, 0, 10)) ==
          first(derive_stream(0, StreamPurpose::TrainInputs, 1.0, 0, 10)));
    std::set<double> distinct = {
        first(derive_stream(0, StreamPurpose::TrainInputs, 1.0, 0, 10)),
        first(derive_stream(0, StreamPurpose::TestInputs, 1.0, 0, 10)),
        first(derive_stream(0, StreamPurpose::TrainInputs, 0.5, 0, 10)),
        first(derive_stream(0, StreamPurpose::TrainInputs, 1.0, 1, 10)),
        first(derive_stream(0, StreamPurpose::TrainInputs, 1.0, 0, 20)),
        first(derive_stream(1, StreamPurpose::TrainInputs, 1.0, 0, 10)),
    };
    CHECK(distinct.size() == 6);
}

TEST_CASE("run_cell shares data and is deterministic") {
    const SweepPlan p = tiny_plan();
    const auto a = run_cell(p, 1.0, 0, 20);
    const auto b = run_cell(p, 1.0, 0, 20);
    REQUIRE(a.size() == 5);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(same_row(a[i], b[i]));
        CHECK(a[i].data_digest == a[0].data_digest);
        CHECK(a[i].oracle_test_loss == a[0].oracle_test_loss);
        CHECK_FALSE(a[i].diverged);
        CHECK(a[i].test_loss >= 0.0);
        CHECK(a[i].convergence_gap ==
              doctest::Approx((a[i].test_loss - a[i].oracle_test_loss) / a[i].oracle_test_loss).epsilon(1e-15));
    }
    const CellResult& ng = a[2];
    CHECK(ng.optimizer == OptimizerKind::FullNG);
    CHECK(ng.convergence_gap == 0.0);
    CHECK(ng.test_loss == ng.oracle_test_loss);
    CHECK(ng.lr_used == 0.0);

    // Teachers are shared across N; data is not.
    const auto other_n = run_cell(p, 1.0, 0, 10);
    CHECK(other_n[0].teacher_digest == a[0].teacher_digest);
    CHECK(other_n[0].data_digest != a[0].data_digest);
    const auto other_seed = run_cell(p, 1.0, 1, 20);
    CHECK(other_seed[0].teacher_digest != a[0].teacher_digest);
}

TEST_CASE("GD lags the direct solve on an ill-conditioned cell") {
    SweepPlan p = tiny_plan();
    p.dim = 60;
    p.steps = 200;
    p.optimizers = {OptimizerKind::GD, OptimizerKind::FullNG};
    const auto rows = run_cell(p, 1.0, 0, 50);
    CHECK(rows[0].convergence_gap > 0.0);
}

TEST_CASE("sweep results do not depend on worker count") {
    SweepPlan p = tiny_plan();
    const SweepOutcome one = run_sweep(p, 1);
    const SweepOutcome three = run_sweep(p, 3);
    CHECK(serialize_results(one.results) == serialize_results(three.results));
    CHECK(one.manifest.results_digest == three.manifest.results_digest);
    CHECK(one.cells_run == 8);
    CHECK(one.cells_failed == 0);
    CHECK(one.results.size() == p.run_count());

    for (std::size_t i = 1; i < one.results.size(); ++i) {
        const auto& a = one.results[i - 1];
        const auto& b = one.results[i];
        CHECK(std::make_tuple(a.s, a.n, static_cast<int>(a.optimizer), a.seed) <
              std::make_tuple(b.s, b.n, static_cast<int>(b.optimizer), b.seed));
    }

    int calls = 0;
    run_sweep(p, 2, [&](const Cell&, std::size_t done, std::size_t total) {
        ++calls;
        CHECK(done <= total);
    });
    CHECK(calls == 8);
}

TEST_CASE("failed cells are recorded, not dropped") {
    SweepPlan p = tiny_plan();
    p.n_values = {10};
    auto flaky = [](const SweepPlan& plan, const Cell& c) {
        if (c.s == 1.0 && c.seed == 1) throw std::runtime_error("worker lost");
        return run_cell(plan, c.s, c.seed, c.n);
    };
    const SweepOutcome out = run_sweep(p, 2, {}, flaky);
    CHECK(out.cells_run == 4);
    CHECK(out.cells_failed == 1);
    REQUIRE(out.results.size() == 20);
    int failed_rows = 0;
    for (const auto& r : out.results) {
        if (r.s == 1.0 && r.seed == 1) {
            ++failed_rows;
            CHECK(r.diverged);
            CHECK(r.failed);
            CHECK(std::isnan(r.test_loss));
        } else {
            CHECK_FALSE(r.diverged);
        }
    }
    CHECK(failed_rows == 5);
    REQUIRE(out.manifest.failed_cells.size() == 1);
    CHECK(out.manifest.failed_cells[0] == "s=1;seed=1;N=10");
    CHECK(serialize_results(out.results).find(",1,,,,,,1") != std::string::npos);
}

TEST_CASE("results file round trip") {
    const SweepOutcome out = run_sweep(tiny_plan(), 1);
    const std::string text = serialize_results(out.results);
    CHECK(text.rfind(kResultsHeader, 0) == 0);
    std::istringstream in(text);
    const ResultsTable back = read_results(in);
    REQUIRE(back.size() == out.results.size());
    for (std::size_t i = 0; i < back.size(); ++i) CHECK(same_row(back[i], out.results[i]));
    CHECK(serialize_results(back) == text);

    CellResult nan_row;
    nan_row.s = 0.25;
    nan_row.n = 100;
    nan_row.diverged = true;
    std::istringstream nan_in(serialize_results({nan_row}));
    const ResultsTable nan_back = read_results(nan_in);
    CHECK(std::isnan(nan_back[0].test_loss));
    CHECK(nan_back[0].diverged);

    std::istringstream empty("");
    CHECK_THROWS_AS(read_results(empty), Error);
    std::istringstream bad_header("s,N,opt\n");
    CHECK_THROWS_AS(read_results(bad_header), Error);
    std::istringstream short_row(std::string(kResultsHeader) + "\n1,2,GD\n");
    CHECK_THROWS_AS(read_results(short_row), Error);
    std::istringstream bad_opt(std::string(kResultsHeader) + "\n1,2,Adam,0,1,1,1,1,0,0\n");
    CHECK_THROWS_AS(read_results(bad_opt), Error);
}

TEST_CASE("manifest round trip and digest") {
    SweepPlan p = tiny_plan();
    p.master_seed = 77;
    p.source_exponent = 2.0;
    const SweepOutcome out = run_sweep(p, 1);
    const fs::path dir = scratch_dir("manifest");
    write_outputs(dir, out);
    CHECK(fs::exists(dir / "results.csv"));
    CHECK(fs::exists(dir / "manifest.txt"));

    std::ifstream rf(dir / "results.csv", std::ios::binary);
    std::stringstream buf;
    buf << rf.rdbuf();
    CHECK(out.manifest.results_digest == "fnv1a64:" + fnv1a_hex(buf.str()));

    const SweepPlan back = read_plan_file(dir / "manifest.txt", preset("main"));
    CHECK(back.s_values == p.s_values);
    CHECK(back.n_values == p.n_values);
    CHECK(back.optimizers == p.optimizers);
    CHECK(back.seeds == p.seeds);
    CHECK(back.dim == p.dim);
    CHECK(back.teacher_width == p.teacher_width);
    CHECK(back.source_exponent == p.source_exponent);
    CHECK(back.steps == p.steps);
    CHECK(back.lambda_reg == p.lambda_reg);
    CHECK(back.n_test == p.n_test);
    CHECK(back.master_seed == 77);

    // Replaying the manifest reproduces the results byte for byte.
    CHECK(serialize_results(run_sweep(back, 2).results) == buf.str());

    std::istringstream partial("# override\nT=7\nseeds=4,5\n");
    const SweepPlan over = read_plan(partial, p);
    CHECK(over.steps == 7);
    CHECK(over.seeds == std::vector<int>{4, 5});
    CHECK(over.dim == p.dim);
    std::istringstream unknown("colour=red\n");
    CHECK_THROWS_AS(read_plan(unknown, p), Error);
    std::istringstream invalid("N_values=20,10\n");
    CHECK_THROWS_AS(read_plan(invalid, p), Error);
    fs::remove_all(dir);
}

TEST_CASE("fnv1a digest") {
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
    Fnv1a h;
    h.update("ab", 2);
    h.update("c", 1);
    CHECK(h.hex() == fnv1a_hex("abc"));
}
