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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "optscale/datagen.hpp"
#include "optscale/optim.hpp"

namespace optscale {

inline constexpr const char* kVersion = "0.1.0";

struct SweepPlan {
    std::vector<double> s_values;
    std::vector<int> n_values;  // strictly increasing
    std::vector<OptimizerKind> optimizers;
    std::vector<int> seeds;
    int dim = 1000;
    int teacher_width = 100;
    double source_exponent = 1.0;
    int steps = 2000;
    double lambda_reg = 1e-6;
    int n_test = 5000;
    std::uint64_t master_seed = 0;

    /// Throws InvalidInput describing the first violated constraint.
    void validate() const;
    std::size_t run_count() const;
    TrainConfig train_config() const;
};

/// One data realization: every optimizer in the plan runs on it.
struct Cell {
    double s = 0.0;
    int seed = 0;
    int n = 0;
};

/// One row of the results table.
struct CellResult {
    double s = 0.0;
    int n = 0;
    OptimizerKind optimizer = OptimizerKind::GD;
    int seed = 0;
    double test_loss = std::numeric_limits<double>::quiet_NaN();
    double train_residual_norm = std::numeric_limits<double>::quiet_NaN();
    double lr_used = std::numeric_limits<double>::quiet_NaN();
    double oracle_test_loss = std::numeric_limits<double>::quiet_NaN();
    double convergence_gap = std::numeric_limits<double>::quiet_NaN();
    bool diverged = false;

    // In-memory diagnostics, not persisted.
    bool failed = false;
    std::string data_digest;
    std::string teacher_digest;
    std::string message;
};

using ResultsTable = std::vector<CellResult>;

struct Manifest {
    SweepPlan plan;
    std::string version = kVersion;
    std::string timestamp;
    std::string results_digest;
    std::vector<std::string> failed_cells;
};

enum class StreamPurpose : std::uint64_t { Teacher = 1, TrainInputs = 2, TestInputs = 3, StudentWeights = 4 };

/// Stream for one purpose. The teacher stream ignores `n` so one teacher is
/// shared by every model size of an (s, seed) pair.
Stream derive_stream(std::uint64_t master_seed, StreamPurpose purpose, double s, int seed, int n);

/// Cells in loop order: s outer, seed middle, N inner.
std::vector<Cell> plan_cells(const SweepPlan& plan);

/// Known names: main, robustness_D5000, robustness_b2, reduced.
SweepPlan preset(std::string_view name);
std::vector<std::string> preset_names();

/// Teacher for an (s, seed) pair of the plan.
Teacher plan_teacher(const SweepPlan& plan, double s, int seed);
/// Realizes the dataset of one cell.
DatasetCell realize_plan_cell(const SweepPlan& plan, const Cell& cell);

/// Trains every optimizer of the plan on one shared data realization.
/// Divergence is recorded per optimizer and never aborts the cell.
std::vector<CellResult> run_cell(const SweepPlan& plan, double s, int seed, int n);

using ProgressFn = std::function<void(const Cell&, std::size_t done, std::size_t total)>;

struct SweepOutcome {
    ResultsTable results;  // sorted by (s, N, optimizer, seed)
    Manifest manifest;
    std::size_t cells_run = 0;
    std::size_t cells_failed = 0;
    double wall_seconds = 0.0;
};

/// Runs every cell on `workers` threads. A cell that throws is persisted as
/// failed rows and the sweep continues.
/// Executes one cell; `run_cell` unless a caller substitutes its own.
using CellRunner = std::function<std::vector<CellResult>(const SweepPlan&, const Cell&)>;

SweepOutcome run_sweep(const SweepPlan& plan, int workers, const ProgressFn& progress = {},
                       const CellRunner& runner = {});

void sort_results(ResultsTable& table);

// Results file: header + one comma-separated row per CellResult.
inline constexpr const char* kResultsHeader =
    "s,N,optimizer,seed,test_loss,train_residual_norm,lr_used,oracle_test_loss,convergence_gap,diverged";

void write_results(std::ostream& out, const ResultsTable& table);
std::string serialize_results(const ResultsTable& table);
/// Throws InvalidInput naming the offending line on any schema mismatch.
ResultsTable read_results(std::istream& in);
ResultsTable read_results_file(const std::filesystem::path& path);

// Manifest / plan file: `key=value` lines, `#` comments.
void write_manifest(std::ostream& out, const Manifest& manifest);
/// Applies every plan key found in `in` on top of `base`. Manifest-only keys
/// (version, timestamp, results_*) are accepted and ignored.
SweepPlan read_plan(std::istream& in, SweepPlan base);
SweepPlan read_plan_file(const std::filesystem::path& path, SweepPlan base);

/// Writes results.csv and manifest.txt into `dir`.
void write_outputs(const std::filesystem::path& dir, const SweepOutcome& outcome);

std::string utc_timestamp();

}  // namespace optscale
