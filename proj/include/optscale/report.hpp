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

// Rendering of analysis outputs: aligned text for terminals, comma-separated
// files for downstream plotting.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "optscale/analysis.hpp"

namespace optscale {

void render_alpha_table(std::ostream& out, const AlphaTable& table);
void write_alpha_csv(std::ostream& out, const AlphaTable& table);

void render_r2_table(std::ostream& out, const std::vector<R2Entry>& entries);
void write_r2_csv(std::ostream& out, const std::vector<R2Entry>& entries);

struct DeltaRow {
    OptimizerKind optimizer;
    double s;
    double delta;
};
/// Every non-GD optimizer against GD.
std::vector<DeltaRow> delta_series(const AlphaTable& table);
void render_delta(std::ostream& out, const std::vector<DeltaRow>& rows);
void write_delta_csv(std::ostream& out, const std::vector<DeltaRow>& rows);

struct MultiplierRow {
    OptimizerKind optimizer;
    double s;
    Multiplier multiplier;
};
/// Every non-GD optimizer against GD at `n_ref`. Requires GD fits.
std::vector<MultiplierRow> multiplier_series(const AlphaTable& table, double n_ref);
void render_multipliers(std::ostream& out, const std::vector<MultiplierRow>& rows, double n_ref);
void write_multiplier_csv(std::ostream& out, const std::vector<MultiplierRow>& rows);

void render_gaps(std::ostream& out, const std::vector<GapRow>& rows);
void write_gaps_csv(std::ostream& out, const std::vector<GapRow>& rows);

/// Largest model size present in the results.
int largest_n(const ResultsTable& results);

/// Writes the per-panel files of one figure ("fig1".."fig4") into `dir` and
/// returns their paths.
std::vector<std::filesystem::path> write_plot_data(const ResultsTable& results, const std::string& figure,
                                                   const std::filesystem::path& dir, int n_min = kDefaultFitNMin);

}  // namespace optscale
