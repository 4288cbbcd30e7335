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
#include <sstream>
#include <vector>

#include "optscale/analysis.hpp"
#include "optscale/datagen.hpp"
#include "optscale/error.hpp"
#include "optscale/report.hpp"
#include "optscale/rng.hpp"

using namespace optscale;
namespace fs = std::filesystem;

namespace {

const std::vector<double> kGrid = {200, 500, 1000, 2000, 5000};

// Rows following L = c * N^-alpha, with a multiplicative seed wobble that
// averages out exactly.
ResultsTable planted(OptimizerKind opt, double s, double alpha, double c = 1.0,
                     const std::vector<double>& grid = kGrid) {
    ResultsTable t;
    for (double n : grid)
        for (int seed = 0; seed < 2; ++seed) {
            CellResult r;
            r.s = s;
            r.n = static_cast<int>(n);
            r.optimizer = opt;
            r.seed = seed;
            const double base = c * std::pow(n, -alpha);
            r.test_loss = base * (seed == 0 ? 0.75 : 1.25);
            r.oracle_test_loss = base * 0.5;
            r.convergence_gap = (r.test_loss - r.oracle_test_loss) / r.oracle_test_loss;
            t.push_back(r);
        }
    return t;
}

void append(ResultsTable& a, const ResultsTable& b) { a.insert(a.end(), b.begin(), b.end()); }

}  // namespace

TEST_CASE("t quantiles") {
    CHECK(t_quantile_975(3) == doctest::Approx(3.182446305).epsilon(1e-9));
    CHECK(t_quantile_975(1) == doctest::Approx(12.70620474).epsilon(1e-9));
    CHECK(t_quantile_975(1000) == doctest::Approx(1.962339).epsilon(1e-6));
    CHECK(std::isinf(t_quantile_975(0)));
}

TEST_CASE("planted power laws are recovered exactly") {
    for (double alpha : {0.3, 0.05, 1.0}) {
        const PowerLawFit f = fit_alpha(planted(OptimizerKind::GD, 1.0, alpha), 1.0, OptimizerKind::GD);
        CHECK(std::abs(f.alpha - alpha) <= 1e-12);
        CHECK(std::abs(f.r2 - 1.0) <= 1e-12);
        CHECK(f.ci95 <= 1e-12);
        CHECK(f.ci95 >= 0.0);
        CHECK(f.n_points == 5);
        CHECK(f.n_min_used == 200);
        CHECK_FALSE(f.low_confidence);

        const PowerLawFit scaled = fit_alpha(planted(OptimizerKind::GD, 1.0, alpha, 37.5), 1.0, OptimizerKind::GD);
        CHECK(std::abs(scaled.alpha - f.alpha) <= 1e-12);
        CHECK(std::abs(scaled.r2 - f.r2) <= 1e-12);
        CHECK(std::abs(scaled.ci95 - f.ci95) <= 1e-12);
        CHECK(scaled.intercept == doctest::Approx(f.intercept + std::log(37.5)));
    }
}

TEST_CASE("fit uses the mean of losses before the log") {
    ResultsTable t;
    for (int n : {200, 400}) {
        for (int seed = 0; seed < 2; ++seed) {
            CellResult r;
            r.s = 1.0;
            r.n = n;
            r.seed = seed;
            r.test_loss = n == 200 ? (seed == 0 ? 1.0 : 3.0) : (seed == 0 ? 0.5 : 0.5);
            t.push_back(r);
        }
    }
    const PowerLawFit f = fit_alpha(t, 1.0, OptimizerKind::GD);
    CHECK(f.alpha == doctest::Approx(std::log(2.0 / 0.5) / std::log(2.0)));
    CHECK(std::isinf(f.ci95));
}

TEST_CASE("fit support rules") {
    ResultsTable t = planted(OptimizerKind::GD, 1.0, 0.3, 1.0, {25, 50, 100, 200, 500});
    // N below the cutoff is ignored.
    t[0].test_loss = 1e6;
    CHECK(std::abs(fit_alpha(t, 1.0, OptimizerKind::GD).alpha - 0.3) <= 1e-12);
    CHECK(fit_alpha(t, 1.0, OptimizerKind::GD, 25).n_points == 5);

    ResultsTable one_level = planted(OptimizerKind::GD, 1.0, 0.3, 1.0, {200});
    try {
        fit_alpha(one_level, 1.0, OptimizerKind::GD);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InsufficientData);
        CHECK(std::string(e.what()).find("GD") != std::string::npos);
    }

    ResultsTable zero = planted(OptimizerKind::GD, 1.0, 0.3);
    for (auto& r : zero)
        if (r.n == 500) r.test_loss = 0.0;
    try {
        fit_alpha(zero, 1.0, OptimizerKind::GD);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidLoss);
    }

    // Diverged rows leave the average; losing most seeds flags the fit.
    ResultsTable div = planted(OptimizerKind::GD, 1.0, 0.3);
    div[0].diverged = true;
    div[0].test_loss = std::nan("");
    const PowerLawFit f = fit_alpha(div, 1.0, OptimizerKind::GD);
    CHECK_FALSE(f.low_confidence);
    CHECK(f.n_points == 5);
    div[1].diverged = true;
    div[1].test_loss = std::nan("");
    div[2].diverged = true;
    const PowerLawFit g = fit_alpha(div, 1.0, OptimizerKind::GD);
    CHECK(g.low_confidence);
    CHECK(g.n_points == 4);
}

TEST_CASE("alpha table, best markers and r2 flags") {
    ResultsTable t = planted(OptimizerKind::GD, 0.25, 0.1);
    append(t, planted(OptimizerKind::GD, 1.0, 0.12));
    append(t, planted(OptimizerKind::FullNG, 0.25, 0.15));
    append(t, planted(OptimizerKind::FullNG, 1.0, 0.3));
    append(t, planted(OptimizerKind::Diagonal, 0.25, 0.2));
    const AlphaTable a = alpha_table(t);
    REQUIRE(a.optimizers.size() == 3);
    REQUIRE(a.s_values.size() == 2);
    CHECK(a.optimizers[a.best[0]] == OptimizerKind::Diagonal);
    CHECK(a.optimizers[a.best[1]] == OptimizerKind::FullNG);
    CHECK_FALSE(a.at(OptimizerKind::Diagonal, 1.0).fit.has_value());
    CHECK_FALSE(a.at(OptimizerKind::Diagonal, 1.0).error.empty());

    const auto r2 = r2_table(a);
    CHECK(r2.size() == 6);
    for (const auto& e : r2) {
        if (e.r2) {
            CHECK(std::abs(*e.r2 - 1.0) <= 1e-12);
            CHECK_FALSE(e.flagged);
        }
    }

    const AlphaTable single = alpha_table(planted(OptimizerKind::SignGD, 0.5, 0.2));
    CHECK(single.best == std::vector<int>{0});

    // A noisy series drops below the flag threshold.
    ResultsTable noisy = planted(OptimizerKind::SignGD, 1.0, 0.0);
    for (auto& r : noisy) r.test_loss *= (r.n == 500 || r.n == 2000) ? 3.0 : 1.0;
    const auto flagged = r2_table(noisy);
    REQUIRE(flagged.size() == 1);
    CHECK(flagged[0].flagged);
}

TEST_CASE("delta alpha") {
    ResultsTable t = planted(OptimizerKind::GD, 0.25, 0.1);
    append(t, planted(OptimizerKind::GD, 1.0, 0.12));
    append(t, planted(OptimizerKind::FullNG, 0.25, 0.155));
    append(t, planted(OptimizerKind::FullNG, 1.0, 0.315));
    const AlphaTable a = alpha_table(t);
    for (const auto& [s, d] : delta_alpha(a, OptimizerKind::GD)) CHECK(d == 0.0);
    const auto d = delta_alpha(a, OptimizerKind::FullNG);
    REQUIRE(d.size() == 2);
    CHECK(d[0].second == doctest::Approx(0.055));
    CHECK(d[1].second == doctest::Approx(0.195));
    CHECK_THROWS_AS(delta_alpha(a, OptimizerKind::MatrixSign), Error);
}

TEST_CASE("compute multiplier") {
    const PowerLawFit f = fit_alpha(planted(OptimizerKind::GD, 1.0, 0.2), 1.0, OptimizerKind::GD);
    const Multiplier self = compute_multiplier(f, f, 5000);
    CHECK(std::abs(self.value - 1.0) <= 1e-12);
    CHECK_FALSE(self.unbounded);

    PowerLawFit gd;
    gd.alpha = 0.25;
    gd.intercept = 1.0;
    PowerLawFit opt = gd;
    opt.intercept = 1.0 - std::log(2.0);
    const Multiplier m = compute_multiplier(gd, opt, 1000);
    CHECK(m.value == doctest::Approx(std::pow(2.0, 1.0 / 0.25)).epsilon(1e-12));

    // Different slopes: solve the fitted lines by hand.
    opt.alpha = 0.4;
    opt.intercept = 0.5;
    const double n_ref = 800;
    const double hand = std::exp((gd.intercept - (opt.intercept - opt.alpha * std::log(n_ref))) / gd.alpha) / n_ref;
    CHECK(compute_multiplier(gd, opt, n_ref).value == doctest::Approx(hand).epsilon(1e-12));

    PowerLawFit flat = gd;
    flat.alpha = 0.014;
    flat.ci95 = 0.027;
    CHECK(compute_multiplier(flat, opt, 5000).unbounded);
    flat.alpha = -0.01;
    const Multiplier neg = compute_multiplier(flat, opt, 5000);
    CHECK(neg.unbounded);
    CHECK(std::isinf(neg.value));
}

TEST_CASE("convergence and loss summaries") {
    ResultsTable t = planted(OptimizerKind::GD, 1.0, 0.2);
    append(t, planted(OptimizerKind::FullNG, 1.0, 0.3));
    const auto gaps = convergence_summary(t);
    CHECK(gaps.size() == 5);
    for (const auto& g : gaps) {
        CHECK(g.optimizer == OptimizerKind::GD);
        CHECK(g.mean_gap == doctest::Approx(1.0));
        CHECK(g.count == 2);
    }

    const auto losses = loss_summary(t);
    CHECK(losses.size() == 10);
    const LossRow& first = losses.front();
    const double base = std::pow(200.0, -0.2);
    CHECK(first.mean_loss == doctest::Approx(base));
    // Sample sd of {0.75b, 1.25b} is b/(2 sqrt 2); divided by sqrt(2).
    CHECK(first.stderr_loss == doctest::Approx(0.25 * base));

    ResultsTable lone = planted(OptimizerKind::GD, 1.0, 0.2, 1.0, {200});
    lone.pop_back();
    CHECK(std::isnan(loss_summary(lone)[0].stderr_loss));
}

TEST_CASE("payoff bands") {
    CHECK(payoff_band(-1.0) == PayoffBand::Negligible);
    CHECK(payoff_band(0.2999) == PayoffBand::Negligible);
    CHECK(payoff_band(0.3) == PayoffBand::Moderate);
    CHECK(payoff_band(0.7499) == PayoffBand::Moderate);
    CHECK(payoff_band(0.75) == PayoffBand::Large);
    CHECK(std::string(to_string(PayoffBand::Large)) == "large");
}

TEST_CASE("spectral exponent recovery") {
    for (double s : {0.25, 0.5, 1.0, 2.0}) {
        const VectorXd e = power_law_eigenvalues({1000, s});
        const DiagnosticReport r = estimate_spectral_exponent(std::span(e.data(), e.size()));
        CHECK(std::abs(r.s_hat - s) <= 1e-10);
        CHECK(std::abs(r.r2 - 1.0) <= 1e-12);
        CHECK(r.n_used == 1000);
    }
    const VectorXd e = power_law_eigenvalues({1000, 1.0});
    CHECK(estimate_spectral_exponent(std::span(e.data(), e.size())).band == PayoffBand::Large);
    const DiagnosticReport part = estimate_spectral_exponent(std::span(e.data(), e.size()), {10, 20});
    CHECK(part.n_used == 11);
    CHECK(std::abs(part.s_hat - 1.0) <= 1e-10);

    const std::vector<double> flat(50, 0.3);
    const DiagnosticReport fr = estimate_spectral_exponent(flat);
    CHECK(fr.s_hat == -1.0);
    CHECK(fr.band == PayoffBand::Negligible);

    std::vector<double> bad = {1.0, 0.5, 0.0, 0.1};
    CHECK_THROWS_AS(estimate_spectral_exponent(bad), Error);
    CHECK_THROWS_AS(estimate_spectral_exponent(bad, {1, 9}), Error);
    const std::vector<double> one = {1.0};
    CHECK_THROWS_AS(estimate_spectral_exponent(one), Error);
}

TEST_CASE("rendered tables") {
    ResultsTable t = planted(OptimizerKind::GD, 0.25, 0.1);
    append(t, planted(OptimizerKind::FullNG, 0.25, 0.3));
    const AlphaTable a = alpha_table(t);
    std::ostringstream text, csv;
    render_alpha_table(text, a);
    write_alpha_csv(csv, a);
    CHECK(text.str().find("FullNG") != std::string::npos);
    CHECK(text.str().find("*") != std::string::npos);
    CHECK(csv.str().find("optimizer") != std::string::npos);

    const auto rows = delta_series(a);
    CHECK_FALSE(rows.empty());
    CHECK(multiplier_series(a, 5000).size() >= 1);
    const AlphaTable no_gd = alpha_table(planted(OptimizerKind::FullNG, 0.25, 0.3));
    CHECK_THROWS_AS(multiplier_series(no_gd, 5000), Error);

    std::ostringstream again;
    render_alpha_table(again, alpha_table(t));
    CHECK(again.str() == text.str());
    CHECK(largest_n(t) == 5000);
}

TEST_CASE("plot data files") {
    ResultsTable t = planted(OptimizerKind::GD, 0.25, 0.1);
    append(t, planted(OptimizerKind::FullNG, 0.25, 0.3));
    append(t, planted(OptimizerKind::GD, 1.0, 0.1));
    append(t, planted(OptimizerKind::FullNG, 1.0, 0.3));
    const fs::path dir = fs::temp_directory_path() / "optscale_test_plot";
    fs::remove_all(dir);
    CHECK(write_plot_data(t, "fig1", dir).size() == 2);
    CHECK(write_plot_data(t, "fig2", dir).size() == 1);
    CHECK(write_plot_data(t, "fig3", dir).size() == 1);
    CHECK(write_plot_data(t, "fig4", dir).size() == 2);
    CHECK(fs::exists(dir / "fig2.csv"));
    CHECK_THROWS_AS(write_plot_data(t, "fig9", dir), Error);

    std::ifstream in(dir / "fig2.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header.find("alpha") != std::string::npos);
    fs::remove_all(dir);
}
