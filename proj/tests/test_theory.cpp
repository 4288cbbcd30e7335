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
#include <sstream>
#include <vector>

#include "optscale/datagen.hpp"
#include "optscale/error.hpp"
#include "optscale/rng.hpp"
#include "optscale/theory.hpp"

using namespace optscale;
using namespace optscale::theory;

TEST_CASE("GD convergence factor") {
    for (int t : {1, 2, 7, 2000}) CHECK(conv_factor_gd(0.5, 2.0, t) == 1.0);
    CHECK(conv_factor_gd(0.5, 1.0, 2) == 0.75);
    CHECK(conv_factor_gd(1.0, 1e-12, 100) < 1e-9);
    CHECK(conv_factor_gd(1.0, 1e-300, 100) == 0.0);
    CHECK(mode_diverges(1.0, 2.5));
    CHECK_FALSE(mode_diverges(1.0, 2.0));
    CHECK(conv_factor_gd(1.0, 3.0, 3) > 1.0);
    CHECK_THROWS_AS(conv_factor_gd(0.0, 1.0, 1), Error);
    CHECK_THROWS_AS(conv_factor_gd(1.0, 1.0, 0), Error);
}

TEST_CASE("NG convergence factor") {
    for (int t : {1, 10, 2000}) CHECK(conv_factor_ng(1.0, t) == 1.0);
    CHECK(conv_factor_ng(0.5, 1) == 0.5);
    Stream rng(3);
    for (int i = 0; i < 100; ++i) {
        const double eta = 1e-3 + (1.0 - 1e-3) * rng.uniform();
        const int t = 1 + static_cast<int>(rng.uniform() * 3000);
        CHECK(conv_factor_ng(eta, t) == conv_factor_gd(eta, 1.0, t));
    }
    CHECK_THROWS_AS(conv_factor_ng(1.5, 10), Error);
}

TEST_CASE("matrix-sign convergence factor") {
    CHECK(conv_factor_matrix_sign(0.7, 3.0, 3.0, 9) == conv_factor_ng(0.7, 9));
    CHECK(conv_factor_matrix_sign(1.0, 0.25, 1.0, 1) == 0.5);
    CHECK(conv_factor_matrix_sign(1.0, 1.0, 4.0, 1) == 0.5);
    CHECK_THROWS_AS(conv_factor_matrix_sign(1.0, 2.0, 1.0, 1), Error);
    CHECK_THROWS_AS(conv_factor_matrix_sign(1.2, 0.5, 1.0, 1), Error);

    // Square roots halve the log range of the spectrum.
    const VectorXd e = power_law_eigenvalues({1000, 1.0});
    const double raw = std::log(e(0) / e(999));
    const double ms = std::log(std::sqrt(e(0)) / std::sqrt(e(999)));
    CHECK(std::abs(ms - 0.5 * raw) <= 1e-12 * raw);
}

TEST_CASE("ordering under a shared normalized step") {
    Stream rng(99);
    for (int i = 0; i < 500; ++i) {
        const double top = std::exp(4.0 * rng.uniform() - 2.0);
        const double lambda = top * std::exp(-20.0 * rng.uniform());
        const double eta = 1e-3 + (1.0 - 1e-3) * rng.uniform();
        const int t = 1 + static_cast<int>(rng.uniform() * 4000);
        const double gd = conv_factor_gd(eta / top, lambda, t);
        const double ms = conv_factor_matrix_sign(eta, lambda, top, t);
        const double ng = conv_factor_ng(eta, t);
        CHECK(gd <= ms);
        CHECK(ms <= ng);
        CHECK(gd >= 0.0);
        CHECK(ng <= 1.0);
    }
}

TEST_CASE("GD factor is monotone in the step product and in T") {
    double prev = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double c = conv_factor_gd(k / 100.0, 1.0, 7);
        CHECK(c >= prev);
        prev = c;
    }
    prev = 0.0;
    for (int t = 1; t <= 200; ++t) {
        const double c = conv_factor_gd(0.01, 1.0, t);
        CHECK(c >= prev);
        prev = c;
    }
}

TEST_CASE("dynamic range") {
    CHECK(dynamic_range(100, 1.0) == 1e4);
    CHECK(dynamic_range(1, 0.7) == 1.0);
    CHECK(dynamic_range(1000, 1.0) == doctest::Approx(1e6));
    for (int n = 2; n < 2000; n *= 3)
        for (double s = 0.1; s < 3.0; s += 0.3) {
            CHECK(dynamic_range(n, s + 0.3) > dynamic_range(n, s));
            CHECK(dynamic_range(n * 3, s) > dynamic_range(n, s));
        }
    CHECK_THROWS_AS(dynamic_range(0, 1.0), Error);
    CHECK_THROWS_AS(dynamic_range(10, 0.0), Error);
}

TEST_CASE("capacity reports") {
    std::vector<ModeConvergence> ones(10), zeros(10);
    for (int i = 0; i < 10; ++i) {
        ones[i] = {i + 1, 1.0, 1.0};
        zeros[i] = {i + 1, 1.0, 0.0};
    }
    const CapacityReport full = capacity_report(ones, 10, 0.01);
    CHECK(full.effective_modes == 10);
    CHECK(full.wasted_fraction == 0.0);
    CHECK(capacity_report(zeros, 10, 0.01).wasted_fraction == 1.0);
    CHECK(capacity_report(ones, 4, 0.01).effective_modes == 4);
    CHECK_THROWS_AS(capacity_report(ones, 10, 1.5), Error);

    // Enumeration oracle on lambda_i = i^-2.
    const int n = 1000, t = 2000;
    const VectorXd e = power_law_eigenvalues({n, 1.0});
    const double eta = 1.5 / e(0);
    int count = 0;
    for (int i = 0; i < n; ++i) {
        const double c = 1.0 - std::pow(1.0 - eta * e(i), t);
        if (c > 0.99) ++count;
    }
    const CapacityReport r = capacity_report(gd_factors(std::span(e.data(), n), eta, t), n, 0.01);
    CHECK(r.effective_modes == count);
    CHECK(r.wasted_fraction == 1.0 - static_cast<double>(count) / n);
    CHECK(r.effective_modes > 0);
    CHECK(r.effective_modes < n);
}

TEST_CASE("proposition check on the default grid") {
    const PropositionReport rep = proposition_check(PropositionConfig{});
    CHECK(rep.claim_i);
    CHECK(rep.claim_ii);
    CHECK(rep.claim_iii);
    CHECK(rep.all_satisfied());
    CHECK(rep.violations.empty());
    REQUIRE(rep.rows.size() == 5);
    CHECK(rep.flat.ng_minus_gd() == 0);
    for (const auto& row : rep.rows) {
        CHECK(row.ng.effective_modes == rep.rows.front().ng.effective_modes);
        CHECK(row.ng.effective_modes >= row.matrix_sign.effective_modes);
        CHECK(row.matrix_sign.effective_modes >= row.gd.effective_modes);
        CHECK(row.gd.wasted_fraction >= 0.0);
        CHECK(row.gd.wasted_fraction <= 1.0);
    }
}

TEST_CASE("proposition check on two points and unsorted input") {
    PropositionConfig cfg;
    cfg.s_grid = {1.0, 0.25};
    const PropositionReport rep = proposition_check(cfg);
    REQUIRE(rep.rows.size() == 2);
    CHECK(rep.rows[0].s == 0.25);
    CHECK(rep.rows[1].gd.wasted_fraction >= rep.rows[0].gd.wasted_fraction);

    cfg.s_grid = {};
    CHECK_THROWS_AS(proposition_check(cfg), Error);
}

TEST_CASE("proposition report rendering") {
    PropositionConfig cfg;
    cfg.s_grid = {0.5, 1.0};
    cfg.n = 100;
    const PropositionReport rep = proposition_check(cfg);
    std::ostringstream text, csv;
    print_proposition_report(text, rep);
    write_proposition_csv(csv, rep);
    CHECK(text.str().find("claim (i)") != std::string::npos);
    CHECK(text.str().find("flat") != std::string::npos);
    CHECK(csv.str().find("s,") == 0);
}
