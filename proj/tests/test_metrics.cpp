#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "fedscreen/metrics.hpp"

using namespace fedscreen;
using Catch::Matchers::WithinAbs;

TEST_CASE("run scores count hits, misses, and false discoveries") {
    // p = 12 features; ranks give feature j rank j + 1 (feature 0 strongest).
    std::vector<int> ranks(12);
    for (int j = 0; j < 12; ++j) ranks[static_cast<std::size_t>(j)] = j + 1;
    const std::vector<int> active{0, 1, 2, 3, 4, 5, 6, 7};

    SECTION("full recovery with one extra pick") {
        const std::vector<int> selected{0, 1, 2, 3, 4, 5, 6, 7, 11};
        const auto s = score_run(selected, ranks, active);
        CHECK(s.success == 1.0);
        CHECK(s.psr == 1.0);
        CHECK_THAT(s.fdr, WithinAbs(1.0 / 9.0, 1e-15));
        CHECK(s.size == 9.0);
        CHECK(s.wrank == 8.0);
    }

    SECTION("partial recovery") {
        const auto s = score_run({0, 1, 9}, ranks, {0, 5});
        CHECK(s.success == 0.0);
        CHECK(s.psr == 0.5);
        CHECK_THAT(s.fdr, WithinAbs(2.0 / 3.0, 1e-15));
        CHECK(s.size == 3.0);
        CHECK(s.wrank == 6.0); // feature 5 sits at rank 6
    }

    SECTION("empty selection has zero false-discovery rate by convention") {
        const auto s = score_run({}, ranks, active);
        CHECK(s.fdr == 0.0);
        CHECK(s.psr == 0.0);
        CHECK(s.success == 0.0);
        CHECK(s.size == 0.0);
    }

    SECTION("empty active set scores vacuously and flags every pick") {
        const auto s = score_run({3, 4}, ranks, {});
        CHECK(s.success == 1.0);
        CHECK(s.psr == 1.0);
        CHECK(s.fdr == 1.0);
        CHECK(s.wrank == 0.0);
    }

    SECTION("indices outside [0, p) are rejected") {
        CHECK_THROWS_AS(score_run({12}, ranks, active), ValidationError);
        CHECK_THROWS_AS(score_run({-1}, ranks, active), ValidationError);
        CHECK_THROWS_AS(score_run({0}, ranks, {12}), ValidationError);
    }
}

TEST_CASE("summaries are plain arithmetic means across runs") {
    RunScore a;
    a.success = 1.0;
    a.psr = 1.0;
    a.fdr = 0.25;
    a.size = 10.0;
    a.wrank = 8.0;
    a.time_local_s = 0.5;
    a.time_agg_s = 0.1;
    RunScore b;
    b.success = 0.0;
    b.psr = 0.5;
    b.fdr = 0.0;
    b.size = 4.0;
    b.wrank = 30.0;
    b.time_local_s = 0.7;
    b.time_agg_s = 0.3;

    const auto m = summarize({a, b});
    CHECK(m.runs == 2);
    CHECK(m.ssr == 0.5);
    CHECK(m.psr == 0.75);
    CHECK(m.fdr == 0.125);
    CHECK(m.size == 7.0);
    CHECK(m.wrank == 19.0);
    CHECK_THAT(m.time_local_s, WithinAbs(0.6, 1e-15));
    CHECK_THAT(m.time_agg_s, WithinAbs(0.2, 1e-15));

    CHECK_THROWS_AS(summarize({}), ValidationError);
}

TEST_CASE("log-scale deviation compares utilities feature by feature") {
    SECTION("identical vectors deviate by exactly zero") {
        const std::vector<double> u{0.3, 0.01, 2.0};
        const auto dev = relative_deviation(u, u);
        REQUIRE(dev.values.size() == 3);
        CHECK(dev.excluded == 0);
        for (double v : dev.values) CHECK(v == 0.0);
    }

    SECTION("a factor of two is log 2 regardless of direction") {
        const auto dev = relative_deviation({0.2, 0.05}, {0.1, 0.1});
        REQUIRE(dev.values.size() == 2);
        CHECK_THAT(dev.values[0], WithinAbs(std::log(2.0), 1e-15));
        CHECK_THAT(dev.values[1], WithinAbs(std::log(2.0), 1e-15));
    }

    SECTION("nonpositive and nonfinite utilities are excluded, not zeroed") {
        const double inf = std::numeric_limits<double>::infinity();
        const double nan = std::numeric_limits<double>::quiet_NaN();
        const auto dev =
            relative_deviation({0.5, 0.0, -0.1, 0.5, nan}, {0.5, 0.5, 0.5, inf, 0.5});
        REQUIRE(dev.values.size() == 1);
        CHECK(dev.values[0] == 0.0);
        CHECK(dev.excluded == 4);
    }

    SECTION("length mismatch is an error") {
        CHECK_THROWS_AS(relative_deviation({0.1}, {0.1, 0.2}), ValidationError);
    }
}

TEST_CASE("median handles both parities and rejects empty samples") {
    CHECK(median({3.0}) == 3.0);
    CHECK(median({5.0, 1.0, 3.0}) == 3.0);
    CHECK_THAT(median({4.0, 1.0, 2.0, 8.0}), WithinAbs(3.0, 1e-15));
    CHECK_THROWS_AS(median({}), ValidationError);
}
