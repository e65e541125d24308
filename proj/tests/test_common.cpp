#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fedscreen/common.hpp"

using namespace fedscreen;

TEST_CASE("seed_hierarchy is deterministic and sensitive to every part", "[common]") {
    const auto s = seed_hierarchy(42, "client-003", "features");
    CHECK(s == seed_hierarchy(42, "client-003", "features"));
    CHECK(s != seed_hierarchy(43, "client-003", "features"));
    CHECK(s != seed_hierarchy(42, "client-004", "features"));
    CHECK(s != seed_hierarchy(42, "client-003", "labels"));

    // Streams for distinct purposes must not collide across a realistic set.
    std::set<std::uint64_t> seen;
    for (int c = 0; c < 200; ++c)
        for (const char* purpose : {"labels", "features", "pseudo:17", "attack-shuffle"})
            seen.insert(seed_hierarchy(99, "client-" + std::to_string(c), purpose));
    CHECK(seen.size() == 200 * 4);
}

TEST_CASE("uniform01 lies in [0,1) and has the right mean", "[common]") {
    Rng rng(1);
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK_THAT(sum / n, Catch::Matchers::WithinAbs(0.5, 0.005));
}

TEST_CASE("uniform_int is unbiased over a non-power-of-two range", "[common]") {
    Rng rng(2);
    std::vector<int> counts(7, 0);
    const int n = 70000;
    for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(rng.uniform_int(7))];
    for (int c : counts) CHECK_THAT(static_cast<double>(c) / n, Catch::Matchers::WithinAbs(1.0 / 7, 0.01));
}

TEST_CASE("normal sampler has correct first two moments", "[common]") {
    Rng rng(3);
    double sum = 0.0, sumsq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sumsq += z * z;
    }
    CHECK_THAT(sum / n, Catch::Matchers::WithinAbs(0.0, 0.01));
    CHECK_THAT(sumsq / n, Catch::Matchers::WithinAbs(1.0, 0.02));
}

TEST_CASE("exponential sampler matches its mean parameter", "[common]") {
    Rng rng(4);
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double e = rng.exponential(2.0);
        REQUIRE(e >= 0.0);
        sum += e;
    }
    CHECK_THAT(sum / n, Catch::Matchers::WithinAbs(2.0, 0.03));
}

TEST_CASE("gamma sampler matches mean and variance", "[common]") {
    Rng rng(5);
    double sum = 0.0, sumsq = 0.0;
    const int n = 100000;
    const double shape = 2.5;
    for (int i = 0; i < n; ++i) {
        const double g = rng.gamma(shape);
        sum += g;
        sumsq += g * g;
    }
    const double mean = sum / n;
    CHECK_THAT(mean, Catch::Matchers::WithinAbs(shape, 0.03));
    CHECK_THAT(sumsq / n - mean * mean, Catch::Matchers::WithinAbs(shape, 0.1));
}

TEST_CASE("dirichlet draws are simplex points with the right mean", "[common]") {
    Rng rng(6);
    std::vector<double> mean(4, 0.0);
    const int n = 50000;
    for (int i = 0; i < n; ++i) {
        const auto pi = rng.dirichlet(0.5, 4);
        double total = 0.0;
        for (std::size_t r = 0; r < 4; ++r) {
            REQUIRE(pi[r] >= 0.0);
            total += pi[r];
            mean[r] += pi[r];
        }
        REQUIRE_THAT(total, Catch::Matchers::WithinAbs(1.0, 1e-12));
    }
    for (double m : mean) CHECK_THAT(m / n, Catch::Matchers::WithinAbs(0.25, 0.01));
}

TEST_CASE("categorical sampler honors the proportion vector", "[common]") {
    Rng rng(7);
    const std::vector<double> pi{0.1, 0.0, 0.6, 0.3};
    std::vector<int> counts(4, 0);
    const int n = 100000;
    for (int i = 0; i < n; ++i) ++counts[rng.categorical(pi)];
    CHECK(counts[1] == 0);
    CHECK_THAT(counts[0] / double(n), Catch::Matchers::WithinAbs(0.1, 0.01));
    CHECK_THAT(counts[2] / double(n), Catch::Matchers::WithinAbs(0.6, 0.01));
    CHECK_THAT(counts[3] / double(n), Catch::Matchers::WithinAbs(0.3, 0.01));
}

TEST_CASE("shuffle produces every permutation of three items", "[common]") {
    Rng rng(8);
    std::map<std::vector<int>, int> seen;
    for (int i = 0; i < 6000; ++i) {
        std::vector<int> v{0, 1, 2};
        rng.shuffle(v);
        ++seen[v];
    }
    REQUIRE(seen.size() == 6);
    for (const auto& [perm, count] : seen)
        CHECK_THAT(count / 6000.0, Catch::Matchers::WithinAbs(1.0 / 6, 0.03));
}

TEST_CASE("student_t and lognormal samplers behave sanely", "[common]") {
    Rng rng(9);
    int extreme = 0;
    const int n = 50000;
    for (int i = 0; i < n; ++i)
        if (std::abs(rng.student_t(2.0)) > 6.0) ++extreme;
    // t(2) has heavy tails: P(|T|>6) ~ 1.3%; a Gaussian would give ~2e-9.
    CHECK(extreme > n / 500);
    CHECK(extreme < n / 20);

    double log_sum = 0.0, log_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = rng.lognormal_std();
        REQUIRE(v > 0.0);
        const double lg = std::log(v);
        log_sum += lg;
        log_sq += lg * lg;
    }
    CHECK_THAT(log_sum / n, Catch::Matchers::WithinAbs(0.0, 0.02));
    CHECK_THAT(log_sq / n, Catch::Matchers::WithinAbs(1.0, 0.03));
}

TEST_CASE("double text round-trip is exact", "[common]") {
    Rng rng(10);
    for (int i = 0; i < 2000; ++i) {
        double v = 0.0;
        switch (i % 4) {
            case 0: v = rng.normal(); break;
            case 1: v = rng.uniform01() * 1e-12; break;
            case 2: v = rng.exponential(1e9); break;
            case 3: v = -rng.uniform01(); break;
        }
        CHECK(parse_double(format_double17(v)) == v);
    }
    CHECK(parse_double(format_double17(0.0)) == 0.0);
    CHECK(format_double17(0.75) == "0.75");
    CHECK_THROWS_AS(parse_double("1.5x"), ParseError);
    CHECK_THROWS_AS(parse_double(""), ParseError);
    CHECK_THROWS_AS(parse_double("nanx"), ParseError);
}

TEST_CASE("falling_factorial handles small cases and short inputs", "[common]") {
    CHECK(falling_factorial(5, 0) == 1.0);
    CHECK(falling_factorial(5, 1) == 5.0);
    CHECK(falling_factorial(5, 3) == 60.0);
    CHECK(falling_factorial(2, 3) == 0.0);
    CHECK(falling_factorial(0, 1) == 0.0);
    CHECK_THROWS_AS(falling_factorial(5, -1), ValidationError);
}

TEST_CASE("binomial_coefficient matches Pascal's triangle", "[common]") {
    CHECK(binomial_coefficient(0, 0) == 1.0);
    CHECK(binomial_coefficient(4, 2) == 6.0);
    CHECK(binomial_coefficient(10, 3) == 120.0);
    for (int n = 1; n <= 12; ++n)
        for (int k = 1; k < n; ++k)
            CHECK(binomial_coefficient(n, k) ==
                  binomial_coefficient(n - 1, k - 1) + binomial_coefficient(n - 1, k));
}

TEST_CASE("identical seeds give identical streams; different seeds diverge", "[common]") {
    Rng a(1234), b(1234), c(1235);
    bool all_equal = true, any_equal_c = false;
    for (int i = 0; i < 100; ++i) {
        const double va = a.uniform01(), vb = b.uniform01(), vc = c.uniform01();
        all_equal = all_equal && (va == vb);
        any_equal_c = any_equal_c || (va == vc);
    }
    CHECK(all_equal);
    CHECK_FALSE(any_equal_c);
}
