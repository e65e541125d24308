#pragma once

// Local (per-client) statistics computed from one feature column at a time.
// Everything here is an exact integer-count computation: one sort per column,
// then per-tie-block prefix counts of how many samples of each category lie
// strictly below. All pairwise/triple/tuple counts are recovered from those
// prefix counts in O(n * R), so a column costs O(n log n + n R) instead of
// the naive O(n^2) or worse. The brute-force loops in oracles.hpp compute the
// same quantities by definition; tests pin the two routes against each other.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "fedscreen/common.hpp"
#include "fedscreen/core.hpp"

namespace fedscreen {

namespace detail {

// Per-sample strict-below counts for one column, tie-aware: samples with
// equal values see the same counts and do not count each other.
struct StrictBelowCounts {
    std::size_t n = 0;
    int categories = 0;
    std::vector<std::int64_t> class_count;   // per category
    std::vector<std::int64_t> below_total;   // per sample (original order)
    std::vector<std::int64_t> below_class;   // n x R, row-major, original order
    std::vector<std::int64_t> block_size;    // per sample: size of its tie block
    std::vector<int> labels;

    std::int64_t below(std::size_t i, int r) const {
        return below_class[i * static_cast<std::size_t>(categories) + static_cast<std::size_t>(r)];
    }
};

inline StrictBelowCounts compute_strict_below(const std::vector<double>& x,
                                              const std::vector<int>& y, int num_categories) {
    const std::size_t n = x.size();
    if (n != y.size()) throw ValidationError("column/label length mismatch");
    if (n < 1) throw ValidationError("empty column");

    StrictBelowCounts out;
    out.n = n;
    out.categories = num_categories;
    out.labels = y;
    out.class_count.assign(static_cast<std::size_t>(num_categories), 0);
    out.below_total.assign(n, 0);
    out.below_class.assign(n * static_cast<std::size_t>(num_categories), 0);
    out.block_size.assign(n, 0);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

    std::vector<std::int64_t> running(static_cast<std::size_t>(num_categories), 0);
    std::int64_t running_total = 0;
    std::size_t s = 0;
    while (s < n) {
        std::size_t e = s;
        while (e < n && x[order[e]] == x[order[s]]) ++e;
        for (std::size_t t = s; t < e; ++t) {
            const std::size_t i = order[t];
            out.below_total[i] = running_total;
            out.block_size[i] = static_cast<std::int64_t>(e - s);
            std::copy(running.begin(), running.end(),
                      out.below_class.begin() + static_cast<std::ptrdiff_t>(
                                                    i * static_cast<std::size_t>(num_categories)));
        }
        for (std::size_t t = s; t < e; ++t)
            ++running[static_cast<std::size_t>(y[order[t]])];
        running_total += static_cast<std::int64_t>(e - s);
        s = e;
    }
    for (std::size_t i = 0; i < n; ++i) ++out.class_count[static_cast<std::size_t>(y[i])];
    return out;
}

} // namespace detail

// ---------------------------------------------------------------------------
// One-vs-rest pairwise concordance (the core screening statistic)
// ---------------------------------------------------------------------------

struct FirstOrderLocal {
    double u_hat = 0.0;       // pairwise count / (n (n-1))
    double theta_hat = 0.0;   // label-pattern count / (n (n-1)); feature-free
    bool gamma_defined = false;
    double gamma_hat = 0.0;   // u_hat / theta_hat when defined
    double lambda = 0.0;      // floor(n/2) * theta_hat
};

inline std::vector<FirstOrderLocal> local_first_order(const detail::StrictBelowCounts& c) {
    if (c.n < 2) throw ValidationError("local_first_order: need n >= 2");
    const int R = c.categories;
    const auto& y = c.labels;
    std::vector<std::int64_t> u_count(static_cast<std::size_t>(R), 0);
    for (std::size_t i = 0; i < c.n; ++i) {
        // Sample i plays the "Y = r" role; every sample of a different
        // category strictly below it is one concordant ordered pair.
        const int r = y[i];
        u_count[static_cast<std::size_t>(r)] += c.below_total[i] - c.below(i, r);
    }
    const double denom = static_cast<double>(c.n) * static_cast<double>(c.n - 1);
    const double half = static_cast<double>(c.n / 2);
    std::vector<FirstOrderLocal> out(static_cast<std::size_t>(R));
    for (int r = 0; r < R; ++r) {
        const std::int64_t cr = c.class_count[static_cast<std::size_t>(r)];
        const std::int64_t theta_count = (static_cast<std::int64_t>(c.n) - cr) * cr;
        auto& o = out[static_cast<std::size_t>(r)];
        o.u_hat = static_cast<double>(u_count[static_cast<std::size_t>(r)]) / denom;
        o.theta_hat = static_cast<double>(theta_count) / denom;
        if (theta_count > 0) {
            o.gamma_defined = true;
            o.gamma_hat = static_cast<double>(u_count[static_cast<std::size_t>(r)]) /
                          static_cast<double>(theta_count);
            o.lambda = half * o.theta_hat;
        }
    }
    return out;
}

inline std::vector<FirstOrderLocal> local_first_order(const std::vector<double>& x,
                                                      const std::vector<int>& y,
                                                      int num_categories) {
    return local_first_order(detail::compute_strict_below(x, y, num_categories));
}

// Two-sample pairwise concordance P(X_A < X_B) over all cross pairs, ties
// counting zero. The basic building block, exposed directly for the CLI's
// reference subcommand and tests.
inline double mann_whitney_statistic(const std::vector<double>& xa, const std::vector<double>& xb) {
    if (xa.empty() || xb.empty())
        throw UndefinedStatisticError("mann_whitney_statistic: empty side");
    std::vector<double> x(xa);
    x.insert(x.end(), xb.begin(), xb.end());
    std::vector<int> y(xa.size(), 0);
    y.insert(y.end(), xb.size(), 1);
    const auto c = detail::compute_strict_below(x, y, 2);
    std::int64_t count = 0;
    for (std::size_t i = xa.size(); i < x.size(); ++i) count += c.below(i, 0);
    return static_cast<double>(count) /
           (static_cast<double>(xa.size()) * static_cast<double>(xb.size()));
}

// ---------------------------------------------------------------------------
// Ordered category-pair concordance
// ---------------------------------------------------------------------------

struct PairLocal {
    // Row-major R x R over ordered pairs (r, k): the pair statistic compares
    // category k draws (the "below" side) against category r draws. Diagonal
    // entries are identically zero and never defined.
    std::vector<double> u_hat;
    std::vector<double> theta_hat;
    std::vector<std::uint8_t> defined;
    int categories = 0;

    std::size_t at(int r, int k) const {
        return static_cast<std::size_t>(r) * static_cast<std::size_t>(categories) +
               static_cast<std::size_t>(k);
    }
};

inline PairLocal local_pair(const detail::StrictBelowCounts& c) {
    if (c.n < 2) throw ValidationError("local_pair: need n >= 2");
    const int R = c.categories;
    const auto& y = c.labels;
    const std::size_t rr = static_cast<std::size_t>(R) * static_cast<std::size_t>(R);
    std::vector<std::int64_t> count(rr, 0);
    for (std::size_t i = 0; i < c.n; ++i) {
        const std::size_t row = static_cast<std::size_t>(y[i]) * static_cast<std::size_t>(R);
        for (int k = 0; k < R; ++k) count[row + static_cast<std::size_t>(k)] += c.below(i, k);
    }
    PairLocal out;
    out.categories = R;
    out.u_hat.assign(rr, 0.0);
    out.theta_hat.assign(rr, 0.0);
    out.defined.assign(rr, 0);
    const double denom = static_cast<double>(c.n) * static_cast<double>(c.n - 1);
    for (int r = 0; r < R; ++r) {
        for (int k = 0; k < R; ++k) {
            if (k == r) continue;
            const std::size_t idx = out.at(r, k);
            const std::int64_t pattern = c.class_count[static_cast<std::size_t>(k)] *
                                         c.class_count[static_cast<std::size_t>(r)];
            out.u_hat[idx] = static_cast<double>(count[idx]) / denom;
            out.theta_hat[idx] = static_cast<double>(pattern) / denom;
            out.defined[idx] = pattern > 0 ? 1 : 0;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Mean-rank numerator (pairwise baseline)
// ---------------------------------------------------------------------------

// numerator_r = #{(i1, i2): Y_i1 = r, X_i1 < X_i2} / (n (n-1)).
inline std::vector<double> local_mean_rank_numerator(const detail::StrictBelowCounts& c) {
    if (c.n < 2) throw ValidationError("local_mean_rank_numerator: need n >= 2");
    const int R = c.categories;
    const auto& y = c.labels;
    std::vector<std::int64_t> count(static_cast<std::size_t>(R), 0);
    for (std::size_t i = 0; i < c.n; ++i) {
        const std::int64_t above =
            static_cast<std::int64_t>(c.n) - c.below_total[i] - c.block_size[i];
        count[static_cast<std::size_t>(y[i])] += above;
    }
    const double denom = static_cast<double>(c.n) * static_cast<double>(c.n - 1);
    std::vector<double> out(static_cast<std::size_t>(R));
    for (int r = 0; r < R; ++r)
        out[static_cast<std::size_t>(r)] =
            static_cast<double>(count[static_cast<std::size_t>(r)]) / denom;
    return out;
}

// ---------------------------------------------------------------------------
// Triple-count statistics (variance-of-CDF baseline)
// ---------------------------------------------------------------------------

struct TripleLocal {
    std::vector<double> theta1; // per category
    std::vector<double> theta2;
};

// theta1_r = #{(i1,i2,i3) distinct: X_i3 < X_i1, X_i2 < X_i1, Y_i2 = Y_i3 = r}
// theta2_r drops the Y_i3 constraint; both / (n (n-1) (n-2)).
inline TripleLocal local_triple(const detail::StrictBelowCounts& c) {
    if (c.n < 3) throw ValidationError("local_triple: need n >= 3");
    const int R = c.categories;
    std::vector<std::int64_t> c1(static_cast<std::size_t>(R), 0),
        c2(static_cast<std::size_t>(R), 0);
    for (std::size_t i = 0; i < c.n; ++i) {
        const std::int64_t t = c.below_total[i];
        for (int r = 0; r < R; ++r) {
            const std::int64_t b = c.below(i, r);
            c1[static_cast<std::size_t>(r)] += b * (b - 1);
            c2[static_cast<std::size_t>(r)] += b * (t - 1);
        }
    }
    const double denom = static_cast<double>(c.n) * static_cast<double>(c.n - 1) *
                         static_cast<double>(c.n - 2);
    TripleLocal out;
    out.theta1.resize(static_cast<std::size_t>(R));
    out.theta2.resize(static_cast<std::size_t>(R));
    for (int r = 0; r < R; ++r) {
        out.theta1[static_cast<std::size_t>(r)] =
            static_cast<double>(c1[static_cast<std::size_t>(r)]) / denom;
        out.theta2[static_cast<std::size_t>(r)] =
            static_cast<double>(c2[static_cast<std::size_t>(r)]) / denom;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Local sup-distance over per-category empirical CDFs
// ---------------------------------------------------------------------------

struct SupDistanceLocal {
    double utility = 0.0;
    bool fewer_than_two_present = false; // emitted as a warning upstream
};

// max over locally present category pairs of sup_i |F_r1(X_i) - F_r2(X_i)|
// with strict empirical CDFs F_r(t) = #{X_s < t, Y_s = r} / #{Y_s = r}.
inline SupDistanceLocal local_sup_distance(const detail::StrictBelowCounts& c) {
    const int R = c.categories;
    std::vector<int> present;
    for (int r = 0; r < R; ++r)
        if (c.class_count[static_cast<std::size_t>(r)] > 0) present.push_back(r);
    SupDistanceLocal out;
    if (present.size() < 2) {
        out.fewer_than_two_present = true;
        return out;
    }
    for (std::size_t i = 0; i < c.n; ++i) {
        double lo = 2.0, hi = -1.0;
        for (int r : present) {
            const double f = static_cast<double>(c.below(i, r)) /
                             static_cast<double>(c.class_count[static_cast<std::size_t>(r)]);
            lo = std::min(lo, f);
            hi = std::max(hi, f);
        }
        out.utility = std::max(out.utility, hi - lo);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Higher-order tuple statistics
// ---------------------------------------------------------------------------

struct HigherOrderLocal {
    double u_hat = 0.0;
    double theta_hat = 0.0;
};

// Ordered distinct (d+1)-tuples: d1 "other category, below" slots, d-d1
// "same category, below" slots, and a final anchor of category r.
// Normalization n (n-1) ... (n-d).
inline std::vector<HigherOrderLocal> local_higher_order(const detail::StrictBelowCounts& c, int d,
                                                        int d1) {
    if (d < 1 || d1 < 1 || d1 > d)
        throw ValidationError("local_higher_order: need 1 <= d1 <= d");
    if (c.n < static_cast<std::size_t>(d) + 1)
        throw ValidationError("local_higher_order: need n >= d+1");
    const int R = c.categories;
    const auto& y = c.labels;
    const std::int64_t n = static_cast<std::int64_t>(c.n);

    std::vector<std::int64_t> u_count(static_cast<std::size_t>(R), 0);
    for (std::size_t k = 0; k < c.n; ++k) {
        const int r = y[k];
        const std::int64_t same_below = c.below(k, r);
        const std::int64_t other_below = c.below_total[k] - same_below;
        u_count[static_cast<std::size_t>(r)] +=
            falling_factorial(other_below, d1) * falling_factorial(same_below, d - d1);
    }
    const double denom = static_cast<double>(falling_factorial(n, d + 1));
    std::vector<HigherOrderLocal> out(static_cast<std::size_t>(R));
    for (int r = 0; r < R; ++r) {
        const std::int64_t cr = c.class_count[static_cast<std::size_t>(r)];
        const std::int64_t pattern =
            cr * falling_factorial(n - cr, d1) * falling_factorial(cr - 1, d - d1);
        out[static_cast<std::size_t>(r)].u_hat =
            static_cast<double>(u_count[static_cast<std::size_t>(r)]) / denom;
        out[static_cast<std::size_t>(r)].theta_hat = static_cast<double>(pattern) / denom;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Per-category moments (mean-based baseline)
// ---------------------------------------------------------------------------

struct ClassMomentLocal {
    std::vector<std::int64_t> count; // per category
    std::vector<double> sum;         // per category, sum of raw feature values
};

inline ClassMomentLocal local_class_moments(const std::vector<double>& x,
                                            const std::vector<int>& y, int num_categories) {
    if (x.size() != y.size()) throw ValidationError("column/label length mismatch");
    ClassMomentLocal out;
    out.count.assign(static_cast<std::size_t>(num_categories), 0);
    out.sum.assign(static_cast<std::size_t>(num_categories), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        ++out.count[static_cast<std::size_t>(y[i])];
        out.sum[static_cast<std::size_t>(y[i])] += x[i];
    }
    return out;
}

} // namespace fedscreen
