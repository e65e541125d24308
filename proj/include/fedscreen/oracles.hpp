#pragma once

// Reference implementations used by the test suite and the CLI's reference
// subcommand: brute-force U-statistic loops (kept deliberately naive and
// independent of the optimized estimators) and an exact finite-support
// population model on which the population-level identities hold to machine
// precision.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "fedscreen/common.hpp"

namespace fedscreen::oracle {

// ---------------------------------------------------------------------------
// Brute-force local statistics (straight loops over ordered tuples)
// ---------------------------------------------------------------------------

inline double mann_whitney_brute(const std::vector<double>& xa, const std::vector<double>& xb) {
    if (xa.empty() || xb.empty())
        throw UndefinedStatisticError("mann_whitney_brute: empty side");
    std::int64_t count = 0;
    for (double a : xa)
        for (double b : xb)
            if (a < b) ++count;
    return static_cast<double>(count) /
           (static_cast<double>(xa.size()) * static_cast<double>(xb.size()));
}

struct FirstOrderBrute {
    double u_hat = 0.0;
    double theta_hat = 0.0;
    double gamma_hat = 0.0;
    bool gamma_defined = false;
    double lambda = 0.0;
};

inline FirstOrderBrute first_order_brute(const std::vector<double>& x,
                                         const std::vector<int>& y, int r) {
    const std::size_t n = x.size();
    if (n < 2) throw ValidationError("first_order_brute: need n >= 2");
    std::int64_t u_count = 0, theta_count = 0;
    for (std::size_t i1 = 0; i1 < n; ++i1) {
        for (std::size_t i2 = 0; i2 < n; ++i2) {
            if (i1 == i2) continue;
            if (y[i1] != r && y[i2] == r) {
                ++theta_count;
                if (x[i1] < x[i2]) ++u_count;
            }
        }
    }
    FirstOrderBrute out;
    const double denom = static_cast<double>(n) * static_cast<double>(n - 1);
    out.u_hat = static_cast<double>(u_count) / denom;
    out.theta_hat = static_cast<double>(theta_count) / denom;
    if (theta_count > 0) {
        out.gamma_hat = static_cast<double>(u_count) / static_cast<double>(theta_count);
        out.gamma_defined = true;
        out.lambda = static_cast<double>(n / 2) * static_cast<double>(theta_count) / denom;
    }
    return out;
}

struct HigherOrderBrute {
    double u_hat = 0.0;
    double theta_hat = 0.0;
};

// Ordered distinct (d+1)-tuples: the first d1 indices carry
// I(X < X_k) I(Y != y_r), the next d-d1 carry I(X < X_k) I(Y = y_r), and the
// final index k carries I(Y_k = y_r). Normalization n(n-1)...(n-d).
inline HigherOrderBrute higher_order_brute(const std::vector<double>& x,
                                           const std::vector<int>& y, int r, int d, int d1) {
    const int n = static_cast<int>(x.size());
    if (d < 1 || d1 < 1 || d1 > d) throw ValidationError("higher_order_brute: need 1 <= d1 <= d");
    if (n <= d) throw ValidationError("higher_order_brute: need n >= d+2 samples");

    std::int64_t u_count = 0, theta_count = 0;
    std::vector<int> idx(static_cast<std::size_t>(d) + 1, 0);
    std::vector<bool> used(static_cast<std::size_t>(n), false);

    std::function<void(int)> recurse = [&](int depth) {
        if (depth == d + 1) {
            const int k = idx[static_cast<std::size_t>(d)];
            if (y[static_cast<std::size_t>(k)] != r) return;
            bool labels_ok = true, values_ok = true;
            for (int t = 0; t < d; ++t) {
                const int i = idx[static_cast<std::size_t>(t)];
                const bool want_other = t < d1;
                if ((y[static_cast<std::size_t>(i)] != r) != want_other) labels_ok = false;
                if (!(x[static_cast<std::size_t>(i)] < x[static_cast<std::size_t>(k)]))
                    values_ok = false;
            }
            if (labels_ok) {
                ++theta_count;
                if (values_ok) ++u_count;
            }
            return;
        }
        for (int i = 0; i < n; ++i) {
            if (used[static_cast<std::size_t>(i)]) continue;
            used[static_cast<std::size_t>(i)] = true;
            idx[static_cast<std::size_t>(depth)] = i;
            recurse(depth + 1);
            used[static_cast<std::size_t>(i)] = false;
        }
    };
    recurse(0);

    const double denom = static_cast<double>(falling_factorial(n, d + 1));
    return {static_cast<double>(u_count) / denom, static_cast<double>(theta_count) / denom};
}

inline double cavs_numerator_brute(const std::vector<double>& x, const std::vector<int>& y, int r) {
    const std::size_t n = x.size();
    if (n < 2) throw ValidationError("cavs_numerator_brute: need n >= 2");
    std::int64_t count = 0;
    for (std::size_t i1 = 0; i1 < n; ++i1) {
        if (y[i1] != r) continue;
        for (std::size_t i2 = 0; i2 < n; ++i2)
            if (x[i1] < x[i2]) ++count;
    }
    return static_cast<double>(count) /
           (static_cast<double>(n) * static_cast<double>(n - 1));
}

struct MvBrute {
    double theta1 = 0.0;
    double theta2 = 0.0;
};

inline MvBrute mv_brute(const std::vector<double>& x, const std::vector<int>& y, int r) {
    const std::size_t n = x.size();
    if (n < 3) throw ValidationError("mv_brute: need n >= 3");
    std::int64_t c1 = 0, c2 = 0;
    for (std::size_t i1 = 0; i1 < n; ++i1)
        for (std::size_t i2 = 0; i2 < n; ++i2) {
            if (i2 == i1) continue;
            for (std::size_t i3 = 0; i3 < n; ++i3) {
                if (i3 == i1 || i3 == i2) continue;
                if (!(x[i3] < x[i1] && x[i2] < x[i1])) continue;
                if (y[i2] == r) {
                    ++c2;
                    if (y[i3] == r) ++c1;
                }
            }
        }
    const double denom = static_cast<double>(n) * static_cast<double>(n - 1) *
                         static_cast<double>(n - 2);
    return {static_cast<double>(c1) / denom, static_cast<double>(c2) / denom};
}

// Max over present category pairs of the sup over sample points of the
// absolute difference of strict per-category empirical CDFs.
inline double fkf_brute(const std::vector<double>& x, const std::vector<int>& y, int num_categories,
                        bool* fewer_than_two_present = nullptr) {
    const std::size_t n = x.size();
    std::vector<std::int64_t> class_count(static_cast<std::size_t>(num_categories), 0);
    for (int v : y) class_count[static_cast<std::size_t>(v)]++;
    std::vector<int> present;
    for (int r = 0; r < num_categories; ++r)
        if (class_count[static_cast<std::size_t>(r)] > 0) present.push_back(r);
    if (fewer_than_two_present) *fewer_than_two_present = present.size() < 2;
    if (present.size() < 2) return 0.0;

    double best = 0.0;
    for (std::size_t a = 0; a < present.size(); ++a) {
        for (std::size_t b = a + 1; b < present.size(); ++b) {
            const int r1 = present[a], r2 = present[b];
            for (std::size_t i = 0; i < n; ++i) {
                std::int64_t below1 = 0, below2 = 0;
                for (std::size_t t = 0; t < n; ++t) {
                    if (x[t] < x[i]) {
                        if (y[t] == r1) ++below1;
                        if (y[t] == r2) ++below2;
                    }
                }
                const double f1 = static_cast<double>(below1) /
                                  static_cast<double>(class_count[static_cast<std::size_t>(r1)]);
                const double f2 = static_cast<double>(below2) /
                                  static_cast<double>(class_count[static_cast<std::size_t>(r2)]);
                best = std::max(best, std::abs(f1 - f2));
            }
        }
    }
    return best;
}

struct PairGammaBrute {
    double gamma_hat = 0.0;
    bool defined = false;
    double lambda = 0.0;
};

inline PairGammaBrute pair_gamma_brute(const std::vector<double>& x, const std::vector<int>& y,
                                       int r, int k) {
    if (r == k) throw ValidationError("pair_gamma_brute: categories must differ");
    const std::size_t n = x.size();
    std::int64_t na = 0, nb = 0, count = 0;
    for (std::size_t i1 = 0; i1 < n; ++i1) {
        if (y[i1] == k) ++na;
        if (y[i1] == r) ++nb;
    }
    PairGammaBrute out;
    if (na == 0 || nb == 0) return out;
    for (std::size_t i1 = 0; i1 < n; ++i1) {
        if (y[i1] != k) continue;
        for (std::size_t i2 = 0; i2 < n; ++i2)
            if (y[i2] == r && x[i1] < x[i2]) ++count;
    }
    out.defined = true;
    out.gamma_hat = static_cast<double>(count) / (static_cast<double>(na) * static_cast<double>(nb));
    out.lambda = static_cast<double>(n / 2) * static_cast<double>(na) * static_cast<double>(nb) /
                 (static_cast<double>(n) * static_cast<double>(n - 1));
    return out;
}

// ---------------------------------------------------------------------------
// Root finding and special functions
// ---------------------------------------------------------------------------

// Solves pi*(1-pi) = c on [0, 1/2] by bisection; reference for the
// closed-form bridge solution. Substituting s = 1 - 2 pi turns the quadratic
// into s^2 = 1 - 4c, whose root is simple, so bisection cannot stall on the
// flat spot the original parameterization has at c = 1/4.
inline double bridge_pi_star_bisection(double c) {
    if (c < 0.0 || c > 0.25)
        throw ValidationError("bridge_pi_star_bisection: c must lie in [0, 1/4]");
    const double a = 1.0 - 4.0 * c;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid * mid < a)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (1.0 - 0.5 * (lo + hi));
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Two-sample Kolmogorov-Smirnov statistic and its asymptotic p-value.
inline double ks_two_sample_statistic(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw ValidationError("ks_two_sample_statistic: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double best = 0.0;
    std::size_t ia = 0, ib = 0;
    while (ia < a.size() && ib < b.size()) {
        const double v = std::min(a[ia], b[ib]);
        while (ia < a.size() && a[ia] == v) ++ia;
        while (ib < b.size() && b[ib] == v) ++ib;
        const double fa = static_cast<double>(ia) / static_cast<double>(a.size());
        const double fb = static_cast<double>(ib) / static_cast<double>(b.size());
        best = std::max(best, std::abs(fa - fb));
    }
    return best;
}

inline double ks_two_sample_pvalue(double statistic, std::size_t na, std::size_t nb) {
    const double en = std::sqrt(static_cast<double>(na) * static_cast<double>(nb) /
                                static_cast<double>(na + nb));
    const double lambda = (en + 0.12 + 0.11 / en) * statistic;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = 2.0 * std::pow(-1.0, k - 1) * std::exp(-2.0 * lambda * lambda * k * k);
        sum += term;
        if (std::abs(term) < 1e-12) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Exact finite-support population
// ---------------------------------------------------------------------------

// A population over a finite ordered support where each support point stands
// for an infinitesimally narrow interval shared by all categories, with mass
// uniform inside it. Every CDF is then piecewise linear, all population
// functionals reduce to per-bin polynomial integrals (evaluated exactly with
// fixed-order Gauss-Legendre), and sampling produces continuous data with
// zero tie probability. Under this model the population identities relating
// the rank-based utilities hold exactly, matching what the strict-inequality
// U-statistics estimate.
class ExactPopulation {
public:
    // priors: length-R class proportions; class_bin_probs: R x B conditional
    // bin masses (each row sums to 1); support: strictly increasing positions.
    ExactPopulation(std::vector<double> priors, std::vector<std::vector<double>> class_bin_probs,
                    std::vector<double> support)
        : priors_(std::move(priors)),
          bins_(std::move(class_bin_probs)),
          support_(std::move(support)) {
        if (priors_.size() < 2) throw ValidationError("ExactPopulation: need >= 2 categories");
        if (bins_.size() != priors_.size())
            throw ValidationError("ExactPopulation: one bin row per category required");
        if (support_.empty()) throw ValidationError("ExactPopulation: empty support");
        for (std::size_t b = 1; b < support_.size(); ++b)
            if (!(support_[b - 1] < support_[b]))
                throw ValidationError("ExactPopulation: support must be strictly increasing");
        double prior_sum = 0.0;
        for (double v : priors_) {
            if (v < 0.0) throw ValidationError("ExactPopulation: negative prior");
            prior_sum += v;
        }
        if (std::abs(prior_sum - 1.0) > 1e-12)
            throw ValidationError("ExactPopulation: priors must sum to 1");
        for (const auto& row : bins_) {
            if (row.size() != support_.size())
                throw ValidationError("ExactPopulation: bin row length mismatch");
            double s = 0.0;
            for (double v : row) {
                if (v < 0.0) throw ValidationError("ExactPopulation: negative bin mass");
                s += v;
            }
            if (std::abs(s - 1.0) > 1e-12)
                throw ValidationError("ExactPopulation: bin rows must sum to 1");
        }
    }

    int categories() const { return static_cast<int>(priors_.size()); }
    double prior(int r) const { return priors_.at(static_cast<std::size_t>(r)); }
    std::size_t bin_count() const { return support_.size(); }
    const std::vector<double>& priors() const { return priors_; }
    const std::vector<double>& support() const { return support_; }

    // Generic exact expectation: integrand receives the per-category CDF
    // values and the mixture CDF value at one point of the (smeared)
    // support, and is integrated against the named density. The integrand
    // must be polynomial in the CDF values of total degree <= 15 for the
    // quadrature to be exact; every functional used here has degree <= 4.
    //
    // density_class: 0..R-1 integrates against that class's conditional law;
    // -1 integrates against the full mixture; -(2+r) against the mixture of
    // all classes except r (use density_excluding(r)).
    template <typename Fn>
    double expect(int density_class, Fn&& integrand) const {
        const int R = categories();
        const std::size_t B = bin_count();
        std::vector<double> density(B, 0.0);
        if (density_class >= 0) {
            density = bins_[static_cast<std::size_t>(density_class)];
        } else if (density_class == kMixture) {
            for (int r = 0; r < R; ++r)
                for (std::size_t b = 0; b < B; ++b)
                    density[b] += priors_[static_cast<std::size_t>(r)]
                                  * bins_[static_cast<std::size_t>(r)][b];
        } else {
            const int excluded = -density_class - 2;
            const double rest = 1.0 - priors_[static_cast<std::size_t>(excluded)];
            if (rest <= 0.0)
                throw ValidationError("ExactPopulation: excluded class has full mass");
            for (int r = 0; r < R; ++r) {
                if (r == excluded) continue;
                for (std::size_t b = 0; b < B; ++b)
                    density[b] += priors_[static_cast<std::size_t>(r)] / rest
                                  * bins_[static_cast<std::size_t>(r)][b];
            }
        }

        // Strict CDF level at the left edge of each bin, per category and for
        // the mixture.
        std::vector<std::vector<double>> lower(static_cast<std::size_t>(R),
                                               std::vector<double>(B, 0.0));
        for (int r = 0; r < R; ++r)
            for (std::size_t b = 1; b < B; ++b)
                lower[static_cast<std::size_t>(r)][b] =
                    lower[static_cast<std::size_t>(r)][b - 1]
                    + bins_[static_cast<std::size_t>(r)][b - 1];

        double total = 0.0;
        std::vector<double> f(static_cast<std::size_t>(R), 0.0);
        for (std::size_t b = 0; b < B; ++b) {
            if (density[b] == 0.0) continue;
            double bin_integral = 0.0;
            for (std::size_t q = 0; q < kGaussOrder; ++q) {
                const double t = kGaussNode[q];
                double fmix = 0.0;
                for (int r = 0; r < R; ++r) {
                    f[static_cast<std::size_t>(r)] =
                        lower[static_cast<std::size_t>(r)][b]
                        + t * bins_[static_cast<std::size_t>(r)][b];
                    fmix += priors_[static_cast<std::size_t>(r)] * f[static_cast<std::size_t>(r)];
                }
                bin_integral += kGaussWeight[q] * integrand(f, fmix);
            }
            total += density[b] * bin_integral;
        }
        return total;
    }

    static constexpr int kMixture = -1;
    static int density_excluding(int r) { return -r - 2; }

    // CDF of the mixture of classes != r, evaluated inside expect's integrand.
    double complement_cdf(const std::vector<double>& f, int r) const {
        const double rest = 1.0 - priors_[static_cast<std::size_t>(r)];
        double out = 0.0;
        for (int q = 0; q < categories(); ++q) {
            if (q == r) continue;
            out += priors_[static_cast<std::size_t>(q)] / rest * f[static_cast<std::size_t>(q)];
        }
        return out;
    }

    // gamma_r = E_{Y=r}[ F_{Y != r}(X) ].
    double gamma(int r) const {
        return expect(r, [&](const std::vector<double>& f, double) {
            return complement_cdf(f, r);
        });
    }

    double omega_first_order(int r) const { return std::abs(gamma(r) - 0.5); }

    // omega_{r,d} = | E_{Y=r}[ (F_{!=r} - F_{=r})^d ] |.
    double omega_order_d(int r, int d) const {
        const double v = expect(r, [&](const std::vector<double>& f, double) {
            const double diff = complement_cdf(f, r) - f[static_cast<std::size_t>(r)];
            double out = 1.0;
            for (int i = 0; i < d; ++i) out *= diff;
            return out;
        });
        return std::abs(v);
    }

    // Both sides of the distribution-free identity
    // E_{Y=r}[(F_{!=r}-F_{=r})^d] = E_{Y!=r}[(F_{!=r}-F_{=r})^d].
    std::pair<double, double> centered_moment_both_measures(int r, int d) const {
        auto diff_pow = [&](const std::vector<double>& f, double) {
            const double diff = complement_cdf(f, r) - f[static_cast<std::size_t>(r)];
            double out = 1.0;
            for (int i = 0; i < d; ++i) out *= diff;
            return out;
        };
        return {expect(r, diff_pow), expect(density_excluding(r), diff_pow)};
    }

    // E_{Y=r}[F_k(X)] for an ordered category pair.
    double gamma_pair(int r, int k) const {
        return expect(r, [&](const std::vector<double>& f, double) {
            return f[static_cast<std::size_t>(k)];
        });
    }

    // Original rank-correlation-style utility: sum over categories of
    // (E[F(X) I(Y=r)] - pi_r/2)^2.
    double cru_original() const {
        double out = 0.0;
        for (int r = 0; r < categories(); ++r) {
            const double pi = priors_[static_cast<std::size_t>(r)];
            const double e =
                pi * expect(r, [&](const std::vector<double>&, double fmix) { return fmix; });
            out += (e - 0.5 * pi) * (e - 0.5 * pi);
        }
        return out;
    }

    double cru_framework() const {
        double out = 0.0;
        for (int r = 0; r < categories(); ++r) {
            const double pi = priors_[static_cast<std::size_t>(r)];
            const double w = omega_first_order(r);
            out += (pi * (1.0 - pi)) * (pi * (1.0 - pi)) * w * w;
        }
        return out;
    }

    // Max-form conditional-mean-rank utility: max_r |E_{Y=r}[F(X)] - 1/2|.
    double cavs_original_max() const {
        double out = 0.0;
        for (int r = 0; r < categories(); ++r) {
            const double e =
                expect(r, [&](const std::vector<double>&, double fmix) { return fmix; });
            out = std::max(out, std::abs(e - 0.5));
        }
        return out;
    }

    double cavs_identity_term(int r) const {
        return (1.0 - priors_[static_cast<std::size_t>(r)]) * omega_first_order(r);
    }

    // E(Var_Y F(X|Y)) = sum_r pi_r Integral (F_r - F)^2 dF.
    double mv_original() const {
        double out = 0.0;
        for (int r = 0; r < categories(); ++r) {
            const double term = expect(kMixture, [&](const std::vector<double>& f, double fmix) {
                const double d = f[static_cast<std::size_t>(r)] - fmix;
                return d * d;
            });
            out += priors_[static_cast<std::size_t>(r)] * term;
        }
        return out;
    }

    double mv_framework() const {
        double out = 0.0;
        for (int r = 0; r < categories(); ++r) {
            const double pi = priors_[static_cast<std::size_t>(r)];
            out += pi * (1.0 - pi) * (1.0 - pi) * omega_order_d(r, 2);
        }
        return out;
    }

    // Population estimands of the triple-U baseline statistics.
    double mv_theta1_population(int r) const {
        const double pi = priors_[static_cast<std::size_t>(r)];
        return pi * pi * expect(kMixture, [&](const std::vector<double>& f, double) {
                   return f[static_cast<std::size_t>(r)] * f[static_cast<std::size_t>(r)];
               });
    }
    double mv_theta2_population(int r) const {
        const double pi = priors_[static_cast<std::size_t>(r)];
        return pi * expect(kMixture, [&](const std::vector<double>& f, double fmix) {
                   return f[static_cast<std::size_t>(r)] * fmix;
               });
    }

    // Population estimand of the pairwise-count numerator:
    // P(Y1 = r, X1 < X2) over an independent pair.
    double cavs_numerator_population(int r) const {
        const double pi = priors_[static_cast<std::size_t>(r)];
        return pi * expect(r, [&](const std::vector<double>&, double fmix) { return 1.0 - fmix; });
    }

    double class_mean(int r) const {
        double out = 0.0;
        for (std::size_t b = 0; b < bin_count(); ++b)
            out += bins_[static_cast<std::size_t>(r)][b] * support_[b];
        return out;
    }

    // Draws one value given a class label, with bins smeared to a width small
    // enough that the bin order is preserved and ties have probability 0.
    double sample_value(int label, Rng& rng) const {
        const auto& row = bins_[static_cast<std::size_t>(label)];
        const double u = rng.uniform01();
        double cum = 0.0;
        std::size_t b = bin_count() - 1;
        for (std::size_t i = 0; i < row.size(); ++i) {
            cum += row[i];
            if (u < cum) {
                b = i;
                break;
            }
        }
        return support_[b] + (rng.uniform01() - 0.5) * smear_width();
    }

    int sample_label(Rng& rng) const {
        return static_cast<int>(rng.categorical(priors_));
    }

    double smear_width() const {
        double min_gap = 1.0;
        for (std::size_t b = 1; b < support_.size(); ++b)
            min_gap = std::min(min_gap, support_[b] - support_[b - 1]);
        return min_gap * 1e-6;
    }

private:
    static constexpr std::size_t kGaussOrder = 8;
    // 8-point Gauss-Legendre nodes/weights mapped onto [0, 1]; exact for
    // polynomials up to degree 15.
    static constexpr std::array<double, kGaussOrder> kGaussNode = {
        0.019855071751231884, 0.10166676129318664, 0.2372337950418355, 0.40828267875217505,
        0.59171732124782495, 0.7627662049581645, 0.89833323870681336, 0.980144928248768116};
    static constexpr std::array<double, kGaussOrder> kGaussWeight = {
        0.05061426814518813, 0.11119051722668724, 0.15685332293894363, 0.18134189168918097,
        0.18134189168918097, 0.15685332293894363, 0.11119051722668724, 0.05061426814518813};

    std::vector<double> priors_;
    std::vector<std::vector<double>> bins_;
    std::vector<double> support_;
};

// Random population factory for property tests.
inline ExactPopulation random_population(Rng& rng, int num_categories, std::size_t num_bins,
                                         bool independent = false) {
    std::vector<double> priors = rng.dirichlet(2.0, static_cast<std::size_t>(num_categories));
    // Keep priors away from 0 so conditional densities stay well-formed.
    double total = 0.0;
    for (auto& v : priors) {
        v = 0.05 + 0.95 * v;
        total += v;
    }
    for (auto& v : priors) v /= total;

    std::vector<std::vector<double>> bins;
    std::vector<double> shared = rng.dirichlet(1.5, num_bins);
    for (int r = 0; r < num_categories; ++r)
        bins.push_back(independent ? shared : rng.dirichlet(1.5, num_bins));

    std::vector<double> support(num_bins);
    double pos = 0.0;
    for (auto& s : support) {
        pos += rng.uniform(0.25, 1.25);
        s = pos;
    }
    return ExactPopulation(std::move(priors), std::move(bins), std::move(support));
}

} // namespace fedscreen::oracle
