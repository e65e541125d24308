#pragma once

// Federated aggregation: clients upload a one-shot summary of per-feature
// count statistics (never raw rows), and the server pools the summaries into
// per-feature utilities. Summary payloads scale with (p, R) only, never with
// the local sample count, and category-absent situations surface as explicit
// undefined entries plus warnings instead of silent zeros.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "fedscreen/common.hpp"
#include "fedscreen/core.hpp"
#include "fedscreen/estimators.hpp"

namespace fedscreen {

// ---------------------------------------------------------------------------
// Client summary: the only object that crosses the trust boundary
// ---------------------------------------------------------------------------

struct SummaryArray {
    std::string name;
    std::size_t rows = 0; // 1 or p
    std::size_t cols = 0; // 1, R, or R*R
    std::vector<double> values; // row-major

    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

struct SummarySection {
    std::string name;
    std::vector<SummaryArray> arrays;

    const SummaryArray& array(const std::string& array_name) const {
        for (const auto& a : arrays)
            if (a.name == array_name) return a;
        throw ValidationError("summary section '" + name + "' has no array '" + array_name + "'");
    }
};

struct ClientSummary {
    std::string client_id;
    std::int64_t n = 0;
    std::size_t p = 0;
    int categories = 0;
    std::vector<std::int64_t> category_counts; // length R, sums to n
    std::vector<SummarySection> sections;

    const SummarySection* find_section(const std::string& name) const {
        for (const auto& s : sections)
            if (s.name == name) return &s;
        return nullptr;
    }
    const SummarySection& section(const std::string& name) const {
        const auto* s = find_section(name);
        if (!s) throw ValidationError("client summary lacks section '" + name + "'");
        return *s;
    }

    void validate() const {
        if (client_id.empty()) throw ValidationError("client summary: empty client id");
        if (n < 1) throw ValidationError("client summary: n must be positive");
        if (p < 1) throw ValidationError("client summary: p must be positive");
        if (categories < 2) throw ValidationError("client summary: need >= 2 categories");
        if (category_counts.size() != static_cast<std::size_t>(categories))
            throw ValidationError("client summary: category count vector has wrong length");
        std::int64_t total = 0;
        for (std::int64_t c : category_counts) {
            if (c < 0) throw ValidationError("client summary: negative category count");
            total += c;
        }
        if (total != n) throw ValidationError("client summary: category counts must sum to n");
        for (const auto& s : sections)
            for (const auto& a : s.arrays) {
                if (a.values.size() != a.rows * a.cols)
                    throw ValidationError("client summary: array '" + a.name +
                                          "' size mismatch in section '" + s.name + "'");
                for (double v : a.values)
                    if (!std::isfinite(v))
                        throw ValidationError("client summary: non-finite value in '" + s.name +
                                              "/" + a.name + "'");
            }
    }
};

// ---------------------------------------------------------------------------
// Section construction from a local shard
// ---------------------------------------------------------------------------

struct SummaryRequest {
    bool first_order = false;
    bool pair = false;
    bool mean_rank = false;
    bool triple = false;
    bool sup_distance = false;
    bool class_moment = false;
    std::vector<std::pair<int, int>> tuples; // (d, d1) with d >= 2, 1 <= d1 <= d

    void merge(const SummaryRequest& other) {
        first_order |= other.first_order;
        pair |= other.pair;
        mean_rank |= other.mean_rank;
        triple |= other.triple;
        sup_distance |= other.sup_distance;
        class_moment |= other.class_moment;
        for (auto t : other.tuples)
            if (std::find(tuples.begin(), tuples.end(), t) == tuples.end()) tuples.push_back(t);
    }
    bool needs_sorted_counts() const {
        return first_order || pair || mean_rank || triple || sup_distance || !tuples.empty();
    }
};

inline std::string tuple_section_name(int d) { return "tuple_d" + std::to_string(d); }

inline ClientSummary compute_client_summary(const Shard& shard, const SummaryRequest& req) {
    const std::size_t p = shard.p();
    const int R = shard.num_categories();
    ClientSummary out;
    out.client_id = shard.client_id();
    out.n = static_cast<std::int64_t>(shard.n());
    out.p = p;
    out.categories = R;
    out.category_counts = shard.category_counts(R);

    const std::size_t rr = static_cast<std::size_t>(R) * static_cast<std::size_t>(R);
    // Callers keep pointers to created arrays, so every section reserves its
    // final array count up front; push_back must never reallocate.
    auto make = [&](SummarySection& sec, const std::string& name, std::size_t rows,
                    std::size_t cols) -> SummaryArray& {
        if (sec.arrays.size() == sec.arrays.capacity())
            throw ValidationError("compute_client_summary: section '" + sec.name +
                                  "' missing capacity reservation");
        sec.arrays.push_back(SummaryArray{name, rows, cols, std::vector<double>(rows * cols, 0.0)});
        return sec.arrays.back();
    };

    SummarySection first{"first_order", {}};
    SummarySection pair_sec{"pair", {}};
    SummarySection mean_rank{"mean_rank", {}};
    SummarySection triple{"triple", {}};
    SummarySection sup{"sup_distance", {}};
    SummarySection moments{"class_moment", {}};
    std::map<int, SummarySection> tuple_secs;
    std::map<int, std::vector<int>> tuple_d1s;

    SummaryArray* first_u = nullptr;
    SummaryArray* first_theta = nullptr;
    if (req.first_order) {
        first.arrays.reserve(2);
        first_u = &make(first, "u", p, static_cast<std::size_t>(R));
        first_theta = &make(first, "theta", 1, static_cast<std::size_t>(R));
    }
    SummaryArray* pair_u = nullptr;
    SummaryArray* pair_theta = nullptr;
    if (req.pair) {
        pair_sec.arrays.reserve(2);
        pair_u = &make(pair_sec, "u", p, rr);
        pair_theta = &make(pair_sec, "theta", 1, rr);
    }
    SummaryArray* rank_num = nullptr;
    if (req.mean_rank) {
        mean_rank.arrays.reserve(1);
        rank_num = &make(mean_rank, "numerator", p, static_cast<std::size_t>(R));
    }
    SummaryArray* triple1 = nullptr;
    SummaryArray* triple2 = nullptr;
    if (req.triple) {
        triple.arrays.reserve(2);
        triple1 = &make(triple, "theta1", p, static_cast<std::size_t>(R));
        triple2 = &make(triple, "theta2", p, static_cast<std::size_t>(R));
    }
    SummaryArray* sup_util = nullptr;
    if (req.sup_distance) {
        sup.arrays.reserve(1);
        sup_util = &make(sup, "utility", p, 1);
    }
    SummaryArray* moment_sum = nullptr;
    if (req.class_moment) {
        moments.arrays.reserve(1);
        moment_sum = &make(moments, "sum", p, static_cast<std::size_t>(R));
    }

    for (auto [d, d1] : req.tuples) {
        if (d < 2 || d1 < 1 || d1 > d)
            throw ValidationError("compute_client_summary: invalid tuple order request");
        if (tuple_secs.find(d) == tuple_secs.end()) {
            std::size_t splits = 0;
            for (auto [od, od1] : req.tuples)
                if (od == d) ++splits;
            tuple_secs[d].name = tuple_section_name(d);
            tuple_secs[d].arrays.reserve(2 * splits);
        }
        auto& sec = tuple_secs[d];
        make(sec, "u_" + std::to_string(d1), p, static_cast<std::size_t>(R));
        make(sec, "theta_" + std::to_string(d1), 1, static_cast<std::size_t>(R));
        tuple_d1s[d].push_back(d1);
    }

    std::vector<double> column(shard.n());
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t i = 0; i < shard.n(); ++i) column[i] = shard.value(i, j);

        if (req.needs_sorted_counts()) {
            const auto counts = detail::compute_strict_below(column, shard.labels(), R);
            if (req.first_order) {
                const auto fo = local_first_order(counts);
                for (int r = 0; r < R; ++r) {
                    first_u->values[j * static_cast<std::size_t>(R) + static_cast<std::size_t>(r)] =
                        fo[static_cast<std::size_t>(r)].u_hat;
                    if (j == 0)
                        first_theta->values[static_cast<std::size_t>(r)] =
                            fo[static_cast<std::size_t>(r)].theta_hat;
                }
            }
            if (req.pair) {
                const auto pl = local_pair(counts);
                for (std::size_t idx = 0; idx < rr; ++idx) {
                    pair_u->values[j * rr + idx] = pl.u_hat[idx];
                    if (j == 0) pair_theta->values[idx] = pl.theta_hat[idx];
                }
            }
            if (req.mean_rank) {
                const auto nums = local_mean_rank_numerator(counts);
                for (int r = 0; r < R; ++r)
                    rank_num->values[j * static_cast<std::size_t>(R) + static_cast<std::size_t>(r)] =
                        nums[static_cast<std::size_t>(r)];
            }
            if (req.triple) {
                const auto tl = local_triple(counts);
                for (int r = 0; r < R; ++r) {
                    triple1->values[j * static_cast<std::size_t>(R) + static_cast<std::size_t>(r)] =
                        tl.theta1[static_cast<std::size_t>(r)];
                    triple2->values[j * static_cast<std::size_t>(R) + static_cast<std::size_t>(r)] =
                        tl.theta2[static_cast<std::size_t>(r)];
                }
            }
            if (req.sup_distance) sup_util->values[j] = local_sup_distance(counts).utility;
            for (auto& [d, sec] : tuple_secs) {
                for (std::size_t t = 0; t < tuple_d1s[d].size(); ++t) {
                    const int d1 = tuple_d1s[d][t];
                    const auto ho = local_higher_order(counts, d, d1);
                    auto& u_arr = sec.arrays[2 * t];
                    auto& theta_arr = sec.arrays[2 * t + 1];
                    for (int r = 0; r < R; ++r) {
                        u_arr.values[j * static_cast<std::size_t>(R) + static_cast<std::size_t>(r)] =
                            ho[static_cast<std::size_t>(r)].u_hat;
                        if (j == 0)
                            theta_arr.values[static_cast<std::size_t>(r)] =
                                ho[static_cast<std::size_t>(r)].theta_hat;
                    }
                }
            }
        }
        if (req.class_moment) {
            const auto cm = local_class_moments(column, shard.labels(), R);
            for (int r = 0; r < R; ++r)
                moment_sum->values[j * static_cast<std::size_t>(R) + static_cast<std::size_t>(r)] =
                    cm.sum[static_cast<std::size_t>(r)];
        }
    }

    if (req.first_order) out.sections.push_back(std::move(first));
    if (req.pair) out.sections.push_back(std::move(pair_sec));
    if (req.mean_rank) out.sections.push_back(std::move(mean_rank));
    if (req.triple) out.sections.push_back(std::move(triple));
    if (req.sup_distance) out.sections.push_back(std::move(sup));
    if (req.class_moment) out.sections.push_back(std::move(moments));
    for (auto& [d, sec] : tuple_secs) out.sections.push_back(std::move(sec));
    out.validate();
    return out;
}

// ---------------------------------------------------------------------------
// Server-side pooling
// ---------------------------------------------------------------------------

enum class WeightMode {
    half_floor,   // pool u and theta sums with weights floor(n_l / 2)
    pair_count,   // weighted mean of per-client ratios, weights = local pair mass
    min_variance, // weighted mean of per-client ratios, variance-optimal weights
};

inline WeightMode weight_mode_from_string(const std::string& s) {
    if (s == "half_floor") return WeightMode::half_floor;
    if (s == "pair_count") return WeightMode::pair_count;
    if (s == "min_variance") return WeightMode::min_variance;
    throw ValidationError("unknown weight mode '" + s + "'");
}

inline std::string to_string(WeightMode m) {
    switch (m) {
        case WeightMode::half_floor: return "half_floor";
        case WeightMode::pair_count: return "pair_count";
        case WeightMode::min_variance: return "min_variance";
    }
    throw ValidationError("invalid weight mode");
}

namespace detail {

// Clients are always folded in ascending client_id order so the floating
// point sums are bit-reproducible regardless of arrival order.
inline std::vector<std::size_t> client_order(const std::vector<ClientSummary>& clients) {
    if (clients.empty()) throw ValidationError("aggregation requires at least one client summary");
    std::vector<std::size_t> order(clients.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return clients[a].client_id < clients[b].client_id;
    });
    for (std::size_t i = 1; i < order.size(); ++i)
        if (clients[order[i - 1]].client_id == clients[order[i]].client_id)
            throw ValidationError("duplicate client id '" + clients[order[i]].client_id + "'");
    const auto& head = clients[order[0]];
    for (const auto& c : clients) {
        c.validate();
        if (c.p != head.p || c.categories != head.categories)
            throw ValidationError("client summaries disagree on feature count or categories");
    }
    return order;
}

inline void warn(std::vector<std::string>* warnings, std::string message) {
    if (warnings) warnings->push_back(std::move(message));
}

} // namespace detail

// Pooled one-vs-rest concordance matrix (p x R) with explicit undefined
// entries for categories that have no cross-category pairs anywhere.
inline CategoryUtilityMatrix aggregate_first_order_gamma(const std::vector<ClientSummary>& clients,
                                                         WeightMode mode,
                                                         std::vector<std::string>* warnings) {
    const auto order = detail::client_order(clients);
    const auto& head = clients[order[0]];
    const std::size_t p = head.p;
    const int R = head.categories;
    CategoryUtilityMatrix gamma(p, R, "pooled_gamma");

    for (int r = 0; r < R; ++r) {
        const std::size_t rc = static_cast<std::size_t>(r);
        // Weight per client; zero when the category has no local pair mass.
        std::vector<double> weight(clients.size(), 0.0);
        double weight_sum = 0.0;
        for (std::size_t oi = 0; oi < order.size(); ++oi) {
            const auto& cl = clients[order[oi]];
            const double theta = cl.section("first_order").array("theta").values[rc];
            const double h = static_cast<double>(cl.n / 2);
            double w = 0.0;
            switch (mode) {
                case WeightMode::half_floor:
                case WeightMode::pair_count:
                    w = h * theta;
                    break;
                case WeightMode::min_variance: {
                    const double cr = static_cast<double>(cl.category_counts[rc]);
                    const double pair_mass = (static_cast<double>(cl.n) - cr) * cr;
                    w = 12.0 * pair_mass / (static_cast<double>(cl.n) + 1.0);
                    break;
                }
            }
            if (theta <= 0.0) w = 0.0;
            weight[oi] = w;
            weight_sum += w;
        }
        if (weight_sum <= 0.0) {
            detail::warn(warnings, "category " + std::to_string(r) +
                                       ": no cross-category pairs on any client; pooled "
                                       "concordance undefined");
            for (std::size_t j = 0; j < p; ++j) gamma.set_undefined(j, r);
            continue;
        }
        for (std::size_t j = 0; j < p; ++j) {
            if (mode == WeightMode::half_floor) {
                double num = 0.0, den = 0.0;
                for (std::size_t oi = 0; oi < order.size(); ++oi) {
                    const auto& cl = clients[order[oi]];
                    const double h = static_cast<double>(cl.n / 2);
                    const auto& sec = cl.section("first_order");
                    num += h * sec.array("u").at(j, rc);
                    den += h * sec.array("theta").values[rc];
                }
                gamma.set(j, r, num / den);
            } else {
                double num = 0.0;
                for (std::size_t oi = 0; oi < order.size(); ++oi) {
                    if (weight[oi] <= 0.0) continue;
                    const auto& cl = clients[order[oi]];
                    const auto& sec = cl.section("first_order");
                    const double theta = sec.array("theta").values[rc];
                    const double ratio = sec.array("u").at(j, rc) / theta;
                    num += weight[oi] * ratio;
                }
                gamma.set(j, r, num / weight_sum);
            }
        }
    }
    return gamma;
}

// One-vs-rest screening utility: max over defined categories of the pooled
// concordance's distance from 1/2.
inline UtilityVector lrffs_from_gamma(const CategoryUtilityMatrix& gamma) {
    UtilityVector out;
    out.method_tag = "lrffs";
    out.values.resize(gamma.p());
    for (std::size_t j = 0; j < gamma.p(); ++j) {
        double best = -1.0;
        for (int r = 0; r < gamma.categories(); ++r) {
            if (!gamma.defined(j, r)) continue;
            best = std::max(best, std::abs(gamma.value(j, r) - 0.5));
        }
        if (best < 0.0)
            throw UndefinedStatisticError(
                "screening utility undefined: every category lacks cross-category pairs");
        out.values[j] = best;
    }
    return out;
}

// Ordered category-pair variant: pools the pair concordance for every ordered
// pair and takes the max distance from 1/2 over pairs with any pooled mass.
inline UtilityVector lrffs_pair_utility(const std::vector<ClientSummary>& clients, WeightMode mode,
                                        std::vector<std::string>* warnings) {
    const auto order = detail::client_order(clients);
    const auto& head = clients[order[0]];
    const std::size_t p = head.p;
    const int R = head.categories;
    const std::size_t rr = static_cast<std::size_t>(R) * static_cast<std::size_t>(R);

    // Pair weights per (r, k) per client.
    std::vector<std::vector<double>> weight(rr, std::vector<double>(clients.size(), 0.0));
    std::vector<double> weight_sum(rr, 0.0);
    for (std::size_t idx = 0; idx < rr; ++idx) {
        const int r = static_cast<int>(idx) / R;
        const int k = static_cast<int>(idx) % R;
        if (r == k) continue;
        for (std::size_t oi = 0; oi < order.size(); ++oi) {
            const auto& cl = clients[order[oi]];
            const double theta = cl.section("pair").array("theta").values[idx];
            double w = 0.0;
            switch (mode) {
                case WeightMode::half_floor:
                case WeightMode::pair_count:
                    w = static_cast<double>(cl.n / 2) * theta;
                    break;
                case WeightMode::min_variance: {
                    const double ck = static_cast<double>(cl.category_counts[static_cast<std::size_t>(k)]);
                    const double cr = static_cast<double>(cl.category_counts[static_cast<std::size_t>(r)]);
                    w = 12.0 * ck * cr / (static_cast<double>(cl.n) + 1.0);
                    break;
                }
            }
            if (theta <= 0.0) w = 0.0;
            weight[idx][oi] = w;
            weight_sum[idx] += w;
        }
        if (weight_sum[idx] <= 0.0)
            detail::warn(warnings, "category pair (" + std::to_string(r) + "," + std::to_string(k) +
                                       "): no joint occurrences on any client; pair concordance "
                                       "undefined");
    }

    UtilityVector out;
    out.method_tag = "lrffs_pair";
    out.values.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        double best = -1.0;
        for (std::size_t idx = 0; idx < rr; ++idx) {
            const int r = static_cast<int>(idx) / R;
            const int k = static_cast<int>(idx) % R;
            if (r == k || weight_sum[idx] <= 0.0) continue;
            double pooled = 0.0;
            if (mode == WeightMode::half_floor) {
                double num = 0.0, den = 0.0;
                for (std::size_t oi = 0; oi < order.size(); ++oi) {
                    const auto& cl = clients[order[oi]];
                    const double h = static_cast<double>(cl.n / 2);
                    const auto& sec = cl.section("pair");
                    num += h * sec.array("u").at(j, idx);
                    den += h * sec.array("theta").values[idx];
                }
                pooled = num / den;
            } else {
                double num = 0.0;
                for (std::size_t oi = 0; oi < order.size(); ++oi) {
                    if (weight[idx][oi] <= 0.0) continue;
                    const auto& cl = clients[order[oi]];
                    const auto& sec = cl.section("pair");
                    num += weight[idx][oi] *
                           (sec.array("u").at(j, idx) / sec.array("theta").values[idx]);
                }
                pooled = num / weight_sum[idx];
            }
            best = std::max(best, std::abs(pooled - 0.5));
        }
        if (best < 0.0)
            throw UndefinedStatisticError(
                "pair screening utility undefined: no ordered category pair has joint mass");
        out.values[j] = best;
    }
    return out;
}

// Sample-count-weighted pooled category proportions (used by the weighting
// presets of the general framework).
inline std::vector<double> pooled_proportions(const std::vector<ClientSummary>& clients) {
    const auto order = detail::client_order(clients);
    const int R = clients[order[0]].categories;
    std::vector<double> counts(static_cast<std::size_t>(R), 0.0);
    double total = 0.0;
    for (std::size_t oi = 0; oi < order.size(); ++oi) {
        const auto& cl = clients[order[oi]];
        for (int r = 0; r < R; ++r)
            counts[static_cast<std::size_t>(r)] +=
                static_cast<double>(cl.category_counts[static_cast<std::size_t>(r)]);
        total += static_cast<double>(cl.n);
    }
    for (auto& c : counts) c /= total;
    return counts;
}

// ---------------------------------------------------------------------------
// General weighted framework over per-category utilities
// ---------------------------------------------------------------------------

struct GeneralSpec {
    int d = 1;                        // order of the CDF-difference moment
    int k = 1;                        // power applied to each category utility
    std::string zeta_preset = "equal"; // argmax | equal | cavs | mvsis | cru
};

inline GeneralSpec general_spec_for_preset(const std::string& preset) {
    if (preset == "argmax") return {1, 1, "argmax"};
    if (preset == "equal") return {1, 1, "equal"};
    if (preset == "cavs") return {1, 1, "cavs"};
    if (preset == "mvsis") return {2, 1, "mvsis"};
    if (preset == "cru") return {1, 2, "cru"};
    throw ValidationError("unknown weighting preset '" + preset + "'");
}

// Per-category order-d utility matrix |E[(F_other - F_same)^d]| pooled across
// clients, with undefined entries where the category never appears.
inline CategoryUtilityMatrix aggregate_order_d_utility(const std::vector<ClientSummary>& clients,
                                                       int d, WeightMode mode,
                                                       std::vector<std::string>* warnings) {
    if (d == 1) {
        const auto gamma = aggregate_first_order_gamma(clients, mode, warnings);
        CategoryUtilityMatrix out(gamma.p(), gamma.categories(), "order_1_utility");
        for (std::size_t j = 0; j < gamma.p(); ++j)
            for (int r = 0; r < gamma.categories(); ++r) {
                if (gamma.defined(j, r))
                    out.set(j, r, std::abs(gamma.value(j, r) - 0.5));
                else
                    out.set_undefined(j, r);
            }
        return out;
    }
    if (mode != WeightMode::half_floor && mode != WeightMode::pair_count)
        throw ValidationError("order-d pooling supports half_floor/pair_count weights only");

    const auto order = detail::client_order(clients);
    const auto& head = clients[order[0]];
    const std::size_t p = head.p;
    const int R = head.categories;
    const std::string sec_name = tuple_section_name(d);

    CategoryUtilityMatrix out(p, R, "order_" + std::to_string(d) + "_utility");
    for (int r = 0; r < R; ++r) {
        const std::size_t rc = static_cast<std::size_t>(r);
        // The estimator needs the pooled ratio for every split d1, so the
        // category is defined only when each split has pooled tuple mass.
        bool defined = true;
        for (int d1 = 1; d1 <= d && defined; ++d1) {
            double den = 0.0;
            for (std::size_t oi = 0; oi < order.size(); ++oi) {
                const auto& cl = clients[order[oi]];
                den += static_cast<double>(cl.n / (d + 1)) *
                       cl.section(sec_name).array("theta_" + std::to_string(d1)).values[rc];
            }
            if (den <= 0.0) defined = false;
        }
        if (!defined) {
            detail::warn(warnings, "category " + std::to_string(r) +
                                       ": no order-" + std::to_string(d) +
                                       " tuples on any client; utility undefined");
            for (std::size_t j = 0; j < p; ++j) out.set_undefined(j, r);
            continue;
        }
        for (std::size_t j = 0; j < p; ++j) {
            double value = (d % 2 == 0 ? 1.0 : -1.0) / static_cast<double>(d + 1);
            for (int d1 = 1; d1 <= d; ++d1) {
                double num = 0.0, den = 0.0;
                for (std::size_t oi = 0; oi < order.size(); ++oi) {
                    const auto& cl = clients[order[oi]];
                    const double h = static_cast<double>(cl.n / (d + 1));
                    const auto& sec = cl.section(sec_name);
                    num += h * sec.array("u_" + std::to_string(d1)).at(j, rc);
                    den += h * sec.array("theta_" + std::to_string(d1)).values[rc];
                }
                const double gamma_bar = num / den;
                const double sign = ((d - d1) % 2 == 0) ? 1.0 : -1.0;
                value += sign * static_cast<double>(binomial_coefficient(d, d1)) * gamma_bar;
            }
            out.set(j, r, std::abs(value));
        }
    }
    return out;
}

// omega_j = max_r omega_{j,r,d} (argmax preset) or
// omega_j = sum_r zeta_r(pooled pi) * omega_{j,r,d}^k.
inline UtilityVector general_framework_utility(const std::vector<ClientSummary>& clients,
                                               const GeneralSpec& spec, WeightMode mode,
                                               std::vector<std::string>* warnings) {
    const auto utilities = aggregate_order_d_utility(clients, spec.d, mode, warnings);
    const auto pi = pooled_proportions(clients);
    const std::size_t p = utilities.p();
    const int R = utilities.categories();

    std::vector<double> zeta(static_cast<std::size_t>(R), 1.0);
    const bool argmax = spec.zeta_preset == "argmax";
    if (!argmax) {
        for (int r = 0; r < R; ++r) {
            const double q = pi[static_cast<std::size_t>(r)];
            double z = 1.0;
            if (spec.zeta_preset == "equal")
                z = 1.0;
            else if (spec.zeta_preset == "cavs")
                z = 1.0 - q;
            else if (spec.zeta_preset == "mvsis")
                z = q * (1.0 - q) * (1.0 - q);
            else if (spec.zeta_preset == "cru")
                z = (q * (1.0 - q)) * (q * (1.0 - q));
            else
                throw ValidationError("unknown weighting preset '" + spec.zeta_preset + "'");
            zeta[static_cast<std::size_t>(r)] = z;
        }
    }

    UtilityVector out;
    out.method_tag = argmax ? "general_argmax_d" + std::to_string(spec.d)
                            : "general_" + spec.zeta_preset + "_d" + std::to_string(spec.d) + "_k" +
                                  std::to_string(spec.k);
    out.values.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        if (argmax) {
            double best = -1.0;
            for (int r = 0; r < R; ++r) {
                if (!utilities.defined(j, r)) continue;
                best = std::max(best, utilities.value(j, r));
            }
            if (best < 0.0)
                throw UndefinedStatisticError(
                    "screening utility undefined: every category lacks tuple mass");
            out.values[j] = best;
        } else {
            double total = 0.0;
            for (int r = 0; r < R; ++r) {
                const double z = zeta[static_cast<std::size_t>(r)];
                if (!utilities.defined(j, r)) {
                    if (z > 0.0)
                        throw UndefinedStatisticError(
                            "weighted screening utility undefined: category " + std::to_string(r) +
                            " has positive weight but no pooled statistic");
                    continue;
                }
                double u = utilities.value(j, r);
                double powed = 1.0;
                for (int t = 0; t < spec.k; ++t) powed *= u;
                total += z * powed;
            }
            out.values[j] = total;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Baselines
// ---------------------------------------------------------------------------

// Mean-gap screening: per category pooled mean of raw values, utility is the
// spread between the largest and smallest category mean.
inline UtilityVector psis_utility(const std::vector<ClientSummary>& clients,
                                  std::vector<std::string>* warnings) {
    (void)warnings;
    const auto order = detail::client_order(clients);
    const auto& head = clients[order[0]];
    const std::size_t p = head.p;
    const int R = head.categories;

    std::vector<double> count(static_cast<std::size_t>(R), 0.0);
    for (std::size_t oi = 0; oi < order.size(); ++oi)
        for (int r = 0; r < R; ++r)
            count[static_cast<std::size_t>(r)] += static_cast<double>(
                clients[order[oi]].category_counts[static_cast<std::size_t>(r)]);
    for (int r = 0; r < R; ++r)
        if (count[static_cast<std::size_t>(r)] <= 0.0)
            throw ValidationError("mean-gap screening requires every category globally present; "
                                  "category " +
                                  std::to_string(r) + " is empty");

    UtilityVector out;
    out.method_tag = "psis";
    out.values.resize(p);
    std::vector<double> sum(static_cast<std::size_t>(R));
    for (std::size_t j = 0; j < p; ++j) {
        std::fill(sum.begin(), sum.end(), 0.0);
        for (std::size_t oi = 0; oi < order.size(); ++oi) {
            const auto& sec = clients[order[oi]].section("class_moment");
            for (int r = 0; r < R; ++r)
                sum[static_cast<std::size_t>(r)] += sec.array("sum").at(j, static_cast<std::size_t>(r));
        }
        double lo = sum[0] / count[0], hi = lo;
        for (int r = 1; r < R; ++r) {
            const double mean = sum[static_cast<std::size_t>(r)] / count[static_cast<std::size_t>(r)];
            lo = std::min(lo, mean);
            hi = std::max(hi, mean);
        }
        out.values[j] = hi - lo;
    }
    return out;
}

// Mean-rank screening: pooled pairwise numerator over pooled proportion, max
// distance from 1/2 across globally present categories.
inline UtilityVector cavs_utility(const std::vector<ClientSummary>& clients,
                                  std::vector<std::string>* warnings) {
    const auto order = detail::client_order(clients);
    const auto& head = clients[order[0]];
    const std::size_t p = head.p;
    const int R = head.categories;

    double h_sum = 0.0, n_sum = 0.0;
    std::vector<double> count(static_cast<std::size_t>(R), 0.0);
    for (std::size_t oi = 0; oi < order.size(); ++oi) {
        const auto& cl = clients[order[oi]];
        h_sum += static_cast<double>(cl.n / 2);
        n_sum += static_cast<double>(cl.n);
        for (int r = 0; r < R; ++r)
            count[static_cast<std::size_t>(r)] +=
                static_cast<double>(cl.category_counts[static_cast<std::size_t>(r)]);
    }
    if (h_sum <= 0.0)
        throw ValidationError("mean-rank screening needs at least one client with n >= 2");

    std::vector<std::uint8_t> present(static_cast<std::size_t>(R), 1);
    for (int r = 0; r < R; ++r) {
        if (count[static_cast<std::size_t>(r)] <= 0.0) {
            present[static_cast<std::size_t>(r)] = 0;
            detail::warn(warnings, "category " + std::to_string(r) +
                                       " absent from every client; skipped by mean-rank "
                                       "screening");
        }
    }

    UtilityVector out;
    out.method_tag = "cavs_max";
    out.values.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        double best = -1.0;
        for (int r = 0; r < R; ++r) {
            if (!present[static_cast<std::size_t>(r)]) continue;
            double num = 0.0;
            for (std::size_t oi = 0; oi < order.size(); ++oi) {
                const auto& cl = clients[order[oi]];
                num += static_cast<double>(cl.n / 2) *
                       cl.section("mean_rank").array("numerator").at(j, static_cast<std::size_t>(r));
            }
            const double theta_bar = num / h_sum;
            const double percent = count[static_cast<std::size_t>(r)] / n_sum;
            best = std::max(best, std::abs(theta_bar / percent - 0.5));
        }
        if (best < 0.0)
            throw UndefinedStatisticError("mean-rank screening: no category globally present");
        out.values[j] = best;
    }
    return out;
}

// Variance-of-CDF screening from pooled triple statistics.
inline UtilityVector mv_utility(const std::vector<ClientSummary>& clients,
                                std::vector<std::string>* warnings) {
    const auto order = detail::client_order(clients);
    const auto& head = clients[order[0]];
    const std::size_t p = head.p;
    const int R = head.categories;

    double n_sum = 0.0;
    std::vector<double> count(static_cast<std::size_t>(R), 0.0);
    for (std::size_t oi = 0; oi < order.size(); ++oi) {
        const auto& cl = clients[order[oi]];
        n_sum += static_cast<double>(cl.n);
        for (int r = 0; r < R; ++r)
            count[static_cast<std::size_t>(r)] +=
                static_cast<double>(cl.category_counts[static_cast<std::size_t>(r)]);
    }
    std::vector<std::uint8_t> present(static_cast<std::size_t>(R), 1);
    for (int r = 0; r < R; ++r)
        if (count[static_cast<std::size_t>(r)] <= 0.0) {
            present[static_cast<std::size_t>(r)] = 0;
            detail::warn(warnings, "category " + std::to_string(r) +
                                       " absent from every client; skipped by variance-of-CDF "
                                       "screening");
        }

    UtilityVector out;
    out.method_tag = "mvsis";
    out.values.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        double total = 0.0;
        for (int r = 0; r < R; ++r) {
            if (!present[static_cast<std::size_t>(r)]) continue;
            double t1 = 0.0, t2 = 0.0;
            for (std::size_t oi = 0; oi < order.size(); ++oi) {
                const auto& cl = clients[order[oi]];
                const auto& sec = cl.section("triple");
                const double w = static_cast<double>(cl.n);
                t1 += w * sec.array("theta1").at(j, static_cast<std::size_t>(r));
                t2 += w * sec.array("theta2").at(j, static_cast<std::size_t>(r));
            }
            t1 /= n_sum;
            t2 /= n_sum;
            const double percent = count[static_cast<std::size_t>(r)] / n_sum;
            total += t1 / percent - 2.0 * t2 + percent / 3.0;
        }
        out.values[j] = total;
    }
    return out;
}

// Local sup-distance screening: sample-size-weighted mean of client-local
// utilities. Purely local evidence, so label-shift bias stays in.
inline UtilityVector fkf_utility(const std::vector<ClientSummary>& clients,
                                 std::vector<std::string>* warnings) {
    const auto order = detail::client_order(clients);
    const auto& head = clients[order[0]];
    const std::size_t p = head.p;

    double n_sum = 0.0;
    for (std::size_t oi = 0; oi < order.size(); ++oi) {
        const auto& cl = clients[order[oi]];
        n_sum += static_cast<double>(cl.n);
        int present = 0;
        for (std::int64_t c : cl.category_counts)
            if (c > 0) ++present;
        if (present < 2)
            detail::warn(warnings, "client '" + cl.client_id +
                                       "' has fewer than two categories present; its local "
                                       "sup-distance is zero");
    }

    UtilityVector out;
    out.method_tag = "fkf";
    out.values.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        double total = 0.0;
        for (std::size_t oi = 0; oi < order.size(); ++oi) {
            const auto& cl = clients[order[oi]];
            total += static_cast<double>(cl.n) *
                     cl.section("sup_distance").array("utility").at(j, 0);
        }
        out.values[j] = total / n_sum;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Label-shift bridge diagnostics
// ---------------------------------------------------------------------------

struct BridgeDiagnostics {
    std::vector<double> c;             // pooled pair-mass rate per category
    std::vector<double> pi_star;       // equivalent balanced proportion
    std::vector<double> theta_star;    // pi_star (1 - pi_star) == c
    std::vector<double> pooled_pi;     // half-floor-weighted pooled proportion
    std::vector<double> vartheta;      // heterogeneity ratio, when defined
    std::vector<std::uint8_t> vartheta_defined;
};

inline BridgeDiagnostics bridge_diagnostics(const std::vector<ClientSummary>& clients) {
    const auto order = detail::client_order(clients);
    const int R = clients[order[0]].categories;

    BridgeDiagnostics out;
    out.c.assign(static_cast<std::size_t>(R), 0.0);
    out.pi_star.assign(static_cast<std::size_t>(R), 0.0);
    out.theta_star.assign(static_cast<std::size_t>(R), 0.0);
    out.pooled_pi.assign(static_cast<std::size_t>(R), 0.0);
    out.vartheta.assign(static_cast<std::size_t>(R), 0.0);
    out.vartheta_defined.assign(static_cast<std::size_t>(R), 0);

    double h_sum = 0.0;
    for (std::size_t oi = 0; oi < order.size(); ++oi)
        h_sum += static_cast<double>(clients[order[oi]].n / 2);
    if (h_sum <= 0.0) throw ValidationError("bridge diagnostics need a client with n >= 2");

    for (int r = 0; r < R; ++r) {
        double c_num = 0.0, pi_num = 0.0;
        for (std::size_t oi = 0; oi < order.size(); ++oi) {
            const auto& cl = clients[order[oi]];
            const double h = static_cast<double>(cl.n / 2);
            const double pi_l = static_cast<double>(cl.category_counts[static_cast<std::size_t>(r)]) /
                                static_cast<double>(cl.n);
            c_num += h * pi_l * (1.0 - pi_l);
            pi_num += h * pi_l;
        }
        double c = c_num / h_sum;
        if (c > 0.25) {
            if (c > 0.25 + 1e-12)
                throw ValidationError("pooled pair-mass rate exceeds 1/4 for category " +
                                      std::to_string(r));
            c = 0.25;
        }
        const double pi_bar = pi_num / h_sum;
        out.c[static_cast<std::size_t>(r)] = c;
        out.pi_star[static_cast<std::size_t>(r)] = 0.5 * (1.0 - std::sqrt(1.0 - 4.0 * c));
        out.theta_star[static_cast<std::size_t>(r)] =
            out.pi_star[static_cast<std::size_t>(r)] * (1.0 - out.pi_star[static_cast<std::size_t>(r)]);
        out.pooled_pi[static_cast<std::size_t>(r)] = pi_bar;
        if (pi_bar > 0.0 && pi_bar < 1.0) {
            out.vartheta[static_cast<std::size_t>(r)] = c / (pi_bar * (1.0 - pi_bar));
            out.vartheta_defined[static_cast<std::size_t>(r)] = 1;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Method dispatch
// ---------------------------------------------------------------------------

struct MethodSpec {
    std::string name = "lrffs"; // lrffs | lrffs_pair | cru | mvsis | cavs_max | cavs_sum |
                                // psis | fkf | general
    WeightMode weights = WeightMode::half_floor;
    GeneralSpec general; // used when name == "general"

    // cru and cavs_sum are fixed instantiations of the general framework.
    GeneralSpec effective_general() const {
        if (spec_is_general()) {
            if (name == "cru") return {1, 2, "cru"};
            if (name == "cavs_sum") return {1, 1, "cavs"};
            return general;
        }
        throw ValidationError("method '" + name + "' has no framework parameters");
    }
    bool spec_is_general() const {
        return name == "general" || name == "cru" || name == "cavs_sum";
    }
};

inline SummaryRequest summary_request_for(const MethodSpec& spec) {
    SummaryRequest req;
    if (spec.name == "lrffs") {
        req.first_order = true;
    } else if (spec.name == "lrffs_pair") {
        req.pair = true;
    } else if (spec.spec_is_general()) {
        const auto gen = spec.effective_general();
        if (gen.d < 1) throw ValidationError("general framework: d must be >= 1");
        if (gen.k < 1) throw ValidationError("general framework: k must be >= 1");
        if (gen.d == 1) {
            req.first_order = true;
        } else {
            for (int d1 = 1; d1 <= gen.d; ++d1) req.tuples.emplace_back(gen.d, d1);
        }
    } else if (spec.name == "psis") {
        req.class_moment = true;
    } else if (spec.name == "cavs_max") {
        req.mean_rank = true;
    } else if (spec.name == "mvsis") {
        req.triple = true;
    } else if (spec.name == "fkf") {
        req.sup_distance = true;
    } else {
        throw ValidationError("unknown screening method '" + spec.name + "'");
    }
    return req;
}

struct MethodResult {
    UtilityVector utilities;
    std::vector<std::string> warnings;
};

inline MethodResult run_method(const std::vector<ClientSummary>& clients, const MethodSpec& spec) {
    MethodResult out;
    if (spec.name == "lrffs") {
        const auto gamma = aggregate_first_order_gamma(clients, spec.weights, &out.warnings);
        out.utilities = lrffs_from_gamma(gamma);
    } else if (spec.name == "lrffs_pair") {
        out.utilities = lrffs_pair_utility(clients, spec.weights, &out.warnings);
    } else if (spec.spec_is_general()) {
        out.utilities =
            general_framework_utility(clients, spec.effective_general(), spec.weights,
                                      &out.warnings);
    } else if (spec.name == "psis") {
        out.utilities = psis_utility(clients, &out.warnings);
    } else if (spec.name == "cavs_max") {
        out.utilities = cavs_utility(clients, &out.warnings);
    } else if (spec.name == "mvsis") {
        out.utilities = mv_utility(clients, &out.warnings);
    } else if (spec.name == "fkf") {
        out.utilities = fkf_utility(clients, &out.warnings);
    } else {
        throw ValidationError("unknown screening method '" + spec.name + "'");
    }
    return out;
}

} // namespace fedscreen
