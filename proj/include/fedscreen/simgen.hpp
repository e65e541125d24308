#pragma once

// Synthetic federation generators: location-shift and multinomial-logistic
// feature models with per-client label heterogeneity, plus contamination
// (outlier rows, label shuffling, category-axis misalignment). Every
// generator is a pure function of (spec, seed): per-client randomness comes
// from seed_hierarchy(seed, client_id, purpose), so reruns are bit-identical
// and clients are independent.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "fedscreen/aggregation.hpp"
#include "fedscreen/common.hpp"
#include "fedscreen/core.hpp"

namespace fedscreen {

// ---------------------------------------------------------------------------
// Label heterogeneity
// ---------------------------------------------------------------------------

enum class LabelScheme {
    uniform,            // pi = 1/R everywhere
    softmax,            // pi ∝ exp(beta_r), beta_r ~ U(1, v); v = 1 -> uniform
    dirichlet,          // pi ~ Dirichlet(u, ..., u); smaller u -> more skew
    missing_categories, // uniform base, a random subset of categories zeroed
    fixed,              // explicit proportion vector shared by every client
};

struct LabelSpec {
    LabelScheme scheme = LabelScheme::uniform;
    double param = 1.0; // softmax spread v, or dirichlet concentration u
    int max_missing = 0;
    std::vector<double> fixed;

    void validate(int categories) const {
        switch (scheme) {
            case LabelScheme::uniform:
                break;
            case LabelScheme::softmax:
                if (!(param >= 1.0)) throw ValidationError("softmax labels need v >= 1");
                break;
            case LabelScheme::dirichlet:
                if (!(param > 0.0)) throw ValidationError("dirichlet labels need u > 0");
                break;
            case LabelScheme::missing_categories:
                if (max_missing < 0 || max_missing >= categories)
                    throw ValidationError("missing-category count must lie in [0, R)");
                break;
            case LabelScheme::fixed: {
                if (fixed.size() != static_cast<std::size_t>(categories))
                    throw ValidationError("fixed label proportions must have length R");
                double sum = 0.0;
                for (double v : fixed) {
                    if (v < 0.0) throw ValidationError("fixed label proportions must be >= 0");
                    sum += v;
                }
                if (std::abs(sum - 1.0) > 1e-9)
                    throw ValidationError("fixed label proportions must sum to 1");
                break;
            }
        }
    }
};

inline LabelScheme label_scheme_from_string(const std::string& s) {
    if (s == "uniform") return LabelScheme::uniform;
    if (s == "softmax") return LabelScheme::softmax;
    if (s == "dirichlet") return LabelScheme::dirichlet;
    if (s == "missing_categories") return LabelScheme::missing_categories;
    if (s == "fixed") return LabelScheme::fixed;
    throw ValidationError("unknown label scheme '" + s + "'");
}

inline std::string to_string(LabelScheme s) {
    switch (s) {
        case LabelScheme::uniform: return "uniform";
        case LabelScheme::softmax: return "softmax";
        case LabelScheme::dirichlet: return "dirichlet";
        case LabelScheme::missing_categories: return "missing_categories";
        case LabelScheme::fixed: return "fixed";
    }
    throw ValidationError("invalid label scheme");
}

// One client's category proportions.
inline std::vector<double> draw_label_proportions(const LabelSpec& spec, int categories,
                                                  Rng& rng) {
    spec.validate(categories);
    const std::size_t R = static_cast<std::size_t>(categories);
    switch (spec.scheme) {
        case LabelScheme::uniform:
            return std::vector<double>(R, 1.0 / static_cast<double>(categories));
        case LabelScheme::softmax: {
            std::vector<double> beta(R);
            for (auto& b : beta) b = rng.uniform(1.0, spec.param);
            const double mx = *std::max_element(beta.begin(), beta.end());
            double sum = 0.0;
            std::vector<double> pi(R);
            for (std::size_t r = 0; r < R; ++r) {
                pi[r] = std::exp(beta[r] - mx);
                sum += pi[r];
            }
            for (auto& v : pi) v /= sum;
            return pi;
        }
        case LabelScheme::dirichlet:
            return rng.dirichlet(spec.param, R);
        case LabelScheme::missing_categories: {
            const auto missing = rng.uniform_int(static_cast<std::uint64_t>(spec.max_missing) + 1);
            std::vector<int> idx(R);
            std::iota(idx.begin(), idx.end(), 0);
            rng.shuffle(idx);
            std::vector<double> pi(R, 1.0);
            for (std::uint64_t t = 0; t < missing; ++t)
                pi[static_cast<std::size_t>(idx[t])] = 0.0;
            const double survivors = static_cast<double>(R) - static_cast<double>(missing);
            for (auto& v : pi) v /= survivors;
            return pi;
        }
        case LabelScheme::fixed:
            return spec.fixed;
    }
    throw ValidationError("invalid label scheme");
}

inline std::string client_name(int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "client-%03d", index);
    return std::string(buf);
}

// The per-client proportion matrix (m x R) induced by the spec and seed; the
// same rows the generators use internally.
inline std::vector<std::vector<double>> make_label_proportions(const LabelSpec& spec, int m,
                                                               int categories,
                                                               std::uint64_t seed) {
    std::vector<std::vector<double>> rows;
    rows.reserve(static_cast<std::size_t>(m));
    for (int l = 0; l < m; ++l) {
        Rng rng(seed_hierarchy(seed, client_name(l), "labels"));
        rows.push_back(draw_label_proportions(spec, categories, rng));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Feature noise
// ---------------------------------------------------------------------------

enum class NoiseFamily { gaussian, student_t, lognormal, exponential };

struct NoiseSpec {
    NoiseFamily family = NoiseFamily::gaussian;
    double param = 1.0; // sd (gaussian), df (student_t), mean (exponential)

    void validate() const {
        switch (family) {
            case NoiseFamily::gaussian:
                if (!(param > 0.0)) throw ValidationError("gaussian noise needs sd > 0");
                break;
            case NoiseFamily::student_t:
                if (!(param > 0.0)) throw ValidationError("student-t noise needs df > 0");
                break;
            case NoiseFamily::lognormal:
                break;
            case NoiseFamily::exponential:
                if (!(param > 0.0)) throw ValidationError("exponential noise needs mean > 0");
                break;
        }
    }
};

inline NoiseFamily noise_family_from_string(const std::string& s) {
    if (s == "gaussian") return NoiseFamily::gaussian;
    if (s == "student_t") return NoiseFamily::student_t;
    if (s == "lognormal") return NoiseFamily::lognormal;
    if (s == "exponential") return NoiseFamily::exponential;
    throw ValidationError("unknown noise family '" + s + "'");
}

inline std::string to_string(NoiseFamily f) {
    switch (f) {
        case NoiseFamily::gaussian: return "gaussian";
        case NoiseFamily::student_t: return "student_t";
        case NoiseFamily::lognormal: return "lognormal";
        case NoiseFamily::exponential: return "exponential";
    }
    throw ValidationError("invalid noise family");
}

inline double draw_noise(const NoiseSpec& spec, Rng& rng) {
    switch (spec.family) {
        case NoiseFamily::gaussian: return rng.normal(0.0, spec.param);
        case NoiseFamily::student_t: return rng.student_t(spec.param);
        case NoiseFamily::lognormal: return rng.lognormal_std();
        case NoiseFamily::exponential: return rng.exponential(spec.param);
    }
    throw ValidationError("invalid noise family");
}

// ---------------------------------------------------------------------------
// Scenario specification
// ---------------------------------------------------------------------------

// Per-category location shift on a contiguous feature range [begin, end).
struct SignalBlock {
    int category = 0;
    int feature_begin = 0;
    int feature_end = 0;
    double mean = 0.0;

    bool operator==(const SignalBlock&) const = default;
};

enum class GeneratorKind {
    location_shift,   // X = mu_Y + eps
    logistic,         // multinomial logistic: P(Y=first|X) = sigmoid(X beta + iota)
    pooled_two_class, // one shared IID stream split into contiguous chunks
};

struct ScenarioSpec {
    std::string name = "custom";
    GeneratorKind kind = GeneratorKind::location_shift;
    int num_clients = 30;
    std::vector<int> client_sizes; // length num_clients (filled by finalize if uniform)
    std::size_t p = 500;
    int categories = 5;
    LabelSpec labels;
    NoiseSpec noise;
    std::vector<SignalBlock> signal;

    // logistic model
    double logistic_intercept = 0.0;
    double logistic_tilt = 1.0; // P(Y=second|X) = tilt * P(Y=third|X) = ...
    double beta_magnitude = 1.0;
    std::vector<int> beta_support;
    bool banded_covariance = false; // lag-1 cov 2/3, lag-2 cov 1/3, else identity

    // pooled_two_class model (single feature, two balanced classes)
    double pooled_shift = 0.35;

    // contamination
    int outlier_rows = 0;
    double outlier_low = 0.0;
    double outlier_high = 100.0;

    // attack
    std::string attack = "none"; // none | label_shuffle | category_misalign
    double attack_fraction = 0.0;

    std::vector<int> active_set;

    void validate() const {
        if (num_clients < 1) throw ValidationError("scenario needs at least one client");
        if (num_clients > 999) throw ValidationError("scenario supports at most 999 clients");
        if (!client_sizes.empty() &&
            client_sizes.size() != static_cast<std::size_t>(num_clients))
            throw ValidationError("client size list length must equal the client count");
        for (int n : client_sizes)
            if (n < 1) throw ValidationError("client sizes must be positive");
        if (p < 1) throw ValidationError("scenario needs p >= 1");
        if (categories < 2) throw ValidationError("scenario needs >= 2 categories");
        labels.validate(categories);
        noise.validate();
        for (const auto& b : signal) {
            if (b.category < 0 || b.category >= categories)
                throw ValidationError("signal block category out of range");
            if (b.feature_begin < 0 || b.feature_end > static_cast<int>(p) ||
                b.feature_begin >= b.feature_end)
                throw ValidationError("signal block feature range invalid");
        }
        if (kind == GeneratorKind::logistic) {
            if (beta_support.empty())
                throw ValidationError("logistic scenario needs a nonempty coefficient support");
            for (int j : beta_support)
                if (j < 0 || j >= static_cast<int>(p))
                    throw ValidationError("logistic coefficient index out of range");
            if (!(logistic_tilt > 0.0)) throw ValidationError("class tilt must be positive");
        }
        if (kind == GeneratorKind::pooled_two_class && categories != 2)
            throw ValidationError("pooled two-class scenario needs exactly 2 categories");
        if (outlier_rows < 0) throw ValidationError("outlier row count must be >= 0");
        if (outlier_rows > 0 && !(outlier_low < outlier_high))
            throw ValidationError("outlier range must satisfy low < high");
        if (attack != "none" && attack != "label_shuffle" && attack != "category_misalign")
            throw ValidationError("unknown attack kind '" + attack + "'");
        if (attack_fraction < 0.0 || attack_fraction > 1.0)
            throw ValidationError("attack fraction must lie in [0, 1]");
        for (int j : active_set)
            if (j < 0 || j >= static_cast<int>(p))
                throw ValidationError("active-set feature index out of range");
    }

    std::vector<int> sizes() const {
        if (!client_sizes.empty()) return client_sizes;
        return std::vector<int>(static_cast<std::size_t>(num_clients), 100);
    }
    std::int64_t total_rows() const {
        std::int64_t total = 0;
        for (int n : sizes()) total += n;
        return total;
    }
};

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

namespace detail {

inline double signal_mean(const std::vector<SignalBlock>& blocks, int category, int feature) {
    double mean = 0.0;
    for (const auto& b : blocks)
        if (b.category == category && feature >= b.feature_begin && feature < b.feature_end)
            mean += b.mean;
    return mean;
}

inline std::vector<int> draw_labels(const ScenarioSpec& spec, int n, Rng& rng) {
    const auto pi = draw_label_proportions(spec.labels, spec.categories, rng);
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (auto& y : labels) y = static_cast<int>(rng.categorical(pi));
    return labels;
}

inline Shard gen_location_shift_client(const ScenarioSpec& spec, std::uint64_t seed, int index,
                                       int n) {
    const std::string id = client_name(index);
    Rng label_rng(seed_hierarchy(seed, id, "labels"));
    Rng feature_rng(seed_hierarchy(seed, id, "features"));
    const auto labels = draw_labels(spec, n, label_rng);

    const std::size_t p = spec.p;
    std::vector<double> features(static_cast<std::size_t>(n) * p);
    for (int i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j)
            features[static_cast<std::size_t>(i) * p + j] =
                signal_mean(spec.signal, labels[static_cast<std::size_t>(i)],
                            static_cast<int>(j)) +
                draw_noise(spec.noise, feature_rng);
    return Shard(std::move(features), static_cast<std::size_t>(n), p, std::move(labels), id,
                 spec.categories);
}

// Shared sparse coefficient vector: one draw per support coordinate, signs
// Bernoulli(1/2), identical for every client under one seed.
inline std::vector<double> logistic_beta(const ScenarioSpec& spec, std::uint64_t seed) {
    Rng rng(seed_hierarchy(seed, "server", "beta"));
    std::vector<int> support(spec.beta_support);
    std::sort(support.begin(), support.end());
    std::vector<double> beta(spec.p, 0.0);
    for (int j : support)
        beta[static_cast<std::size_t>(j)] =
            (rng.uniform01() < 0.5 ? 1.0 : -1.0) * spec.beta_magnitude;
    return beta;
}

// Class probabilities given the linear score: the first category gets the
// logistic probability, the second gets tilt * c, the rest get c, where c
// spreads the remaining mass.
inline double class_probability(const ScenarioSpec& spec, double score, int category) {
    const double p1 = 1.0 / (1.0 + std::exp(-(score + spec.logistic_intercept)));
    if (category == 0) return p1;
    const double c =
        (1.0 - p1) / (spec.logistic_tilt + static_cast<double>(spec.categories) - 2.0);
    return category == 1 ? spec.logistic_tilt * c : c;
}

inline Shard gen_logistic_client(const ScenarioSpec& spec, std::uint64_t seed, int index, int n,
                                 const std::vector<double>& beta) {
    const std::string id = client_name(index);
    Rng label_rng(seed_hierarchy(seed, id, "labels"));
    Rng feature_rng(seed_hierarchy(seed, id, "features"));
    const auto labels = draw_labels(spec, n, label_rng);

    const std::size_t p = spec.p;
    // Support window: the raw-normal indices that determine the linear score.
    // With identity covariance that is the support itself; with the banded
    // moving-average construction X_j depends on Z_j, Z_{j+1}, Z_{j+2}.
    std::vector<int> support(spec.beta_support);
    std::sort(support.begin(), support.end());
    std::vector<int> window;
    if (spec.banded_covariance) {
        for (int j : support)
            for (int t = 0; t < 3; ++t) window.push_back(j + t);
        std::sort(window.begin(), window.end());
        window.erase(std::unique(window.begin(), window.end()), window.end());
    } else {
        window = support;
    }
    const double inv_sqrt3 = 1.0 / std::sqrt(3.0);
    const std::size_t z_len = spec.banded_covariance ? p + 2 : p;

    std::vector<double> features(static_cast<std::size_t>(n) * p);
    std::vector<double> z(z_len, 0.0);
    std::vector<std::uint8_t> z_set(z_len, 0);
    for (int i = 0; i < n; ++i) {
        const int y = labels[static_cast<std::size_t>(i)];
        // Exact conditional draw X | Y = y by rejection from the base law:
        // the acceptance probability P(y | X) depends only on the support
        // window, so tail coordinates are drawn once, after acceptance.
        for (int attempt = 0;; ++attempt) {
            if (attempt >= 1000000)
                throw Error("logistic sampler: acceptance probability vanished");
            std::fill(z_set.begin(), z_set.end(), 0);
            double score = 0.0;
            if (spec.banded_covariance) {
                for (int w : window) {
                    z[static_cast<std::size_t>(w)] = feature_rng.normal();
                    z_set[static_cast<std::size_t>(w)] = 1;
                }
                for (int j : support) {
                    const double xj = (z[static_cast<std::size_t>(j)] +
                                       z[static_cast<std::size_t>(j) + 1] +
                                       z[static_cast<std::size_t>(j) + 2]) *
                                      inv_sqrt3;
                    score += beta[static_cast<std::size_t>(j)] * xj;
                }
            } else {
                for (int j : support) {
                    z[static_cast<std::size_t>(j)] = feature_rng.normal();
                    z_set[static_cast<std::size_t>(j)] = 1;
                    score += beta[static_cast<std::size_t>(j)] * z[static_cast<std::size_t>(j)];
                }
            }
            if (feature_rng.uniform01() < class_probability(spec, score, y)) break;
        }
        for (std::size_t t = 0; t < z_len; ++t)
            if (!z_set[t]) z[t] = feature_rng.normal();
        double* row = features.data() + static_cast<std::size_t>(i) * p;
        if (spec.banded_covariance) {
            for (std::size_t j = 0; j < p; ++j)
                row[j] = (z[j] + z[j + 1] + z[j + 2]) * inv_sqrt3;
        } else {
            for (std::size_t j = 0; j < p; ++j) row[j] = z[j];
        }
    }
    return Shard(std::move(features), static_cast<std::size_t>(n), p, std::move(labels), id,
                 spec.categories);
}

inline std::vector<Shard> gen_pooled_two_class(const ScenarioSpec& spec, std::uint64_t seed) {
    const auto sizes = spec.sizes();
    // One shared stream: the pooled dataset is identical for every partition
    // of the same total size, so distributed-vs-pooled comparisons isolate
    // the aggregation itself.
    Rng rng(seed_hierarchy(seed, "server", "pooled"));
    const std::int64_t total = spec.total_rows();
    std::vector<int> labels(static_cast<std::size_t>(total));
    std::vector<double> values(static_cast<std::size_t>(total));
    for (std::int64_t i = 0; i < total; ++i) {
        const int y = rng.uniform01() < 0.5 ? 0 : 1;
        labels[static_cast<std::size_t>(i)] = y;
        values[static_cast<std::size_t>(i)] = (y == 0 ? spec.pooled_shift : 0.0) + rng.normal();
    }
    std::vector<Shard> shards;
    std::int64_t offset = 0;
    for (std::size_t l = 0; l < sizes.size(); ++l) {
        const int n = sizes[l];
        std::vector<double> features(values.begin() + offset, values.begin() + offset + n);
        std::vector<int> shard_labels(labels.begin() + offset, labels.begin() + offset + n);
        shards.emplace_back(std::move(features), static_cast<std::size_t>(n), 1,
                            std::move(shard_labels), client_name(static_cast<int>(l)),
                            spec.categories);
        offset += n;
    }
    return shards;
}

} // namespace detail

// Uniformly chosen ceil(fraction * m)-subset of clients, nested across
// fractions under one seed (the selection is a prefix of one permutation).
inline std::vector<int> attack_selected_clients(std::uint64_t seed, int num_clients,
                                                double fraction) {
    if (fraction < 0.0 || fraction > 1.0)
        throw ValidationError("attack fraction must lie in [0, 1]");
    const int k = static_cast<int>(std::ceil(fraction * static_cast<double>(num_clients)));
    std::vector<int> perm(static_cast<std::size_t>(num_clients));
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(seed_hierarchy(seed, "server", "attack-select"));
    rng.shuffle(perm);
    std::vector<int> selected(perm.begin(), perm.begin() + k);
    std::sort(selected.begin(), selected.end());
    return selected;
}

// Uniform non-identity permutation of the category axis.
inline std::vector<int> misalignment_permutation(std::uint64_t seed, const std::string& client_id,
                                                 int categories) {
    Rng rng(seed_hierarchy(seed, client_id, "attack-misalign"));
    std::vector<int> perm(static_cast<std::size_t>(categories));
    while (true) {
        std::iota(perm.begin(), perm.end(), 0);
        rng.shuffle(perm);
        for (int r = 0; r < categories; ++r)
            if (perm[static_cast<std::size_t>(r)] != r) return perm;
    }
}

// Transport-level corruption: the client's local category r is reported as
// category perm[r] in every per-category array of its summary.
inline void apply_category_misalignment(ClientSummary& summary, const std::vector<int>& perm) {
    const int R = summary.categories;
    if (perm.size() != static_cast<std::size_t>(R))
        throw ValidationError("misalignment permutation length must equal R");

    const auto remap_counts = [&](const std::vector<std::int64_t>& in) {
        std::vector<std::int64_t> out(in.size());
        for (int r = 0; r < R; ++r)
            out[static_cast<std::size_t>(perm[static_cast<std::size_t>(r)])] =
                in[static_cast<std::size_t>(r)];
        return out;
    };
    summary.category_counts = remap_counts(summary.category_counts);

    for (auto& sec : summary.sections) {
        for (auto& arr : sec.arrays) {
            if (arr.cols == static_cast<std::size_t>(R)) {
                std::vector<double> out(arr.values.size());
                for (std::size_t row = 0; row < arr.rows; ++row)
                    for (int r = 0; r < R; ++r)
                        out[row * arr.cols +
                            static_cast<std::size_t>(perm[static_cast<std::size_t>(r)])] =
                            arr.values[row * arr.cols + static_cast<std::size_t>(r)];
                arr.values = std::move(out);
            } else if (arr.cols == static_cast<std::size_t>(R) * static_cast<std::size_t>(R)) {
                std::vector<double> out(arr.values.size());
                for (std::size_t row = 0; row < arr.rows; ++row)
                    for (int r = 0; r < R; ++r)
                        for (int k = 0; k < R; ++k) {
                            const std::size_t from =
                                row * arr.cols + static_cast<std::size_t>(r * R + k);
                            const std::size_t to =
                                row * arr.cols +
                                static_cast<std::size_t>(perm[static_cast<std::size_t>(r)] * R +
                                                         perm[static_cast<std::size_t>(k)]);
                            out[to] = arr.values[from];
                        }
                arr.values = std::move(out);
            }
            // cols == 1 arrays carry no category axis.
        }
    }
}

// ---------------------------------------------------------------------------
// Federation assembly
// ---------------------------------------------------------------------------

// Replace every feature of `count` federation-wide uniformly chosen rows with
// Uniform(low, high) draws; labels untouched.
inline void inject_outlier_noise(std::vector<Shard>& shards, int count, double low, double high,
                                 std::uint64_t seed) {
    if (count == 0) return;
    if (count < 0) throw ValidationError("outlier count must be >= 0");
    if (!(low < high)) throw ValidationError("outlier range must satisfy low < high");
    std::int64_t total = 0;
    for (const auto& s : shards) total += static_cast<std::int64_t>(s.n());
    if (count > total) throw ValidationError("outlier count exceeds federation size");

    Rng rng(seed_hierarchy(seed, "server", "outliers"));
    std::vector<std::int64_t> rows(static_cast<std::size_t>(total));
    std::iota(rows.begin(), rows.end(), std::int64_t{0});
    for (int i = 0; i < count; ++i) {
        const auto j = static_cast<std::size_t>(i) +
                       rng.uniform_int(static_cast<std::uint64_t>(total - i));
        std::swap(rows[static_cast<std::size_t>(i)], rows[j]);
    }
    std::vector<std::int64_t> chosen(rows.begin(), rows.begin() + count);
    std::sort(chosen.begin(), chosen.end());

    std::size_t shard_idx = 0;
    std::int64_t shard_start = 0;
    std::vector<std::vector<double>> buffers(shards.size());
    for (std::int64_t row : chosen) {
        while (row >= shard_start + static_cast<std::int64_t>(shards[shard_idx].n())) {
            shard_start += static_cast<std::int64_t>(shards[shard_idx].n());
            ++shard_idx;
        }
        auto& buf = buffers[shard_idx];
        if (buf.empty()) buf = shards[shard_idx].features();
        const std::size_t local = static_cast<std::size_t>(row - shard_start);
        const std::size_t p = shards[shard_idx].p();
        for (std::size_t j = 0; j < p; ++j) buf[local * p + j] = rng.uniform(low, high);
    }
    for (std::size_t s = 0; s < shards.size(); ++s) {
        if (buffers[s].empty()) continue;
        shards[s] = Shard(std::move(buffers[s]), shards[s].n(), shards[s].p(),
                          std::vector<int>(shards[s].labels()), shards[s].client_id(),
                          shards[s].num_categories());
    }
}

// Raw-data attack: uniformly permute the label vector of each selected client.
inline void apply_label_shuffle(std::vector<Shard>& shards, const std::vector<int>& selected,
                                std::uint64_t seed) {
    for (int idx : selected) {
        auto& shard = shards[static_cast<std::size_t>(idx)];
        std::vector<int> labels(shard.labels());
        Rng rng(seed_hierarchy(seed, shard.client_id(), "attack-shuffle"));
        rng.shuffle(labels);
        shard = Shard(std::vector<double>(shard.features()), shard.n(), shard.p(),
                      std::move(labels), shard.client_id(), shard.num_categories());
    }
}

// Full federation generation. Label-shuffle attacks mutate raw shards here;
// category misalignment is transport-level and is applied by the runner to
// the uploaded summaries (see misalignment_permutation).
inline std::vector<Shard> generate_scenario(const ScenarioSpec& spec, std::uint64_t seed) {
    spec.validate();
    const auto sizes = spec.sizes();
    std::vector<Shard> shards;
    shards.reserve(sizes.size());

    switch (spec.kind) {
        case GeneratorKind::location_shift:
            for (std::size_t l = 0; l < sizes.size(); ++l)
                shards.push_back(detail::gen_location_shift_client(
                    spec, seed, static_cast<int>(l), sizes[l]));
            break;
        case GeneratorKind::logistic: {
            const auto beta = detail::logistic_beta(spec, seed);
            for (std::size_t l = 0; l < sizes.size(); ++l)
                shards.push_back(detail::gen_logistic_client(spec, seed, static_cast<int>(l),
                                                             sizes[l], beta));
            break;
        }
        case GeneratorKind::pooled_two_class:
            shards = detail::gen_pooled_two_class(spec, seed);
            break;
    }

    inject_outlier_noise(shards, spec.outlier_rows, spec.outlier_low, spec.outlier_high, seed);

    if (spec.attack == "label_shuffle" && spec.attack_fraction > 0.0) {
        const auto selected =
            attack_selected_clients(seed, spec.num_clients, spec.attack_fraction);
        apply_label_shuffle(shards, selected, seed);
    }
    return shards;
}

// ---------------------------------------------------------------------------
// Named presets (benchmark-default parameters; all overridable via config)
// ---------------------------------------------------------------------------

inline void set_preset_categories(ScenarioSpec& spec, int categories) {
    if (spec.name == "a") {
        const std::map<int, double> mean{{4, 0.28}, {5, 0.30}, {6, 0.32}, {7, 0.34}};
        const auto it = mean.find(categories);
        if (it == mean.end())
            throw ValidationError("preset 'a' supports 4-7 categories");
        spec.categories = categories;
        spec.signal = {{0, 0, 8, it->second}};
        return;
    }
    if (spec.name == "b") {
        const std::map<int, double> mean{{5, 0.45}, {6, 0.47}, {7, 0.50}};
        const auto it = mean.find(categories);
        if (it == mean.end())
            throw ValidationError("preset 'b' supports 5-7 categories");
        spec.categories = categories;
        spec.signal = {{0, 0, 4, it->second}, {1, 4, 8, it->second}};
        return;
    }
    if (categories < 2) throw ValidationError("scenario needs >= 2 categories");
    spec.categories = categories;
}

inline ScenarioSpec scenario_preset(const std::string& name) {
    ScenarioSpec s;
    s.name = name;
    s.num_clients = 30;
    s.client_sizes.assign(30, 100);
    s.p = 10000;

    if (name == "a") {
        s.labels = {LabelScheme::softmax, 1.0, 0, {}};
        s.noise = {NoiseFamily::gaussian, 1.0};
        set_preset_categories(s, 4);
        s.active_set = {0, 1, 2, 3, 4, 5, 6, 7};
    } else if (name == "b") {
        s.labels = {LabelScheme::dirichlet, 1.0, 0, {}};
        s.noise = {NoiseFamily::student_t, 2.0};
        set_preset_categories(s, 5);
        s.active_set = {0, 1, 2, 3, 4, 5, 6, 7};
    } else if (name == "c") {
        s.num_clients = 16;
        s.client_sizes.clear();
        for (int g = 0; g < 4; ++g)
            for (int i = 0; i < 4; ++i) s.client_sizes.push_back(100 * (g + 1));
        s.categories = 8;
        s.labels = {LabelScheme::missing_categories, 1.0, 4, {}};
        s.noise = {NoiseFamily::lognormal, 1.0};
        s.signal = {{0, 0, 10, 0.32}, {1, 0, 10, 0.08}};
        s.active_set = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    } else if (name == "d") {
        s.categories = 5;
        s.labels = {LabelScheme::softmax, 5.0, 0, {}};
        s.noise = {NoiseFamily::gaussian, 1.0};
        s.signal = {{0, 0, 8, 0.4}};
        s.active_set = {0, 1, 2, 3, 4, 5, 6, 7};
    } else if (name == "e") {
        s.kind = GeneratorKind::logistic;
        s.p = 8000;
        s.categories = 6;
        s.labels = {LabelScheme::dirichlet, 1.0, 0, {}};
        s.beta_support = {0, 1, 2, 3, 4, 5, 6, 7};
        s.beta_magnitude = 1.0;
        s.logistic_intercept = -0.25;
        s.logistic_tilt = 1.2;
        s.outlier_rows = 30;
        s.active_set = s.beta_support;
    } else if (name == "f") {
        s.kind = GeneratorKind::logistic;
        s.p = 8000;
        s.categories = 6;
        s.labels = {LabelScheme::softmax, 1.0, 0, {}};
        s.beta_support = {1, 3, 5, 7, 9, 11};
        s.beta_magnitude = 1.5;
        s.logistic_intercept = -0.2;
        s.logistic_tilt = 0.8;
        s.banded_covariance = true;
        s.outlier_rows = 30;
        s.active_set = s.beta_support;
    } else if (name == "g") {
        s.categories = 8;
        s.labels = {LabelScheme::softmax, 6.0, 0, {}};
        s.noise = {NoiseFamily::exponential, 1.0};
        s.signal = {{0, 0, 8, 0.34}};
        s.attack = "category_misalign";
        s.active_set = {0, 1, 2, 3, 4, 5, 6, 7};
    } else if (name == "h") {
        s.categories = 7;
        s.labels = {LabelScheme::softmax, 1.0, 0, {}};
        s.noise = {NoiseFamily::exponential, 2.0};
        s.signal = {{0, 0, 8, 0.50}};
        s.attack = "label_shuffle";
        s.active_set = {0, 1, 2, 3, 4, 5, 6, 7};
    } else if (name == "example1") {
        s.kind = GeneratorKind::pooled_two_class;
        s.num_clients = 1;
        s.client_sizes = {3000};
        s.p = 1;
        s.categories = 2;
        s.labels = {LabelScheme::fixed, 1.0, 0, {0.5, 0.5}};
        s.pooled_shift = 0.35;
        s.active_set = {0};
    } else {
        throw ValidationError("unknown scenario preset '" + name + "'");
    }
    s.validate();
    return s;
}

} // namespace fedscreen
