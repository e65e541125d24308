#pragma once

// Feature selection rules on top of a screening utility vector: fixed
// threshold, fixed size, and two permutation-calibrated rules (a pseudo
// feature per real feature for FDR control, and a small set of auxiliary
// permuted features for a data-driven threshold). Permutations happen
// per client so no raw data moves, and they are seeded per (client,
// feature) so every method sees the same pseudo data under one master seed.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "fedscreen/common.hpp"
#include "fedscreen/core.hpp"

namespace fedscreen {

// Strictly-greater-than-threshold rule.
inline ScreeningResult threshold_select(const UtilityVector& utilities, double threshold) {
    if (!std::isfinite(threshold)) throw ValidationError("threshold must be finite");
    ScreeningResult out;
    out.kind = ScreeningResult::Kind::threshold;
    out.threshold = threshold;
    out.k = 0;
    out.utilities = utilities;
    out.ranks = ranks_descending(utilities.values);
    for (std::size_t j = 0; j < utilities.values.size(); ++j)
        if (utilities.values[j] > threshold) out.selected.push_back(static_cast<int>(j));
    return out;
}

// Keep the k largest utilities; ties broken toward the smaller feature index.
inline ScreeningResult top_k_select(const UtilityVector& utilities, int k) {
    const int p = static_cast<int>(utilities.values.size());
    if (k < 0 || k > p)
        throw ValidationError("top-k selection needs 0 <= k <= number of features");
    ScreeningResult out;
    out.kind = ScreeningResult::Kind::top_k;
    out.threshold = 0.0;
    out.k = k;
    out.utilities = utilities;
    out.ranks = ranks_descending(utilities.values);
    for (int j = 0; j < p; ++j)
        if (out.ranks[static_cast<std::size_t>(j)] <= k) out.selected.push_back(j);
    return out;
}

// ---------------------------------------------------------------------------
// Client-side permutation helpers
// ---------------------------------------------------------------------------

// Pseudo twin of a shard: every feature column independently permuted within
// the client, labels untouched. The permutation for feature j depends only on
// (master seed, client id, j), so all methods in one run, and repeated runs
// with the same seed, see identical pseudo data.
inline Shard make_pseudo_shard(const Shard& shard, std::uint64_t master_seed) {
    const std::size_t n = shard.n(), p = shard.p();
    std::vector<double> features(n * p);
    for (std::size_t j = 0; j < p; ++j) {
        auto col = shard.column(j);
        Rng rng(seed_hierarchy(master_seed, shard.client_id(), "pseudo:" + std::to_string(j)));
        rng.shuffle(col);
        for (std::size_t i = 0; i < n; ++i) features[i * p + j] = col[i];
    }
    return Shard(std::move(features), n, p, std::vector<int>(shard.labels()), shard.client_id(),
                 shard.num_categories());
}

// Source feature indices for the auxiliary-permutation threshold, drawn with
// replacement on the server side.
inline std::vector<int> aux_source_features(std::uint64_t master_seed, std::size_t p, int q) {
    if (q < 1) throw ValidationError("auxiliary threshold needs q >= 1");
    if (p < 1) throw ValidationError("auxiliary threshold needs p >= 1");
    Rng rng(seed_hierarchy(master_seed, "server", "auxperm-src"));
    std::vector<int> out(static_cast<std::size_t>(q));
    for (auto& s : out) s = static_cast<int>(rng.uniform_int(p));
    return out;
}

// Client-side auxiliary shard: one permuted copy of each source column.
inline Shard make_aux_shard(const Shard& shard, std::uint64_t master_seed,
                            const std::vector<int>& sources) {
    const std::size_t n = shard.n(), q = sources.size();
    if (q == 0) throw ValidationError("auxiliary shard needs at least one source feature");
    std::vector<double> features(n * q);
    for (std::size_t a = 0; a < q; ++a) {
        const int s = sources[a];
        if (s < 0 || static_cast<std::size_t>(s) >= shard.p())
            throw ValidationError("auxiliary source feature index out of range");
        auto col = shard.column(static_cast<std::size_t>(s));
        Rng rng(seed_hierarchy(master_seed, shard.client_id(), "auxperm:" + std::to_string(a)));
        rng.shuffle(col);
        for (std::size_t i = 0; i < n; ++i) features[i * q + a] = col[i];
    }
    return Shard(std::move(features), n, q, std::vector<int>(shard.labels()), shard.client_id(),
                 shard.num_categories());
}

// ---------------------------------------------------------------------------
// FDR-controlled selection from real/pseudo utility differences
// ---------------------------------------------------------------------------

// Smallest candidate threshold delta among the nonzero |phi_j|, ascending,
// whose estimated false discovery proportion
//   (1 + #{phi_j <= -delta}) / max(#{phi_j >= delta}, 1)
// falls strictly below alpha. No candidate qualifying -> no threshold.
inline std::optional<double> fdr_threshold_from_phi(const std::vector<double>& phi, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
    std::vector<double> candidates;
    candidates.reserve(phi.size());
    for (double v : phi) {
        if (!std::isfinite(v)) throw ValidationError("utility difference must be finite");
        if (v != 0.0) candidates.push_back(std::abs(v));
    }
    std::sort(candidates.begin(), candidates.end());
    for (double delta : candidates) {
        std::size_t neg = 0, pos = 0;
        for (double v : phi) {
            if (v <= -delta) ++neg;
            if (v >= delta) ++pos;
        }
        const double fdp = (1.0 + static_cast<double>(neg)) /
                           static_cast<double>(std::max<std::size_t>(pos, 1));
        if (fdp < alpha) return delta;
    }
    return std::nullopt;
}

struct FdrOutcome {
    double alpha = 0.0;
    bool threshold_found = false;
    double delta = 0.0;            // meaningful only when threshold_found
    std::vector<double> phi;       // real minus pseudo utility, per feature
    std::vector<int> selected;     // sorted; empty when no threshold exists
    UtilityVector utilities;       // real utilities
    UtilityVector pseudo_utilities;
};

inline FdrOutcome fdr_control_select(const UtilityVector& real_utilities,
                                     const UtilityVector& pseudo_utilities, double alpha) {
    if (real_utilities.values.size() != pseudo_utilities.values.size())
        throw ValidationError("real and pseudo utility vectors differ in length");
    FdrOutcome out;
    out.alpha = alpha;
    out.utilities = real_utilities;
    out.pseudo_utilities = pseudo_utilities;
    out.phi.resize(real_utilities.values.size());
    for (std::size_t j = 0; j < out.phi.size(); ++j)
        out.phi[j] = real_utilities.values[j] - pseudo_utilities.values[j];

    const auto delta = fdr_threshold_from_phi(out.phi, alpha);
    if (!delta) return out;
    out.threshold_found = true;
    out.delta = *delta;
    for (std::size_t j = 0; j < out.phi.size(); ++j)
        if (out.phi[j] >= out.delta) out.selected.push_back(static_cast<int>(j));
    return out;
}

// ---------------------------------------------------------------------------
// Auxiliary-permutation threshold
// ---------------------------------------------------------------------------

struct AuxPermOutcome {
    double delta = 0.0;        // max utility over auxiliary features
    std::vector<int> selected; // features strictly above delta
};

inline AuxPermOutcome aux_perm_select(const UtilityVector& real_utilities,
                                      const UtilityVector& aux_utilities) {
    if (aux_utilities.values.empty())
        throw ValidationError("auxiliary utility vector is empty");
    AuxPermOutcome out;
    out.delta = *std::max_element(aux_utilities.values.begin(), aux_utilities.values.end());
    for (std::size_t j = 0; j < real_utilities.values.size(); ++j)
        if (real_utilities.values[j] > out.delta) out.selected.push_back(static_cast<int>(j));
    return out;
}

} // namespace fedscreen
