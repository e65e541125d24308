#pragma once

// Screening-quality metrics: per-run scores against a known active set,
// their arithmetic-mean summaries across replications, and the log-scale
// deviation between distributed and pooled utilities.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "fedscreen/common.hpp"
#include "fedscreen/core.hpp"

namespace fedscreen {

struct RunScore {
    double success = 0.0; // 1 when every active feature was selected
    double psr = 0.0;     // |A ∩ selected| / |A|
    double fdr = 0.0;     // |selected \ A| / |selected| (0 for empty selection)
    double size = 0.0;    // |selected|
    double wrank = 0.0;   // worst (largest) rank among active features
    double time_local_s = 0.0;
    double time_agg_s = 0.0;
};

// `ranks` uses rank 1 for the largest utility; `selected`/`active` hold
// feature indices. Empty active sets score vacuously (success 1, psr 1,
// wrank 0) and every selection counts as a false discovery.
inline RunScore score_run(const std::vector<int>& selected, const std::vector<int>& ranks,
                          const std::vector<int>& active) {
    const int p = static_cast<int>(ranks.size());
    std::vector<std::uint8_t> is_selected(static_cast<std::size_t>(p), 0);
    for (int j : selected) {
        if (j < 0 || j >= p) throw ValidationError("selected feature index out of range");
        is_selected[static_cast<std::size_t>(j)] = 1;
    }

    RunScore score;
    score.size = static_cast<double>(selected.size());

    std::size_t hit = 0;
    int worst = 0;
    for (int j : active) {
        if (j < 0 || j >= p) throw ValidationError("active feature index out of range");
        if (is_selected[static_cast<std::size_t>(j)]) ++hit;
        worst = std::max(worst, ranks[static_cast<std::size_t>(j)]);
    }
    score.success = (hit == active.size()) ? 1.0 : 0.0;
    score.psr = active.empty() ? 1.0 : static_cast<double>(hit) / static_cast<double>(active.size());
    score.fdr = selected.empty()
                    ? 0.0
                    : static_cast<double>(selected.size() - hit) /
                          static_cast<double>(selected.size());
    score.wrank = static_cast<double>(worst);
    return score;
}

struct MethodSummary {
    std::size_t runs = 0;
    double ssr = 0.0;
    double psr = 0.0;
    double fdr = 0.0;
    double size = 0.0;
    double wrank = 0.0;
    double time_local_s = 0.0;
    double time_agg_s = 0.0;
};

inline MethodSummary summarize(const std::vector<RunScore>& scores) {
    if (scores.empty()) throw ValidationError("cannot summarize zero runs");
    MethodSummary out;
    out.runs = scores.size();
    for (const auto& s : scores) {
        out.ssr += s.success;
        out.psr += s.psr;
        out.fdr += s.fdr;
        out.size += s.size;
        out.wrank += s.wrank;
        out.time_local_s += s.time_local_s;
        out.time_agg_s += s.time_agg_s;
    }
    const double inv = 1.0 / static_cast<double>(out.runs);
    out.ssr *= inv;
    out.psr *= inv;
    out.fdr *= inv;
    out.size *= inv;
    out.wrank *= inv;
    out.time_local_s *= inv;
    out.time_agg_s *= inv;
    return out;
}

// Per-feature |log(distributed) - log(pooled)|. Utilities that are not
// strictly positive have no log scale; they are excluded and counted rather
// than silently mapped to 0.
struct RelativeDeviation {
    std::vector<double> values; // one entry per comparable feature
    std::size_t excluded = 0;   // features with a nonpositive utility on either side
};

inline RelativeDeviation relative_deviation(const std::vector<double>& distributed,
                                            const std::vector<double>& pooled) {
    if (distributed.size() != pooled.size())
        throw ValidationError("relative deviation needs equal-length utility vectors");
    RelativeDeviation out;
    out.values.reserve(distributed.size());
    for (std::size_t j = 0; j < distributed.size(); ++j) {
        const double d = distributed[j];
        const double p = pooled[j];
        if (!(d > 0.0) || !(p > 0.0) || !std::isfinite(d) || !std::isfinite(p)) {
            ++out.excluded;
            continue;
        }
        out.values.push_back(std::abs(std::log(d) - std::log(p)));
    }
    return out;
}

inline double median(std::vector<double> values) {
    if (values.empty()) throw ValidationError("median of empty sample");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

} // namespace fedscreen
