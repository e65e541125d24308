#pragma once

// Data model shared by all modules: category registry, client shards, utility
// containers, screening results, and CSV ingestion. All types are immutable
// after construction and safe to share across threads.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fedscreen/common.hpp"

namespace fedscreen {

// ---------------------------------------------------------------------------
// CategoryRegistry
// ---------------------------------------------------------------------------

// Ordered list of distinct category names; position is the dense integer code
// used everywhere else. The ordering is fixed for the lifetime of an
// experiment because aggregation indexes per-category arrays by position.
class CategoryRegistry {
public:
    CategoryRegistry() = default;

    // Registry with codes 0..count-1 named by their decimal code.
    explicit CategoryRegistry(int count) {
        if (count < 2) throw ValidationError("CategoryRegistry: need at least 2 categories");
        for (int r = 0; r < count; ++r) register_label(std::to_string(r));
    }

    explicit CategoryRegistry(const std::vector<std::string>& names) {
        for (const auto& n : names) register_label(n);
        if (size() < 2) throw ValidationError("CategoryRegistry: need at least 2 categories");
    }

    // First-appearance registration; returns the (possibly existing) code.
    int register_label(const std::string& name) {
        auto it = index_.find(name);
        if (it != index_.end()) return it->second;
        const int code = static_cast<int>(names_.size());
        names_.push_back(name);
        index_.emplace(name, code);
        return code;
    }

    std::optional<int> code_of(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    const std::string& name_of(int code) const {
        if (code < 0 || code >= static_cast<int>(names_.size()))
            throw ValidationError("CategoryRegistry: code out of range");
        return names_[static_cast<std::size_t>(code)];
    }

    int size() const { return static_cast<int>(names_.size()); }

    bool operator==(const CategoryRegistry& other) const { return names_ == other.names_; }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, int> index_;
};

// ---------------------------------------------------------------------------
// Shard
// ---------------------------------------------------------------------------

// One client's local dataset: dense row-major n x p feature matrix plus a
// label-code vector. Construction rejects non-finite features and validates
// label codes against the number of registered categories.
class Shard {
public:
    Shard(std::vector<double> features, std::size_t n, std::size_t p,
          std::vector<int> labels, std::string client_id, int num_categories)
        : features_(std::move(features)),
          labels_(std::move(labels)),
          client_id_(std::move(client_id)),
          n_(n),
          p_(p),
          num_categories_(num_categories) {
        if (n_ < 1) throw ValidationError("Shard: needs at least one row");
        if (features_.size() != n_ * p_)
            throw ValidationError("Shard: feature buffer size does not match n*p");
        if (labels_.size() != n_)
            throw ValidationError("Shard: label count does not match row count");
        if (num_categories < 2)
            throw ValidationError("Shard: federation needs at least 2 categories");
        for (std::size_t i = 0; i < features_.size(); ++i) {
            if (!std::isfinite(features_[i]))
                throw ValidationError("Shard: non-finite feature value at row " +
                                      std::to_string(i / p_) + ", column " +
                                      std::to_string(i % p_));
        }
        for (std::size_t i = 0; i < labels_.size(); ++i) {
            if (labels_[i] < 0 || labels_[i] >= num_categories)
                throw ValidationError("Shard: label code " + std::to_string(labels_[i]) +
                                      " out of range at row " + std::to_string(i));
        }
    }

    std::size_t n() const { return n_; }
    std::size_t p() const { return p_; }
    int num_categories() const { return num_categories_; }
    const std::string& client_id() const { return client_id_; }
    const std::vector<int>& labels() const { return labels_; }
    const std::vector<double>& features() const { return features_; }

    double value(std::size_t row, std::size_t col) const {
        return features_[row * p_ + col];
    }

    // Copy of one feature column (estimators work column-wise).
    std::vector<double> column(std::size_t j) const {
        std::vector<double> out(n_);
        for (std::size_t i = 0; i < n_; ++i) out[i] = features_[i * p_ + j];
        return out;
    }

    // Per-category sample counts under R categories.
    std::vector<std::int64_t> category_counts(int num_categories) const {
        std::vector<std::int64_t> counts(static_cast<std::size_t>(num_categories), 0);
        for (int y : labels_) counts[static_cast<std::size_t>(y)]++;
        return counts;
    }

private:
    std::vector<double> features_;
    std::vector<int> labels_;
    std::string client_id_;
    std::size_t n_;
    std::size_t p_;
    int num_categories_;
};

// ---------------------------------------------------------------------------
// Utility containers
// ---------------------------------------------------------------------------

struct UtilityVector {
    std::vector<double> values;
    std::string method_tag;
};

// p x R per-category utilities; entries for categories absent from every
// shard are flagged undefined rather than set to 0.
class CategoryUtilityMatrix {
public:
    CategoryUtilityMatrix(std::size_t p, int num_categories, std::string method_tag)
        : p_(p),
          r_(static_cast<std::size_t>(num_categories)),
          values_(p * r_, 0.0),
          defined_(p * r_, 1),
          method_tag_(std::move(method_tag)) {}

    std::size_t p() const { return p_; }
    int categories() const { return static_cast<int>(r_); }
    const std::string& method_tag() const { return method_tag_; }

    double value(std::size_t j, int r) const { return values_[j * r_ + static_cast<std::size_t>(r)]; }
    bool defined(std::size_t j, int r) const { return defined_[j * r_ + static_cast<std::size_t>(r)] != 0; }

    void set(std::size_t j, int r, double v) {
        values_[j * r_ + static_cast<std::size_t>(r)] = v;
        defined_[j * r_ + static_cast<std::size_t>(r)] = 1;
    }
    void set_undefined(std::size_t j, int r) {
        values_[j * r_ + static_cast<std::size_t>(r)] = 0.0;
        defined_[j * r_ + static_cast<std::size_t>(r)] = 0;
    }

private:
    std::size_t p_;
    std::size_t r_;
    std::vector<double> values_;
    std::vector<std::uint8_t> defined_;
    std::string method_tag_;
};

// ---------------------------------------------------------------------------
// Ranks and screening results
// ---------------------------------------------------------------------------

// ranks[j] = rank of feature j, 1 = largest utility; ties broken by ascending
// feature index so downstream metrics are deterministic.
inline std::vector<int> ranks_descending(const std::vector<double>& values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (values[a] != values[b]) return values[a] > values[b];
        return a < b;
    });
    std::vector<int> ranks(values.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos)
        ranks[order[pos]] = static_cast<int>(pos) + 1;
    return ranks;
}

struct ScreeningResult {
    enum class Kind { threshold, top_k };

    Kind kind = Kind::threshold;
    double threshold = 0.0; // meaningful when kind == threshold
    int k = 0;              // meaningful when kind == top_k
    std::vector<int> selected; // sorted ascending
    UtilityVector utilities;
    std::vector<int> ranks;
};

// ---------------------------------------------------------------------------
// CSV ingestion (RFC-4180-style, header required)
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line, char delimiter) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cell.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == delimiter) {
            cells.push_back(std::move(cell));
            cell.clear();
        } else if (c != '\r') {
            cell.push_back(c);
        }
    }
    cells.push_back(std::move(cell));
    return cells;
}

} // namespace detail

// Loads one client's CSV into a Shard. Labels are auto-registered in
// first-appearance order unless allow_new_labels is false, in which case an
// unknown label is an error. Row order is preserved.
inline Shard load_csv_dataset(const std::string& path, const std::string& label_column,
                              char delimiter, CategoryRegistry& registry,
                              bool allow_new_labels = true, std::string client_id = "") {
    std::ifstream in(path);
    if (!in) throw ParseError("load_csv_dataset: cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line) || line.empty())
        throw ParseError("load_csv_dataset: '" + path + "' is empty or lacks a header row");

    const auto header = detail::split_csv_line(line, delimiter);
    std::size_t label_index = header.size();
    for (std::size_t c = 0; c < header.size(); ++c)
        if (header[c] == label_column) label_index = c;
    if (label_index == header.size())
        throw ParseError("load_csv_dataset: label column '" + label_column +
                         "' not found in header of '" + path + "'");

    const std::size_t p = header.size() - 1;
    std::vector<double> features;
    std::vector<int> labels;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() && in.eof()) break;
        const auto cells = detail::split_csv_line(line, delimiter);
        if (cells.size() != header.size())
            throw ParseError("load_csv_dataset: row " + std::to_string(row) + " of '" + path +
                             "' has " + std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(header.size()));
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c == label_index) {
                const auto existing = registry.code_of(cells[c]);
                if (existing) {
                    labels.push_back(*existing);
                } else if (allow_new_labels) {
                    labels.push_back(registry.register_label(cells[c]));
                } else {
                    throw ParseError("load_csv_dataset: unknown label '" + cells[c] +
                                     "' at row " + std::to_string(row) + " of '" + path + "'");
                }
            } else {
                double v = 0.0;
                try {
                    v = parse_double(cells[c]);
                } catch (const ParseError&) {
                    throw ParseError("load_csv_dataset: non-numeric cell '" + cells[c] +
                                     "' at row " + std::to_string(row) + ", column '" +
                                     header[c] + "' of '" + path + "'");
                }
                features.push_back(v);
            }
        }
    }
    if (labels.empty())
        throw ParseError("load_csv_dataset: '" + path + "' contains no data rows");
    if (client_id.empty()) client_id = path;
    const std::size_t n = labels.size();
    // Shard validation needs >= 2 categories; a single-label file is legal
    // only while its registry is being unioned with other shards', so report
    // at least 2 here and let federation assembly re-validate codes.
    const int categories = std::max(registry.size(), 2);
    return Shard(std::move(features), n, p, std::move(labels), std::move(client_id), categories);
}

// Writes a shard back to CSV with exact-round-trip numeric text. Feature
// columns are named x0..x{p-1} unless names are supplied.
inline void save_csv_dataset(const std::string& path, const Shard& shard,
                             const CategoryRegistry& registry, const std::string& label_column,
                             char delimiter = ',') {
    std::ofstream out(path);
    if (!out) throw Error("save_csv_dataset: cannot open '" + path + "' for writing");
    for (std::size_t c = 0; c < shard.p(); ++c) out << "x" << c << delimiter;
    out << label_column << "\n";
    for (std::size_t i = 0; i < shard.n(); ++i) {
        for (std::size_t c = 0; c < shard.p(); ++c)
            out << format_double17(shard.value(i, c)) << delimiter;
        out << registry.name_of(shard.labels()[i]) << "\n";
    }
    if (!out) throw Error("save_csv_dataset: write to '" + path + "' failed");
}

} // namespace fedscreen
