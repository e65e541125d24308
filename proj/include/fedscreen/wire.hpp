#pragma once

// Wire format for one-shot summary uploads. A message is NDJSON: one header
// record declaring every section/array shape, one record per feature block
// (configurable row width), and a terminating end record carrying the block
// count. Floating-point payloads travel as decimal strings with 17
// significant digits, so parse(serialize(s)) reproduces s bit for bit on any
// transport.

#include <algorithm>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fedscreen/aggregation.hpp"
#include "fedscreen/common.hpp"

namespace fedscreen {

inline constexpr int kProtocolVersion = 1;
inline constexpr std::size_t kDefaultBlockWidth = 128;

using wire_json = nlohmann::ordered_json;

inline std::string serialize_summary(const ClientSummary& summary,
                                     std::size_t block_width = kDefaultBlockWidth,
                                     const std::string& round = "main") {
    if (block_width < 1) throw ValidationError("wire block width must be >= 1");
    summary.validate();

    std::ostringstream out;
    wire_json header;
    header["kind"] = "header";
    header["protocol_version"] = kProtocolVersion;
    header["round"] = round;
    header["client_id"] = summary.client_id;
    header["n"] = summary.n;
    header["p"] = summary.p;
    header["categories"] = summary.categories;
    header["category_counts"] = summary.category_counts;
    header["block_width"] = block_width;
    wire_json sections = wire_json::array();
    for (const auto& sec : summary.sections) {
        wire_json js;
        js["name"] = sec.name;
        wire_json arrays = wire_json::array();
        for (const auto& arr : sec.arrays) {
            wire_json ja;
            ja["name"] = arr.name;
            ja["rows"] = arr.rows;
            ja["cols"] = arr.cols;
            arrays.push_back(std::move(ja));
        }
        js["arrays"] = std::move(arrays);
        sections.push_back(std::move(js));
    }
    header["sections"] = std::move(sections);
    out << header.dump() << "\n";

    std::size_t blocks = 0;
    for (const auto& sec : summary.sections) {
        for (const auto& arr : sec.arrays) {
            for (std::size_t row = 0; row < arr.rows; row += block_width) {
                const std::size_t end = std::min(arr.rows, row + block_width);
                wire_json jb;
                jb["kind"] = "block";
                jb["section"] = sec.name;
                jb["array"] = arr.name;
                jb["offset"] = row;
                wire_json values = wire_json::array();
                for (std::size_t t = row * arr.cols; t < end * arr.cols; ++t)
                    values.push_back(format_double17(arr.values[t]));
                jb["values"] = std::move(values);
                out << jb.dump() << "\n";
                ++blocks;
            }
        }
    }

    wire_json endrec;
    endrec["kind"] = "end";
    endrec["blocks"] = blocks;
    out << endrec.dump() << "\n";
    return out.str();
}

struct ParsedMessage {
    ClientSummary summary;
    std::string round = "main";
    std::size_t payload_values = 0; // total numeric entries carried in blocks
    std::size_t payload_bytes = 0;  // total bytes of the encoded value strings
};

// Incremental NDJSON reader: feed one line at a time; done() flips after the
// end record. Structural problems raise WireFrameError, dimension problems
// WireShapeError, and a protocol_version mismatch WireVersionError.
class SummaryReader {
public:
    // Returns true once the end record has been consumed.
    bool feed_line(const std::string& line) {
        if (done_) throw WireFrameError("data after end record");
        wire_json rec;
        try {
            rec = wire_json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw WireFrameError(std::string("malformed wire record: ") + e.what());
        }
        if (!rec.is_object() || !rec.contains("kind") || !rec["kind"].is_string())
            throw WireFrameError("wire record lacks a kind field");
        const std::string kind = rec["kind"].get<std::string>();
        if (kind == "header") {
            read_header(rec);
        } else if (kind == "block") {
            read_block(rec);
        } else if (kind == "end") {
            read_end(rec);
        } else {
            throw WireFrameError("unknown wire record kind '" + kind + "'");
        }
        return done_;
    }

    bool done() const { return done_; }

    ParsedMessage take() {
        if (!done_) throw WireFrameError("truncated wire message: no end record");
        ParsedMessage out;
        out.summary = std::move(message_.summary);
        out.round = message_.round;
        out.payload_values = message_.payload_values;
        out.payload_bytes = message_.payload_bytes;
        try {
            out.summary.validate();
        } catch (const ValidationError& e) {
            throw WireShapeError(std::string("wire summary invalid: ") + e.what());
        }
        return out;
    }

private:
    template <typename T>
    static T field(const wire_json& rec, const char* name) {
        if (!rec.contains(name))
            throw WireFrameError(std::string("wire record missing field '") + name + "'");
        try {
            return rec[name].get<T>();
        } catch (const nlohmann::json::exception&) {
            throw WireFrameError(std::string("wire record field '") + name +
                                 "' has the wrong type");
        }
    }

    void read_header(const wire_json& rec) {
        if (have_header_) throw WireFrameError("duplicate wire header");
        const int version = field<int>(rec, "protocol_version");
        if (version != kProtocolVersion)
            throw WireVersionError("unsupported protocol version " + std::to_string(version) +
                                   " (expected " + std::to_string(kProtocolVersion) + ")");
        auto& s = message_.summary;
        message_.round = rec.contains("round") ? field<std::string>(rec, "round") : "main";
        s.client_id = field<std::string>(rec, "client_id");
        s.n = field<std::int64_t>(rec, "n");
        s.p = field<std::size_t>(rec, "p");
        s.categories = field<int>(rec, "categories");
        s.category_counts = field<std::vector<std::int64_t>>(rec, "category_counts");
        block_width_ = field<std::size_t>(rec, "block_width");
        if (block_width_ < 1) throw WireShapeError("wire block width must be >= 1");

        if (!rec.contains("sections") || !rec["sections"].is_array())
            throw WireFrameError("wire header missing section declarations");
        for (const auto& js : rec["sections"]) {
            SummarySection sec;
            sec.name = field<std::string>(js, "name");
            if (!js.contains("arrays") || !js["arrays"].is_array())
                throw WireFrameError("wire section missing array declarations");
            for (const auto& ja : js["arrays"]) {
                SummaryArray arr;
                arr.name = field<std::string>(ja, "name");
                arr.rows = field<std::size_t>(ja, "rows");
                arr.cols = field<std::size_t>(ja, "cols");
                if (arr.rows < 1 || arr.cols < 1)
                    throw WireShapeError("wire array '" + sec.name + "/" + arr.name +
                                         "' declares an empty shape");
                arr.values.assign(arr.rows * arr.cols, 0.0);
                sec.arrays.push_back(std::move(arr));
            }
            s.sections.push_back(std::move(sec));
        }
        filled_rows_.clear();
        for (const auto& sec : s.sections)
            for (const auto& arr : sec.arrays) filled_rows_[sec.name + "\x1f" + arr.name] = 0;
        have_header_ = true;
    }

    void read_block(const wire_json& rec) {
        if (!have_header_) throw WireFrameError("wire block before header");
        const std::string section = field<std::string>(rec, "section");
        const std::string array = field<std::string>(rec, "array");
        const std::size_t offset = field<std::size_t>(rec, "offset");

        SummaryArray* target = nullptr;
        for (auto& sec : message_.summary.sections) {
            if (sec.name != section) continue;
            for (auto& arr : sec.arrays)
                if (arr.name == array) target = &arr;
        }
        if (!target)
            throw WireShapeError("wire block for undeclared array '" + section + "/" + array +
                                 "'");
        auto& next_row = filled_rows_[section + "\x1f" + array];
        if (offset != next_row)
            throw WireShapeError("wire block offset " + std::to_string(offset) +
                                 " out of order for '" + section + "/" + array + "'");
        const std::size_t end = std::min(target->rows, offset + block_width_);
        const std::size_t expected = (end - offset) * target->cols;

        if (!rec.contains("values") || !rec["values"].is_array())
            throw WireFrameError("wire block missing values");
        const auto& values = rec["values"];
        if (values.size() != expected)
            throw WireShapeError("wire block for '" + section + "/" + array + "' carries " +
                                 std::to_string(values.size()) + " values, expected " +
                                 std::to_string(expected));
        std::size_t t = offset * target->cols;
        for (const auto& v : values) {
            if (!v.is_string())
                throw WireFrameError("wire block values must be decimal strings");
            const std::string text = v.get<std::string>();
            try {
                target->values[t++] = parse_double(text);
            } catch (const ParseError& e) {
                throw WireFrameError(std::string("bad wire number: ") + e.what());
            }
            message_.payload_bytes += text.size();
        }
        message_.payload_values += values.size();
        next_row = end;
        ++blocks_seen_;
    }

    void read_end(const wire_json& rec) {
        if (!have_header_) throw WireFrameError("wire end record before header");
        const std::size_t blocks = field<std::size_t>(rec, "blocks");
        if (blocks != blocks_seen_)
            throw WireFrameError("wire end record declares " + std::to_string(blocks) +
                                 " blocks, received " + std::to_string(blocks_seen_));
        for (const auto& sec : message_.summary.sections)
            for (const auto& arr : sec.arrays)
                if (filled_rows_[sec.name + "\x1f" + arr.name] != arr.rows)
                    throw WireShapeError("wire array '" + sec.name + "/" + arr.name +
                                         "' is incomplete");
        done_ = true;
    }

    ParsedMessage message_;
    std::map<std::string, std::size_t> filled_rows_;
    std::size_t block_width_ = kDefaultBlockWidth;
    std::size_t blocks_seen_ = 0;
    bool have_header_ = false;
    bool done_ = false;
};

inline ParsedMessage parse_message(const std::string& text) {
    SummaryReader reader;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (reader.done()) throw WireFrameError("data after end record");
        reader.feed_line(line);
    }
    return reader.take();
}

inline ClientSummary parse_summary(const std::string& text) {
    return parse_message(text).summary;
}

} // namespace fedscreen
