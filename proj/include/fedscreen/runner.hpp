#pragma once

// Experiment orchestration: JSON config schema, the one-shot upload round
// over either transport, the replication loop, and report emission (per-run
// CSV, summary CSV, JSON manifest). Everything downstream of the config is a
// pure function of (config, seed); wall-clock timings are written only when
// report_timing is enabled so that default reports are byte-reproducible.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "fedscreen/aggregation.hpp"
#include "fedscreen/metrics.hpp"
#include "fedscreen/selection.hpp"
#include "fedscreen/simgen.hpp"
#include "fedscreen/transport.hpp"

namespace fedscreen {

inline constexpr const char* kSoftwareVersion = "1.0.0";

using config_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Config schema
// ---------------------------------------------------------------------------

struct SelectionSpec {
    std::string kind = "top_k"; // fixed_delta | top_k | aux_perm | fdr
    double delta = 0.0;         // fixed_delta
    int k = 0;                  // top_k
    int q = 1000;               // aux_perm pseudo-feature count
    double alpha = 0.2;         // fdr target

    void validate() const {
        if (kind == "fixed_delta") {
            if (!(delta >= 0.0) || !std::isfinite(delta))
                throw ValidationError("fixed_delta selection needs a finite delta >= 0");
        } else if (kind == "top_k") {
            if (k < 0) throw ValidationError("top_k selection needs k >= 0");
        } else if (kind == "aux_perm") {
            if (q < 1) throw ValidationError("aux_perm selection needs q >= 1");
        } else if (kind == "fdr") {
            if (!(alpha > 0.0 && alpha < 1.0))
                throw ValidationError("fdr selection needs alpha in (0, 1)");
        } else {
            throw ValidationError("unknown selection kind '" + kind + "'");
        }
    }
};

struct DataSpec {
    bool from_csv = false;
    ScenarioSpec scenario;              // when !from_csv
    std::vector<std::string> csv_paths; // when from_csv
    std::string label_column = "label";
    std::vector<int> active_set;        // csv mode only; scenario carries its own
};

struct ExperimentConfig {
    DataSpec data;
    std::vector<MethodSpec> methods;
    std::vector<std::string> method_names; // display names, same order as methods
    SelectionSpec selection;
    int replications = 1;
    std::uint64_t seed = 1;
    std::string transport = "in_process"; // in_process | socket
    std::size_t block_width = kDefaultBlockWidth;
    std::string output_dir = "out";
    std::vector<double> heterogeneity; // empty -> single batch at the scenario default
    bool pooled_reference = false;     // also compute pooled-data utilities per rep
    bool report_timing = false;        // write wall times instead of zeros
    config_json echo;                  // the config as parsed, for the manifest
};

namespace detail {

inline void check_keys(const config_json& obj, std::initializer_list<const char*> allowed,
                       const std::string& context) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* key : allowed)
            if (item.key() == key) known = true;
        if (!known)
            throw ValidationError("unknown key '" + item.key() + "' in " + context);
    }
}

template <typename T>
inline T get_field(const config_json& obj, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj[key].get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ValidationError(std::string("config field '") + key + "' has the wrong type");
    }
}

template <typename T>
inline T require_field(const config_json& obj, const char* key, const std::string& context) {
    if (!obj.contains(key))
        throw ValidationError("missing key '" + std::string(key) + "' in " + context);
    try {
        return obj[key].get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ValidationError(std::string("config field '") + key + "' has the wrong type");
    }
}

inline LabelSpec parse_label_spec(const config_json& obj) {
    check_keys(obj, {"scheme", "param", "max_missing", "fixed"}, "labels");
    LabelSpec spec;
    spec.scheme = label_scheme_from_string(require_field<std::string>(obj, "scheme", "labels"));
    spec.param = get_field<double>(obj, "param", 1.0);
    spec.max_missing = get_field<int>(obj, "max_missing", 0);
    spec.fixed = get_field<std::vector<double>>(obj, "fixed", {});
    return spec;
}

inline NoiseSpec parse_noise_spec(const config_json& obj) {
    check_keys(obj, {"family", "param"}, "noise");
    NoiseSpec spec;
    spec.family = noise_family_from_string(require_field<std::string>(obj, "family", "noise"));
    spec.param = get_field<double>(obj, "param", 1.0);
    return spec;
}

inline void apply_client_sizes(ScenarioSpec& spec, const config_json& obj) {
    if (obj.contains("num_clients")) {
        spec.num_clients = require_field<int>(obj, "num_clients", "scenario");
        spec.client_sizes.clear();
    }
    if (obj.contains("client_size")) {
        const int n = require_field<int>(obj, "client_size", "scenario");
        spec.client_sizes.assign(static_cast<std::size_t>(spec.num_clients), n);
    }
    if (obj.contains("client_sizes")) {
        spec.client_sizes = require_field<std::vector<int>>(obj, "client_sizes", "scenario");
        spec.num_clients = static_cast<int>(spec.client_sizes.size());
    }
}

inline void apply_scenario_overrides(ScenarioSpec& spec, const config_json& obj) {
    if (obj.contains("categories"))
        set_preset_categories(spec, require_field<int>(obj, "categories", "scenario"));
    if (obj.contains("heterogeneity"))
        spec.labels.param = require_field<double>(obj, "heterogeneity", "scenario");
    apply_client_sizes(spec, obj);
    if (obj.contains("p")) spec.p = require_field<std::size_t>(obj, "p", "scenario");
    if (obj.contains("outlier_rows"))
        spec.outlier_rows = require_field<int>(obj, "outlier_rows", "scenario");
    if (obj.contains("outlier_low"))
        spec.outlier_low = require_field<double>(obj, "outlier_low", "scenario");
    if (obj.contains("outlier_high"))
        spec.outlier_high = require_field<double>(obj, "outlier_high", "scenario");
    if (obj.contains("attack")) spec.attack = require_field<std::string>(obj, "attack", "scenario");
    if (obj.contains("attack_fraction"))
        spec.attack_fraction = require_field<double>(obj, "attack_fraction", "scenario");
    if (obj.contains("active_set"))
        spec.active_set = require_field<std::vector<int>>(obj, "active_set", "scenario");
}

inline ScenarioSpec parse_custom_scenario(const config_json& obj) {
    check_keys(obj,
               {"kind", "num_clients", "client_size", "client_sizes", "p", "categories",
                "labels", "noise", "signal", "logistic_intercept", "logistic_tilt",
                "beta_magnitude", "beta_support", "banded_covariance", "pooled_shift",
                "outlier_rows", "outlier_low", "outlier_high", "attack", "attack_fraction",
                "active_set"},
               "custom scenario");
    ScenarioSpec spec;
    spec.name = "custom";
    const std::string kind = get_field<std::string>(obj, "kind", "location_shift");
    if (kind == "location_shift")
        spec.kind = GeneratorKind::location_shift;
    else if (kind == "logistic")
        spec.kind = GeneratorKind::logistic;
    else if (kind == "pooled_two_class")
        spec.kind = GeneratorKind::pooled_two_class;
    else
        throw ValidationError("unknown scenario kind '" + kind + "'");

    spec.num_clients = get_field<int>(obj, "num_clients", 30);
    spec.p = get_field<std::size_t>(obj, "p", 500);
    spec.categories = get_field<int>(obj, "categories", 5);
    if (obj.contains("labels")) spec.labels = parse_label_spec(obj["labels"]);
    if (obj.contains("noise")) spec.noise = parse_noise_spec(obj["noise"]);
    if (obj.contains("signal")) {
        for (const auto& jb : obj["signal"]) {
            check_keys(jb, {"category", "feature_begin", "feature_end", "mean"}, "signal block");
            SignalBlock block;
            block.category = require_field<int>(jb, "category", "signal block");
            block.feature_begin = require_field<int>(jb, "feature_begin", "signal block");
            block.feature_end = require_field<int>(jb, "feature_end", "signal block");
            block.mean = require_field<double>(jb, "mean", "signal block");
            spec.signal.push_back(block);
        }
    }
    spec.logistic_intercept = get_field<double>(obj, "logistic_intercept", 0.0);
    spec.logistic_tilt = get_field<double>(obj, "logistic_tilt", 1.0);
    spec.beta_magnitude = get_field<double>(obj, "beta_magnitude", 1.0);
    spec.beta_support = get_field<std::vector<int>>(obj, "beta_support", {});
    spec.banded_covariance = get_field<bool>(obj, "banded_covariance", false);
    spec.pooled_shift = get_field<double>(obj, "pooled_shift", 0.35);
    apply_client_sizes(spec, obj);
    spec.outlier_rows = get_field<int>(obj, "outlier_rows", 0);
    spec.outlier_low = get_field<double>(obj, "outlier_low", 0.0);
    spec.outlier_high = get_field<double>(obj, "outlier_high", 100.0);
    spec.attack = get_field<std::string>(obj, "attack", "none");
    spec.attack_fraction = get_field<double>(obj, "attack_fraction", 0.0);
    spec.active_set = get_field<std::vector<int>>(obj, "active_set", {});
    return spec;
}

inline ScenarioSpec parse_scenario(const config_json& node) {
    if (node.is_string()) return scenario_preset(node.get<std::string>());
    if (!node.is_object()) throw ValidationError("scenario must be a preset name or an object");
    if (node.contains("custom")) {
        check_keys(node, {"custom"}, "scenario");
        return parse_custom_scenario(node["custom"]);
    }
    check_keys(node,
               {"preset", "categories", "heterogeneity", "num_clients", "client_size",
                "client_sizes", "p", "outlier_rows", "outlier_low", "outlier_high", "attack",
                "attack_fraction", "active_set"},
               "scenario");
    ScenarioSpec spec = scenario_preset(require_field<std::string>(node, "preset", "scenario"));
    apply_scenario_overrides(spec, node);
    spec.validate();
    return spec;
}

inline std::pair<MethodSpec, std::string> parse_method(const config_json& node) {
    MethodSpec spec;
    if (node.is_string()) {
        spec.name = node.get<std::string>();
    } else if (node.is_object()) {
        check_keys(node, {"name", "weights", "d", "k", "zeta"}, "method");
        spec.name = require_field<std::string>(node, "name", "method");
        if (node.contains("weights"))
            spec.weights = weight_mode_from_string(require_field<std::string>(node, "weights", "method"));
        if (spec.name == "general") {
            spec.general.d = get_field<int>(node, "d", 1);
            spec.general.k = get_field<int>(node, "k", 1);
            spec.general.zeta_preset = get_field<std::string>(node, "zeta", "equal");
        } else if (node.contains("d") || node.contains("k") || node.contains("zeta")) {
            throw ValidationError("framework parameters are only valid for method 'general'");
        }
    } else {
        throw ValidationError("method entries must be names or objects");
    }
    summary_request_for(spec); // validates the name and framework parameters

    std::string display = spec.name;
    if (spec.name == "general")
        display = "general_d" + std::to_string(spec.general.d) + "_k" +
                  std::to_string(spec.general.k) + "_" + spec.general.zeta_preset;
    if (spec.weights != WeightMode::half_floor) display += "@" + to_string(spec.weights);
    return {spec, display};
}

inline SelectionSpec parse_selection(const config_json& node) {
    if (!node.is_object()) throw ValidationError("selection must be an object");
    check_keys(node, {"kind", "delta", "k", "q", "alpha"}, "selection");
    SelectionSpec spec;
    spec.kind = require_field<std::string>(node, "kind", "selection");
    spec.delta = get_field<double>(node, "delta", spec.delta);
    spec.k = get_field<int>(node, "k", spec.k);
    spec.q = get_field<int>(node, "q", spec.q);
    spec.alpha = get_field<double>(node, "alpha", spec.alpha);
    spec.validate();
    return spec;
}

} // namespace detail

inline ExperimentConfig parse_experiment_config(const config_json& root) {
    if (!root.is_object()) throw ValidationError("experiment config must be a JSON object");
    detail::check_keys(root,
                       {"scenario", "csv_shards", "label_column", "active_set", "methods",
                        "selection", "replications", "seed", "transport", "block_width",
                        "output_dir", "heterogeneity", "pooled_reference", "report_timing"},
                       "experiment config");
    ExperimentConfig cfg;
    cfg.echo = root;

    const bool has_scenario = root.contains("scenario");
    const bool has_csv = root.contains("csv_shards");
    if (has_scenario == has_csv)
        throw ValidationError("config needs exactly one of 'scenario' or 'csv_shards'");
    if (has_scenario) {
        cfg.data.scenario = detail::parse_scenario(root["scenario"]);
        if (root.contains("label_column") || root.contains("active_set"))
            throw ValidationError("'label_column'/'active_set' apply only to csv_shards data");
    } else {
        cfg.data.from_csv = true;
        cfg.data.csv_paths = detail::require_field<std::vector<std::string>>(root, "csv_shards",
                                                                             "experiment config");
        if (cfg.data.csv_paths.empty()) throw ValidationError("csv_shards must be nonempty");
        cfg.data.label_column = detail::get_field<std::string>(root, "label_column", "label");
        cfg.data.active_set = detail::get_field<std::vector<int>>(root, "active_set", {});
    }

    if (!root.contains("methods") || !root["methods"].is_array() || root["methods"].empty())
        throw ValidationError("config needs a nonempty 'methods' array");
    for (const auto& node : root["methods"]) {
        auto [spec, display] = detail::parse_method(node);
        for (const auto& existing : cfg.method_names)
            if (existing == display)
                throw ValidationError("duplicate method entry '" + display + "'");
        cfg.methods.push_back(std::move(spec));
        cfg.method_names.push_back(std::move(display));
    }

    if (root.contains("selection")) cfg.selection = detail::parse_selection(root["selection"]);
    cfg.selection.validate();

    cfg.replications = detail::get_field<int>(root, "replications", 1);
    if (cfg.replications < 0) throw ValidationError("replications must be >= 0");
    cfg.seed = detail::get_field<std::uint64_t>(root, "seed", 1);
    cfg.transport = detail::get_field<std::string>(root, "transport", "in_process");
    if (cfg.transport != "in_process" && cfg.transport != "socket")
        throw ValidationError("transport must be 'in_process' or 'socket'");
    cfg.block_width = detail::get_field<std::size_t>(root, "block_width", kDefaultBlockWidth);
    if (cfg.block_width < 1) throw ValidationError("block_width must be >= 1");
    cfg.output_dir = detail::get_field<std::string>(root, "output_dir", "out");
    if (root.contains("heterogeneity")) {
        if (root["heterogeneity"].is_array())
            cfg.heterogeneity =
                detail::require_field<std::vector<double>>(root, "heterogeneity",
                                                           "experiment config");
        else
            cfg.heterogeneity = {detail::require_field<double>(root, "heterogeneity",
                                                               "experiment config")};
        if (cfg.heterogeneity.empty())
            throw ValidationError("heterogeneity sweep must be nonempty");
        if (cfg.data.from_csv)
            throw ValidationError("heterogeneity sweeps apply only to generated scenarios");
    }
    cfg.pooled_reference = detail::get_field<bool>(root, "pooled_reference", false);
    cfg.report_timing = detail::get_field<bool>(root, "report_timing", false);
    return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config '" + path + "'");
    config_json root;
    try {
        root = config_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_experiment_config(root);
}

// ---------------------------------------------------------------------------
// One-shot rounds
// ---------------------------------------------------------------------------

namespace detail {

struct RoundResult {
    std::vector<ClientSummary> summaries; // client-id order restored downstream
    double elapsed_s = 0.0;
    TransportStats stats;
};

// One one-shot upload round: every client computes its summary on its own
// thread, serializes, and ships it through the configured transport; the
// server ingests and the round ends at the barrier, after which the
// aggregation fold runs in client-id order.
inline RoundResult exchange_round(const std::vector<Shard>& shards, const SummaryRequest& request,
                                  const ExperimentConfig& cfg, const std::string& round_tag,
                                  const std::vector<int>& misaligned_clients,
                                  std::uint64_t rep_seed) {
    const auto start = std::chrono::steady_clock::now();
    const int m = static_cast<int>(shards.size());
    RoundResult out;

    const auto make_text = [&](int l) {
        ClientSummary summary = compute_client_summary(shards[static_cast<std::size_t>(l)],
                                                       request);
        if (std::binary_search(misaligned_clients.begin(), misaligned_clients.end(), l))
            apply_category_misalignment(
                summary, misalignment_permutation(rep_seed, summary.client_id,
                                                  summary.categories));
        return serialize_summary(summary, cfg.block_width, round_tag);
    };

    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(m));
    if (cfg.transport == "socket") {
        SocketServer server;
        std::vector<std::thread> clients;
        clients.reserve(static_cast<std::size_t>(m));
        for (int l = 0; l < m; ++l)
            clients.emplace_back([&, l] {
                try {
                    const std::string reply =
                        socket_exchange("127.0.0.1", server.port(), make_text(l));
                    if (reply.find("\"ack\"") == std::string::npos)
                        throw WireFrameError("server rejected upload");
                } catch (...) {
                    errors[static_cast<std::size_t>(l)] = std::current_exception();
                }
            });
        std::exception_ptr collect_error;
        std::vector<ParsedMessage> messages;
        try {
            messages = server.collect(m, &out.stats);
        } catch (...) {
            collect_error = std::current_exception();
        }
        for (auto& t : clients) t.join();
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
        if (collect_error) std::rethrow_exception(collect_error);
        for (auto& msg : messages) out.summaries.push_back(std::move(msg.summary));
    } else {
        std::vector<std::string> texts(static_cast<std::size_t>(m));
        std::vector<std::thread> workers;
        workers.reserve(static_cast<std::size_t>(m));
        for (int l = 0; l < m; ++l)
            workers.emplace_back([&, l] {
                try {
                    texts[static_cast<std::size_t>(l)] = make_text(l);
                } catch (...) {
                    errors[static_cast<std::size_t>(l)] = std::current_exception();
                }
            });
        for (auto& t : workers) t.join();
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
        for (const auto& text : texts) {
            ParsedMessage msg = parse_message(text);
            out.stats.absorb(msg, text.size());
            out.summaries.push_back(std::move(msg.summary));
        }
    }
    out.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

inline Shard merge_shards(const std::vector<Shard>& shards) {
    std::size_t total = 0;
    int categories = 2;
    for (const auto& s : shards) {
        total += s.n();
        categories = std::max(categories, s.num_categories());
    }
    const std::size_t p = shards.front().p();
    std::vector<double> features;
    features.reserve(total * p);
    std::vector<int> labels;
    labels.reserve(total);
    for (const auto& s : shards) {
        features.insert(features.end(), s.features().begin(), s.features().end());
        labels.insert(labels.end(), s.labels().begin(), s.labels().end());
    }
    return Shard(std::move(features), total, p, std::move(labels), "pooled", categories);
}

inline std::string csv_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return std::string(buf);
}

inline std::string csv_short(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return std::string(buf);
}

} // namespace detail

// ---------------------------------------------------------------------------
// Experiment loop
// ---------------------------------------------------------------------------

struct ExperimentOutputs {
    std::string runs_csv;
    std::string summary_csv;
    std::string manifest_json;
};

inline constexpr const char* kSummaryCsvHeader =
    "method,heterogeneity,SSR,PSR,FDR,Size,wRank,time_local_s,time_agg_s";
inline constexpr const char* kRunsCsvHeader =
    "method,heterogeneity,rep,success,psr,fdr,size,wrank,time_local_s,time_agg_s,"
    "rel_dev_median,rel_dev_excluded";

inline ExperimentOutputs run_experiment(const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);
    ExperimentOutputs out;
    out.runs_csv = (fs::path(cfg.output_dir) / "runs.csv").string();
    out.summary_csv = (fs::path(cfg.output_dir) / "summary.csv").string();
    out.manifest_json = (fs::path(cfg.output_dir) / "manifest.json").string();

    std::vector<std::uint64_t> rep_seeds;
    rep_seeds.reserve(static_cast<std::size_t>(cfg.replications));
    for (int t = 0; t < cfg.replications; ++t)
        rep_seeds.push_back(seed_hierarchy(cfg.seed, "server", "rep-" + std::to_string(t)));

    // Heterogeneity batches: an explicit sweep, or one batch at the scenario
    // default (CSV data reports 0, there is no generator parameter).
    std::vector<double> het_values = cfg.heterogeneity;
    if (het_values.empty())
        het_values = {cfg.data.from_csv ? 0.0 : cfg.data.scenario.labels.param};

    // Manifest first: it must exist (and stay valid) even if a replication
    // aborts midway.
    {
        config_json manifest;
        manifest["software_version"] = kSoftwareVersion;
        manifest["master_seed"] = cfg.seed;
        manifest["replications"] = cfg.replications;
        manifest["methods"] = cfg.method_names;
        manifest["heterogeneity"] = het_values;
        manifest["transport"] = cfg.transport;
        manifest["rep_seeds"] = rep_seeds;
        manifest["outputs"] = {{"runs_csv", "runs.csv"}, {"summary_csv", "summary.csv"}};
        manifest["config"] = cfg.echo;
        std::ofstream mf(out.manifest_json);
        if (!mf) throw Error("cannot write manifest '" + out.manifest_json + "'");
        mf << manifest.dump(2) << "\n";
    }

    std::ofstream runs(out.runs_csv);
    if (!runs) throw Error("cannot write '" + out.runs_csv + "'");
    runs << kRunsCsvHeader << "\n" << std::flush;

    // CSV federations are loaded once and shared by every replication.
    std::vector<Shard> csv_shards;
    if (cfg.data.from_csv) {
        CategoryRegistry registry;
        std::vector<std::string> ids;
        for (const auto& path : cfg.data.csv_paths) {
            const std::string id = fs::path(path).stem().string();
            for (const auto& seen : ids)
                if (seen == id)
                    throw ValidationError("duplicate csv shard id '" + id + "'");
            ids.push_back(id);
            csv_shards.push_back(
                load_csv_dataset(path, cfg.data.label_column, ',', registry, true, id));
        }
        // Later files may introduce labels unseen by earlier ones; rebuild
        // every shard against the final union of categories.
        for (auto& shard : csv_shards)
            if (shard.num_categories() != std::max(registry.size(), 2))
                shard = Shard(std::vector<double>(shard.features()), shard.n(), shard.p(),
                              std::vector<int>(shard.labels()), shard.client_id(),
                              std::max(registry.size(), 2));
    }

    SummaryRequest request;
    for (const auto& method : cfg.methods) request.merge(summary_request_for(method));

    // scores[(method, het batch)] across replications
    std::map<std::pair<std::size_t, std::size_t>, std::vector<RunScore>> scores;

    for (std::size_t hi = 0; hi < het_values.size(); ++hi) {
        ScenarioSpec spec = cfg.data.scenario;
        if (!cfg.data.from_csv && !cfg.heterogeneity.empty()) {
            spec.labels.param = het_values[hi];
            spec.validate();
        }
        const std::vector<int>& active = cfg.data.from_csv ? cfg.data.active_set : spec.active_set;

        for (int t = 0; t < cfg.replications; ++t) {
            const std::uint64_t rep_seed = rep_seeds[static_cast<std::size_t>(t)];
            std::string context = "setup";
            try {
                std::vector<Shard> generated;
                if (!cfg.data.from_csv) generated = generate_scenario(spec, rep_seed);
                const std::vector<Shard>& shards = cfg.data.from_csv ? csv_shards : generated;

                std::vector<int> misaligned;
                if (!cfg.data.from_csv && spec.attack == "category_misalign" &&
                    spec.attack_fraction > 0.0)
                    misaligned = attack_selected_clients(rep_seed, spec.num_clients,
                                                         spec.attack_fraction);

                auto round =
                    detail::exchange_round(shards, request, cfg, "main", misaligned, rep_seed);

                // FDR and aux-perm thresholds need pseudo-feature utilities:
                // an independent second one-shot round.
                detail::RoundResult pseudo_round;
                detail::RoundResult aux_round;
                if (cfg.selection.kind == "fdr") {
                    std::vector<Shard> pseudo;
                    pseudo.reserve(shards.size());
                    for (const auto& s : shards) pseudo.push_back(make_pseudo_shard(s, rep_seed));
                    pseudo_round = detail::exchange_round(pseudo, request, cfg, "pseudo",
                                                          misaligned, rep_seed);
                } else if (cfg.selection.kind == "aux_perm") {
                    const auto sources =
                        aux_source_features(rep_seed, shards.front().p(), cfg.selection.q);
                    std::vector<Shard> aux;
                    aux.reserve(shards.size());
                    for (const auto& s : shards) aux.push_back(make_aux_shard(s, rep_seed, sources));
                    aux_round =
                        detail::exchange_round(aux, request, cfg, "aux", misaligned, rep_seed);
                }

                ClientSummary pooled_summary;
                if (cfg.pooled_reference)
                    pooled_summary =
                        compute_client_summary(detail::merge_shards(shards), request);

                const double local_s =
                    round.elapsed_s + pseudo_round.elapsed_s + aux_round.elapsed_s;

                for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
                    context = cfg.method_names[mi];
                    const auto agg_start = std::chrono::steady_clock::now();
                    const auto result = run_method(round.summaries, cfg.methods[mi]);
                    const auto ranks = ranks_descending(result.utilities.values);

                    std::vector<int> selected;
                    if (cfg.selection.kind == "fixed_delta") {
                        selected = threshold_select(result.utilities, cfg.selection.delta).selected;
                    } else if (cfg.selection.kind == "top_k") {
                        selected = top_k_select(result.utilities, cfg.selection.k).selected;
                    } else if (cfg.selection.kind == "fdr") {
                        const auto pseudo_result =
                            run_method(pseudo_round.summaries, cfg.methods[mi]);
                        selected = fdr_control_select(result.utilities, pseudo_result.utilities,
                                                      cfg.selection.alpha)
                                       .selected;
                    } else { // aux_perm
                        const auto aux_result = run_method(aux_round.summaries, cfg.methods[mi]);
                        selected = aux_perm_select(result.utilities, aux_result.utilities).selected;
                    }
                    const double agg_s = std::chrono::duration<double>(
                                             std::chrono::steady_clock::now() - agg_start)
                                             .count();

                    RunScore score = score_run(selected, ranks, active);
                    if (cfg.report_timing) {
                        score.time_local_s = local_s;
                        score.time_agg_s = agg_s;
                    }

                    std::string rel_median = "na";
                    std::string rel_excluded = "na";
                    if (cfg.pooled_reference) {
                        const auto pooled_result =
                            run_method(std::vector<ClientSummary>{pooled_summary},
                                       cfg.methods[mi]);
                        std::vector<double> dist_active, pool_active;
                        for (int j : active) {
                            dist_active.push_back(
                                result.utilities.values[static_cast<std::size_t>(j)]);
                            pool_active.push_back(
                                pooled_result.utilities.values[static_cast<std::size_t>(j)]);
                        }
                        const auto rel = relative_deviation(dist_active, pool_active);
                        rel_excluded = std::to_string(rel.excluded);
                        if (!rel.values.empty())
                            rel_median = detail::csv_short(median(rel.values));
                    }

                    runs << cfg.method_names[mi] << "," << detail::csv_short(het_values[hi])
                         << "," << t << "," << detail::csv_num(score.success) << ","
                         << detail::csv_num(score.psr) << "," << detail::csv_num(score.fdr)
                         << "," << detail::csv_num(score.size) << ","
                         << detail::csv_num(score.wrank) << ","
                         << detail::csv_num(score.time_local_s) << ","
                         << detail::csv_num(score.time_agg_s) << "," << rel_median << ","
                         << rel_excluded << "\n"
                         << std::flush;
                    scores[{mi, hi}].push_back(score);
                }
            } catch (const std::exception& e) {
                runs.flush();
                throw Error("replication " + std::to_string(t) + ", method '" + context +
                            "': " + e.what());
            }
        }
    }

    std::ofstream summary(out.summary_csv);
    if (!summary) throw Error("cannot write '" + out.summary_csv + "'");
    summary << kSummaryCsvHeader << "\n";
    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
        for (std::size_t hi = 0; hi < het_values.size(); ++hi) {
            const auto it = scores.find({mi, hi});
            if (it == scores.end() || it->second.empty()) continue; // T = 0
            const auto s = summarize(it->second);
            summary << cfg.method_names[mi] << "," << detail::csv_short(het_values[hi]) << ","
                    << detail::csv_num(s.ssr) << "," << detail::csv_num(s.psr) << ","
                    << detail::csv_num(s.fdr) << "," << detail::csv_num(s.size) << ","
                    << detail::csv_num(s.wrank) << "," << detail::csv_num(s.time_local_s) << ","
                    << detail::csv_num(s.time_agg_s) << "\n";
        }
    }
    summary.flush();
    return out;
}

} // namespace fedscreen
