// Command-line front end: run experiment configs, validate them, host or feed
// a one-shot aggregation round over TCP, and evaluate the brute-force
// reference oracles used by the test suite.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fedscreen/oracles.hpp"
#include "fedscreen/runner.hpp"

namespace {

using fedscreen::ValidationError;

// "key=v1,v2,..." helpers for the oracle subcommand.
std::string expect_arg(const std::vector<std::string>& args, const std::string& key) {
    for (const auto& arg : args) {
        if (arg.size() > key.size() && arg.compare(0, key.size(), key) == 0 &&
            arg[key.size()] == '=')
            return arg.substr(key.size() + 1);
    }
    throw ValidationError("oracle case needs argument '" + key + "='");
}

std::vector<double> parse_doubles(const std::string& text) {
    std::vector<double> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) out.push_back(fedscreen::parse_double(item));
    if (out.empty()) throw ValidationError("empty numeric list");
    return out;
}

std::vector<int> parse_ints(const std::string& text) {
    std::vector<int> out;
    for (double v : parse_doubles(text)) out.push_back(static_cast<int>(v));
    return out;
}

int parse_port(const std::string& addr) {
    const auto colon = addr.rfind(':');
    const std::string host = colon == std::string::npos ? "" : addr.substr(0, colon);
    const std::string port_text = colon == std::string::npos ? addr : addr.substr(colon + 1);
    if (!host.empty() && host != "127.0.0.1" && host != "localhost")
        throw ValidationError("only loopback addresses are supported, got '" + addr + "'");
    try {
        return std::stoi(port_text);
    } catch (const std::exception&) {
        throw ValidationError("bad address '" + addr + "': expected [127.0.0.1:]<port>");
    }
}

int cmd_run(const std::string& config_path) {
    const auto cfg = fedscreen::load_experiment_config(config_path);
    const auto outputs = fedscreen::run_experiment(cfg);
    std::cout << "runs:     " << outputs.runs_csv << "\n"
              << "summary:  " << outputs.summary_csv << "\n"
              << "manifest: " << outputs.manifest_json << "\n";
    return 0;
}

int cmd_validate(const std::string& config_path) {
    fedscreen::load_experiment_config(config_path);
    std::cout << "ok\n";
    return 0;
}

struct ServeOptions {
    std::string listen = "127.0.0.1:0";
    int clients = 1;
    std::string method = "lrffs";
    std::string weights = "half_floor";
    std::string selection = "top_k";
    int k = 10;
    double delta = 0.0;
    double alpha = 0.2;
    std::string out_path;
};

fedscreen::MethodSpec make_method(const std::string& name, const std::string& weights) {
    fedscreen::MethodSpec spec;
    spec.name = name;
    spec.weights = fedscreen::weight_mode_from_string(weights);
    fedscreen::summary_request_for(spec); // validates the name
    return spec;
}

std::vector<fedscreen::ClientSummary> collect_round(fedscreen::SocketServer& server, int clients,
                                                    const std::string& round) {
    auto messages = server.collect(clients);
    std::vector<fedscreen::ClientSummary> summaries;
    for (auto& msg : messages) {
        if (msg.round != round)
            throw fedscreen::WireFrameError("expected a '" + round + "' round upload, got '" +
                                            msg.round + "'");
        summaries.push_back(std::move(msg.summary));
    }
    return summaries;
}

int cmd_serve(const ServeOptions& opt) {
    const auto method = make_method(opt.method, opt.weights);
    if (opt.selection != "top_k" && opt.selection != "fixed_delta" && opt.selection != "fdr")
        throw ValidationError("serve supports selections top_k, fixed_delta, fdr");

    fedscreen::SocketServer server(parse_port(opt.listen));
    std::cout << "listening on 127.0.0.1:" << server.port() << " for " << opt.clients
              << " upload(s)\n"
              << std::flush;

    auto summaries = collect_round(server, opt.clients, "main");
    const auto result = fedscreen::run_method(summaries, method);

    std::vector<int> selected;
    if (opt.selection == "top_k") {
        selected = fedscreen::top_k_select(result.utilities, opt.k).selected;
    } else if (opt.selection == "fixed_delta") {
        selected = fedscreen::threshold_select(result.utilities, opt.delta).selected;
    } else {
        std::cout << "waiting for the pseudo-feature round\n" << std::flush;
        auto pseudo = collect_round(server, opt.clients, "pseudo");
        const auto pseudo_result = fedscreen::run_method(pseudo, method);
        selected =
            fedscreen::fdr_control_select(result.utilities, pseudo_result.utilities, opt.alpha)
                .selected;
    }

    fedscreen::config_json report;
    std::vector<std::string> ids;
    for (const auto& s : summaries) ids.push_back(s.client_id);
    std::sort(ids.begin(), ids.end());
    report["method"] = opt.method;
    report["clients"] = ids;
    report["selected"] = selected;
    const auto ranks = fedscreen::ranks_descending(result.utilities.values);
    fedscreen::config_json top = fedscreen::config_json::array();
    for (std::size_t j = 0; j < result.utilities.values.size(); ++j) {
        if (ranks[j] > 10) continue;
        fedscreen::config_json row;
        row["feature"] = j;
        row["rank"] = ranks[j];
        row["utility"] = fedscreen::format_double17(result.utilities.values[j]);
        top.push_back(std::move(row));
    }
    report["top10"] = std::move(top);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";

    if (opt.out_path.empty()) {
        std::cout << report.dump(2) << "\n";
    } else {
        std::ofstream out(opt.out_path);
        if (!out) throw fedscreen::Error("cannot write '" + opt.out_path + "'");
        out << report.dump(2) << "\n";
        std::cout << "report: " << opt.out_path << "\n";
    }
    return 0;
}

struct ClientOptions {
    std::string connect;
    std::string shard_path;
    std::string label_column = "label";
    std::string labels; // optional fixed vocabulary "a,b,c"
    int categories = 0; // optional fixed R (0 = from vocabulary/file)
    std::string method = "lrffs";
    std::string round = "main";
    std::uint64_t seed = 1;
    std::size_t block_width = fedscreen::kDefaultBlockWidth;
};

int cmd_client(const ClientOptions& opt) {
    fedscreen::CategoryRegistry registry;
    if (!opt.labels.empty()) {
        std::string item;
        std::istringstream in(opt.labels);
        while (std::getline(in, item, ',')) registry.register_label(item);
    }
    fedscreen::Shard shard = fedscreen::load_csv_dataset(
        opt.shard_path, opt.label_column, ',', registry, opt.labels.empty(),
        std::filesystem::path(opt.shard_path).stem().string());
    if (opt.categories > 0) {
        if (opt.categories < registry.size())
            throw ValidationError("--categories is smaller than the labels present");
        shard = fedscreen::Shard(std::vector<double>(shard.features()), shard.n(), shard.p(),
                                 std::vector<int>(shard.labels()), shard.client_id(),
                                 opt.categories);
    }
    if (opt.round == "pseudo") shard = fedscreen::make_pseudo_shard(shard, opt.seed);
    else if (opt.round != "main")
        throw ValidationError("client rounds are 'main' or 'pseudo'");

    const auto method = make_method(opt.method, "half_floor");
    const auto summary =
        fedscreen::compute_client_summary(shard, fedscreen::summary_request_for(method));
    fedscreen::upload_summary("127.0.0.1", parse_port(opt.connect), summary, opt.block_width,
                              opt.round);
    std::cout << "uploaded " << shard.client_id() << " (" << opt.round << " round)\n";
    return 0;
}

int cmd_oracle(const std::string& which, const std::vector<std::string>& args) {
    namespace oracle = fedscreen::oracle;
    if (which == "mann_whitney") {
        const auto a = parse_doubles(expect_arg(args, "A"));
        const auto b = parse_doubles(expect_arg(args, "B"));
        std::cout << fedscreen::format_double17(oracle::mann_whitney_brute(a, b)) << "\n";
        return 0;
    }
    if (which == "first_order") {
        const auto x = parse_doubles(expect_arg(args, "X"));
        const auto y = parse_ints(expect_arg(args, "Y"));
        const int r = parse_ints(expect_arg(args, "r")).front();
        const auto res = fedscreen::oracle::first_order_brute(x, y, r);
        std::cout << "u_hat=" << fedscreen::format_double17(res.u_hat) << "\n"
                  << "theta_hat=" << fedscreen::format_double17(res.theta_hat) << "\n"
                  << "gamma_hat="
                  << (res.gamma_defined ? fedscreen::format_double17(res.gamma_hat) : "undefined")
                  << "\n"
                  << "lambda=" << fedscreen::format_double17(res.lambda) << "\n";
        return 0;
    }
    if (which == "higher_order") {
        const auto x = parse_doubles(expect_arg(args, "X"));
        const auto y = parse_ints(expect_arg(args, "Y"));
        const int r = parse_ints(expect_arg(args, "r")).front();
        const int d = parse_ints(expect_arg(args, "d")).front();
        const int d1 = parse_ints(expect_arg(args, "d1")).front();
        const auto res = oracle::higher_order_brute(x, y, r, d, d1);
        std::cout << "u_hat=" << fedscreen::format_double17(res.u_hat) << "\n"
                  << "theta_hat=" << fedscreen::format_double17(res.theta_hat) << "\n";
        return 0;
    }
    if (which == "bridge") {
        const double c = parse_doubles(expect_arg(args, "c")).front();
        std::cout << fedscreen::format_double17(oracle::bridge_pi_star_bisection(c)) << "\n";
        return 0;
    }
    throw ValidationError("unknown oracle case '" + which +
                          "' (expected mann_whitney, first_order, higher_order, bridge)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Federated label-shift-robust feature screening toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run = app.add_subcommand("run", "Execute an experiment config end to end");
    run->add_option("config", config_path, "JSON experiment config")->required();

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Schema-check an experiment config");
    validate->add_option("config", validate_path, "JSON experiment config")->required();

    ServeOptions serve_opt;
    auto* serve = app.add_subcommand("serve", "Host a one-shot aggregation round over TCP");
    serve->add_option("--listen", serve_opt.listen, "Loopback address, e.g. 127.0.0.1:4040");
    serve->add_option("--clients", serve_opt.clients, "Number of expected uploads")->required();
    serve->add_option("--method", serve_opt.method, "Screening method name");
    serve->add_option("--weights", serve_opt.weights, "half_floor | pair_count | min_variance");
    serve->add_option("--selection", serve_opt.selection, "top_k | fixed_delta | fdr");
    serve->add_option("--k", serve_opt.k, "Retention size for top_k");
    serve->add_option("--delta", serve_opt.delta, "Threshold for fixed_delta");
    serve->add_option("--alpha", serve_opt.alpha, "Target level for fdr");
    serve->add_option("--out", serve_opt.out_path, "Report path (default: stdout)");

    ClientOptions client_opt;
    auto* client = app.add_subcommand("client", "Upload one CSV shard's summary to a server");
    client->add_option("--connect", client_opt.connect, "Server address")->required();
    client->add_option("--shard", client_opt.shard_path, "CSV shard path")->required();
    client->add_option("--label-column", client_opt.label_column, "Label column name");
    client->add_option("--labels", client_opt.labels,
                       "Fixed label vocabulary 'a,b,c' shared across clients");
    client->add_option("--categories", client_opt.categories, "Fixed category count R");
    client->add_option("--method", client_opt.method, "Method whose statistics to compute");
    client->add_option("--round", client_opt.round, "main | pseudo");
    client->add_option("--seed", client_opt.seed, "Seed for the pseudo round");
    client->add_option("--block-width", client_opt.block_width, "Wire block width");

    std::string oracle_case;
    std::vector<std::string> oracle_args;
    auto* oracle = app.add_subcommand("oracle", "Evaluate a brute-force reference oracle");
    oracle->add_option("case", oracle_case, "mann_whitney | first_order | higher_order | bridge")
        ->required();
    oracle->add_option("args", oracle_args, "key=value arguments, e.g. A=1,3 B=2,4");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path);
        if (validate->parsed()) return cmd_validate(validate_path);
        if (serve->parsed()) return cmd_serve(serve_opt);
        if (client->parsed()) return cmd_client(client_opt);
        if (oracle->parsed()) return cmd_oracle(oracle_case, oracle_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
