#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "lipcert/activations.hpp"
#include "lipcert/certificates.hpp"
#include "lipcert/experiments.hpp"
#include "lipcert/network.hpp"
#include "lipcert/report_json.hpp"

namespace {

using nlohmann::ordered_json;

int exit_code_for(const lipcert::Error& e)
{
    switch (e.kind()) {
    case lipcert::ErrorKind::invalid_input:
    case lipcert::ErrorKind::shape:
    case lipcert::ErrorKind::parse:
        return 2;
    case lipcert::ErrorKind::unsupported_norm:
    case lipcert::ErrorKind::budget:
    case lipcert::ErrorKind::not_applicable:
        return 3;
    case lipcert::ErrorKind::internal:
        return 4;
    }
    return 4;
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        lipcert::fail(lipcert::ErrorKind::invalid_input, "cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::uint64_t default_budget()
{
    if (const char* env = std::getenv("LIPCERT_BUDGET")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            lipcert::fail(lipcert::ErrorKind::invalid_input,
                          "LIPCERT_BUDGET is not a valid integer");
        }
    }
    return lipcert::kDefaultPatternBudget;
}

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void print_report(const lipcert::CertificateReport& r)
{
    const auto line = [](const char* label, const std::string& value) {
        std::printf("  %-18s %s\n", label, value.c_str());
    };
    std::printf("certificate report (norms %s -> %s)\n",
                lipcert::norm_spec_string(r.norm_in).c_str(),
                lipcert::norm_spec_string(r.norm_out).c_str());
    line("product bound", fmt(r.product_bound) + (r.spectral_fallback ? "  [spectral fallback]" : ""));
    line("theta", fmt(r.theta) + (r.euclidean ? "" : "  [spectral norms only]"));
    if (r.vartheta)
        line("vartheta (exact)", fmt(*r.vartheta) + "  [" + std::to_string(r.vartheta_patterns) +
                                     " patterns]");
    if (r.vartheta_sample_lower)
        line("vartheta sampled", fmt(*r.vartheta_sample_lower) + "  [lower bound, not a certificate]");
    if (r.positive_collapse)
        line("positive collapse", fmt(*r.positive_collapse));
    if (r.absolute_bound)
        line("absolute bound", fmt(*r.absolute_bound));
    line("linear lower", fmt(r.linear_lower));
    line("certified", r.certified ? fmt(*r.certified) : "n/a");
    line("elapsed", fmt(r.elapsed_ms) + " ms");
}

int cmd_certify(const std::string& path, const std::string& method, const std::string& norm_in,
                const std::string& norm_out, std::uint64_t budget, int trials,
                std::uint64_t seed, bool json)
{
    const lipcert::Network net = lipcert::parse_network(read_file(path));

    lipcert::CertifyOptions options;
    options.norm_in = lipcert::parse_norm_spec(norm_in);
    options.norm_out = lipcert::parse_norm_spec(norm_out);
    options.vartheta_budget = budget;
    options.sample_trials = trials;
    options.seed = seed;

    lipcert::CertificateReport report;
    if (method == "auto") {
        report = lipcert::certify(net, options);
        if (!report.certified)
            lipcert::fail(lipcert::ErrorKind::not_applicable,
                          "no certificate applies to this network under the requested norms");
    } else {
        report.norm_in = options.norm_in;
        report.norm_out = options.norm_out;
        report.budget = options.vartheta_budget;
        report.seed = options.seed;
        report.euclidean = options.norm_in.is_euclidean() && options.norm_out.is_euclidean();
        report.product_bound = lipcert::product_bound(net, options.norm_in, options.norm_out,
                                                      &report.spectral_fallback);
        report.linear_lower = lipcert::linear_bound(net, options.norm_in, options.norm_out);
        report.theta = lipcert::theta_recursive(net);
        if (method == "product") {
            if (report.spectral_fallback)
                lipcert::fail(lipcert::ErrorKind::unsupported_norm,
                              "no closed form for the product bound under the requested norms");
            report.certified = report.product_bound;
        } else if (method == "theta") {
            if (!report.euclidean)
                lipcert::fail(lipcert::ErrorKind::not_applicable,
                              "theta certifies the spectral norm only");
            report.certified = report.theta;
        } else if (method == "vartheta") {
            const lipcert::VarthetaResult v = lipcert::vartheta_exhaustive(
                net, options.norm_in, options.norm_out, options.vartheta_budget);
            report.vartheta = v.value;
            report.vartheta_exact = true;
            report.vartheta_patterns = v.patterns;
            report.certified = v.value;
        } else if (method == "positive") {
            report.positive_collapse =
                lipcert::positive_collapse_bound(net, options.norm_in, options.norm_out);
            report.certified = report.positive_collapse;
        } else if (method == "absolute") {
            report.absolute_bound =
                lipcert::absolute_bound(net, options.norm_in, options.norm_out);
            report.certified = report.absolute_bound;
        } else {
            lipcert::fail(lipcert::ErrorKind::invalid_input, "unknown method '" + method + "'");
        }
    }

    if (json)
        std::printf("%s\n", lipcert::report_to_json(report).c_str());
    else
        print_report(report);
    return 0;
}

int cmd_inspect(const std::string& path, bool json)
{
    const lipcert::Network net = lipcert::parse_network(read_file(path));
    if (json) {
        ordered_json doc;
        doc["input_dim"] = net.input_dim;
        doc["layers"] = ordered_json::array();
        for (const lipcert::Layer& layer : net.layers) {
            ordered_json l;
            l["rows"] = layer.weight.rows;
            l["cols"] = layer.weight.cols;
            l["activation"] = layer.activation.name;
            l["alpha"] = layer.activation.alpha;
            l["separable"] = layer.activation.separable;
            doc["layers"].push_back(l);
        }
        std::printf("%s\n", doc.dump(2).c_str());
        return 0;
    }
    std::printf("lipnet network: %d layer(s), input_dim %d, output_dim %d\n", net.depth(),
                net.input_dim, net.output_dim());
    for (int i = 0; i < net.depth(); ++i) {
        const lipcert::Layer& layer = net.layers[static_cast<std::size_t>(i)];
        std::printf("  layer %d: %dx%d, activation %s, alpha %s%s\n", i + 1, layer.weight.rows,
                    layer.weight.cols, layer.activation.name.c_str(),
                    fmt(layer.activation.alpha).c_str(),
                    layer.activation.separable ? ", separable" : "");
    }
    return 0;
}

int cmd_activations_list(bool json)
{
    const lipcert::QuotientGrid grid;
    ordered_json arr = ordered_json::array();
    if (!json)
        std::printf("%-15s %-9s %s\n", "name", "alpha", "prox");
    for (const std::string& name : lipcert::catalog_names()) {
        const lipcert::ScalarActivation act = lipcert::builtin(name);
        const bool prox = lipcert::check_prox_representable(act, grid);
        if (json) {
            ordered_json row;
            row["name"] = name;
            row["alpha"] = act.alpha;
            row["prox_representable"] = prox;
            arr.push_back(row);
        } else {
            std::printf("%-15s %-9.5f %s\n", name.c_str(), act.alpha, prox ? "yes" : "no");
        }
    }
    if (json)
        std::printf("%s\n", arr.dump(2).c_str());
    return 0;
}

int cmd_activations_certify(const std::string& name, double alpha_override, bool has_alpha,
                            std::uint64_t seed, bool json)
{
    const lipcert::ScalarActivation act = lipcert::builtin(name);
    const double alpha = has_alpha ? alpha_override : act.alpha;
    lipcert::QuotientGrid grid;
    grid.seed = seed;

    const lipcert::AveragednessReport avg = lipcert::certify_averagedness(act, alpha, grid);
    bool prox_pass = true;
    std::optional<lipcert::ProxReport> prox;
    if (act.has_potential) {
        prox = lipcert::verify_prox_representation(act, grid);
        prox_pass = prox->pass;
    }

    if (json) {
        ordered_json doc;
        doc["name"] = name;
        doc["alpha"] = alpha;
        doc["averagedness_pass"] = avg.pass;
        doc["worst_quotient_low"] = avg.worst_quotient_low;
        doc["worst_quotient_high"] = avg.worst_quotient_high;
        if (prox) {
            doc["prox_pass"] = prox->pass;
            doc["prox_max_abs_gap"] = prox->max_abs_gap;
        } else {
            doc["prox_pass"] = nullptr;
            doc["prox_max_abs_gap"] = nullptr;
        }
        doc["seed"] = seed;
        std::printf("%s\n", doc.dump(2).c_str());
    } else {
        std::printf("%s at alpha=%s: averagedness %s (quotients in [%s, %s])\n", name.c_str(),
                    fmt(alpha).c_str(), avg.pass ? "PASS" : "FAIL",
                    fmt(avg.worst_quotient_low).c_str(), fmt(avg.worst_quotient_high).c_str());
        if (prox)
            std::printf("prox representation %s (max gap %s)\n", prox->pass ? "PASS" : "FAIL",
                        fmt(prox->max_abs_gap).c_str());
    }
    return avg.pass && prox_pass ? 0 : 2;
}

int cmd_experiment(const std::string& name, int trials, std::uint64_t seed,
                   const std::string& dims_csv, bool vartheta, const std::string& dump_path,
                   std::uint64_t budget, bool json)
{
    if (name == "tanh") {
        const lipcert::TanhToyReport toy = lipcert::run_tanh_toy();
        if (json) {
            ordered_json doc;
            doc["experiment"] = "tanh";
            doc["linear"] = toy.linear;
            doc["theta"] = toy.theta;
            doc["vartheta"] = toy.vartheta;
            doc["naive"] = toy.naive;
            doc["empirical_ratio"] = toy.empirical_ratio;
            std::printf("%s\n", doc.dump(2).c_str());
        } else {
            std::printf("tanh toy (two positively weighted layers)\n");
            std::printf("  linear lower     %s\n", fmt(toy.linear).c_str());
            std::printf("  vartheta         %s\n", fmt(toy.vartheta).c_str());
            std::printf("  theta            %s\n", fmt(toy.theta).c_str());
            std::printf("  naive product    %s\n", fmt(toy.naive).c_str());
            std::printf("  empirical ratio  %s\n", fmt(toy.empirical_ratio).c_str());
        }
        return 0;
    }
    if (name != "numeric")
        lipcert::fail(lipcert::ErrorKind::invalid_input,
                      "unknown experiment '" + name + "' (available: numeric, tanh)");

    lipcert::MonteCarloConfig cfg;
    cfg.trials = trials;
    cfg.seed = seed;
    cfg.vartheta = vartheta;
    cfg.vartheta_budget = budget;
    cfg.record_trials = !dump_path.empty();
    if (!dims_csv.empty()) {
        cfg.dims.clear();
        std::stringstream ss(dims_csv);
        std::string field;
        while (std::getline(ss, field, ','))
            cfg.dims.push_back(std::stoi(field));
    }

    const lipcert::RatioStats stats = lipcert::run_monte_carlo(cfg);

    if (!dump_path.empty()) {
        std::ofstream out(dump_path, std::ios::binary);
        if (!out)
            lipcert::fail(lipcert::ErrorKind::invalid_input, "cannot write '" + dump_path + "'");
        out << "trial,theta_ratio,linear_ratio,vartheta_ratio\n";
        char buf[128];
        for (std::size_t t = 0; t < stats.per_trial.size(); ++t) {
            if (stats.has_vartheta)
                std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g\n", t,
                              stats.per_trial[t][0], stats.per_trial[t][1], stats.per_trial[t][2]);
            else
                std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,\n", t, stats.per_trial[t][0],
                              stats.per_trial[t][1]);
            out << buf;
        }
    }

    if (json) {
        const auto agg = [](const lipcert::RatioAggregate& a) {
            ordered_json j;
            j["mean"] = a.mean;
            j["min"] = a.min;
            j["max"] = a.max;
            return j;
        };
        ordered_json doc;
        doc["experiment"] = "numeric";
        doc["dims"] = cfg.dims;
        doc["trials"] = stats.trials;
        doc["seed"] = stats.seed;
        doc["theta_ratio"] = agg(stats.theta_ratio);
        doc["linear_ratio"] = agg(stats.linear_ratio);
        doc["vartheta_ratio"] = stats.has_vartheta ? agg(stats.vartheta_ratio) : ordered_json(nullptr);
        std::printf("%s\n", doc.dump(2).c_str());
    } else {
        std::printf("monte carlo ratios over %d trials (seed %llu)\n", stats.trials,
                    static_cast<unsigned long long>(stats.seed));
        std::printf("  %-10s %-12s %-12s %-12s\n", "family", "mean", "min", "max");
        std::printf("  %-10s %-12s %-12s %-12s\n", "theta", fmt(stats.theta_ratio.mean).c_str(),
                    fmt(stats.theta_ratio.min).c_str(), fmt(stats.theta_ratio.max).c_str());
        std::printf("  %-10s %-12s %-12s %-12s\n", "linear", fmt(stats.linear_ratio.mean).c_str(),
                    fmt(stats.linear_ratio.min).c_str(), fmt(stats.linear_ratio.max).c_str());
        if (stats.has_vartheta)
            std::printf("  %-10s %-12s %-12s %-12s\n", "vartheta",
                        fmt(stats.vartheta_ratio.mean).c_str(),
                        fmt(stats.vartheta_ratio.min).c_str(),
                        fmt(stats.vartheta_ratio.max).c_str());
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"lipcert: Lipschitz certificates for layered networks"};
    app.require_subcommand(1);

    // certify
    auto* certify = app.add_subcommand("certify", "compute certificates for a lipnet file");
    std::string net_path, method = "auto", norm_in = "2", norm_out = "2";
    std::uint64_t budget = 0, seed = 0x11b5;
    int sample_trials = 64;
    bool json = false;
    certify->add_option("netfile", net_path, "lipnet v1 network file")->required();
    certify->add_option("--method", method, "auto|product|theta|vartheta|positive|absolute")
        ->check(CLI::IsMember({"auto", "product", "theta", "vartheta", "positive", "absolute"}));
    certify->add_option("--norm-in", norm_in, "input norm p[:weights-csv]");
    certify->add_option("--norm-out", norm_out, "output norm p[:weights-csv]");
    certify->add_option("--budget", budget, "diagonal pattern budget");
    certify->add_option("--trials", sample_trials, "sampled lower-bound trials");
    certify->add_option("--seed", seed, "sampling seed");
    certify->add_flag("--json", json, "emit the report as JSON");

    // inspect
    auto* inspect = app.add_subcommand("inspect", "parse and summarize a lipnet file");
    std::string inspect_path;
    bool inspect_json = false;
    inspect->add_option("netfile", inspect_path, "lipnet v1 network file")->required();
    inspect->add_flag("--json", inspect_json, "emit the summary as JSON");

    // activations
    auto* activations = app.add_subcommand("activations", "activation catalog tools");
    activations->require_subcommand(1);
    auto* act_list = activations->add_subcommand("list", "list catalog entries");
    bool act_list_json = false;
    act_list->add_flag("--json", act_list_json, "emit the catalog as JSON");
    auto* act_certify = activations->add_subcommand("certify", "verify a declared constant");
    std::string act_name;
    double act_alpha = 0.0;
    std::uint64_t act_seed = 0x11b5;
    bool act_json = false;
    act_certify->add_option("name", act_name, "catalog activation name")->required();
    auto* alpha_opt = act_certify->add_option("--alpha", act_alpha, "constant to verify");
    act_certify->add_option("--seed", act_seed, "sampling seed");
    act_certify->add_flag("--json", act_json, "emit the report as JSON");

    // experiment
    auto* experiment = app.add_subcommand("experiment", "reproduce the numerical studies");
    std::string exp_name, exp_dims, exp_dump;
    int exp_trials = 1000;
    std::uint64_t exp_seed = 1;
    bool exp_vartheta = false, exp_json = false;
    experiment->add_option("name", exp_name, "numeric|tanh")
        ->required()
        ->check(CLI::IsMember({"numeric", "tanh"}));
    experiment->add_option("--trials", exp_trials, "number of weight draws");
    experiment->add_option("--seed", exp_seed, "sampling seed");
    experiment->add_option("--dims", exp_dims, "comma-separated layer dimensions N0,...,Nm");
    experiment->add_flag("--vartheta", exp_vartheta, "also enumerate the diagonal patterns");
    experiment->add_option("--dump-trials", exp_dump, "write per-trial ratios to this CSV path");
    experiment->add_flag("--json", exp_json, "emit the statistics as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) // --help
            return app.exit(e);
        app.exit(e);
        return 1;
    }

    try {
        if (certify->parsed())
            return cmd_certify(net_path, method, norm_in, norm_out,
                               budget != 0 ? budget : default_budget(), sample_trials, seed,
                               json);
        if (inspect->parsed())
            return cmd_inspect(inspect_path, inspect_json);
        if (activations->parsed()) {
            if (act_list->parsed())
                return cmd_activations_list(act_list_json);
            return cmd_activations_certify(act_name, act_alpha, alpha_opt->count() > 0, act_seed,
                                           act_json);
        }
        if (experiment->parsed())
            return cmd_experiment(exp_name, exp_trials, exp_seed, exp_dims, exp_vartheta,
                                  exp_dump, budget != 0 ? budget : default_budget(), exp_json);
    } catch (const lipcert::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 1;
}
