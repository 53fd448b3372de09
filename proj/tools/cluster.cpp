// Command-line driver for repeated clustering experiments.
//
//   cluster run --data iris --k 3 --algo qmts,lloyd-random --reps 100 --format md

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tabuclust/tabuclust.hpp"

#ifndef TABUCLUST_DEFAULT_REGISTRY
#define TABUCLUST_DEFAULT_REGISTRY "data/registry.json"
#endif

namespace {

struct RunOptions {
    std::string data;
    std::optional<std::size_t> k;
    std::vector<std::string> algos{"qmts"};
    std::size_t reps = 100;
    std::uint64_t seed = 0;
    std::size_t itmax = 400;
    double rmax_frac = 0.25;
    std::string refine = "kmeans";
    std::optional<std::string> normalize;
    std::string format = "md";
    std::string out;
    std::size_t threads = 1;
    bool no_timing = false;
    // Loading options for a plain CSV path.
    std::string delimiter = ",";
    bool header = false;
    std::optional<std::size_t> label_column;
};

int fail(const std::string& kind, const std::string& message, int code) {
    nlohmann::ordered_json err;
    err["error"]["kind"] = kind;
    err["error"]["message"] = message;
    std::cerr << err.dump() << '\n';
    return code;
}

std::filesystem::path registry_path() {
    if (const char* env = std::getenv("TABUCLUST_REGISTRY"); env && *env) {
        return env;
    }
    return TABUCLUST_DEFAULT_REGISTRY;
}

int run(const RunOptions& opt) {
    using namespace tabuclust;

    Registry registry;
    if (const auto path = registry_path(); std::filesystem::exists(path)) {
        registry = Registry::load(path);
    }

    Dataset raw;
    std::optional<std::size_t> registry_k;
    Normalization mode = Normalization::none;
    if (const auto* entry = registry.find(opt.data)) {
        raw = load_entry(*entry);
        mode = entry->normalization;
        if (!entry->k_values.empty()) {
            registry_k = entry->k_values.front();
        }
    } else if (std::filesystem::is_regular_file(opt.data)) {
        if (opt.delimiter.size() != 1) {
            throw std::invalid_argument("--delimiter must be a single character");
        }
        CsvOptions csv;
        csv.delimiter = opt.delimiter.front();
        csv.has_header = opt.header;
        csv.label_column = opt.label_column;
        raw = load_csv(opt.data, csv);
    } else {
        throw UnknownDataset(opt.data);
    }
    if (opt.normalize) {
        mode = parse_normalization(*opt.normalize);
    }

    ExperimentSpec spec;
    spec.data = std::make_shared<const Dataset>(normalize(raw, mode).first);
    if (opt.k) {
        spec.k = *opt.k;
    } else if (registry_k) {
        spec.k = *registry_k;
    } else {
        throw std::invalid_argument("--k is required for datasets without a registry default");
    }
    for (const auto& a : opt.algos) {
        spec.algorithms.push_back(parse_algorithm(a));
    }
    spec.repetitions = opt.reps;
    spec.base_seed = opt.seed;
    spec.threads = opt.threads;
    spec.qmts.it_max = opt.itmax;
    spec.qmts.r_max = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(opt.rmax_frac * opt.itmax)));
    spec.qmts.refinement = parse_refinement(opt.refine);

    const auto report = run_experiment(spec);
    EmitOptions emit;
    emit.include_timing = !opt.no_timing;
    const auto text = emit_report(report, parse_report_format(opt.format), emit);

    if (opt.out.empty() || opt.out == "-") {
        std::cout << text;
    } else {
        std::ofstream out(opt.out, std::ios::binary);
        if (!out) {
            throw std::runtime_error("cannot write '" + opt.out + "'");
        }
        out << text;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Clustering benchmark: quantized-means tabu search vs. Lloyd K-Means"};
    app.require_subcommand(1);

    RunOptions opt;
    auto* cmd = app.add_subcommand("run", "Run repeated seeded experiments and emit a report");
    cmd->add_option("--data", opt.data, "Registry name or CSV path")->required();
    cmd->add_option("--k", opt.k, "Number of clusters (defaults to the registry entry)");
    cmd->add_option("--algo", opt.algos, "Algorithms: lloyd-random, lloyd-kmeanspp, qmts")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--reps", opt.reps, "Repetitions per algorithm")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--seed", opt.seed, "Base seed; repetition i uses seed + i")->capture_default_str();
    cmd->add_option("--itmax", opt.itmax, "Maximum tabu-search iterations")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--rmax-frac", opt.rmax_frac, "Cut-out as a fraction of --itmax")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    cmd->add_option("--refine", opt.refine, "Refinement: centroid or kmeans")
        ->check(CLI::IsMember({"centroid", "kmeans"}))
        ->capture_default_str();
    cmd->add_option("--normalize", opt.normalize, "none, zscore or minmax (defaults to the registry entry)")
        ->check(CLI::IsMember({"none", "zscore", "minmax"}));
    cmd->add_option("--format", opt.format, "json, csv or md")
        ->check(CLI::IsMember({"json", "csv", "md"}))
        ->capture_default_str();
    cmd->add_option("--out", opt.out, "Output file (stdout if omitted)");
    cmd->add_option("--threads", opt.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_flag("--no-timing", opt.no_timing, "Omit wall-time fields from the report");
    cmd->add_option("--delimiter", opt.delimiter, "CSV delimiter for path datasets")->capture_default_str();
    cmd->add_flag("--header", opt.header, "CSV path dataset has a header row");
    cmd->add_option("--label-column", opt.label_column, "0-based label column of a CSV path dataset");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);
        }
        return fail("usage", e.what(), 2);
    }

    try {
        return run(opt);
    } catch (const tabuclust::ParseError& e) {
        return fail("parse", e.what(), 3);
    } catch (const tabuclust::UnknownDataset& e) {
        return fail("dataset", e.what(), 4);
    } catch (const std::invalid_argument& e) {
        return fail("invalid-argument", e.what(), 5);
    } catch (const std::exception& e) {
        return fail("runtime", e.what(), 1);
    }
}
