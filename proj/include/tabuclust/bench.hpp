#ifndef TABUCLUST_BENCH_HPP
#define TABUCLUST_BENCH_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <iterator>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "dataset.hpp"
#include "lloyd.hpp"
#include "qmts.hpp"

/**
 * @file bench.hpp
 * @brief Repeated seeded runs of the clustering algorithms with
 * worst/average/best J and timing aggregation, and report emission.
 */

namespace tabuclust {

enum class Algorithm { lloyd_random, lloyd_kmeanspp, qmts };

inline std::string_view to_string(Algorithm a) {
    switch (a) {
    case Algorithm::lloyd_random:
        return "lloyd-random";
    case Algorithm::lloyd_kmeanspp:
        return "lloyd-kmeanspp";
    default:
        return "qmts";
    }
}

inline Algorithm parse_algorithm(std::string_view s) {
    if (s == "lloyd-random" || s == "kmeans") return Algorithm::lloyd_random;
    if (s == "lloyd-kmeanspp" || s == "kmeans++") return Algorithm::lloyd_kmeanspp;
    if (s == "qmts") return Algorithm::qmts;
    throw std::invalid_argument("unknown algorithm '" + std::string(s) + "'");
}

struct ExperimentSpec {
    std::shared_ptr<const Dataset> data;
    std::size_t k = 0;
    std::vector<Algorithm> algorithms;
    std::size_t repetitions = 100;
    std::uint64_t base_seed = 0;
    LloydConfig lloyd;
    QmtsConfig qmts;
    /// Worker threads; results do not depend on this.
    std::size_t threads = 1;
};

struct RunRecord {
    std::string algorithm;
    std::size_t repetition = 0;
    std::uint64_t seed = 0;
    double j = 0;
    double wall_time_s = 0;
    std::size_t iterations = 0;

    friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

struct AlgorithmSummary {
    std::string algorithm;
    std::size_t runs = 0;
    double worst_j = 0;
    double average_j = 0;
    double best_j = 0;
    double mean_time_s = 0;

    friend bool operator==(const AlgorithmSummary&, const AlgorithmSummary&) = default;
};

struct RunReport {
    std::string dataset;
    std::size_t n = 0;
    std::size_t d = 0;
    std::size_t k = 0;
    std::size_t repetitions = 0;
    std::uint64_t base_seed = 0;
    std::size_t it_max = 0;
    std::size_t r_max = 0;
    std::string refinement;
    /// Grouped by algorithm in request order, then by repetition.
    std::vector<RunRecord> runs;
    std::vector<AlgorithmSummary> summaries;

    friend bool operator==(const RunReport&, const RunReport&) = default;
};

/**
 * Aggregates per algorithm, in order of first appearance. The average is
 * the left-to-right sum of J over repetitions divided by their count, so
 * recomputing it from `runs` reproduces the same bits.
 */
inline std::vector<AlgorithmSummary> summarize(const std::vector<RunRecord>& runs) {
    std::vector<AlgorithmSummary> out;
    for (const auto& r : runs) {
        auto it = std::find_if(out.begin(), out.end(), [&](const auto& s) { return s.algorithm == r.algorithm; });
        if (it == out.end()) {
            out.push_back({r.algorithm, 0, r.j, 0.0, r.j, 0.0});
            it = std::prev(out.end());
        }
        ++it->runs;
        it->worst_j = std::max(it->worst_j, r.j);
        it->best_j = std::min(it->best_j, r.j);
        it->average_j += r.j;
        it->mean_time_s += r.wall_time_s;
    }
    for (auto& s : out) {
        s.average_j /= static_cast<double>(s.runs);
        s.mean_time_s /= static_cast<double>(s.runs);
    }
    return out;
}

/// Runs one repetition. Only the algorithm call is timed.
inline RunRecord run_once(const Dataset& ds, std::size_t k, Algorithm algo, std::uint64_t seed,
                          const LloydConfig& lloyd, const QmtsConfig& qmts) {
    RunRecord rec;
    rec.algorithm = std::string(to_string(algo));
    rec.seed = seed;

    const auto start = std::chrono::steady_clock::now();
    ClusteringResult res;
    if (algo == Algorithm::qmts) {
        auto cfg = qmts;
        cfg.seed = seed;
        res = qmts_run(ds, k, cfg);
    } else {
        auto cfg = lloyd;
        cfg.seed = seed;
        cfg.init = algo == Algorithm::lloyd_kmeanspp ? LloydInit::kmeans_plus_plus : LloydInit::random_points;
        res = kmeans(ds, k, cfg);
    }
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

    rec.j = res.j;
    rec.iterations = res.iterations;
    rec.wall_time_s = std::max(elapsed.count(), 1e-9);
    return rec;
}

/**
 * Repetition i of every algorithm uses seed `base_seed + i`. J values are a
 * pure function of the spec; wall times are not.
 */
inline RunReport run_experiment(const ExperimentSpec& spec) {
    if (!spec.data) {
        throw std::invalid_argument("experiment has no dataset");
    }
    const Dataset& ds = *spec.data;
    if (spec.repetitions < 1) {
        throw std::invalid_argument("repetitions must be at least 1");
    }
    if (spec.k < 1 || spec.k > ds.n()) {
        throw std::invalid_argument("k=" + std::to_string(spec.k) + " must lie in [1, " + std::to_string(ds.n()) +
                                    "]");
    }
    spec.qmts.validate();

    RunReport report;
    report.dataset = ds.name();
    report.n = ds.n();
    report.d = ds.d();
    report.k = spec.k;
    report.repetitions = spec.repetitions;
    report.base_seed = spec.base_seed;
    report.it_max = spec.qmts.it_max;
    report.r_max = spec.qmts.r_max;
    report.refinement = std::string(to_string(spec.qmts.refinement));

    const std::size_t tasks = spec.algorithms.size() * spec.repetitions;
    report.runs.resize(tasks);

    auto work = [&](std::size_t t) {
        const Algorithm algo = spec.algorithms[t / spec.repetitions];
        const std::size_t rep = t % spec.repetitions;
        auto rec = run_once(ds, spec.k, algo, spec.base_seed + rep, spec.lloyd, spec.qmts);
        rec.repetition = rep;
        report.runs[t] = std::move(rec);
    };

    const std::size_t threads = std::max<std::size_t>(1, std::min(spec.threads, tasks));
    if (threads == 1) {
        for (std::size_t t = 0; t < tasks; ++t) {
            work(t);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(threads);
        {
            std::vector<std::jthread> pool;
            for (std::size_t w = 0; w < threads; ++w) {
                pool.emplace_back([&, w] {
                    try {
                        for (std::size_t t = next++; t < tasks; t = next++) {
                            work(t);
                        }
                    } catch (...) {
                        errors[w] = std::current_exception();
                    }
                });
            }
        }
        for (const auto& e : errors) {
            if (e) {
                std::rethrow_exception(e);
            }
        }
    }

    report.summaries = summarize(report.runs);
    return report;
}

enum class ReportFormat { json, csv, markdown };

inline ReportFormat parse_report_format(std::string_view s) {
    if (s == "json") return ReportFormat::json;
    if (s == "csv") return ReportFormat::csv;
    if (s == "md" || s == "markdown") return ReportFormat::markdown;
    throw std::invalid_argument("unknown report format '" + std::string(s) + "'");
}

struct EmitOptions {
    /// Drop wall-time fields, e.g. to compare reports across runs.
    bool include_timing = true;
};

inline nlohmann::ordered_json to_json(const RunReport& r, const EmitOptions& opt = {}) {
    nlohmann::ordered_json doc;
    doc["dataset"] = r.dataset;
    doc["n"] = r.n;
    doc["d"] = r.d;
    doc["k"] = r.k;
    doc["repetitions"] = r.repetitions;
    doc["base_seed"] = r.base_seed;
    doc["it_max"] = r.it_max;
    doc["r_max"] = r.r_max;
    doc["refinement"] = r.refinement;

    auto runs = nlohmann::ordered_json::array();
    for (const auto& rec : r.runs) {
        nlohmann::ordered_json j;
        j["algorithm"] = rec.algorithm;
        j["repetition"] = rec.repetition;
        j["seed"] = rec.seed;
        j["j"] = rec.j;
        if (opt.include_timing) {
            j["wall_time_s"] = rec.wall_time_s;
        }
        j["iterations"] = rec.iterations;
        runs.push_back(std::move(j));
    }
    doc["runs"] = std::move(runs);

    auto sums = nlohmann::ordered_json::array();
    for (const auto& s : r.summaries) {
        nlohmann::ordered_json j;
        j["algorithm"] = s.algorithm;
        j["runs"] = s.runs;
        j["worst_j"] = s.worst_j;
        j["average_j"] = s.average_j;
        j["best_j"] = s.best_j;
        if (opt.include_timing) {
            j["mean_time_s"] = s.mean_time_s;
        }
        sums.push_back(std::move(j));
    }
    doc["summaries"] = std::move(sums);
    return doc;
}

/// Inverse of `to_json`; missing timing fields read as 0.
inline RunReport report_from_json(const nlohmann::ordered_json& doc) {
    RunReport r;
    r.dataset = doc.at("dataset").get<std::string>();
    r.n = doc.at("n").get<std::size_t>();
    r.d = doc.at("d").get<std::size_t>();
    r.k = doc.at("k").get<std::size_t>();
    r.repetitions = doc.at("repetitions").get<std::size_t>();
    r.base_seed = doc.at("base_seed").get<std::uint64_t>();
    r.it_max = doc.at("it_max").get<std::size_t>();
    r.r_max = doc.at("r_max").get<std::size_t>();
    r.refinement = doc.at("refinement").get<std::string>();
    for (const auto& j : doc.at("runs")) {
        RunRecord rec;
        rec.algorithm = j.at("algorithm").get<std::string>();
        rec.repetition = j.at("repetition").get<std::size_t>();
        rec.seed = j.at("seed").get<std::uint64_t>();
        rec.j = j.at("j").get<double>();
        rec.wall_time_s = j.value("wall_time_s", 0.0);
        rec.iterations = j.at("iterations").get<std::size_t>();
        r.runs.push_back(std::move(rec));
    }
    for (const auto& j : doc.at("summaries")) {
        AlgorithmSummary s;
        s.algorithm = j.at("algorithm").get<std::string>();
        s.runs = j.at("runs").get<std::size_t>();
        s.worst_j = j.at("worst_j").get<double>();
        s.average_j = j.at("average_j").get<double>();
        s.best_j = j.at("best_j").get<double>();
        s.mean_time_s = j.value("mean_time_s", 0.0);
        r.summaries.push_back(std::move(s));
    }
    return r;
}

namespace detail {

inline std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

} // namespace detail

/**
 * Renders a report.
 *
 * - json: every field, lossless; parse + re-emit reproduces the bytes.
 * - csv: one line per repetition, a blank line, then one line per algorithm.
 * - markdown: one table row per algorithm with worst/average/best J and mean time.
 */
inline std::string emit_report(const RunReport& report, ReportFormat format, const EmitOptions& opt = {}) {
    std::ostringstream out;
    switch (format) {
    case ReportFormat::json:
        out << to_json(report, opt).dump(2) << '\n';
        break;

    case ReportFormat::csv:
        out << "algorithm,repetition,seed,j,iterations" << (opt.include_timing ? ",wall_time_s" : "") << '\n';
        for (const auto& r : report.runs) {
            out << r.algorithm << ',' << r.repetition << ',' << r.seed << ',' << detail::format_real(r.j) << ','
                << r.iterations;
            if (opt.include_timing) {
                out << ',' << detail::format_real(r.wall_time_s);
            }
            out << '\n';
        }
        out << '\n' << "algorithm,runs,worst_j,average_j,best_j" << (opt.include_timing ? ",mean_time_s" : "") << '\n';
        for (const auto& s : report.summaries) {
            out << s.algorithm << ',' << s.runs << ',' << detail::format_real(s.worst_j) << ','
                << detail::format_real(s.average_j) << ',' << detail::format_real(s.best_j);
            if (opt.include_timing) {
                out << ',' << detail::format_real(s.mean_time_s);
            }
            out << '\n';
        }
        break;

    case ReportFormat::markdown:
        out << "**" << report.dataset << "**: N=" << report.n << ", K=" << report.k << ", d=" << report.d << ", "
            << report.repetitions << " repetitions\n\n";
        out << "| Algorithm | Worst J | Average J | Best J | Time (s) |\n";
        out << "|---|---:|---:|---:|---:|\n";
        for (const auto& s : report.summaries) {
            out << "| " << s.algorithm << " | " << detail::fixed(s.worst_j, 2) << " | "
                << detail::fixed(s.average_j, 2) << " | " << detail::fixed(s.best_j, 2) << " | "
                << (opt.include_timing ? detail::fixed(s.mean_time_s, 4) : std::string("-")) << " |\n";
        }
        break;
    }
    return out.str();
}

} // namespace tabuclust

#endif
