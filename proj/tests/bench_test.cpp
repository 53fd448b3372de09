#include <regex>
#include <sstream>

#include <gtest/gtest.h>

#include "tabuclust/bench.hpp"

using namespace tabuclust;

namespace {

ExperimentSpec small_spec(std::vector<Algorithm> algos, std::size_t reps) {
    ExperimentSpec spec;
    spec.data = std::make_shared<const Dataset>(synth_gaussian_mixture(3, 20, 2, 4.0, 3).first);
    spec.k = 3;
    spec.algorithms = std::move(algos);
    spec.repetitions = reps;
    spec.base_seed = 1000;
    spec.qmts.it_max = 40;
    spec.qmts.r_max = 10;
    return spec;
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

const std::vector<Algorithm> all_algos{Algorithm::lloyd_random, Algorithm::lloyd_kmeanspp, Algorithm::qmts};

} // namespace

TEST(Bench, SingleRepetitionAggregates) {
    const auto report = run_experiment(small_spec({Algorithm::qmts}, 1));
    ASSERT_EQ(report.summaries.size(), 1u);
    const auto& s = report.summaries[0];
    EXPECT_EQ(s.worst_j, report.runs[0].j);
    EXPECT_EQ(s.average_j, report.runs[0].j);
    EXPECT_EQ(s.best_j, report.runs[0].j);
}

TEST(Bench, SeedsAndOrdering) {
    const auto report = run_experiment(small_spec(all_algos, 4));
    ASSERT_EQ(report.runs.size(), 12u);
    for (std::size_t t = 0; t < 12; ++t) {
        EXPECT_EQ(report.runs[t].algorithm, to_string(all_algos[t / 4]));
        EXPECT_EQ(report.runs[t].repetition, t % 4);
        EXPECT_EQ(report.runs[t].seed, 1000 + t % 4);
        EXPECT_GT(report.runs[t].wall_time_s, 0.0);
    }
    for (const auto& s : report.summaries) {
        EXPECT_GE(s.worst_j, s.average_j);
        EXPECT_GE(s.average_j, s.best_j);
    }
    EXPECT_EQ(summarize(report.runs), report.summaries);
}

TEST(Bench, DeterministicAcrossRunsAndThreads) {
    auto spec = small_spec(all_algos, 6);
    const auto a = run_experiment(spec);
    spec.threads = 4;
    const auto b = run_experiment(spec);
    ASSERT_EQ(a.runs.size(), b.runs.size());
    for (std::size_t i = 0; i < a.runs.size(); ++i) {
        EXPECT_EQ(a.runs[i].j, b.runs[i].j);
        EXPECT_EQ(a.runs[i].iterations, b.runs[i].iterations);
    }
    const EmitOptions no_time{false};
    EXPECT_EQ(emit_report(a, ReportFormat::json, no_time), emit_report(b, ReportFormat::json, no_time));
}

TEST(Bench, RejectsBadSpecs) {
    EXPECT_THROW(parse_algorithm("tsc"), std::invalid_argument);
    auto spec = small_spec({Algorithm::qmts}, 1);
    spec.k = 61;
    EXPECT_THROW(run_experiment(spec), std::invalid_argument);
    spec = small_spec({Algorithm::qmts}, 0);
    EXPECT_THROW(run_experiment(spec), std::invalid_argument);
    spec = small_spec({Algorithm::qmts}, 1);
    spec.data.reset();
    EXPECT_THROW(run_experiment(spec), std::invalid_argument);
    EXPECT_THROW(parse_report_format("xml"), std::invalid_argument);
}

TEST(Emit, EmptyAlgorithmList) {
    const auto report = run_experiment(small_spec({}, 3));
    EXPECT_TRUE(report.runs.empty());
    EXPECT_TRUE(report.summaries.empty());
    const auto json = nlohmann::json::parse(emit_report(report, ReportFormat::json));
    EXPECT_TRUE(json["runs"].empty());
    const auto md = lines(emit_report(report, ReportFormat::markdown));
    EXPECT_EQ(md.back().rfind("|---", 0), 0u);
    const auto csv = lines(emit_report(report, ReportFormat::csv));
    EXPECT_EQ(csv.size(), 3u);
}

TEST(Emit, JsonRoundTripIsByteIdentical) {
    const auto report = run_experiment(small_spec(all_algos, 3));
    const auto text = emit_report(report, ReportFormat::json);
    const auto back = report_from_json(nlohmann::ordered_json::parse(text));
    EXPECT_EQ(back, report);
    EXPECT_EQ(emit_report(back, ReportFormat::json), text);
}

TEST(Emit, MarkdownTableShape) {
    const auto report = run_experiment(small_spec({Algorithm::lloyd_random, Algorithm::qmts}, 2));
    const auto md = lines(emit_report(report, ReportFormat::markdown));
    const std::regex row(R"(\| [a-z+-]+ \| [0-9.]+ \| [0-9.]+ \| [0-9.]+ \| [0-9.]+ \|)");
    int data_rows = 0;
    for (const auto& l : md) {
        if (std::regex_match(l, row)) ++data_rows;
    }
    EXPECT_EQ(data_rows, 2);
    EXPECT_NE(md.front().find("N=60, K=3, d=2"), std::string::npos);
}

TEST(Emit, CsvHasRunAndAggregateBlocks) {
    const auto report = run_experiment(small_spec({Algorithm::qmts}, 3));
    const auto csv = lines(emit_report(report, ReportFormat::csv));
    ASSERT_EQ(csv.size(), 1u + 3u + 1u + 1u + 1u);
    EXPECT_EQ(csv[0], "algorithm,repetition,seed,j,iterations,wall_time_s");
    EXPECT_EQ(csv[1].rfind("qmts,0,1000,", 0), 0u);
    EXPECT_TRUE(csv[4].empty());
    EXPECT_EQ(csv[5], "algorithm,runs,worst_j,average_j,best_j,mean_time_s");
    EXPECT_EQ(csv[6].rfind("qmts,3,", 0), 0u);
}
