#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tabuclust/qmts.hpp"
#include "tabuclust/registry.hpp"

using namespace tabuclust;

namespace {

Dataset column(std::vector<double> v) {
    const auto n = v.size();
    return Dataset(std::move(v), n, 1);
}

std::vector<double> pt(double x) { return {x}; }

SearchState state_for(const Dataset& ds, std::vector<std::size_t> rows) {
    SearchState s;
    s.current = CenterSet::quantized(ds, std::move(rows));
    s.assignment = assign(ds, s.current);
    s.j_current = icss(ds, s.current, s.assignment);
    s.best = s.current;
    s.j_best = s.j_current;
    return s;
}

} // namespace

TEST(DeltaJ, ZeroStep) {
    const auto ds = column({0, 1, 2});
    const std::vector<std::size_t> members{0, 1, 2};
    EXPECT_EQ(delta_j(ds, members, pt(1), pt(1)), 0.0);
    EXPECT_EQ(delta_j(ds, {}, pt(1), pt(5)), 0.0);
}

TEST(DeltaJ, MatchesSwapCostOnHandExamples) {
    const auto ds = column({0, 1, 2});
    const std::vector<std::size_t> members{0, 1, 2};

    // Oracle: 5 - 2 = 3; per-term (-1) + (1) + (3).
    const double oracle_a = oracle::swap_cost(ds, members, pt(1), pt(0));
    EXPECT_EQ(oracle_a, 3.0);
    EXPECT_EQ(delta_j(ds, members, pt(1), pt(0)), oracle_a);

    // Oracle: (1 + 0 + 1) - (0 + 1 + 4) = -3.
    const double oracle_b = oracle::swap_cost(ds, members, pt(0), pt(1));
    EXPECT_EQ(oracle_b, -3.0);
    EXPECT_EQ(delta_j(ds, members, pt(0), pt(1)), oracle_b);
}

TEST(DeltaJ, DimensionMismatch) {
    const auto ds = Dataset::from_rows({{0, 0}, {1, 1}});
    EXPECT_THROW(delta_j(ds, std::vector<std::size_t>{0}, pt(0), pt(1)), std::invalid_argument);
}

TEST(DeltaJ, FastPathAgreesWithTermSum) {
    std::mt19937_64 rng(5);
    for (std::uint64_t s = 0; s < 200; ++s) {
        const std::size_t d = 1 + s % 5;
        const auto ds = oracle::random_dataset(40, d, s, 30.0);
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < ds.n(); ++i) {
            if (rng() % 2) members.push_back(i);
        }
        const auto mu = ds.row(rng() % ds.n());
        const ClusterDelta fast(ds, members, mu);
        for (std::size_t i = 0; i < ds.n(); i += 3) {
            const double slow = delta_j(ds, members, mu, ds.row(i));
            ASSERT_NEAR(fast(ds.row(i)), slow, 1e-9 * std::max(1.0, std::abs(slow)));
        }
    }
}

TEST(TabuList, PushEvictAndCapacity) {
    TabuList t(2, 10);
    EXPECT_TRUE(t.push(0, 3));
    EXPECT_FALSE(t.push(0, 3));
    EXPECT_TRUE(t.push(0, 5));
    EXPECT_TRUE(t.contains(0, 3));
    EXPECT_FALSE(t.contains(1, 3));
    EXPECT_EQ(t.evict_last(0), std::optional<std::size_t>(5));
    EXPECT_FALSE(t.contains(0, 5));
    EXPECT_EQ(t.evict_last(1), std::nullopt);

    TabuList capped(1, 10, 2);
    capped.push(0, 1);
    capped.push(0, 2);
    capped.push(0, 3);
    EXPECT_EQ(capped.row(0).size(), 2u);
    EXPECT_FALSE(capped.contains(0, 1));
    EXPECT_TRUE(capped.contains(0, 3));
}

TEST(SelectNeighbor, SingletonCluster) {
    const auto ds = column({4, 9});
    TabuList t(1, 2);
    const std::vector<std::size_t> members{1};
    const auto sel = select_neighbor_component(ds, 0, members, pt(9), t);
    ASSERT_TRUE(sel);
    EXPECT_EQ(sel->row, 1u);
    EXPECT_EQ(sel->evictions, 0u);
}

TEST(SelectNeighbor, MinimalDeltaAndTabuTieBreak) {
    // Values 2, 0, 1 at rows 0, 1, 2; center at 0.
    const auto ds = column({2, 0, 1});
    const std::vector<std::size_t> members{0, 1, 2};
    const auto mu = pt(0);

    // Oracle enumeration: candidate 0 -> 0, candidate 1 -> -3, candidate 2 -> 0.
    EXPECT_EQ(oracle::swap_cost(ds, members, mu, pt(0)), 0.0);
    EXPECT_EQ(oracle::swap_cost(ds, members, mu, pt(1)), -3.0);
    EXPECT_EQ(oracle::swap_cost(ds, members, mu, pt(2)), 0.0);

    TabuList t(1, 3);
    auto sel = select_neighbor_component(ds, 0, members, mu, t);
    ASSERT_TRUE(sel);
    EXPECT_EQ(sel->row, 2u);
    EXPECT_EQ(sel->delta, -3.0);

    t.push(0, 2);
    sel = select_neighbor_component(ds, 0, members, mu, t);
    ASSERT_TRUE(sel);
    EXPECT_EQ(sel->row, 0u) << "tie between rows 0 and 1 goes to the lower row";
    EXPECT_EQ(sel->delta, 0.0);
}

TEST(SelectNeighbor, EvictsWhenWholeClusterTabu) {
    const auto ds = column({0, 1, 2, 50});
    const std::vector<std::size_t> members{0, 1, 2};
    TabuList t(1, 4);
    t.push(0, 1);
    t.push(0, 3);
    t.push(0, 0);
    t.push(0, 2);
    const auto sel = select_neighbor_component(ds, 0, members, pt(1), t);
    ASSERT_TRUE(sel);
    EXPECT_EQ(sel->evictions, 1u);
    EXPECT_EQ(sel->row, 2u);
    EXPECT_EQ(t.row(0).size(), 3u);

    // Most recent entries go first until a member is free.
    TabuList u(1, 4);
    u.push(0, 0);
    u.push(0, 1);
    u.push(0, 2);
    u.push(0, 3);
    const auto sel2 = select_neighbor_component(ds, 0, members, pt(1), u);
    EXPECT_EQ(sel2->evictions, 2u);
    EXPECT_EQ(sel2->row, 2u);
}

TEST(SelectNeighbor, EmptyCluster) {
    const auto ds = column({0, 1});
    TabuList t(1, 2);
    EXPECT_FALSE(select_neighbor_component(ds, 0, {}, pt(0), t));
}

TEST(BuildNeighbor, SingletonsStayPut) {
    const auto ds = column({0, 5, 9});
    auto s = state_for(ds, {2, 0, 1});
    TabuList t(3, 3);
    EXPECT_EQ(build_neighbor(ds, s, t), s.current);
}

TEST(BuildNeighbor, TwoClusterFixture) {
    const auto ds = column({0, 1, 2, 10, 11, 12});
    auto s = state_for(ds, {0, 3});
    TabuList t(2, 6);
    QmtsTrace tr;
    const auto next = build_neighbor(ds, s, t, &tr);
    EXPECT_EQ(next.rows(), (std::vector<std::size_t>{1, 4}));

    // With the current centers tabu they are never proposed again.
    auto s2 = state_for(ds, {1, 4});
    TabuList t2(2, 6);
    t2.push(0, 1);
    t2.push(1, 4);
    for (int rep = 0; rep < 3; ++rep) {
        const auto m = build_neighbor(ds, s2, t2, &tr);
        EXPECT_NE(m.rows()[0], 1u);
        EXPECT_NE(m.rows()[1], 4u);
    }
    EXPECT_EQ(tr.tabu_violations, 0u);
}

TEST(BuildNeighbor, ReseedsEmptyClusterWithFarthestPoint) {
    // Rows 0 and 1 coincide, so cluster 1 is empty under the tie-break.
    const auto ds = column({0, 0, 1, 7});
    auto s = state_for(ds, {0, 1});
    ASSERT_EQ(s.assignment.counts()[1], 0u);
    TabuList t(2, 4);
    QmtsTrace tr;
    const auto m = build_neighbor(ds, s, t, &tr);
    EXPECT_EQ(tr.repairs, 1u);
    EXPECT_EQ(m.rows()[1], 3u);
    EXPECT_NE(m.rows()[0], m.rows()[1]);
}

TEST(Refine, CentroidStep) {
    const auto ds = column({0, 2});
    const auto best = CenterSet::quantized(ds, {0});
    EXPECT_EQ(icss(ds, best, assign(ds, best)), 4.0);
    const auto res = refine(ds, best, Refinement::centroid_step);
    EXPECT_EQ(res.centers.center(0)[0], 1.0);
    EXPECT_EQ(res.j, 2.0);
    EXPECT_FALSE(res.centers.is_quantized());
}

TEST(Refine, FixedPointUnchanged) {
    const auto ds = column({0, 1, 2, 10, 11, 12});
    const auto best = CenterSet::quantized(ds, {1, 4});
    for (auto mode : {Refinement::centroid_step, Refinement::full_kmeans}) {
        const auto res = refine(ds, best, mode);
        EXPECT_EQ(res.assignment, assign(ds, best));
        EXPECT_EQ(res.j, 4.0);
        EXPECT_TRUE(res.converged);
    }
}

TEST(Refine, FullKmeansNeverWorseThanCentroidStep) {
    for (std::uint64_t s = 0; s < 100; ++s) {
        const auto [ds, truth] = synth_gaussian_mixture(4, 15, 2, 2.5, s);
        const auto best = init_random(ds, 4, s);
        const double j0 = icss(ds, best, assign(ds, best));
        const auto one = refine(ds, best, Refinement::centroid_step);
        const auto full = refine(ds, best, Refinement::full_kmeans);
        ASSERT_LE(one.j, j0);
        ASSERT_LE(full.j, one.j) << "seed " << s;
    }
}

TEST(Qmts, ConfigValidation) {
    const auto ds = column({0, 1, 2});
    QmtsConfig cfg;
    cfg.it_max = 10;
    cfg.r_max = 11;
    EXPECT_THROW(qmts_run(ds, 2, cfg), std::invalid_argument);
    cfg.r_max = 0;
    EXPECT_THROW(qmts_run(ds, 2, cfg), std::invalid_argument);
    cfg.r_max = 5;
    EXPECT_THROW(qmts_run(ds, 4, cfg), std::invalid_argument);
    EXPECT_EQ(parse_refinement("centroid"), Refinement::centroid_step);
    EXPECT_THROW(parse_refinement("none"), std::invalid_argument);
}

TEST(Qmts, EveryPointACenter) {
    const auto ds = oracle::random_dataset(6, 2, 1);
    QmtsConfig cfg;
    cfg.it_max = 20;
    cfg.r_max = 5;
    QmtsTrace tr;
    const auto res = qmts_run(ds, 6, cfg, &tr);
    EXPECT_EQ(res.j, 0.0);
    EXPECT_TRUE(tr.cut_out);
    EXPECT_EQ(tr.iterations, 5u);
    EXPECT_GT(tr.evictions, 0u);
}

TEST(Qmts, RecoversWellSeparatedMixture) {
    const auto [ds, truth] = synth_gaussian_mixture(2, 50, 2, 20, 1);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        QmtsConfig cfg;
        cfg.seed = seed;
        const auto res = qmts_run(ds, 2, cfg);
        EXPECT_TRUE(oracle::same_partition(res.assignment.labels(), truth)) << "seed " << seed;
    }
}

TEST(Qmts, SearchInvariants) {
    for (std::uint64_t s = 0; s < 40; ++s) {
        const auto [ds, truth] = synth_gaussian_mixture(3, 20, 2, 3.0, s);
        QmtsConfig cfg;
        cfg.seed = s;
        cfg.it_max = 60;
        cfg.r_max = 15;
        cfg.refinement = s % 2 ? Refinement::centroid_step : Refinement::full_kmeans;
        QmtsTrace tr;
        const auto res = qmts_run(ds, 3, cfg, &tr);

        ASSERT_LE(tr.iterations, cfg.it_max);
        ASSERT_EQ(tr.j_neighbor.size(), tr.iterations);
        double running = tr.j_initial;
        std::size_t stall = 0;
        for (std::size_t i = 0; i < tr.iterations; ++i) {
            if (tr.j_neighbor[i] < running) {
                running = tr.j_neighbor[i];
                stall = 0;
            } else {
                ++stall;
            }
            ASSERT_EQ(tr.j_best_history[i], running);
        }
        EXPECT_EQ(tr.j_best, running);
        EXPECT_EQ(tr.cut_out, stall == cfg.r_max);
        if (!tr.cut_out) {
            EXPECT_EQ(tr.iterations, cfg.it_max);
        }
        EXPECT_EQ(icss(ds, tr.best, assign(ds, tr.best)), tr.j_best);
        EXPECT_LE(res.j, tr.j_best);
        EXPECT_EQ(tr.tabu_violations, 0u);
        EXPECT_EQ(res.j, icss(ds, res.centers, res.assignment));
    }
}

TEST(Qmts, Deterministic) {
    const auto [ds, truth] = synth_gaussian_mixture(3, 30, 3, 2.0, 9);
    QmtsConfig cfg;
    cfg.seed = 77;
    QmtsTrace a, b;
    const auto ra = qmts_run(ds, 3, cfg, &a);
    const auto rb = qmts_run(ds, 3, cfg, &b);
    EXPECT_EQ(ra.centers, rb.centers);
    EXPECT_EQ(ra.assignment, rb.assignment);
    EXPECT_EQ(ra.j, rb.j);
    EXPECT_EQ(a.j_neighbor, b.j_neighbor);
}

TEST(Qmts, IrisTakesWorseningMoves) {
    const auto reg = Registry::load(std::string(TABUCLUST_DATA_DIR) + "/registry.json");
    const auto ds = load_entry(*reg.find("iris"));
    std::size_t worsening = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        QmtsConfig cfg;
        cfg.seed = s;
        QmtsTrace tr;
        qmts_run(ds, 3, cfg, &tr);
        worsening += tr.worsening_moves;
    }
    EXPECT_GT(worsening, 0u);
}
