#include "ctp/obstacle_field.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

#include <gtest/gtest.h>

#include "ctp/math.hpp"

namespace ctp {
namespace {

TEST(DistanceToSegment, PerpendicularFoot) {
    // Closest point interior to the segment.
    EXPECT_DOUBLE_EQ(distance_to_segment({1.0, 3.0, 0.0}, {0.0, 0.0, 0.0}, {4.0, 0.0, 0.0}), 3.0);
}

TEST(DistanceToSegment, ClampsToEndpoints) {
    EXPECT_DOUBLE_EQ(distance_to_segment({-3.0, 4.0, 0.0}, {0.0, 0.0, 0.0}, {4.0, 0.0, 0.0}), 5.0);
    EXPECT_DOUBLE_EQ(distance_to_segment({7.0, 4.0, 0.0}, {0.0, 0.0, 0.0}, {4.0, 0.0, 0.0}), 5.0);
}

TEST(DistanceToSegment, OnSegmentIsZero) {
    EXPECT_DOUBLE_EQ(distance_to_segment({2.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, {4.0, 0.0, 0.0}), 0.0);
}

TEST(DistanceToSegment, DegenerateSegmentIsPointDistance) {
    const Vec3 p{1.0, 1.0, 1.0};
    EXPECT_DOUBLE_EQ(distance_to_segment({2.0, 2.0, 2.0}, p, p), std::sqrt(3.0));
}

TEST(CapsuleContains, BoundaryAndInterior) {
    const Capsule c{{0.0, 0.0, 0.0}, {2.0, 0.0, 0.0}, 1.0};
    EXPECT_TRUE(capsule_contains(c, {1.0, 0.5, 0.0}));
    EXPECT_TRUE(capsule_contains(c, {-0.5, 0.0, 0.0}));   // cap around p0
    EXPECT_TRUE(capsule_contains(c, {2.9, 0.0, 0.0}));    // cap around p1
    EXPECT_FALSE(capsule_contains(c, {1.0, 1.5, 0.0}));
    EXPECT_FALSE(capsule_contains(c, {3.1, 0.0, 0.0}));
}

FieldParams test_params(uint64_t seed, double cell_side = 1.0) {
    FieldParams p;
    p.seed = seed;
    p.cell_side = cell_side;
    p.dist = VolumeDistribution::uniform(0.5, 1.5);
    p.intensity = 1.0;
    return p;
}

TEST(MaterializeCell, PureAndDeterministic) {
    const auto params = test_params(99);
    const CellIndex cell{3, -7, 11};
    const auto a = materialize_cell(params, cell);
    const auto b = materialize_cell(params, cell);
    ASSERT_EQ(a.size(), b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].id, b[i].id);
        EXPECT_EQ(a[i].pos, b[i].pos);
        EXPECT_EQ(a[i].vol, b[i].vol);
    }
}

TEST(MaterializeCell, ObstaclesLieInsideTheirCell) {
    const double side = 2.5;
    const auto params = test_params(7, side);
    for (int64_t cx : {-2, 0, 5}) {
        const CellIndex cell{cx, 1, -3};
        for (const auto& ob : materialize_cell(params, cell)) {
            EXPECT_EQ(ob.id.cell, cell);
            EXPECT_GE(ob.pos[0], cx * side);
            EXPECT_LT(ob.pos[0], (cx + 1) * side);
            EXPECT_GE(ob.pos[1], 1 * side);
            EXPECT_LT(ob.pos[1], 2 * side);
            EXPECT_GE(ob.pos[2], -3 * side);
            EXPECT_LT(ob.pos[2], -2 * side);
            EXPECT_GE(ob.vol, 0.5);
            EXPECT_LE(ob.vol, 1.5);
        }
    }
}

TEST(MaterializeCell, NeighboringCellsAreIndependentOfQueryOrder) {
    // Materializing a cell must not perturb any other cell: the draws are a
    // pure function of (seed, cell).
    const auto params = test_params(2024);
    const CellIndex a{0, 0, 0}, b{1, 0, 0};
    const auto b_alone = materialize_cell(params, b);
    (void)materialize_cell(params, a);
    const auto b_after = materialize_cell(params, b);
    ASSERT_EQ(b_alone.size(), b_after.size());
    for (size_t i = 0; i < b_alone.size(); ++i) {
        EXPECT_EQ(b_alone[i].pos, b_after[i].pos);
        EXPECT_EQ(b_alone[i].vol, b_after[i].vol);
    }
}

TEST(MaterializeCell, PoissonCountStatistics) {
    // Counts over many cells behave like Poisson(intensity * side^3):
    // mean and variance agree within Monte Carlo error.
    const double side = 1.3;
    const double lambda = side * side * side;  // intensity 1
    const auto params = test_params(31, side);
    const int n_cells = 20000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n_cells; ++i) {
        const auto obs = materialize_cell(params, CellIndex{i, 0, 0});
        const double c = static_cast<double>(obs.size());
        s += c;
        s2 += c * c;
    }
    const double mean = s / n_cells;
    const double var = s2 / n_cells - mean * mean;
    const double se_mean = std::sqrt(lambda / n_cells);
    EXPECT_NEAR(mean, lambda, 5.0 * se_mean);
    EXPECT_NEAR(var / lambda, 1.0, 0.05);
}

TEST(MaterializeCell, DifferentSeedsDiffer) {
    const CellIndex cell{0, 0, 0};
    const auto a = materialize_cell(test_params(1), cell);
    const auto b = materialize_cell(test_params(2), cell);
    bool differs = a.size() != b.size();
    for (size_t i = 0; !differs && i < a.size(); ++i)
        differs = a[i].pos != b[i].pos || a[i].vol != b[i].vol;
    EXPECT_TRUE(differs);
}

TEST(PoissonField, QueryReturnsExactlyTheContainedCenters) {
    PoissonField field(test_params(12));
    const Capsule region{{0.2, 0.2, 0.2}, {6.0, 0.4, 0.1}, 1.7};
    const auto got = field.obstacles_in(region);
    for (const auto& ob : got) EXPECT_TRUE(capsule_contains(region, ob.pos));

    // Independently enumerate every cell the capsule can touch and keep the
    // contained centers; the query must agree exactly.
    size_t expect = 0;
    for (int64_t x = -3; x <= 9; ++x)
        for (int64_t y = -3; y <= 3; ++y)
            for (int64_t z = -3; z <= 3; ++z)
                for (const auto& ob : materialize_cell(field.params(), CellIndex{x, y, z}))
                    if (capsule_contains(region, ob.pos)) ++expect;
    EXPECT_EQ(got.size(), expect);
}

TEST(PoissonField, CanonicalOrderIsStableAcrossQueryShapes) {
    PoissonField field(test_params(5));
    const Capsule big{{0.0, 0.0, 0.0}, {4.0, 0.0, 0.0}, 1.2};
    const Capsule small{{1.0, 0.0, 0.0}, {3.0, 0.0, 0.0}, 0.8};
    const auto in_big = field.obstacles_in(big);
    const auto in_small = field.obstacles_in(small);
    ASSERT_FALSE(in_small.empty());
    // The small query's list appears as an ordered subsequence of the big one.
    size_t j = 0;
    for (const auto& ob : in_big) {
        if (j < in_small.size() && ob.id == in_small[j].id) {
            EXPECT_EQ(ob.pos, in_small[j].pos);
            ++j;
        }
    }
    EXPECT_EQ(j, in_small.size());
}

TEST(PoissonField, ConcurrentQueriesAgreeWithSerial) {
    PoissonField serial(test_params(77));
    const Capsule region{{-1.0, -1.0, -1.0}, {5.0, 1.0, 1.0}, 2.0};
    const auto expected = serial.obstacles_in(region);

    PoissonField shared(test_params(77));
    std::vector<std::vector<Obstacle>> results(4);
    {
        std::vector<std::thread> threads;
        for (int t = 0; t < 4; ++t)
            threads.emplace_back([&, t] { results[t] = shared.obstacles_in(region); });
        for (auto& th : threads) th.join();
    }
    for (const auto& r : results) {
        ASSERT_EQ(r.size(), expected.size());
        for (size_t i = 0; i < r.size(); ++i) {
            EXPECT_EQ(r[i].id, expected[i].id);
            EXPECT_EQ(r[i].pos, expected[i].pos);
        }
    }
    EXPECT_GT(shared.cells_materialized(), 0u);
}

TEST(ScriptedField, FromPointsAssignsIdsAndFilters) {
    const auto field = ScriptedField::from_points({{0.0, 0.0, 0.0}, {2.0, 0.0, 0.0}, {9.0, 0.0, 0.0}},
                                                  {1.0, 2.0, 3.0},
                                                  VolumeDistribution::uniform(0.5, 3.5));
    const Capsule region{{-1.0, 0.0, 0.0}, {3.0, 0.0, 0.0}, 0.5};
    const auto got = field.obstacles_in(region);
    ASSERT_EQ(got.size(), 2u);
    EXPECT_EQ(got[0].id.local, 0u);
    EXPECT_EQ(got[1].id.local, 1u);
    EXPECT_DOUBLE_EQ(got[0].vol, 1.0);
    EXPECT_DOUBLE_EQ(got[1].vol, 2.0);
}

TEST(FieldView, ConsumedObstaclesDisappear) {
    const auto field = ScriptedField::from_points({{1.0, 0.0, 0.0}, {2.0, 0.0, 0.0}},
                                                  {1.0, 1.0},
                                                  VolumeDistribution::dirac(1.0));
    FieldView view(&field);
    const Capsule region{{0.0, 0.0, 0.0}, {3.0, 0.0, 0.0}, 0.5};
    ASSERT_EQ(view.unconsumed_in(region).size(), 2u);
    const auto first = view.unconsumed_in(region)[0];
    view.consume(first.id);
    EXPECT_TRUE(view.is_consumed(first.id));
    EXPECT_EQ(view.consumed_count(), 1u);
    const auto rest = view.unconsumed_in(region);
    ASSERT_EQ(rest.size(), 1u);
    EXPECT_NE(rest[0].id, first.id);
}

}  // namespace
}  // namespace ctp
