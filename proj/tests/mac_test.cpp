// Copyright 2026 The qmg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qmg/mac.hpp"

#include "gtest/gtest.h"
#include "test_util.hpp"

using namespace qmg;
using qmg::testing::binomial_sigma;

namespace {

CellConfig cell(unsigned n, double activity, std::uint64_t slots, std::uint64_t seed = 42) {
    CellConfig c;
    c.n_users = c.n_channels = n;
    c.primary_activity = activity;
    c.slots = slots;
    c.seed = seed;
    return c;
}

}  // namespace

TEST(RunCell, TwoUsersQuantumAlwaysSucceed) {
    for (PolicyKind p : {PolicyKind::kQuantumAvoidWorst, PolicyKind::kQuantumEnhanceOptimum}) {
        const auto m = run_cell(cell(2, 0.0, 5000), p);
        EXPECT_EQ(m.all_distinct_rate, 1.0);
        EXPECT_EQ(m.collision_rate, 0.0);
        EXPECT_EQ(m.throughput, 2.0);
        EXPECT_EQ(m.energy_proxy, 1.0);
    }
}

TEST(RunCell, AvoidWorstNeverAllSame) {
    for (unsigned n = 2; n <= 6; ++n) {
        const auto m = run_cell(cell(n, 0.0, 20000), PolicyKind::kQuantumAvoidWorst);
        EXPECT_EQ(m.all_same_events, 0u) << "n=" << n;
    }
}

TEST(RunCell, QuantumAssignmentsStayOnSupport) {
    for (PolicyKind p : {PolicyKind::kQuantumAvoidWorst, PolicyKind::kQuantumEnhanceOptimum}) {
        const GameConfig game = policy_game(p, 5);
        run_cell(cell(5, 0.0, 5000), p, [&](const SlotRecord& r) {
            ASSERT_EQ(r.free_channels.size(), 5u);
            ASSERT_TRUE(support_predicate(game, AssignmentTuple{r.assignment}));
        });
    }
}

TEST(RunCell, ClassicalBaselineMoments) {
    for (unsigned n = 2; n <= 4; ++n) {
        const double slots = 1e6;
        const auto m = run_cell(cell(n, 0.0, static_cast<std::uint64_t>(slots), 100 + n), PolicyKind::kClassicalUniform);
        const auto ref = classical_probabilities(n);
        EXPECT_NEAR(m.all_distinct_rate, ref.p_all_distinct, 3 * binomial_sigma(ref.p_all_distinct, slots));
        EXPECT_NEAR(m.all_same_rate, ref.p_all_same, 3 * binomial_sigma(ref.p_all_same, slots));
    }
}

TEST(RunCell, SlotRecordsAreConsistent) {
    run_cell(cell(6, 0.3, 3000), PolicyKind::kClassicalUniform, [](const SlotRecord& r) {
        unsigned deferred = 0;
        for (unsigned c : r.assignment) deferred += c == SlotRecord::kDeferred;
        EXPECT_EQ(deferred, r.blocked);
        EXPECT_EQ(r.successes + r.colliders + r.blocked, 6u);
        EXPECT_EQ(6u - r.blocked, r.free_channels.size());
        for (unsigned c : r.assignment) {
            if (c == SlotRecord::kDeferred) continue;
            EXPECT_TRUE(std::find(r.free_channels.begin(), r.free_channels.end(), c) != r.free_channels.end());
        }
    });
}

TEST(RunCell, MetricsWithinBounds) {
    for (PolicyKind p : kAllPolicies) {
        const auto m = run_cell(cell(5, 0.4, 20000), p);
        for (double r : {m.collision_rate, m.all_distinct_rate, m.all_same_rate}) {
            EXPECT_GE(r, 0.0);
            EXPECT_LE(r, 1.0);
        }
        EXPECT_GE(m.energy_proxy, 1.0);
    }
}

TEST(RunCell, Deterministic) {
    for (PolicyKind p : kAllPolicies) {
        EXPECT_EQ(run_cell(cell(4, 0.2, 10000, 9), p), run_cell(cell(4, 0.2, 10000, 9), p));
    }
    EXPECT_NE(run_cell(cell(4, 0.2, 10000, 9), PolicyKind::kClassicalUniform),
              run_cell(cell(4, 0.2, 10000, 10), PolicyKind::kClassicalUniform));
}

TEST(RunCell, Errors) {
    EXPECT_THROW(run_cell(cell(4, 0.0, 0), PolicyKind::kClassicalUniform), EmptyRunError);
    auto bad = cell(4, 0.0, 10);
    bad.n_channels = 5;
    EXPECT_THROW(run_cell(bad, PolicyKind::kClassicalUniform), InvalidConfigError);
    EXPECT_THROW(run_cell(cell(4, 1.5, 10), PolicyKind::kClassicalUniform), InvalidConfigError);
}

TEST(RunCell, FullyOccupiedSpectrumSendsNothing) {
    const auto m = run_cell(cell(4, 1.0, 100), PolicyKind::kQuantumAvoidWorst);
    EXPECT_EQ(m.attempts, 0u);
    EXPECT_EQ(m.throughput, 0.0);
    EXPECT_EQ(m.energy_proxy, 0.0);
}

TEST(RunCell, ThroughputMonotoneInActivity) {
    for (PolicyKind p : kAllPolicies) {
        double previous = 1e9;
        for (double activity : {0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
            const double t = run_cell(cell(6, activity, 50000, 5), p).throughput;
            EXPECT_LE(t, previous + 0.01) << policy_name(p) << " activity=" << activity;
            previous = t;
        }
    }
}

TEST(ComparePolicies, EnhancementRatioAtFourUsers) {
    const auto table = compare_policies(cell(4, 0.0, 200000),
                                        {PolicyKind::kClassicalUniform, PolicyKind::kQuantumEnhanceOptimum});
    EXPECT_EQ(table.baseline, 0u);
    EXPECT_NEAR(table.all_distinct_ratio(1), 4.0, 0.15);
}

TEST(ComparePolicies, EightUserClassicalRate) {
    const double slots = 1e6;
    const auto table = compare_policies(cell(8, 0.0, static_cast<std::uint64_t>(slots)),
                                        {PolicyKind::kQuantumEnhanceOptimum, PolicyKind::kClassicalUniform});
    EXPECT_EQ(table.baseline, 1u);
    const double pc = 40320.0 / 16777216.0;
    EXPECT_NEAR(table.results[1].metrics.all_distinct_rate, pc, 3 * binomial_sigma(pc, slots));
}

TEST(ComparePolicies, DuplicatePolicyIdentical) {
    const auto table =
        compare_policies(cell(4, 0.3, 20000), {PolicyKind::kQuantumAvoidWorst, PolicyKind::kQuantumAvoidWorst});
    EXPECT_EQ(table.results[0].metrics, table.results[1].metrics);
}

TEST(ComparePolicies, SharedEnvironment) {
    std::vector<std::vector<unsigned>> seen[3];
    compare_policies(cell(5, 0.4, 500), {kAllPolicies[0], kAllPolicies[1], kAllPolicies[2]},
                     [&](PolicyKind p, const SlotRecord& r) { seen[static_cast<int>(p)].push_back(r.free_channels); });
    EXPECT_EQ(seen[0], seen[1]);
    EXPECT_EQ(seen[0], seen[2]);
}

TEST(ComparePolicies, NeedsTwo) {
    EXPECT_THROW(compare_policies(cell(4, 0.0, 10), {PolicyKind::kClassicalUniform}), InvalidConfigError);
}

TEST(MeshRounds, FullMeshAvoidWorst) {
    auto c = cell(5, 0.0, 20000);
    c.topology = Topology::kMeshRounds;
    c.mesh_degree = 4;
    const auto m = run_mesh_rounds(c, PolicyKind::kQuantumAvoidWorst);
    EXPECT_EQ(m.all_same_events, 0u);
    EXPECT_EQ(m.rounds, 5u * 20000u);
    EXPECT_EQ(m.arbitrations, m.rounds);
}

TEST(MeshRounds, SingleStarRoundMatchesStar) {
    auto c = cell(4, 0.25, 200000, 77);
    c.topology = Topology::kMeshRounds;
    c.mesh_degree = 3;
    c.mesh_rounds = 1;
    for (PolicyKind p : kAllPolicies) {
        const auto mesh = run_mesh_rounds(c, p);
        const auto star = run_cell(c, p);
        // Same streams and same draws: the reduction is exact, not just statistical.
        EXPECT_EQ(mesh.successes, star.successes);
        EXPECT_EQ(mesh.all_distinct_rate, star.all_distinct_rate);
        EXPECT_EQ(mesh.all_same_rate, star.all_same_rate);
        EXPECT_NEAR(mesh.throughput, star.throughput, 1e-12);
        EXPECT_GT(mesh.energy_proxy, star.energy_proxy);
    }
}

TEST(MeshRounds, QuantumUsesLessEnergy) {
    auto c = cell(4, 0.0, 100000);
    c.topology = Topology::kMeshRounds;
    c.mesh_degree = 3;
    const double classical = run_mesh_rounds(c, PolicyKind::kClassicalUniform).energy_proxy;
    EXPECT_LT(run_mesh_rounds(c, PolicyKind::kQuantumEnhanceOptimum).energy_proxy, classical);
    EXPECT_LT(run_mesh_rounds(c, PolicyKind::kQuantumAvoidWorst).energy_proxy, classical);
}

TEST(MeshRounds, PartialDegreeGroups) {
    auto c = cell(6, 0.0, 2000);
    c.topology = Topology::kMeshRounds;
    c.mesh_degree = 2;
    run_mesh_rounds(c, PolicyKind::kQuantumAvoidWorst, [](const SlotRecord& r) {
        EXPECT_EQ(r.successes + r.colliders, 3u);
        EXPECT_FALSE(r.all_same_event);
        // Arbiter and its two clockwise neighbors are the only transmitters.
        for (unsigned u = 0; u < 6; ++u) {
            const bool member = (u + 6 - r.round % 6) % 6 <= 2;
            EXPECT_EQ(r.assignment[u] != SlotRecord::kDeferred, member);
        }
    });
}

TEST(MeshRounds, InvalidDegree) {
    auto c = cell(4, 0.0, 10);
    c.topology = Topology::kMeshRounds;
    c.mesh_degree = 4;
    EXPECT_THROW(run_mesh_rounds(c, PolicyKind::kClassicalUniform), InvalidTopologyError);
    c.mesh_degree = 0;
    EXPECT_THROW(run_mesh_rounds(c, PolicyKind::kClassicalUniform), InvalidTopologyError);
}
