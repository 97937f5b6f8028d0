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

/**
 * @file mac.hpp
 * @brief Slotted cognitive-radio cell driven by a pluggable channel allocator.
 *
 * Each slot, every channel is independently taken by its primary user with
 * probability primary_activity. With f free channels the allocator plays an
 * f-user game on them; when f < n the f transmitting users are drawn at random
 * and the rest defer. Occupancy and the deferral draw come from environment
 * streams that every policy shares for a given seed; occupancy uses exactly
 * one uniform per channel per slot, so raising the activity only ever turns
 * free channels into busy ones.
 */

#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "qmg/errors.hpp"
#include "qmg/game.hpp"

namespace qmg {

using Rng = std::mt19937_64;

enum class PolicyKind { kClassicalUniform, kQuantumEnhanceOptimum, kQuantumAvoidWorst };

inline constexpr PolicyKind kAllPolicies[] = {PolicyKind::kClassicalUniform, PolicyKind::kQuantumEnhanceOptimum,
                                              PolicyKind::kQuantumAvoidWorst};

inline std::string_view policy_name(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::kClassicalUniform: return "classical-uniform";
        case PolicyKind::kQuantumEnhanceOptimum: return "quantum-enhance-optimum";
        case PolicyKind::kQuantumAvoidWorst: return "quantum-avoid-worst";
    }
    return "?";
}

inline std::optional<PolicyKind> parse_policy(std::string_view name) {
    for (PolicyKind k : kAllPolicies) {
        if (policy_name(k) == name) return k;
    }
    return std::nullopt;
}

/// Game parameters a quantum policy uses for an m-user sub-game.
inline GameConfig policy_game(PolicyKind kind, unsigned m) {
    return kind == PolicyKind::kQuantumEnhanceOptimum ? GameConfig::enhance_optimum(m) : GameConfig::avoid_worst(m);
}

/// Channels (indices into [0, m)) for m users sharing m channels.
template <std::uniform_random_bit_generator G>
AssignmentTuple allocate(PolicyKind kind, unsigned m, G& rng) {
    AssignmentTuple t;
    if (m == 0) return t;
    if (m == 1) {
        t.channels = {0};
        return t;
    }
    if (kind == PolicyKind::kClassicalUniform) {
        std::uniform_int_distribution<unsigned> pick(0, m - 1);
        t.channels.resize(m);
        for (auto& c : t.channels) c = pick(rng);
        return t;
    }
    return sample_outcome(policy_game(kind, m), rng);
}

enum class Topology { kStar, kMeshRounds };

struct CellConfig {
    unsigned n_users = 4;
    unsigned n_channels = 4;
    double primary_activity = 0.0;
    std::uint64_t slots = 1000;
    std::uint64_t seed = 1;
    Topology topology = Topology::kStar;
    /// Ring neighbors each mesh arbiter serves; its group is itself plus the next `mesh_degree` nodes.
    unsigned mesh_degree = 1;
    /// Arbitration rounds per slot; 0 means one per node.
    unsigned mesh_rounds = 0;
    double attempt_cost = 1.0;
    double arbitration_cost = 0.1;

    void validate() const {
        if (n_users < 1) throw InvalidConfigError("n_users must be positive");
        if (n_channels != n_users) {
            throw InvalidConfigError("n_channels must equal n_users (square game), got " +
                                     std::to_string(n_channels) + " vs " + std::to_string(n_users));
        }
        if (!(primary_activity >= 0.0 && primary_activity <= 1.0)) {
            throw InvalidConfigError("primary_activity must lie in [0, 1]");
        }
        if (slots == 0) throw EmptyRunError("a run needs at least one slot");
        if (attempt_cost < 0.0 || arbitration_cost < 0.0) throw InvalidConfigError("costs must be non-negative");
    }
};

/// One allocation round. Deferred users carry kDeferred.
struct SlotRecord {
    static constexpr unsigned kDeferred = std::numeric_limits<unsigned>::max();

    std::uint64_t slot_index = 0;
    unsigned round = 0;
    std::vector<unsigned> free_channels;
    std::vector<unsigned> assignment;  ///< per user: physical channel or kDeferred
    unsigned successes = 0;
    unsigned colliders = 0;
    unsigned blocked = 0;
    bool all_same_event = false;
};

struct MacMetrics {
    std::uint64_t slots = 0;
    std::uint64_t rounds = 0;
    std::uint64_t attempts = 0;
    std::uint64_t successes = 0;
    std::uint64_t colliders = 0;
    std::uint64_t arbitrations = 0;
    std::uint64_t all_distinct_events = 0;
    std::uint64_t all_same_events = 0;

    double throughput = 0.0;         ///< successes per slot
    double collision_rate = 0.0;     ///< colliders / attempts
    double all_distinct_rate = 0.0;  ///< rounds where every user of the round succeeded
    double all_same_rate = 0.0;      ///< rounds where all transmitters picked one channel
    double energy_proxy = 0.0;       ///< cost units per success; infinite when nothing got through

    friend bool operator==(const MacMetrics&, const MacMetrics&) = default;
};

using SlotSink = std::function<void(const SlotRecord&)>;

namespace detail {

/// Independent seeded streams: 0 drives occupancy, 1 picks transmitting subsets,
/// 2 + policy drives allocation.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return Rng(seq);
}

inline std::uint64_t allocator_stream_id(PolicyKind kind) { return 2 + static_cast<std::uint64_t>(kind); }

inline std::vector<unsigned> draw_free_channels(unsigned n_channels, double activity, Rng& env) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<unsigned> free;
    for (unsigned c = 0; c < n_channels; ++c) {
        if (!(u(env) < activity)) free.push_back(c);
    }
    return free;
}

/// First k entries of a random permutation of `items`.
inline std::vector<unsigned> choose_subset(std::vector<unsigned> items, std::size_t k, Rng& env) {
    for (std::size_t i = 0; i < k && i + 1 < items.size(); ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, items.size() - 1);
        std::swap(items[i], items[pick(env)]);
    }
    items.resize(std::min(k, items.size()));
    return items;
}

/// Plays one square sub-game of `players` on `channels` (equal sizes) and scores it.
inline void play_round(PolicyKind policy, const std::vector<unsigned>& players, const std::vector<unsigned>& channels,
                       Rng& alloc, SlotRecord& rec) {
    const auto m = static_cast<unsigned>(players.size());
    const AssignmentTuple local = allocate(policy, m, alloc);
    std::vector<unsigned> load(channels.size(), 0);
    for (unsigned i = 0; i < m; ++i) {
        ++load[local[i]];
        rec.assignment[players[i]] = channels[local[i]];
    }
    for (unsigned i = 0; i < m; ++i) {
        if (load[local[i]] == 1) {
            ++rec.successes;
        } else {
            ++rec.colliders;
        }
    }
    rec.all_same_event = m >= 2 && local.all_same();
}

inline void finish(MacMetrics& m, const CellConfig& config) {
    const auto slots = static_cast<double>(m.slots);
    const auto rounds = static_cast<double>(m.rounds);
    m.throughput = static_cast<double>(m.successes) / slots;
    m.collision_rate = m.attempts ? static_cast<double>(m.colliders) / static_cast<double>(m.attempts) : 0.0;
    m.all_distinct_rate = static_cast<double>(m.all_distinct_events) / rounds;
    m.all_same_rate = static_cast<double>(m.all_same_events) / rounds;
    const double cost = config.attempt_cost * static_cast<double>(m.attempts) +
                        config.arbitration_cost * static_cast<double>(m.arbitrations);
    if (m.successes) {
        m.energy_proxy = cost / static_cast<double>(m.successes);
    } else {
        m.energy_proxy = cost > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
}

}  // namespace detail

/// Star topology: the base station arbitrates one game per slot for the whole cell.
inline MacMetrics run_cell(const CellConfig& config, PolicyKind policy, const SlotSink& sink = {}) {
    config.validate();
    Rng env = detail::make_stream(config.seed, 0);
    Rng pick = detail::make_stream(config.seed, 1);
    Rng alloc = detail::make_stream(config.seed, detail::allocator_stream_id(policy));
    std::vector<unsigned> everyone(config.n_users);
    std::iota(everyone.begin(), everyone.end(), 0u);

    MacMetrics m;
    SlotRecord rec;
    for (std::uint64_t s = 0; s < config.slots; ++s) {
        rec.slot_index = s;
        rec.free_channels = detail::draw_free_channels(config.n_channels, config.primary_activity, env);
        const auto f = rec.free_channels.size();
        const std::vector<unsigned> players = f == config.n_users ? everyone : detail::choose_subset(everyone, f, pick);
        rec.assignment.assign(config.n_users, SlotRecord::kDeferred);
        rec.successes = rec.colliders = 0;
        rec.blocked = config.n_users - static_cast<unsigned>(players.size());
        detail::play_round(policy, players, rec.free_channels, alloc, rec);

        ++m.slots;
        ++m.rounds;
        m.attempts += players.size();
        m.successes += rec.successes;
        m.colliders += rec.colliders;
        m.all_distinct_events += rec.successes == config.n_users;
        m.all_same_events += rec.all_same_event;
        if (sink) sink(rec);
    }
    detail::finish(m, config);
    return m;
}

/**
 * Mesh topology: every slot runs `mesh_rounds` arbitration rounds (default one
 * per node). In round r node r mod n arbitrates for itself and its next
 * `mesh_degree` ring neighbors, playing a square game on the slot's free
 * channels: with more free channels than group members a random subset of the
 * channels is used, with fewer a random subset of the members transmits.
 * All-distinct and all-same rates are per round.
 */
inline MacMetrics run_mesh_rounds(const CellConfig& config, PolicyKind policy, const SlotSink& sink = {}) {
    config.validate();
    if (config.mesh_degree == 0 || config.mesh_degree >= config.n_users) {
        throw InvalidTopologyError("mesh_degree must lie in [1, n_users - 1], got " +
                                   std::to_string(config.mesh_degree));
    }
    Rng env = detail::make_stream(config.seed, 0);
    Rng pick = detail::make_stream(config.seed, 1);
    Rng alloc = detail::make_stream(config.seed, detail::allocator_stream_id(policy));
    const unsigned n = config.n_users;
    const unsigned rounds = config.mesh_rounds ? config.mesh_rounds : n;
    const unsigned group_size = config.mesh_degree + 1;

    MacMetrics m;
    SlotRecord rec;
    for (std::uint64_t s = 0; s < config.slots; ++s) {
        const std::vector<unsigned> free = detail::draw_free_channels(config.n_channels, config.primary_activity, env);
        ++m.slots;
        for (unsigned r = 0; r < rounds; ++r) {
            const unsigned arbiter = r % n;
            std::vector<unsigned> group(group_size);
            for (unsigned i = 0; i < group_size; ++i) group[i] = (arbiter + i) % n;

            rec.slot_index = s;
            rec.round = r;
            rec.free_channels = free;
            std::vector<unsigned> players = group;
            std::vector<unsigned> channels = free;
            if (free.size() >= group_size) {
                if (free.size() > group_size) channels = detail::choose_subset(free, group_size, pick);
            } else {
                players = detail::choose_subset(group, free.size(), pick);
            }
            rec.assignment.assign(n, SlotRecord::kDeferred);
            rec.successes = rec.colliders = 0;
            rec.blocked = group_size - static_cast<unsigned>(players.size());
            detail::play_round(policy, players, channels, alloc, rec);

            ++m.rounds;
            ++m.arbitrations;
            m.attempts += players.size();
            m.successes += rec.successes;
            m.colliders += rec.colliders;
            m.all_distinct_events += rec.successes == group_size;
            m.all_same_events += rec.all_same_event;
            if (sink) sink(rec);
        }
    }
    detail::finish(m, config);
    return m;
}

inline MacMetrics run_topology(const CellConfig& config, PolicyKind policy, const SlotSink& sink = {}) {
    return config.topology == Topology::kStar ? run_cell(config, policy, sink) : run_mesh_rounds(config, policy, sink);
}

struct PolicyResult {
    PolicyKind policy;
    MacMetrics metrics;
};

struct ComparisonTable {
    std::vector<PolicyResult> results;
    std::size_t baseline = 0;  ///< first classical-uniform entry, else entry 0

    /// all_distinct_rate of entry i over the baseline's.
    [[nodiscard]] double all_distinct_ratio(std::size_t i) const {
        return results[i].metrics.all_distinct_rate / results[baseline].metrics.all_distinct_rate;
    }
};

/**
 * Runs each policy on the same environment streams. The
 * allocator stream depends only on the policy kind, so a policy listed twice
 * reproduces its metrics exactly.
 */
inline ComparisonTable compare_policies(const CellConfig& config, const std::vector<PolicyKind>& policies,
                                        const std::function<void(PolicyKind, const SlotRecord&)>& sink = {}) {
    if (policies.size() < 2) throw InvalidConfigError("compare_policies needs at least two policies");
    ComparisonTable table;
    for (PolicyKind p : policies) {
        SlotSink per;
        if (sink) per = [&](const SlotRecord& r) { sink(p, r); };
        table.results.push_back({p, run_topology(config, p, per)});
    }
    for (std::size_t i = 0; i < policies.size(); ++i) {
        if (policies[i] == PolicyKind::kClassicalUniform) {
            table.baseline = i;
            break;
        }
    }
    return table;
}

}  // namespace qmg
