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
 * @file qudit_state.hpp
 * @brief Dense state vector over n qudits of dimension n.
 *
 * Basis index of (c_0, ..., c_{n-1}) is sum_j c_j n^(n-1-j): user 0 is the
 * most significant digit, so indices read like the kets |c_0 c_1 ... c_{n-1}>.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <span>
#include <string>
#include <vector>

#include "qmg/errors.hpp"
#include "qmg/game.hpp"

namespace qmg {

/// n^n amplitudes with n <= 8 is about 270 MB at double precision.
inline constexpr unsigned kMaxQuditN = 8;

inline std::uint64_t qudit_dimension(unsigned n) {
    std::uint64_t d = 1;
    for (unsigned i = 0; i < n; ++i) {
        d *= n;
    }
    return d;
}

inline std::uint64_t tuple_to_index(const AssignmentTuple& t) {
    const auto n = static_cast<std::uint64_t>(t.size());
    std::uint64_t idx = 0;
    for (unsigned c : t.channels) {
        idx = idx * n + c;
    }
    return idx;
}

inline AssignmentTuple index_to_tuple(unsigned n, std::uint64_t index) {
    AssignmentTuple t;
    t.channels.assign(n, 0);
    for (unsigned j = n; j > 0; --j) {
        t.channels[j - 1] = static_cast<unsigned>(index % n);
        index /= n;
    }
    return t;
}

class QuditState {
   public:
    /// |0 0 ... 0>
    explicit QuditState(unsigned n) : n_(n) {
        if (n < 2) {
            throw InvalidConfigError("qudit state requires n >= 2");
        }
        if (n > kMaxQuditN) {
            throw ResourceLimitError("dense qudit state limited to n <= " + std::to_string(kMaxQuditN) +
                                     ", got " + std::to_string(n));
        }
        amplitudes_.assign(qudit_dimension(n), Complex{});
        amplitudes_[0] = 1.0;
    }

    QuditState(unsigned n, std::vector<Complex> amplitudes) : QuditState(n) {
        if (amplitudes.size() != amplitudes_.size()) {
            throw DimensionError("expected " + std::to_string(amplitudes_.size()) + " amplitudes, got " +
                                 std::to_string(amplitudes.size()));
        }
        amplitudes_ = std::move(amplitudes);
    }

    [[nodiscard]] unsigned n() const { return n_; }
    [[nodiscard]] std::uint64_t dimension() const { return amplitudes_.size(); }
    [[nodiscard]] std::span<const Complex> amplitudes() const { return amplitudes_; }
    [[nodiscard]] std::span<Complex> amplitudes() { return amplitudes_; }

    Complex amplitude(const AssignmentTuple& t) const {
        check_tuple(GameConfig{n_, 0}, t);
        return amplitudes_[tuple_to_index(t)];
    }

    [[nodiscard]] double norm_squared() const {
        double acc = 0.0;
        for (const Complex& a : amplitudes_) {
            acc += std::norm(a);
        }
        return acc;
    }

   private:
    unsigned n_;
    std::vector<Complex> amplitudes_;
};

/// (1/sqrt(n)) sum_k w^(k p) |k k ... k>
inline QuditState prepare_entangled(const GameConfig& config) {
    config.validate();
    QuditState state(config.n);
    auto amps = state.amplitudes();
    amps[0] = Complex{};
    // (k, ..., k) sits at k * (1 + n + ... + n^(n-1)).
    const std::uint64_t repunit = (state.dimension() - 1) / (config.n - 1);
    for (unsigned k = 0; k < config.n; ++k) {
        amps[k * repunit] = entangled_coefficient(config, k);
    }
    return state;
}

/// Applies m to one qudit by gathering each fiber of n amplitudes along that site.
inline void apply_site(QuditState& state, const StrategyMatrix& m, unsigned site) {
    const unsigned n = state.n();
    if (m.n() != n) {
        throw DimensionError("strategy matrix is " + std::to_string(m.n()) + "x" + std::to_string(m.n()) +
                             ", state has qudit dimension " + std::to_string(n));
    }
    if (site >= n) {
        throw IndexError("site " + std::to_string(site) + " out of range");
    }
    auto amps = state.amplitudes();
    std::uint64_t stride = 1;
    for (unsigned j = site + 1; j < n; ++j) {
        stride *= n;
    }
    const std::uint64_t block = stride * n;
    std::vector<Complex> in(n);
    for (std::uint64_t outer = 0; outer < amps.size(); outer += block) {
        for (std::uint64_t inner = 0; inner < stride; ++inner) {
            const std::uint64_t base = outer + inner;
            for (unsigned k = 0; k < n; ++k) {
                in[k] = amps[base + k * stride];
            }
            for (unsigned r = 0; r < n; ++r) {
                Complex acc{};
                for (unsigned k = 0; k < n; ++k) {
                    acc += m(r, k) * in[k];
                }
                amps[base + r * stride] = acc;
            }
        }
    }
}

/// m applied to every site, in the given order (default 0, 1, ..., n-1).
inline QuditState apply_local_strategy(QuditState state, const StrategyMatrix& m,
                                       std::span<const unsigned> site_order = {}) {
    if (m.n() != state.n()) {
        throw DimensionError("strategy matrix dimension does not match state");
    }
    if (site_order.empty()) {
        for (unsigned j = 0; j < state.n(); ++j) {
            apply_site(state, m, j);
        }
    } else {
        for (unsigned j : site_order) {
            apply_site(state, m, j);
        }
    }
    return state;
}

/// Entries with probability below this are left out of distributions.
inline constexpr double kDistributionCutoff = 1e-15;

inline std::map<AssignmentTuple, double> distribution(const QuditState& state) {
    std::map<AssignmentTuple, double> out;
    const auto amps = state.amplitudes();
    for (std::uint64_t i = 0; i < amps.size(); ++i) {
        const double prob = std::norm(amps[i]);
        if (prob >= kDistributionCutoff) {
            out.emplace_hint(out.end(), index_to_tuple(state.n(), i), prob);
        }
    }
    return out;
}

namespace detail {

inline void check_normalized(const QuditState& state) {
    const double dev = std::abs(state.norm_squared() - 1.0);
    if (!(dev <= 1e-6)) {
        throw StateIntegrityError("state norm deviates from 1 by " + std::to_string(dev));
    }
}

}  // namespace detail

/// Inverse-CDF sampler over a state's basis, built once for repeated shots.
class OutcomeSampler {
   public:
    explicit OutcomeSampler(const QuditState& state) : n_(state.n()) {
        detail::check_normalized(state);
        const auto amps = state.amplitudes();
        double acc = 0.0;
        for (std::uint64_t i = 0; i < amps.size(); ++i) {
            const double prob = std::norm(amps[i]);
            if (prob > 0.0) {
                acc += prob;
                cumulative_.push_back(acc);
                indices_.push_back(i);
            }
        }
    }

    template <std::uniform_random_bit_generator Rng>
    AssignmentTuple operator()(Rng& rng) const {
        std::uniform_real_distribution<double> u(0.0, cumulative_.back());
        const double x = u(rng);
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), x);
        if (it == cumulative_.end()) {
            --it;
        }
        return index_to_tuple(n_, indices_[static_cast<std::size_t>(it - cumulative_.begin())]);
    }

   private:
    unsigned n_;
    std::vector<double> cumulative_;
    std::vector<std::uint64_t> indices_;
};

template <std::uniform_random_bit_generator Rng>
AssignmentTuple measure(const QuditState& state, Rng& rng) {
    return OutcomeSampler(state)(rng);
}

/// Text dump: "index re im" per line for amplitudes of modulus >= 1e-15.
inline void write_state_dump(std::ostream& os, const QuditState& state) {
    std::ostringstream buf;
    buf.precision(17);
    buf << "# qudit-state n=" << state.n() << "\n";
    const auto amps = state.amplitudes();
    for (std::uint64_t i = 0; i < amps.size(); ++i) {
        if (std::abs(amps[i]) >= kDistributionCutoff) {
            buf << i << ' ' << amps[i].real() << ' ' << amps[i].imag() << '\n';
        }
    }
    os << buf.str();
}

inline QuditState read_state_dump(std::istream& is) {
    std::string header;
    std::getline(is, header);
    const auto pos = header.find("n=");
    if (header.rfind("# qudit-state", 0) != 0 || pos == std::string::npos) {
        throw ParseError("state dump: missing '# qudit-state n=<n>' header");
    }
    const unsigned n = static_cast<unsigned>(std::stoul(header.substr(pos + 2)));
    std::vector<Complex> amps(qudit_dimension(n));
    std::uint64_t idx = 0;
    double re = 0.0;
    double im = 0.0;
    while (is >> idx >> re >> im) {
        if (idx >= amps.size()) {
            throw ParseError("state dump: index " + std::to_string(idx) + " out of range");
        }
        amps[idx] = {re, im};
    }
    return {n, std::move(amps)};
}

}  // namespace qmg
