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
 * @file game.hpp
 * @brief Closed-form mathematics of the one-shot quantum minority game.
 *
 * N users share N channels. The arbiter prepares
 *
 *     |psi_e> = 1/sqrt(N) * sum_k w^(k p) |k k ... k>,   w = exp(2 pi i / N)
 *
 * and every user applies the N-point Fourier matrix to their own qudit. The
 * amplitude of the assignment (c_0, ..., c_{N-1}) is then
 *
 *     alpha = (1/sqrt(N))^(N+1) * sum_k w^(k m),         m = p + sum_j c_j
 *
 * which is N^((1-N)/2) when m = 0 (mod N) and zero otherwise. Everything in
 * this header is exact and independent of the dense simulators.
 */

#pragma once

#include <cmath>
#include <complex>
#include <compare>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "qmg/errors.hpp"

namespace qmg {

using Complex = std::complex<double>;

/// Amplitudes smaller than this are treated as destructively cancelled.
inline constexpr double kZeroAmplitude = 1e-12;

/// Largest n served by the exact counting routines (16^16 = 2^64 still fits).
inline constexpr unsigned kMaxClosedFormN = 16;

/// The pair (n, p). p is kept as given and reduced modulo n when used.
struct GameConfig {
    unsigned n = 2;
    std::uint64_t p = 0;

    void validate() const {
        if (n < 2) {
            throw InvalidConfigError("game size n must be >= 2, got " + std::to_string(n));
        }
    }

    [[nodiscard]] unsigned p_effective() const { return static_cast<unsigned>(p % n); }

    /// p = n(n-1)/2: constructive interference on all-distinct assignments.
    static GameConfig enhance_optimum(unsigned n) {
        return GameConfig{n, static_cast<std::uint64_t>(n) * (n - 1) / 2};
    }

    /// p = 1: destructive interference on the all-same assignments.
    static GameConfig avoid_worst(unsigned n) { return GameConfig{n, 1}; }

    friend bool operator==(const GameConfig&, const GameConfig&) = default;
};

/// One outcome of the game; position j holds the channel of user j.
struct AssignmentTuple {
    std::vector<unsigned> channels;

    [[nodiscard]] std::size_t size() const { return channels.size(); }
    unsigned operator[](std::size_t j) const { return channels[j]; }

    [[nodiscard]] bool all_distinct() const {
        std::vector<bool> seen(channels.size(), false);
        for (unsigned c : channels) {
            if (c >= seen.size() || seen[c]) {
                return false;
            }
            seen[c] = true;
        }
        return true;
    }

    [[nodiscard]] bool all_same() const {
        for (unsigned c : channels) {
            if (c != channels.front()) {
                return false;
            }
        }
        return !channels.empty();
    }

    /// "0-1-2-3" form used by the CSV outputs.
    [[nodiscard]] std::string to_string() const {
        std::string out;
        for (std::size_t j = 0; j < channels.size(); ++j) {
            if (j) {
                out += '-';
            }
            out += std::to_string(channels[j]);
        }
        return out;
    }

    friend auto operator<=>(const AssignmentTuple&, const AssignmentTuple&) = default;
    friend bool operator==(const AssignmentTuple&, const AssignmentTuple&) = default;
};

inline void check_tuple(const GameConfig& config, const AssignmentTuple& t) {
    config.validate();
    if (t.size() != config.n) {
        throw DimensionError("assignment has " + std::to_string(t.size()) + " entries, game has " +
                             std::to_string(config.n) + " users");
    }
    for (unsigned c : t.channels) {
        if (c >= config.n) {
            throw IndexError("channel " + std::to_string(c) + " out of range for n=" +
                             std::to_string(config.n));
        }
    }
}

/// exp(2 pi i k / n). The exponent is reduced first so large k keep full precision.
inline Complex omega(unsigned n, std::int64_t k) {
    if (n < 2) {
        throw InvalidConfigError("omega requires n >= 2, got " + std::to_string(n));
    }
    const auto nn = static_cast<std::int64_t>(n);
    const std::int64_t r = ((k % nn) + nn) % nn;
    // Exact values on the axes keep the quarter turns free of rounding.
    if (r == 0) return {1.0, 0.0};
    if (2 * r == nn) return {-1.0, 0.0};
    if (4 * r == nn) return {0.0, 1.0};
    if (4 * r == 3 * nn) return {0.0, -1.0};
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(n);
    return {std::cos(theta), std::sin(theta)};
}

/// Coefficient (1/sqrt(n)) w^(k p) of the constant tuple (k, ..., k) in the prepared state.
inline Complex entangled_coefficient(const GameConfig& config, unsigned k) {
    config.validate();
    if (k >= config.n) {
        throw IndexError("branch " + std::to_string(k) + " out of range for n=" + std::to_string(config.n));
    }
    const std::uint64_t phase = (static_cast<std::uint64_t>(k) * config.p_effective()) % config.n;
    return omega(config.n, static_cast<std::int64_t>(phase)) / std::sqrt(static_cast<double>(config.n));
}

/// Dense row-major n x n matrix acting on a single qudit.
class StrategyMatrix {
   public:
    StrategyMatrix(unsigned n, std::vector<Complex> entries) : n_(n), entries_(std::move(entries)) {
        if (n_ < 1 || entries_.size() != static_cast<std::size_t>(n_) * n_) {
            throw DimensionError("strategy matrix needs n*n entries");
        }
    }

    static StrategyMatrix identity(unsigned n) {
        std::vector<Complex> e(static_cast<std::size_t>(n) * n, Complex{});
        for (unsigned i = 0; i < n; ++i) {
            e[static_cast<std::size_t>(i) * n + i] = 1.0;
        }
        return {n, std::move(e)};
    }

    [[nodiscard]] unsigned n() const { return n_; }
    Complex operator()(unsigned row, unsigned col) const {
        return entries_[static_cast<std::size_t>(row) * n_ + col];
    }
    [[nodiscard]] const std::vector<Complex>& entries() const { return entries_; }

    /// max |(M M^dagger - I)_{rc}|
    [[nodiscard]] double unitarity_defect() const {
        double worst = 0.0;
        for (unsigned r = 0; r < n_; ++r) {
            for (unsigned c = 0; c < n_; ++c) {
                Complex acc{};
                for (unsigned k = 0; k < n_; ++k) {
                    acc += (*this)(r, k) * std::conj((*this)(c, k));
                }
                worst = std::max(worst, std::abs(acc - Complex(r == c ? 1.0 : 0.0)));
            }
        }
        return worst;
    }

   private:
    unsigned n_;
    std::vector<Complex> entries_;
};

/// The n-point Fourier matrix, entry (r, c) = w^(r c) / sqrt(n). Hadamard at n = 2.
inline StrategyMatrix strategy_matrix(unsigned n) {
    if (n < 2) {
        throw InvalidConfigError("strategy matrix requires n >= 2, got " + std::to_string(n));
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    std::vector<Complex> e(static_cast<std::size_t>(n) * n);
    for (unsigned r = 0; r < n; ++r) {
        for (unsigned c = 0; c < n; ++c) {
            e[static_cast<std::size_t>(r) * n + c] = omega(n, static_cast<std::int64_t>(r) * c) * scale;
        }
    }
    return {n, std::move(e)};
}

/// m mod n with m = p + sum_j c_j.
inline unsigned phase_residue(const GameConfig& config, const AssignmentTuple& t) {
    check_tuple(config, t);
    std::uint64_t m = config.p_effective();
    for (unsigned c : t.channels) {
        m += c;
    }
    return static_cast<unsigned>(m % config.n);
}

/// Final amplitude of an assignment, summing the n phase terms explicitly.
inline Complex outcome_amplitude(const GameConfig& config, const AssignmentTuple& t) {
    const unsigned m = phase_residue(config, t);
    Complex sum{};
    for (unsigned k = 0; k < config.n; ++k) {
        sum += omega(config.n, static_cast<std::int64_t>(k) * m);
    }
    return sum * std::pow(1.0 / std::sqrt(static_cast<double>(config.n)), config.n + 1);
}

/// Same amplitude through the residue test: n^((1-n)/2) on the support, zero off it.
inline Complex outcome_amplitude_closed_form(const GameConfig& config, const AssignmentTuple& t) {
    if (phase_residue(config, t) != 0) {
        return {};
    }
    return std::pow(static_cast<double>(config.n), (1.0 - static_cast<double>(config.n)) / 2.0);
}

inline bool support_predicate(const GameConfig& config, const AssignmentTuple& t) {
    return phase_residue(config, t) == 0;
}

/// Exact non-negative rational with 128-bit parts.
struct Fraction {
    unsigned __int128 numerator = 0;
    unsigned __int128 denominator = 1;

    [[nodiscard]] double to_double() const {
        return static_cast<double>(numerator) / static_cast<double>(denominator);
    }
    friend bool operator==(const Fraction& a, const Fraction& b) {
        return a.numerator * b.denominator == b.numerator * a.denominator;
    }
};

namespace detail {

inline unsigned __int128 ipow(unsigned base, unsigned exp) {
    unsigned __int128 r = 1;
    for (unsigned i = 0; i < exp; ++i) {
        r *= base;
    }
    return r;
}

inline unsigned __int128 factorial(unsigned n) {
    unsigned __int128 r = 1;
    for (unsigned i = 2; i <= n; ++i) {
        r *= i;
    }
    return r;
}

inline void check_closed_form_n(unsigned n) {
    if (n < 2 || n > kMaxClosedFormN) {
        throw InvalidConfigError("closed-form probabilities need 2 <= n <= " +
                                 std::to_string(kMaxClosedFormN) + ", got " + std::to_string(n));
    }
}

}  // namespace detail

struct AnalyticProbabilities {
    double p_all_distinct = 0.0;
    double p_all_same = 0.0;
    std::uint64_t support_size = 0;
    double per_outcome_prob = 0.0;
    Fraction all_distinct_exact;
    Fraction all_same_exact;
};

/// Outcome probabilities of the quantum game for the given (n, p).
inline AnalyticProbabilities analytic_probabilities(const GameConfig& config) {
    config.validate();
    const unsigned n = config.n;
    detail::check_closed_form_n(n);
    const unsigned p = config.p_effective();
    const unsigned __int128 support = detail::ipow(n, n - 1);

    // Every permutation sums to n(n-1)/2, every constant tuple to a multiple of n,
    // so each family lies wholly inside or wholly outside the support.
    const std::uint64_t perm_sum = static_cast<std::uint64_t>(n) * (n - 1) / 2;
    const bool perms_supported = (p + perm_sum) % n == 0;
    const bool constants_supported = p == 0;

    AnalyticProbabilities out;
    out.support_size = static_cast<std::uint64_t>(support);
    out.all_distinct_exact = {perms_supported ? detail::factorial(n) : 0, support};
    out.all_same_exact = {constants_supported ? n : 0u, support};
    out.p_all_distinct = out.all_distinct_exact.to_double();
    out.p_all_same = out.all_same_exact.to_double();
    out.per_outcome_prob = 1.0 / static_cast<double>(support);
    return out;
}

struct ClassicalProbabilities {
    double p_all_distinct = 0.0;
    double p_all_same = 0.0;
    Fraction all_distinct_exact;
    Fraction all_same_exact;
};

/// Uniform independent channel choice: n!/n^n distinct, n^(1-n) all-same.
inline ClassicalProbabilities classical_probabilities(unsigned n) {
    detail::check_closed_form_n(n);
    ClassicalProbabilities out;
    out.all_distinct_exact = {detail::factorial(n), detail::ipow(n, n)};
    out.all_same_exact = {n, detail::ipow(n, n)};
    out.p_all_distinct = out.all_distinct_exact.to_double();
    out.p_all_same = out.all_same_exact.to_double();
    return out;
}

/**
 * Draws an assignment from the final-state distribution, which is uniform on
 * the residue class (p + sum c_j) = 0 (mod n). The first n-1 channels are free
 * and the last one is forced, so each support tuple has exactly one preimage.
 */
template <std::uniform_random_bit_generator Rng>
AssignmentTuple sample_outcome(const GameConfig& config, Rng& rng) {
    config.validate();
    const unsigned n = config.n;
    std::uniform_int_distribution<unsigned> pick(0, n - 1);
    AssignmentTuple t;
    t.channels.resize(n);
    std::uint64_t sum = config.p_effective();
    for (unsigned j = 0; j + 1 < n; ++j) {
        t.channels[j] = pick(rng);
        sum += t.channels[j];
    }
    t.channels[n - 1] = static_cast<unsigned>((n - sum % n) % n);
    return t;
}

/// Calls f(tuple) for all n^n assignments in lexicographic order.
template <class F>
void for_each_tuple(unsigned n, F&& f) {
    AssignmentTuple t;
    t.channels.assign(n, 0);
    while (true) {
        f(static_cast<const AssignmentTuple&>(t));
        unsigned j = n;
        while (j > 0) {
            --j;
            if (++t.channels[j] < n) {
                break;
            }
            t.channels[j] = 0;
            if (j == 0) {
                return;
            }
        }
    }
}

}  // namespace qmg
