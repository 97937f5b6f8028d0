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
 * @file circuit.hpp
 * @brief Qubit-level preparation of the entangled game state.
 *
 * For n a power of two each channel index is a log2(n)-bit group; the groups
 * are laid out in user order on n*log2(n) qubits. Qubit 0 is the top line and
 * the most significant bit of the basis index, so for power-of-two n the
 * register index coincides with the qudit index of the same assignment.
 *
 * The top log2(n) qubits double as the control register selecting branch k
 * and as user 0's channel group. Each controlled block F_k flips the bits of k
 * into the remaining n-1 groups and multiplies the branch by a phase.
 */

#pragma once

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qmg/errors.hpp"
#include "qmg/game.hpp"

namespace qmg {

/// 2^24 amplitudes: the n = 8 game register.
inline constexpr unsigned kMaxQubits = 24;

enum class GateKind {
    kRRotation,       ///< (1/sqrt 2) [[1, 1], [-1, 1]]
    kHadamard,
    kPauliX,          ///< X on every target
    kPhase,           ///< diag(1, e^{i angle}) on the target
    kControlledBlock  ///< e^{i angle} times X on every target, when controls match
};

enum class Polarity { kWhite, kBlack };  ///< white requires |0>, black requires |1>

struct Control {
    unsigned qubit = 0;
    Polarity polarity = Polarity::kBlack;
    friend bool operator==(const Control&, const Control&) = default;
};

struct Gate {
    GateKind kind = GateKind::kHadamard;
    std::vector<unsigned> targets;
    std::vector<Control> controls;
    double angle = 0.0;
    friend bool operator==(const Gate&, const Gate&) = default;
};

using Circuit = std::vector<Gate>;

inline std::string_view gate_kind_name(GateKind kind) {
    switch (kind) {
        case GateKind::kRRotation: return "r-rotation";
        case GateKind::kHadamard: return "hadamard";
        case GateKind::kPauliX: return "pauli-x";
        case GateKind::kPhase: return "phase";
        case GateKind::kControlledBlock: return "controlled-block";
    }
    return "?";
}

inline std::optional<GateKind> parse_gate_kind(std::string_view name) {
    for (GateKind k : {GateKind::kRRotation, GateKind::kHadamard, GateKind::kPauliX, GateKind::kPhase,
                       GateKind::kControlledBlock}) {
        if (gate_kind_name(k) == name) {
            return k;
        }
    }
    return std::nullopt;
}

class QubitRegister {
   public:
    explicit QubitRegister(unsigned width) : width_(width) {
        if (width == 0) {
            throw CircuitValidationError("register width must be positive");
        }
        if (width > kMaxQubits) {
            throw ResourceLimitError("register limited to " + std::to_string(kMaxQubits) + " qubits, got " +
                                     std::to_string(width));
        }
        amplitudes_.assign(std::uint64_t{1} << width, Complex{});
        amplitudes_[0] = 1.0;
    }

    [[nodiscard]] unsigned width() const { return width_; }
    [[nodiscard]] std::span<const Complex> amplitudes() const { return amplitudes_; }
    [[nodiscard]] std::span<Complex> amplitudes() { return amplitudes_; }

    /// Bit mask of qubit q inside a basis index (qubit 0 is the most significant bit).
    [[nodiscard]] std::uint64_t mask(unsigned q) const { return std::uint64_t{1} << (width_ - 1 - q); }

    [[nodiscard]] double norm_squared() const {
        double acc = 0.0;
        for (const Complex& a : amplitudes_) {
            acc += std::norm(a);
        }
        return acc;
    }

    void apply(const Gate& gate);

   private:
    unsigned width_;
    std::vector<Complex> amplitudes_;
};

inline void validate_gate(const Gate& gate, unsigned width) {
    auto check = [&](unsigned q) {
        if (q >= width) {
            throw CircuitValidationError(std::string(gate_kind_name(gate.kind)) + ": qubit " + std::to_string(q) +
                                         " outside register of width " + std::to_string(width));
        }
    };
    std::vector<bool> used(width, false);
    for (unsigned t : gate.targets) {
        check(t);
        if (used[t]) {
            throw CircuitValidationError("qubit " + std::to_string(t) + " used twice in one gate");
        }
        used[t] = true;
    }
    for (const Control& c : gate.controls) {
        check(c.qubit);
        if (used[c.qubit]) {
            throw CircuitValidationError("qubit " + std::to_string(c.qubit) + " is both control and target");
        }
        used[c.qubit] = true;
    }
    const bool single = gate.kind == GateKind::kRRotation || gate.kind == GateKind::kHadamard ||
                        gate.kind == GateKind::kPhase;
    if (single && gate.targets.size() != 1) {
        throw CircuitValidationError(std::string(gate_kind_name(gate.kind)) + " takes exactly one target");
    }
}

inline void QubitRegister::apply(const Gate& gate) {
    validate_gate(gate, width_);
    std::uint64_t ctrl_mask = 0;
    std::uint64_t ctrl_value = 0;
    for (const Control& c : gate.controls) {
        ctrl_mask |= mask(c.qubit);
        if (c.polarity == Polarity::kBlack) {
            ctrl_value |= mask(c.qubit);
        }
    }
    const auto dim = static_cast<std::uint64_t>(amplitudes_.size());
    auto active = [&](std::uint64_t i) { return (i & ctrl_mask) == ctrl_value; };

    if (gate.kind == GateKind::kPauliX || gate.kind == GateKind::kControlledBlock) {
        std::uint64_t flip = 0;
        for (unsigned t : gate.targets) {
            flip |= mask(t);
        }
        const Complex phase = gate.kind == GateKind::kControlledBlock ? std::polar(1.0, gate.angle) : Complex(1.0);
        const bool has_phase = phase != Complex(1.0);
        for (std::uint64_t i = 0; i < dim; ++i) {
            if (!active(i)) {
                continue;
            }
            const std::uint64_t j = i ^ flip;
            if (j > i) {
                std::swap(amplitudes_[i], amplitudes_[j]);
                if (has_phase) {
                    amplitudes_[i] *= phase;
                    amplitudes_[j] *= phase;
                }
            } else if (j == i && has_phase) {
                amplitudes_[i] *= phase;
            }
        }
        return;
    }

    // Single-qubit 2x2 matrices [[a, b], [c, d]] in the |0>, |1> basis.
    const double s = 1.0 / std::numbers::sqrt2;
    Complex a, b, c, d;
    switch (gate.kind) {
        case GateKind::kRRotation: a = s, b = s, c = -s, d = s; break;
        case GateKind::kHadamard: a = s, b = s, c = s, d = -s; break;
        case GateKind::kPhase: a = 1.0, b = 0.0, c = 0.0, d = std::polar(1.0, gate.angle); break;
        default: return;
    }
    const std::uint64_t bit = mask(gate.targets.front());
    for (std::uint64_t i = 0; i < dim; ++i) {
        if ((i & bit) || !active(i)) {
            continue;
        }
        const Complex lo = amplitudes_[i];
        const Complex hi = amplitudes_[i | bit];
        amplitudes_[i] = a * lo + b * hi;
        amplitudes_[i | bit] = c * lo + d * hi;
    }
}

/// Applies the gates left to right to |0...0>.
inline QubitRegister run_circuit(std::span<const Gate> gates, unsigned width) {
    for (const Gate& g : gates) {
        validate_gate(g, width);
    }
    QubitRegister reg(width);
    for (const Gate& g : gates) {
        reg.apply(g);
    }
    return reg;
}

enum class PreparationVariant { kPaperFigure, kCorrected };

inline bool is_power_of_two(unsigned n) { return n >= 2 && std::has_single_bit(n); }

inline unsigned bits_per_channel(unsigned n) {
    if (!is_power_of_two(n)) {
        throw UnsupportedSizeError("qubit encoding needs n a power of two, got " + std::to_string(n));
    }
    return static_cast<unsigned>(std::countr_zero(n));
}

inline unsigned register_width(unsigned n) { return n * bits_per_channel(n); }

/// Channel indices as log2(n)-bit groups in user order, e.g. (1,1,1,1) -> "01010101".
inline std::string encode_tuple_as_bits(const AssignmentTuple& t) {
    const auto n = static_cast<unsigned>(t.size());
    const unsigned b = bits_per_channel(n);
    std::string out;
    out.reserve(static_cast<std::size_t>(n) * b);
    for (unsigned c : t.channels) {
        if (c >= n) {
            throw IndexError("channel " + std::to_string(c) + " out of range");
        }
        for (unsigned i = b; i > 0; --i) {
            out += ((c >> (i - 1)) & 1u) ? '1' : '0';
        }
    }
    return out;
}

inline AssignmentTuple decode_bits_as_tuple(std::string_view bits, unsigned n) {
    const unsigned b = bits_per_channel(n);
    if (bits.size() != static_cast<std::size_t>(n) * b) {
        throw DimensionError("expected " + std::to_string(n * b) + " bits, got " + std::to_string(bits.size()));
    }
    AssignmentTuple t;
    t.channels.assign(n, 0);
    for (unsigned j = 0; j < n; ++j) {
        for (unsigned i = 0; i < b; ++i) {
            const char ch = bits[j * b + i];
            if (ch != '0' && ch != '1') {
                throw ParseError("bitstring may only contain 0 and 1");
            }
            t.channels[j] = (t.channels[j] << 1) | static_cast<unsigned>(ch == '1');
        }
    }
    return t;
}

/**
 * Gate list preparing the entangled state on n*log2(n) qubits.
 *
 * kPaperFigure: R on each control qubit, then Ctrl-F_k for k = 1..n-1. The
 * only branch phases are the signs (-1)^popcount(k) left by R; F_k carries no
 * extra phase. kCorrected: Hadamards on the control qubits, and F_k carries
 * the phase w^(k p), so branch k ends with amplitude w^(k p)/sqrt(n).
 */
inline Circuit build_preparation_circuit(const GameConfig& config, PreparationVariant variant) {
    config.validate();
    const unsigned n = config.n;
    const unsigned b = bits_per_channel(n);
    Circuit gates;
    const GateKind rotation = variant == PreparationVariant::kPaperFigure ? GateKind::kRRotation : GateKind::kHadamard;
    for (unsigned q = 0; q < b; ++q) {
        gates.push_back(Gate{rotation, {q}, {}, 0.0});
    }
    for (unsigned k = 1; k < n; ++k) {
        Gate block{GateKind::kControlledBlock, {}, {}, 0.0};
        for (unsigned i = 0; i < b; ++i) {
            const bool one = (k >> (b - 1 - i)) & 1u;
            block.controls.push_back({i, one ? Polarity::kBlack : Polarity::kWhite});
        }
        for (unsigned user = 1; user < n; ++user) {
            for (unsigned i = 0; i < b; ++i) {
                if ((k >> (b - 1 - i)) & 1u) {
                    block.targets.push_back(user * b + i);
                }
            }
        }
        if (variant == PreparationVariant::kCorrected) {
            const std::uint64_t r = (static_cast<std::uint64_t>(k) * config.p_effective()) % n;
            block.angle = 2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(n);
        }
        gates.push_back(std::move(block));
    }
    return gates;
}

struct AuditReport {
    unsigned n = 0;
    std::uint64_t p = 0;
    PreparationVariant variant = PreparationVariant::kPaperFigure;
    double max_amplitude_deviation = 0.0;
    bool matches = false;
    std::vector<Complex> branch_amplitudes;      ///< circuit amplitude of (k, ..., k)
    std::vector<Complex> per_branch_phase_ratio;  ///< circuit / target, per branch k
};

/// Runs a preparation variant and compares every amplitude with the target state.
inline AuditReport audit_preparation(const GameConfig& config, PreparationVariant variant) {
    const unsigned n = config.n;
    const unsigned width = register_width(n);
    const QubitRegister reg = run_circuit(build_preparation_circuit(config, variant), width);
    const auto amps = reg.amplitudes();
    const std::uint64_t repunit = (amps.size() - 1) / (n - 1);

    AuditReport report;
    report.n = n;
    report.p = config.p;
    report.variant = variant;
    std::vector<Complex> target(n);
    for (unsigned k = 0; k < n; ++k) {
        target[k] = entangled_coefficient(config, k);
    }
    double worst = 0.0;
    for (std::uint64_t i = 0; i < amps.size(); ++i) {
        Complex expected{};
        if (i % repunit == 0) {
            expected = target[i / repunit];
        }
        worst = std::max(worst, std::abs(amps[i] - expected));
    }
    for (unsigned k = 0; k < n; ++k) {
        const Complex got = amps[k * repunit];
        report.branch_amplitudes.push_back(got);
        report.per_branch_phase_ratio.push_back(got / target[k]);
    }
    report.max_amplitude_deviation = worst;
    report.matches = worst < 1e-10;
    return report;
}

inline AuditReport audit_figure_vs_eq2(const GameConfig& config) {
    return audit_preparation(config, PreparationVariant::kPaperFigure);
}

namespace detail {

inline std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return {buf, res.ptr};
}

}  // namespace detail

/**
 * Plain-text gate list, one gate per line:
 *
 *     <kind> controls=<q:white|q:black,...|none> targets=<q,...|none> angle=<radians>
 *
 * preceded by a "# qmg-circuit width=<w>" header.
 */
inline void write_circuit(std::ostream& os, std::span<const Gate> gates, unsigned width) {
    std::ostringstream buf;
    buf << "# qmg-circuit width=" << width << "\n";
    for (const Gate& g : gates) {
        buf << gate_kind_name(g.kind) << " controls=";
        if (g.controls.empty()) {
            buf << "none";
        }
        for (std::size_t i = 0; i < g.controls.size(); ++i) {
            buf << (i ? "," : "") << g.controls[i].qubit << ':'
                << (g.controls[i].polarity == Polarity::kBlack ? "black" : "white");
        }
        buf << " targets=";
        if (g.targets.empty()) {
            buf << "none";
        }
        for (std::size_t i = 0; i < g.targets.size(); ++i) {
            buf << (i ? "," : "") << g.targets[i];
        }
        buf << " angle=" << detail::format_double(g.angle) << "\n";
    }
    os << buf.str();
}

struct ParsedCircuit {
    unsigned width = 0;
    Circuit gates;
};

inline ParsedCircuit read_circuit(std::istream& is) {
    ParsedCircuit out;
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& what) {
        throw ParseError("circuit line " + std::to_string(line_no) + ": " + what);
    };
    auto parse_uint = [&](std::string_view s) {
        unsigned v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size()) {
            fail("bad integer '" + std::string(s) + "'");
        }
        return v;
    };
    auto split = [](std::string_view s, char sep) {
        std::vector<std::string_view> parts;
        std::size_t start = 0;
        while (true) {
            const auto pos = s.find(sep, start);
            parts.push_back(s.substr(start, pos - start));
            if (pos == std::string_view::npos) break;
            start = pos + 1;
        }
        return parts;
    };
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line.rfind("# qmg-circuit width=", 0) == 0) {
            out.width = parse_uint(std::string_view(line).substr(20));
            continue;
        }
        if (line[0] == '#') continue;
        const auto fields = split(line, ' ');
        if (fields.size() != 4) fail("expected 4 fields");
        auto kind = parse_gate_kind(fields[0]);
        if (!kind) fail("unknown gate kind '" + std::string(fields[0]) + "'");
        Gate g{*kind, {}, {}, 0.0};
        auto value_of = [&](std::string_view field, std::string_view key) {
            if (field.substr(0, key.size()) != key) fail("expected " + std::string(key));
            return field.substr(key.size());
        };
        const auto controls = value_of(fields[1], "controls=");
        if (controls != "none") {
            for (auto item : split(controls, ',')) {
                const auto colon = item.find(':');
                if (colon == std::string_view::npos) fail("control needs qubit:polarity");
                const auto pol = item.substr(colon + 1);
                if (pol != "white" && pol != "black") fail("polarity must be white or black");
                g.controls.push_back({parse_uint(item.substr(0, colon)),
                                      pol == "black" ? Polarity::kBlack : Polarity::kWhite});
            }
        }
        const auto targets = value_of(fields[2], "targets=");
        if (targets != "none") {
            for (auto item : split(targets, ',')) g.targets.push_back(parse_uint(item));
        }
        const auto angle = value_of(fields[3], "angle=");
        auto [ptr, ec] = std::from_chars(angle.data(), angle.data() + angle.size(), g.angle);
        if (ec != std::errc{} || ptr != angle.data() + angle.size()) fail("bad angle");
        out.gates.push_back(std::move(g));
    }
    return out;
}

}  // namespace qmg
