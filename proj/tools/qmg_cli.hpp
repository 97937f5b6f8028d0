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

// Command-line front end: probs, simulate, audit-circuit, export-circuit, mac.

#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qmg/qmg.hpp"

namespace qmg::cli {

enum ExitCode : int {
    kOk = 0,
    kRuntimeError = 1,
    kUsageError = 2,
    kConfigParseError = 3,
    kResourceLimitError = 4,
};

class UsageError : public Error {
    using Error::Error;
};

using Histogram = std::map<AssignmentTuple, std::uint64_t>;

inline std::string format_double(double x) { return qmg::detail::format_double(x); }

/// Opens `path` for writing, or hands back `fallback` when path is empty or "-".
class OutputTarget {
   public:
    OutputTarget(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
        if (!path.empty() && path != "-") {
            file_.open(path, std::ios::binary);
            if (!file_) throw Error("cannot open '" + path + "' for writing");
            stream_ = &file_;
        }
    }
    std::ostream& operator*() { return *stream_; }

   private:
    std::ofstream file_;
    std::ostream* stream_;
};

inline AssignmentTuple parse_tuple(const std::string& text) {
    AssignmentTuple t;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, '-')) {
        if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos) {
            throw ParseError("bad assignment '" + text + "'");
        }
        t.channels.push_back(static_cast<unsigned>(std::stoul(part)));
    }
    return t;
}

inline void write_histogram_csv(std::ostream& os, const Histogram& h) {
    os << "assignment,count\n";
    for (const auto& [t, count] : h) os << t.to_string() << ',' << count << '\n';
}

inline Histogram read_histogram_csv(std::istream& is) {
    Histogram h;
    std::string line;
    if (!std::getline(is, line) || line != "assignment,count") {
        throw ParseError("histogram: expected header 'assignment,count'");
    }
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ParseError("histogram: missing comma in '" + line + "'");
        h[parse_tuple(line.substr(0, comma))] += std::stoull(line.substr(comma + 1));
    }
    return h;
}

inline nlohmann::ordered_json metrics_to_json(const MacMetrics& m) {
    nlohmann::ordered_json j;
    j["slots"] = m.slots;
    j["rounds"] = m.rounds;
    j["attempts"] = m.attempts;
    j["successes"] = m.successes;
    j["colliders"] = m.colliders;
    j["arbitrations"] = m.arbitrations;
    j["all_distinct_events"] = m.all_distinct_events;
    j["all_same_events"] = m.all_same_events;
    j["throughput"] = m.throughput;
    j["collision_rate"] = m.collision_rate;
    j["all_distinct_rate"] = m.all_distinct_rate;
    j["all_same_rate"] = m.all_same_rate;
    if (std::isfinite(m.energy_proxy)) {
        j["energy_proxy"] = m.energy_proxy;
    } else {
        j["energy_proxy"] = nullptr;
    }
    return j;
}

struct MacRunConfig {
    CellConfig cell;
    std::vector<PolicyKind> policies;
};

/// Parses the JSON document for `mac`; errors name the offending line or field.
inline MacRunConfig parse_mac_config(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        // nlohmann reports "line L, column C" in the message.
        throw ParseError(std::string("config: malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("config: top level must be a JSON object");

    MacRunConfig out;
    auto& cell = out.cell;
    auto field_error = [](const std::string& key, const std::string& what) {
        return ParseError("config: field '" + key + "': " + what);
    };
    auto get_uint = [&](const std::string& key, auto& dst, bool required) {
        if (!doc.contains(key)) {
            if (required) throw field_error(key, "missing");
            return;
        }
        const auto& v = doc[key];
        if (!v.is_number_unsigned()) throw field_error(key, "expected non-negative integer");
        dst = v.get<std::remove_reference_t<decltype(dst)>>();
    };
    auto get_double = [&](const std::string& key, double& dst, bool required) {
        if (!doc.contains(key)) {
            if (required) throw field_error(key, "missing");
            return;
        }
        if (!doc[key].is_number()) throw field_error(key, "expected number");
        dst = doc[key].get<double>();
    };

    static const std::vector<std::string> known = {"n_users",      "n_channels",   "primary_activity", "slots",
                                                   "seed",         "topology",     "mesh_degree",      "mesh_rounds",
                                                   "attempt_cost", "arbitration_cost", "policies"};
    for (const auto& [key, _] : doc.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) throw field_error(key, "unknown field");
    }

    get_uint("n_users", cell.n_users, true);
    cell.n_channels = cell.n_users;
    get_uint("n_channels", cell.n_channels, false);
    get_double("primary_activity", cell.primary_activity, true);
    get_uint("slots", cell.slots, true);
    get_uint("seed", cell.seed, true);
    get_uint("mesh_degree", cell.mesh_degree, false);
    get_uint("mesh_rounds", cell.mesh_rounds, false);
    get_double("attempt_cost", cell.attempt_cost, false);
    get_double("arbitration_cost", cell.arbitration_cost, false);
    if (doc.contains("topology")) {
        const auto& v = doc["topology"];
        if (!v.is_string()) throw field_error("topology", "expected \"star\" or \"mesh-rounds\"");
        const auto s = v.get<std::string>();
        if (s == "star") {
            cell.topology = Topology::kStar;
        } else if (s == "mesh-rounds") {
            cell.topology = Topology::kMeshRounds;
        } else {
            throw field_error("topology", "unknown topology '" + s + "'");
        }
    }
    if (!doc.contains("policies") || !doc["policies"].is_array()) {
        throw field_error("policies", "expected an array of policy names");
    }
    for (std::size_t i = 0; i < doc["policies"].size(); ++i) {
        const auto& v = doc["policies"][i];
        const auto p = v.is_string() ? parse_policy(v.get<std::string>()) : std::nullopt;
        if (!p) {
            throw field_error("policies[" + std::to_string(i) + "]",
                              "expected one of classical-uniform, quantum-enhance-optimum, quantum-avoid-worst");
        }
        out.policies.push_back(*p);
    }
    if (out.policies.size() < 2) throw field_error("policies", "need at least two policies to compare");
    try {
        cell.validate();
    } catch (const Error& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    return out;
}

inline GameConfig resolve_game(unsigned n, const std::string& regime, const std::optional<std::uint64_t>& p) {
    GameConfig cfg;
    if (regime == "enhance-optimum") {
        cfg = GameConfig::enhance_optimum(n);
    } else if (regime == "avoid-worst") {
        cfg = GameConfig::avoid_worst(n);
    } else {
        throw UsageError("unknown regime '" + regime + "' (use enhance-optimum or avoid-worst)");
    }
    if (p) cfg.p = *p;
    return cfg;
}

inline PreparationVariant resolve_variant(const std::string& name) {
    if (name == "corrected") return PreparationVariant::kCorrected;
    if (name == "paper-figure") return PreparationVariant::kPaperFigure;
    throw UsageError("unknown variant '" + name + "' (use corrected or paper-figure)");
}

inline std::string variant_name(PreparationVariant v) {
    return v == PreparationVariant::kCorrected ? "corrected" : "paper-figure";
}

inline nlohmann::ordered_json complex_json(Complex z) { return nlohmann::ordered_json::array({z.real(), z.imag()}); }

inline int cmd_probs(unsigned n, const std::string& regime, const std::optional<std::uint64_t>& p,
                     const std::string& format, std::ostream& out) {
    if (n < 2 || n > kMaxClosedFormN) {
        throw UsageError("--n must lie in [2, " + std::to_string(kMaxClosedFormN) + "]");
    }
    const GameConfig cfg = resolve_game(n, regime, p);
    const auto q = analytic_probabilities(cfg);
    const auto c = classical_probabilities(n);
    const double classical_outcome = 1.0 / (static_cast<double>(q.support_size) * n);
    if (format == "json") {
        nlohmann::ordered_json j;
        j["n"] = n;
        j["p"] = cfg.p;
        j["regime"] = regime;
        j["classical"] = {{"p_all_distinct", c.p_all_distinct},
                          {"p_all_same", c.p_all_same},
                          {"support_size", q.support_size * n},
                          {"per_outcome_prob", classical_outcome}};
        j["quantum"] = {{"p_all_distinct", q.p_all_distinct},
                        {"p_all_same", q.p_all_same},
                        {"support_size", q.support_size},
                        {"per_outcome_prob", q.per_outcome_prob}};
        out << j.dump(2) << '\n';
    } else {
        out << "quantity,classical,quantum\n";
        out << "p_all_distinct," << format_double(c.p_all_distinct) << ',' << format_double(q.p_all_distinct) << '\n';
        out << "p_all_same," << format_double(c.p_all_same) << ',' << format_double(q.p_all_same) << '\n';
        out << "support_size," << q.support_size * n << ',' << q.support_size << '\n';
        out << "per_outcome_prob," << format_double(classical_outcome) << ',' << format_double(q.per_outcome_prob)
            << '\n';
    }
    return kOk;
}

struct SimulateOptions {
    unsigned n = 2;
    std::string regime = "enhance-optimum";
    std::optional<std::uint64_t> p;
    std::uint64_t shots = 1000;
    std::uint64_t seed = 1;
    std::string engine = "qudit";
    std::string variant = "corrected";
    std::string format = "csv";
    std::string out;
    std::string dump_state;
};

/// Final state of prepare -> strategy for the chosen engine.
inline QuditState simulate_final_state(const GameConfig& cfg, const std::string& engine,
                                       PreparationVariant variant) {
    if (engine == "qudit") {
        if (cfg.n > kMaxQuditN) {
            throw ResourceLimitError("qudit engine supports n <= " + std::to_string(kMaxQuditN));
        }
        return apply_local_strategy(prepare_entangled(cfg), strategy_matrix(cfg.n));
    }
    if (engine == "circuit") {
        if (cfg.n != 2 && cfg.n != 4 && cfg.n != 8) throw UsageError("circuit engine supports n in {2, 4, 8}");
        const QubitRegister reg = run_circuit(build_preparation_circuit(cfg, variant), register_width(cfg.n));
        const auto amps = reg.amplitudes();
        // Same basis ordering: log2(n)-bit groups in user order are base-n digits.
        QuditState state(cfg.n, std::vector<Complex>(amps.begin(), amps.end()));
        return apply_local_strategy(std::move(state), strategy_matrix(cfg.n));
    }
    throw UsageError("unknown engine '" + engine + "' (use qudit or circuit)");
}

inline Histogram sample_histogram(const QuditState& state, std::uint64_t shots, std::uint64_t seed) {
    Histogram h;
    if (shots == 0) return h;
    const OutcomeSampler sampler(state);
    Rng rng = qmg::detail::make_stream(seed, 0);
    for (std::uint64_t s = 0; s < shots; ++s) ++h[sampler(rng)];
    return h;
}

inline int cmd_simulate(const SimulateOptions& o, std::ostream& out) {
    if (o.n < 2) throw UsageError("--n must be >= 2");
    if (o.engine == "qudit" && o.n > kMaxQuditN) {
        throw ResourceLimitError("qudit engine supports n <= " + std::to_string(kMaxQuditN));
    }
    const GameConfig cfg = resolve_game(o.n, o.regime, o.p);
    const QuditState state = simulate_final_state(cfg, o.engine, resolve_variant(o.variant));
    if (!o.dump_state.empty()) {
        OutputTarget dump(o.dump_state, out);
        write_state_dump(*dump, state);
    }
    const Histogram h = sample_histogram(state, o.shots, o.seed);
    OutputTarget target(o.out, out);
    if (o.format == "json") {
        nlohmann::ordered_json j = nlohmann::ordered_json::object();
        for (const auto& [t, count] : h) j[t.to_string()] = count;
        *target << j.dump(2) << '\n';
    } else {
        write_histogram_csv(*target, h);
    }
    return kOk;
}

inline nlohmann::ordered_json audit_to_json(const AuditReport& r) {
    nlohmann::ordered_json j;
    j["n"] = r.n;
    j["p"] = r.p;
    j["variant"] = variant_name(r.variant);
    j["max_amplitude_deviation"] = r.max_amplitude_deviation;
    j["matches"] = r.matches;
    j["branch_amplitudes"] = nlohmann::ordered_json::array();
    j["per_branch_phase_ratio"] = nlohmann::ordered_json::array();
    for (unsigned k = 0; k < r.n; ++k) {
        j["branch_amplitudes"].push_back(complex_json(r.branch_amplitudes[k]));
        j["per_branch_phase_ratio"].push_back(complex_json(r.per_branch_phase_ratio[k]));
    }
    return j;
}

inline void check_circuit_size(unsigned n) {
    if (n != 2 && n != 4 && n != 8) throw UsageError("circuits are available for n in {2, 4, 8}");
}

inline int cmd_audit_circuit(unsigned n, const std::string& regime, const std::optional<std::uint64_t>& p,
                             const std::string& variant, const std::string& path, std::ostream& out) {
    check_circuit_size(n);
    const AuditReport r = audit_preparation(resolve_game(n, regime, p), resolve_variant(variant));
    OutputTarget target(path, out);
    *target << audit_to_json(r).dump(2) << '\n';
    return kOk;
}

inline int cmd_export_circuit(unsigned n, const std::string& regime, const std::optional<std::uint64_t>& p,
                              const std::string& variant, const std::string& path, std::ostream& out) {
    check_circuit_size(n);
    const GameConfig cfg = resolve_game(n, regime, p);
    OutputTarget target(path, out);
    write_circuit(*target, build_preparation_circuit(cfg, resolve_variant(variant)), register_width(n));
    return kOk;
}

inline int cmd_mac(const std::string& config_path, const std::string& summary_path, const std::string& csv_path,
                   std::ostream& out) {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw ParseError("config: cannot read '" + config_path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const MacRunConfig rc = parse_mac_config(buf.str());

    std::optional<OutputTarget> csv;
    if (!csv_path.empty()) {
        csv.emplace(csv_path, out);
        **csv << "slot,free_channels,policy,successes,colliders,all_same\n";
    }
    std::function<void(PolicyKind, const SlotRecord&)> sink;
    if (csv) {
        sink = [&](PolicyKind p, const SlotRecord& r) {
            **csv << r.slot_index << ',' << r.free_channels.size() << ',' << policy_name(p) << ',' << r.successes
                  << ',' << r.colliders << ',' << (r.all_same_event ? 1 : 0) << '\n';
        };
    }
    const ComparisonTable table = compare_policies(rc.cell, rc.policies, sink);

    nlohmann::ordered_json j;
    const auto& c = rc.cell;
    j["config"] = {{"n_users", c.n_users},
                   {"n_channels", c.n_channels},
                   {"primary_activity", c.primary_activity},
                   {"slots", c.slots},
                   {"seed", c.seed},
                   {"topology", c.topology == Topology::kStar ? "star" : "mesh-rounds"},
                   {"mesh_degree", c.mesh_degree},
                   {"mesh_rounds", c.mesh_rounds},
                   {"attempt_cost", c.attempt_cost},
                   {"arbitration_cost", c.arbitration_cost}};
    j["baseline"] = policy_name(table.results[table.baseline].policy);
    j["policies"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < table.results.size(); ++i) {
        nlohmann::ordered_json entry;
        entry["policy"] = policy_name(table.results[i].policy);
        entry["metrics"] = metrics_to_json(table.results[i].metrics);
        const double ratio = table.all_distinct_ratio(i);
        if (std::isfinite(ratio)) {
            entry["all_distinct_ratio"] = ratio;
        } else {
            entry["all_distinct_ratio"] = nullptr;
        }
        j["policies"].push_back(std::move(entry));
    }
    if (!summary_path.empty()) {
        OutputTarget summary(summary_path, out);
        *summary << j.dump(2) << '\n';
    }
    const auto base = policy_name(table.results[table.baseline].policy);
    for (std::size_t i = 0; i < table.results.size(); ++i) {
        if (i == table.baseline) continue;
        out << "all-distinct ratio " << policy_name(table.results[i].policy) << '/' << base << ": "
            << format_double(table.all_distinct_ratio(i)) << '\n';
    }
    return kOk;
}

/// Parses argv and dispatches; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Quantum minority game channel allocation: analytics, simulators and MAC benchmarks", "qmg"};
    app.require_subcommand(1);

    unsigned n = 2;
    std::string regime = "enhance-optimum";
    std::optional<std::uint64_t> p;
    std::string format = "csv";
    std::string out_path;
    std::string variant = "corrected";
    auto add_game_flags = [&](CLI::App* sub, bool with_variant) {
        sub->add_option("--n", n, "number of users (= channels)")->required();
        sub->add_option("--regime", regime, "enhance-optimum (p = n(n-1)/2) or avoid-worst (p = 1)")
            ->check(CLI::IsMember({"enhance-optimum", "avoid-worst"}));
        sub->add_option("--p", p, "explicit phase parameter, overrides --regime");
        sub->add_option("--out", out_path, "output file (default stdout)");
        if (with_variant) {
            sub->add_option("--variant", variant, "preparation circuit: corrected or paper-figure")
                ->check(CLI::IsMember({"corrected", "paper-figure"}));
        }
    };

    auto* probs = app.add_subcommand("probs", "analytic classical vs quantum outcome probabilities");
    add_game_flags(probs, false);
    probs->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    SimulateOptions sim;
    auto* simulate = app.add_subcommand("simulate", "prepare, apply strategies and measure repeatedly");
    add_game_flags(simulate, true);
    simulate->add_option("--shots", sim.shots, "number of measurements");
    simulate->add_option("--seed", sim.seed, "random seed");
    simulate->add_option("--engine", sim.engine, "qudit or circuit")->check(CLI::IsMember({"qudit", "circuit"}));
    simulate->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    simulate->add_option("--dump-state", sim.dump_state, "write the final state's nonzero amplitudes here");

    auto* audit = app.add_subcommand("audit-circuit", "compare a preparation circuit with the target state");
    add_game_flags(audit, true);
    variant = "paper-figure";

    auto* exporter = app.add_subcommand("export-circuit", "write a preparation circuit as a text gate list");
    add_game_flags(exporter, true);

    std::string config_path;
    std::string csv_path;
    auto* mac = app.add_subcommand("mac", "compare allocation policies in a slotted cognitive-radio cell");
    mac->add_option("config", config_path, "JSON cell configuration")->required();
    mac->add_option("--out", out_path, "summary JSON path");
    mac->add_option("--csv", csv_path, "per-slot CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsageError;
    }

    try {
        if (*probs) return cmd_probs(n, regime, p, format, out);
        if (*simulate) {
            sim.n = n;
            sim.regime = regime;
            sim.p = p;
            sim.variant = simulate->count("--variant") ? variant : "corrected";
            sim.format = format;
            sim.out = out_path;
            return cmd_simulate(sim, out);
        }
        if (*audit) return cmd_audit_circuit(n, regime, p, variant, out_path, out);
        if (*exporter) {
            return cmd_export_circuit(n, regime, p, exporter->count("--variant") ? variant : "corrected", out_path,
                                      out);
        }
        if (*mac) return cmd_mac(config_path, out_path, csv_path, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsageError;
    } catch (const ParseError& e) {
        err << e.what() << '\n';
        return kConfigParseError;
    } catch (const ResourceLimitError& e) {
        err << "resource limit: " << e.what() << '\n';
        return kResourceLimitError;
    } catch (const UnsupportedSizeError& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return kUsageError;
}

}  // namespace qmg::cli
