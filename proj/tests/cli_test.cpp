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

#include "qmg_cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "gtest/gtest.h"

namespace fs = std::filesystem;
using namespace qmg;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "qmg");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class CliTest : public ::testing::Test {
   protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("qmg_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    fs::path path(const std::string& name) const { return dir_ / name; }

    fs::path write_config(const std::string& body) const {
        const auto p = path("cell.json");
        std::ofstream(p) << body;
        return p;
    }

    fs::path dir_;
};

}  // namespace

TEST_F(CliTest, ProbsEnhanceOptimumEightUsers) {
    const auto r = run({"probs", "--n", "8", "--regime", "enhance-optimum", "--format", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_NEAR(j["classical"]["p_all_distinct"].get<double>(), 2.4e-3, 0.05e-3);
    EXPECT_NEAR(j["quantum"]["p_all_distinct"].get<double>(), 1.92e-2, 0.03e-2);
    EXPECT_EQ(j["p"].get<int>(), 28);
}

TEST_F(CliTest, ProbsTwoUsersAndAvoidWorst) {
    auto j = nlohmann::json::parse(run({"probs", "--n", "2", "--format", "json"}).out);
    EXPECT_EQ(j["quantum"]["p_all_distinct"].get<double>(), 1.0);
    j = nlohmann::json::parse(run({"probs", "--n", "4", "--regime", "avoid-worst", "--format", "json"}).out);
    EXPECT_EQ(j["quantum"]["p_all_same"].get<double>(), 0.0);
    const auto csv = run({"probs", "--n", "4", "--regime", "avoid-worst"});
    EXPECT_EQ(csv.out.rfind("quantity,classical,quantum\n", 0), 0u);
    EXPECT_NE(csv.out.find("p_all_same,0.015625,0\n"), std::string::npos);
}

TEST_F(CliTest, ProbsExplicitPOverridesRegime) {
    const auto j = nlohmann::json::parse(run({"probs", "--n", "4", "--p", "0", "--format", "json"}).out);
    EXPECT_EQ(j["p"].get<int>(), 0);
    EXPECT_DOUBLE_EQ(j["quantum"]["p_all_same"].get<double>(), 4.0 / 64.0);
}

TEST_F(CliTest, ProbsRejectsOutOfRangeN) {
    EXPECT_EQ(run({"probs", "--n", "1"}).code, cli::kUsageError);
    EXPECT_EQ(run({"probs", "--n", "17"}).code, cli::kUsageError);
    EXPECT_EQ(run({"probs"}).code, cli::kUsageError);
    EXPECT_EQ(run({"probs", "--n", "4", "--regime", "bogus"}).code, cli::kUsageError);
}

TEST_F(CliTest, SimulateTwoUsers) {
    for (const std::string engine : {"qudit", "circuit"}) {
        const auto r = run({"simulate", "--n", "2", "--p", "1", "--shots", "1000", "--seed", "3", "--engine", engine});
        ASSERT_EQ(r.code, 0) << r.err;
        std::istringstream in(r.out);
        const auto h = cli::read_histogram_csv(in);
        ASSERT_EQ(h.size(), 2u);
        std::uint64_t total = 0;
        for (const auto& [t, c] : h) {
            EXPECT_TRUE(t.all_distinct());
            total += c;
        }
        EXPECT_EQ(total, 1000u);
    }
}

TEST_F(CliTest, SimulateDeterministicBytes) {
    const auto a = path("a.csv"), b = path("b.csv");
    ASSERT_EQ(run({"simulate", "--n", "4", "--p", "6", "--shots", "5000", "--seed", "9", "--out", a.string()}).code, 0);
    ASSERT_EQ(run({"simulate", "--n", "4", "--p", "6", "--shots", "5000", "--seed", "9", "--out", b.string()}).code, 0);
    EXPECT_EQ(slurp(a), slurp(b));
    std::ifstream in(a);
    const auto h = cli::read_histogram_csv(in);
    std::uint64_t total = 0;
    for (const auto& [t, c] : h) {
        EXPECT_TRUE(support_predicate({4, 6}, t));
        total += c;
    }
    EXPECT_EQ(total, 5000u);
}

TEST_F(CliTest, SimulateZeroShots) {
    const auto r = run({"simulate", "--n", "3", "--p", "3", "--shots", "0"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "assignment,count\n");
}

TEST_F(CliTest, SimulateEngineLimits) {
    EXPECT_EQ(run({"simulate", "--n", "3", "--engine", "circuit", "--shots", "1"}).code, cli::kUsageError);
    EXPECT_EQ(run({"simulate", "--n", "9", "--engine", "qudit", "--shots", "1"}).code, cli::kResourceLimitError);
}

TEST_F(CliTest, SimulateDumpState) {
    const auto dump = path("state.txt");
    ASSERT_EQ(run({"simulate", "--n", "2", "--p", "1", "--shots", "1", "--dump-state", dump.string()}).code, 0);
    std::ifstream in(dump);
    const auto s = read_state_dump(in);
    EXPECT_NEAR(std::norm(s.amplitude(AssignmentTuple{{0, 1}})), 0.5, 1e-15);
}

TEST_F(CliTest, AuditCircuit) {
    auto j = nlohmann::json::parse(run({"audit-circuit", "--n", "2", "--p", "1"}).out);
    EXPECT_TRUE(j["matches"].get<bool>());
    j = nlohmann::json::parse(run({"audit-circuit", "--n", "4", "--p", "1"}).out);
    EXPECT_FALSE(j["matches"].get<bool>());
    EXPECT_EQ(j["variant"], "paper-figure");
    EXPECT_EQ(j["per_branch_phase_ratio"].size(), 4u);
    j = nlohmann::json::parse(run({"audit-circuit", "--n", "4", "--p", "1", "--variant", "corrected"}).out);
    EXPECT_TRUE(j["matches"].get<bool>());
    EXPECT_EQ(run({"audit-circuit", "--n", "3"}).code, cli::kUsageError);
}

TEST_F(CliTest, ExportCircuitIsReadable) {
    const auto p = path("c.txt");
    ASSERT_EQ(run({"export-circuit", "--n", "4", "--regime", "avoid-worst", "--out", p.string()}).code, 0);
    std::ifstream in(p);
    const auto parsed = read_circuit(in);
    EXPECT_EQ(parsed.gates, build_preparation_circuit({4, 1}, PreparationVariant::kCorrected));
}

TEST_F(CliTest, MacWritesSummaryAndCsvDeterministically) {
    const auto cfg = write_config(R"({
        "n_users": 4, "n_channels": 4, "primary_activity": 0.0, "slots": 20000, "seed": 5,
        "topology": "star",
        "policies": ["classical-uniform", "quantum-enhance-optimum", "quantum-avoid-worst"]
    })");
    std::string outputs[2];
    for (int i = 0; i < 2; ++i) {
        const auto s = path("s" + std::to_string(i) + ".json"), c = path("c" + std::to_string(i) + ".csv");
        const auto r = run({"mac", cfg.string(), "--out", s.string(), "--csv", c.string()});
        ASSERT_EQ(r.code, 0) << r.err;
        EXPECT_NE(r.out.find("all-distinct ratio quantum-enhance-optimum/classical-uniform: "), std::string::npos);
        outputs[i] = slurp(s) + slurp(c) + r.out;
    }
    EXPECT_EQ(outputs[0], outputs[1]);

    const auto j = nlohmann::json::parse(slurp(path("s0.json")));
    ASSERT_EQ(j["policies"].size(), 3u);
    EXPECT_NEAR(j["policies"][1]["all_distinct_ratio"].get<double>(), 4.0, 0.35);
    EXPECT_EQ(j["policies"][2]["metrics"]["all_same_rate"].get<double>(), 0.0);

    std::ifstream csv(path("c0.csv"));
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line, "slot,free_channels,policy,successes,colliders,all_same");
    std::size_t rows = 0;
    while (std::getline(csv, line)) {
        ++rows;
        if (line.find("quantum-avoid-worst") != std::string::npos) EXPECT_EQ(line.back(), '0');
    }
    EXPECT_EQ(rows, 3u * 20000u);
}

TEST_F(CliTest, MacMalformedJsonReportsLine) {
    const auto cfg = write_config("{\n  \"n_users\": 4,\n  \"slots\": ,\n}");
    const auto r = run({"mac", cfg.string()});
    EXPECT_EQ(r.code, cli::kConfigParseError);
    EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;
}

TEST_F(CliTest, MacFieldDiagnostics) {
    auto r = run({"mac", write_config(R"({"n_users": 4, "primary_activity": 0, "slots": -3, "seed": 1,
                                           "policies": ["classical-uniform", "quantum-avoid-worst"]})")
                             .string()});
    EXPECT_EQ(r.code, cli::kConfigParseError);
    EXPECT_NE(r.err.find("'slots'"), std::string::npos) << r.err;
    r = run({"mac", write_config(R"({"n_users": 4, "primary_activity": 0, "slots": 3, "seed": 1,
                                      "policies": ["classical-uniform", "quantum"]})")
                        .string()});
    EXPECT_EQ(r.code, cli::kConfigParseError);
    EXPECT_NE(r.err.find("policies[1]"), std::string::npos) << r.err;
    r = run({"mac", write_config(R"({"n_users": 4, "primary_activity": 0, "slots": 3, "seed": 1, "colour": 2,
                                      "policies": ["classical-uniform", "quantum-avoid-worst"]})")
                        .string()});
    EXPECT_NE(r.err.find("'colour'"), std::string::npos) << r.err;
    EXPECT_EQ(run({"mac", path("missing.json").string()}).code, cli::kConfigParseError);
}

TEST_F(CliTest, MacMeshTopology) {
    const auto cfg = write_config(R"({
        "n_users": 4, "primary_activity": 0.1, "slots": 2000, "seed": 5, "topology": "mesh-rounds",
        "mesh_degree": 2, "policies": ["classical-uniform", "quantum-avoid-worst"]
    })");
    const auto s = path("s.json");
    ASSERT_EQ(run({"mac", cfg.string(), "--out", s.string()}).code, 0);
    const auto j = nlohmann::json::parse(slurp(s));
    EXPECT_EQ(j["policies"][0]["metrics"]["rounds"].get<int>(), 8000);
}

TEST_F(CliTest, BinaryExitCodes) {
    auto status = [](const std::string& args) {
        const int raw = std::system((std::string(QMG_CLI_PATH) + " " + args + " > /dev/null 2>&1").c_str());
        return WEXITSTATUS(raw);
    };
    EXPECT_EQ(status("probs --n 4"), 0);
    EXPECT_EQ(status("probs --n 99"), cli::kUsageError);
    EXPECT_EQ(status("nonsense"), cli::kUsageError);
    EXPECT_EQ(status("mac /nonexistent/cell.json"), cli::kConfigParseError);
    EXPECT_EQ(status("simulate --n 9"), cli::kResourceLimitError);
}
