// Copyright 2026 The qcbridge Authors
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

// Integration tests: the installed tool is run as a child process.

#include <cmath>
#include <fstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "process.hpp"

namespace {

using qcb::testing::run_tool;
using qcb::testing::ScratchDir;
using qcb::testing::shell_quote;
using qcb::testing::slurp;
using json = nlohmann::json;

const std::string kTool = QCB_TOOL_PATH;

class Cli : public ::testing::Test {
  protected:
    ScratchDir dir_{"qcb-cli-" + std::string(
                                     ::testing::UnitTest::GetInstance()->current_test_info()->name())};

    [[nodiscard]] std::string outdir_flag() const {
        return "--outdir " + shell_quote(dir_.path().string());
    }
    [[nodiscard]] std::filesystem::path file(const std::string &name) const {
        return dir_.path() / name;
    }
    [[nodiscard]] std::string first_line(const std::string &name) const {
        const std::string body = slurp(file(name));
        return body.substr(0, body.find('\n'));
    }
    qcb::testing::ProcessResult run(const std::string &args, const std::string &env = {}) {
        return run_tool(kTool, args, dir_.path(), env);
    }
};

TEST_F(Cli, ThresholdsReport) {
    const auto r = run("qkd thresholds " + outdir_flag());
    ASSERT_EQ(r.exit_code, 0) << r.err;
    const json j = json::parse(slurp(file("qkd-thresholds-0.json")));
    EXPECT_EQ(j["status"], "ok");
    EXPECT_EQ(j["config"]["seed"], 0);
    EXPECT_TRUE(j.contains("timestamp"));
    EXPECT_TRUE(j.contains("version"));
    EXPECT_NEAR(j["summary"]["one_way"].get<double>(), 0.1464, 1e-4);
    EXPECT_NEAR(j["summary"]["chsh"].get<double>(), 0.1464, 1e-4);
    EXPECT_NEAR(j["summary"]["entanglement"].get<double>(), 0.2929, 1e-4);
    EXPECT_EQ(first_line("qkd-thresholds-0.csv"), "kind,threshold");
}

TEST_F(Cli, CloneFidelityValue) {
    const auto r = run("clone fidelity --n 1 --m 2 " + outdir_flag());
    ASSERT_EQ(r.exit_code, 0) << r.err;
    EXPECT_EQ(slurp(file("clone-fidelity-0.csv")), "N,M,fidelity\n1,2,0.83333333333333337\n");
}

TEST_F(Cli, TableLayouts) {
    ASSERT_EQ(run("distill equivalence --d-min 0.2 --d-max 0.36 --steps 33 --n-max 30 " +
                  outdir_flag())
                  .exit_code,
              0);
    EXPECT_EQ(first_line("distill-equivalence-0.csv"), "D,entangled,chsh,i_ab,i_ae,ad_min_block");
    ASSERT_EQ(run("weak profile --dtau 0.5 " + outdir_flag()).exit_code, 0);
    EXPECT_EQ(first_line("weak-profile-0.csv"), "t,intensity_x,intensity_y,intensity_total");
    ASSERT_EQ(run("weak sweep --steps 9 --pdl-db 3 --pdl-axis 0.4 " + outdir_flag()).exit_code, 0);
    EXPECT_EQ(first_line("weak-sweep-0.csv"),
              "dtau,tc,theta_pre,phi_pre,pdl_db,pdl_axis,toa_exact,toa_weak,abs_error");
    ASSERT_EQ(run("qkd sweep --d-min 0 --d-max 0.4 --steps 81 --n-max 30 " + outdir_flag()).exit_code,
              0);
    const json j = json::parse(slurp(file("qkd-sweep-0.json")));
    EXPECT_EQ(j["results"].size(), 81u);
}

TEST_F(Cli, EveryCommandSucceedsWithDefaults) {
    for (const char *cmd :
         {"qkd sweep --steps 5", "qkd thresholds", "distill classical", "distill quantum",
          "distill equivalence --steps 3", "clone fidelity", "clone amplifier", "clone mc",
          "clone mixture", "clone fit", "weak toa", "weak sweep --steps 5", "weak profile"}) {
        const auto r = run(std::string(cmd) + " " + outdir_flag());
        EXPECT_EQ(r.exit_code, 0) << cmd << "\n" << r.err;
    }
}

TEST_F(Cli, FullPrecisionNumbers) {
    ASSERT_EQ(run("clone amplifier --mu-in 3 --mu-out 7 --q 0.3 " + outdir_flag()).exit_code, 0);
    const std::string body = slurp(file("clone-amplifier-0.csv"));
    const std::string last = body.substr(body.rfind(',') + 1);
    // %.17g keeps 17 significant digits.
    EXPECT_GE(last.size(), 13u);
    EXPECT_EQ(std::stod(last), (0.3 * 21 + 7 + 3) / (0.3 * 21 + 14));
}

TEST_F(Cli, IdenticalSeedsGiveIdenticalCsv) {
    const std::string args = "clone mc --n 2 --m 5 --trials 20000 --seed 42 " + outdir_flag();
    ASSERT_EQ(run(args).exit_code, 0);
    const std::string a = slurp(file("clone-mc-42.csv"));
    ASSERT_EQ(run(args).exit_code, 0);
    EXPECT_EQ(slurp(file("clone-mc-42.csv")), a);
    ASSERT_EQ(run(args + " --exec serial").exit_code, 0);
    EXPECT_EQ(slurp(file("clone-mc-42.csv")), a);
    ASSERT_EQ(run("clone mc --n 2 --m 5 --trials 20000 --seed 43 " + outdir_flag()).exit_code, 0);
    EXPECT_NE(slurp(file("clone-mc-43.csv")), a);

    const std::string ad = "distill classical --d 0.15 --n-max 4 --trials 20000 --seed 9 " +
                           outdir_flag();
    ASSERT_EQ(run(ad).exit_code, 0);
    const std::string b = slurp(file("distill-classical-9.csv"));
    ASSERT_EQ(run(ad + " --exec serial").exit_code, 0);
    EXPECT_EQ(slurp(file("distill-classical-9.csv")), b);
}

TEST_F(Cli, ConfigFileAndFlagPrecedence) {
    const auto cfg = file("run.json");
    std::ofstream(cfg) << R"({"seed": 3, "n": 2, "m": 6})";
    ASSERT_EQ(run("clone fidelity --config " + shell_quote(cfg.string()) + " --seed 7 " +
                  outdir_flag())
                  .exit_code,
              0);
    EXPECT_FALSE(std::filesystem::exists(file("clone-fidelity-3.csv")));
    const json j = json::parse(slurp(file("clone-fidelity-7.json")));
    EXPECT_EQ(j["config"]["seed"], 7);
    EXPECT_EQ(j["config"]["n"], 2);
    EXPECT_EQ(j["config"]["m"], 6);
    ASSERT_EQ(run("clone fidelity --config " + shell_quote(cfg.string()) + " --m 4 " +
                  outdir_flag())
                  .exit_code,
              0);
    EXPECT_EQ(slurp(file("clone-fidelity-3.csv")), "N,M,fidelity\n2,4,0.875\n");
}

TEST_F(Cli, DefaultOutdirFromEnvironment) {
    const auto r = run("clone fidelity", "QCB_OUTDIR=" + shell_quote(dir_.path().string()));
    ASSERT_EQ(r.exit_code, 0) << r.err;
    EXPECT_TRUE(std::filesystem::exists(file("clone-fidelity-0.csv")));
}

TEST_F(Cli, UsageErrorsExitOne) {
    auto r = run("teleport " + outdir_flag());
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.err.find("Usage"), std::string::npos);
    r = run("qkd " + outdir_flag());
    EXPECT_EQ(r.exit_code, 1);
    r = run("qkd sweep --d-min 0.7 " + outdir_flag());
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.err.find("--d-min"), std::string::npos);
    r = run("qkd sweep --d-min 0.3 --d-max 0.1 " + outdir_flag());
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.err.find("--d-max"), std::string::npos);
    r = run("clone fidelity --n 3 --m 2 " + outdir_flag());
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_FALSE(std::filesystem::exists(file("clone-fidelity-0.csv")));
    r = run("qkd thresholds --eve guess " + outdir_flag());
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.err.find("--eve"), std::string::npos);
}

TEST_F(Cli, MissingInputNamesPath) {
    const auto missing = file("data.csv");
    const auto r = run("clone fit --input " + shell_quote(missing.string()) + " " + outdir_flag());
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.err.find(missing.string()), std::string::npos);
    EXPECT_FALSE(std::filesystem::exists(file("clone-fit-0.csv")));
}

TEST_F(Cli, BadConfigFilesExitOne) {
    auto r = run("clone fidelity --config " + shell_quote(file("none.json").string()));
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.err.find("none.json"), std::string::npos);
    std::ofstream(file("list.json")) << "[1, 2]";
    r = run("clone fidelity --config " + shell_quote(file("list.json").string()));
    EXPECT_EQ(r.exit_code, 1);
    std::ofstream(file("unknown.json")) << R"({"colour": "red"})";
    r = run("clone fidelity --config " + shell_quote(file("unknown.json").string()) + " " +
            outdir_flag());
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.err.find("colour"), std::string::npos);
}

TEST_F(Cli, NumericalFailureExitsTwoWithDiagnostic) {
    // Leftovers from an earlier run must not survive a failed one.
    std::ofstream(file("distill-classical-0.csv")) << "stale\n";
    const auto r = run("distill classical --d 0.5 --n-max 64 --trials 10000 " + outdir_flag());
    EXPECT_EQ(r.exit_code, 2);
    EXPECT_FALSE(std::filesystem::exists(file("distill-classical-0.csv")));
    const json j = json::parse(slurp(file("distill-classical-0.json")));
    EXPECT_EQ(j["status"], "numerical_failure");
    EXPECT_NE(j["diagnostic"].get<std::string>().find("no block accepted"), std::string::npos);

    const auto w = run("weak toa --theta-pre 0 --pdl-db inf --pdl-axis 1.5707963267948966 " +
                       outdir_flag());
    EXPECT_EQ(w.exit_code, 2);
    EXPECT_FALSE(std::filesystem::exists(file("weak-toa-0.csv")));
}

TEST_F(Cli, HelpAndVersion) {
    auto r = run("--help");
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_NE(r.out.find("distill"), std::string::npos);
    r = run("--version");
    EXPECT_EQ(r.exit_code, 0);
    r = run("weak sweep --help");
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_NE(r.out.find("--dtau-min"), std::string::npos);
}

} // namespace
