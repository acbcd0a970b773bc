// Copyright 2026 The wgq Authors
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

#include "wgq/cli.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

#include "gtest/gtest.h"

#include "test_util.h"
#include "wgq/report.h"

using namespace wgq;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result cli(std::vector<std::string> args) {
    args.insert(args.begin(), "wgq");
    std::vector<const char *> argv;
    for (const auto &a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out;
    std::ostringstream err;
    int code = run_cli(int(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::filesystem::path temp_path(const std::string &name) {
    return std::filesystem::temp_directory_path() / ("wgq_cli_test_" + name);
}

std::string netlist(const std::string &name) {
    return (std::filesystem::path(WGQ_NETLIST_DIR) / name).string();
}

}  // namespace

TEST(cli, coeffs_json) {
    Result r = cli({"coeffs", "--purcell", "100", "--format", "json"});
    ASSERT_EQ(r.code, EXIT_OK) << r.err;
    auto j = nlohmann::json::parse(r.out);
    ASSERT_NEAR(j["reflectance"].get<double>(), 0.98029604940692089011, 1e-14);
}

TEST(cli, coeffs_text) {
    Result r = cli({"coeffs"});
    ASSERT_EQ(r.code, EXIT_OK);
    ASSERT_NE(r.out.find("|r|^2  = 1.000000000000"), std::string::npos);
}

TEST(cli, run_json_report) {
    Result r = cli({"run", "--protocol", "klm2", "--purcell", "100"});
    ASSERT_EQ(r.code, EXIT_OK) << r.err;
    auto j = nlohmann::json::parse(r.out);
    ASSERT_EQ(j["schema"], RUN_REPORT_SCHEMA);
    ASSERT_EQ(j["circuit"], "klm2");
    ASSERT_EQ(j["detectors"].size(), 4u);
    ASSERT_EQ(j["detectors"][1]["corrections"], "ZI");
    ASSERT_NEAR(j["success_probability"].get<double>(), 0.96098034448281628282, 1e-12);
    ASSERT_NEAR(j["success_probability"].get<double>() + j["sink_total"].get<double>(), 1, 1e-12);
    ASSERT_EQ(j["meta"]["argv"][1], "run");
}

TEST(cli, run_csv_and_text) {
    Result csv = cli({"run", "--protocol", "klm3", "--format", "csv"});
    ASSERT_EQ(csv.code, EXIT_OK);
    ASSERT_EQ(csv.out.substr(0, csv.out.find('\n')), "kind,id,probability,fidelity,corrections");
    ASSERT_NE(csv.out.find("detector,D2,"), std::string::npos);
    Result text = cli({"run", "--protocol", "klmN", "--n", "4", "--format", "text"});
    ASSERT_EQ(text.code, EXIT_OK);
    ASSERT_NE(text.out.find("circuit klm4"), std::string::npos);
}

TEST(cli, run_with_offsets_to_file) {
    auto path = temp_path("run.json");
    Result r = cli({"run", "--protocol", "klm2", "--purcell", "100", "--offsets=0.2,-0.2", "--output", path.string()});
    ASSERT_EQ(r.code, EXIT_OK) << r.err;
    ASSERT_TRUE(r.out.empty());
    std::ifstream in(path);
    auto j = nlohmann::json::parse(in);
    ASSERT_NEAR(j["weighted_fidelity"].get<double>(), 0.965390361364662, 1e-12);
    std::filesystem::remove(path);
}

TEST(cli, exec_matches_run) {
    struct Case {
        std::string protocol, file, offsets;
    };
    const Case cases[] = {
        {"klm2", "klm2.wgq", "--offsets=0.1,-0.1"},
        {"klm3", "klm3.wgq", "--offsets=0.1,0,-0.1"},
        {"heralded_z", "heralded_z.wgq", "--offsets=0.05"},
    };
    for (const auto &c : cases) {
        Result a = cli({"run", "--protocol", c.protocol, "--purcell", "37", "--detuning", "0.05", c.offsets});
        Result b = cli({"exec", netlist(c.file), "--purcell", "37", "--detuning", "0.05", c.offsets});
        ASSERT_EQ(a.code, EXIT_OK) << a.err;
        ASSERT_EQ(b.code, EXIT_OK) << b.err;
        ASSERT_EQ(without_meta(nlohmann::json::parse(a.out)).dump(2), without_meta(nlohmann::json::parse(b.out)).dump(2));
    }
}

TEST(cli, exit_codes) {
    ASSERT_EQ(cli({}).code, EXIT_FLAGS);
    ASSERT_EQ(cli({"run", "--bogus"}).code, EXIT_FLAGS);
    ASSERT_EQ(cli({"run", "--purcell", "-1"}).code, EXIT_FLAGS);
    ASSERT_EQ(cli({"run", "--offsets=0.1,x"}).code, EXIT_FLAGS);
    ASSERT_EQ(cli({"run", "--protocol", "klm2", "--n", "3"}).code, EXIT_FLAGS);
    ASSERT_EQ(cli({"run", "--protocol", "klm2", "--offsets=0.1"}).code, EXIT_FLAGS);
    ASSERT_EQ(cli({"exec", "/nonexistent/file.wgq"}).code, EXIT_IO);
    ASSERT_EQ(cli({"run", "--output", "/nonexistent/dir/out.json"}).code, EXIT_IO);
    ASSERT_EQ(cli({"fidelity", "--n", "5", "--sigma", "0.1"}).code, EXIT_FLAGS);
    ASSERT_EQ(cli({"verify", "--filter", "no.such.property"}).code, EXIT_FLAGS);
    ASSERT_EQ(cli({"sweep", "--kind", "fig6", "--from", "1"}).code, EXIT_FLAGS);
}

TEST(cli, parse_error_exit_code_and_location) {
    auto path = temp_path("bad.wgq");
    {
        std::ofstream f(path);
        f << "circuit a\nemitters 1\nmodes 0 1\nhwp mode=0 theta=nope\n";
    }
    Result r = cli({"exec", path.string()});
    ASSERT_EQ(r.code, EXIT_PARSE);
    ASSERT_NE(r.err.find(":4:18:"), std::string::npos) << r.err;
    std::filesystem::remove(path);
}

TEST(cli, help_exits_cleanly) {
    Result r = cli({"--help"});
    ASSERT_EQ(r.code, EXIT_OK);
    ASSERT_NE(r.out.find("sweep"), std::string::npos);
}

TEST(cli, fidelity_report) {
    Result r = cli({"fidelity", "--n", "2", "--sigma", "0.1"});
    ASSERT_EQ(r.code, EXIT_OK) << r.err;
    auto j = nlohmann::json::parse(r.out);
    ASSERT_EQ(j["schema"], FIDELITY_REPORT_SCHEMA);
    ASSERT_NEAR(j["fidelity"].get<double>(), 0.983508151749, 1e-10);
    Result mc = cli({"fidelity", "--n", "2", "--sigma", "0.1", "--method", "monte-carlo", "--samples", "2000", "--format", "text"});
    ASSERT_EQ(mc.code, EXIT_OK);
    ASSERT_NE(mc.out.find("+-"), std::string::npos);
}

TEST(cli, sweep_writes_csv_and_svg) {
    auto csv = temp_path("sweep.csv");
    auto svg = temp_path("sweep.svg");
    Result r = cli({"sweep", "--kind", "fig7", "--from", "-0.2", "--to", "0.2", "--points", "5", "--out", csv.string(),
                    "--svg", svg.string(), "--threads", "2"});
    ASSERT_EQ(r.code, EXIT_OK) << r.err;
    std::ifstream in(csv);
    std::string header;
    std::getline(in, header);
    ASSERT_EQ(header, "detuning,p2_P100,p2_P50,p2_P10,p3_P100,p3_P50,p3_P10");
    std::string first;
    std::getline(in, first);
    ASSERT_EQ(first.substr(0, 5), "-0.2,");
    ASSERT_TRUE(std::filesystem::file_size(svg) > 100);
    std::filesystem::remove(csv);
    std::filesystem::remove(svg);
}

TEST(cli, verify_passes) {
    Result r = cli({"verify"});
    ASSERT_EQ(r.code, EXIT_OK) << r.out;
    ASSERT_NE(r.out.find(" 0 failed"), std::string::npos);
    Result one = cli({"verify", "--filter", "netlist"});
    ASSERT_EQ(one.code, EXIT_OK);
    ASSERT_NE(one.out.find("1 passed, 0 failed"), std::string::npos);
}

TEST(cli, netlist_command_matches_shipped_file) {
    Result r = cli({"netlist", "--protocol", "klmN", "--n", "5"});
    ASSERT_EQ(r.code, EXIT_OK);
    std::ifstream in(netlist("klm5.wgq"));
    std::stringstream ss;
    ss << in.rdbuf();
    ASSERT_EQ(r.out, props::without_header(ss.str()));
}

TEST(cli, binary_exit_status) {
    auto status = [](const std::string &args) {
        std::string cmd = std::string(WGQ_CLI_PATH) + " " + args + " >/dev/null 2>&1";
        int s = std::system(cmd.c_str());
        return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
    };
    ASSERT_EQ(status("coeffs --purcell 100"), 0);
    ASSERT_EQ(status("exec /nonexistent.wgq"), 1);
    ASSERT_EQ(status("run --nope"), 2);
}
