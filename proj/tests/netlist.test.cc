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

#include "wgq/netlist.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gtest/gtest.h"

#include "test_util.h"

using namespace wgq;

namespace {

std::string read(const std::filesystem::path &path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ParseError parse_error(const std::string &text) {
    try {
        parse_netlist(text);
    } catch (const ParseError &e) {
        return e;
    }
    return ParseError(0, 0, "no error");
}

const char *MINIMAL = R"(# a tiny heralding circuit
circuit tiny
emitters 1
modes 1 2 3 4   # four modes
input mode=1 pol=H emitters=+
pbs (1,H)=3; scatter in=3 emitter=0 out=4 sink=D'1
pbs (4,V)=2
detect D1=(2,V)
)";

/// Random valid circuit: a chain of components over a handful of modes,
/// ending in a detector bank with feedforward.
Circuit random_circuit(props::Gen &gen) {
    Circuit c;
    c.name = "rand" + std::to_string(gen.index(1000));
    c.num_emitters = 1 + gen.index(3);
    for (uint32_t m = 0; m < 4; m++) {
        c.modes.push_back({m * 3 + 1});
    }
    std::vector<EmitterLabel> labels;
    for (size_t i = 0; i < c.num_emitters; i++) {
        labels.push_back(gen.coin() ? EmitterLabel::minus : EmitterLabel::plus);
    }
    c.input = {c.modes[gen.index(4)], gen.coin() ? Polarization::V : Polarization::H, labels};
    size_t sinks = 0;
    auto mode = [&] { return c.modes[gen.index(4)]; };
    auto other = [&](SpatialMode a) {
        SpatialMode b = mode();
        while (b == a) {
            b = mode();
        }
        return b;
    };
    size_t count = 1 + gen.index(8);
    for (size_t i = 0; i < count; i++) {
        switch (gen.index(7)) {
            case 0:
                c.components.push_back(Hwp{mode(), gen.uniform(-90, 90)});
                break;
            case 1: {
                SpatialMode a = mode();
                c.components.push_back(Mixer{a, other(a), {gen.coin() ? MixerKind::bs : MixerKind::bs_prime}});
                break;
            }
            case 2: {
                SpatialMode a = mode();
                int n = 1 + int(gen.index(6));
                c.components.push_back(Mixer{a, other(a), {MixerKind::vbs, int(gen.index(size_t(n))), n}});
                break;
            }
            case 3: {
                SpatialMode a = mode();
                c.components.push_back(Mixer{a, other(a), {MixerKind::custom, 0, 0, gen.unitary()}});
                break;
            }
            case 4: {
                AttenuatorCoefficient k = gen.coin() ? AttenuatorCoefficient::rnom_power(int(gen.index(5)))
                                                     : AttenuatorCoefficient::fixed(gen.complex_unit() * gen.uniform(0, 1));
                c.components.push_back(Attenuator{mode(), k, {"T" + std::to_string(++sinks)}});
                break;
            }
            case 5:
                c.components.push_back(
                    EmitterScatter{mode(), gen.index(c.num_emitters), mode(), {"D'" + std::to_string(++sinks)}});
                break;
            default: {
                SpatialMode a = mode();
                c.components.push_back(Pbs{{{a, Polarization::V, other(a)}}});
                break;
            }
        }
    }
    DetectorBank bank;
    FeedforwardRule rule;
    size_t id = 0;
    for (auto m : c.modes) {
        for (auto pol : {Polarization::H, Polarization::V}) {
            std::string name = "D" + std::to_string(++id);
            bank.detectors.push_back({name, m, pol});
            std::vector<Correction> ops;
            for (size_t e = 0; e < c.num_emitters; e++) {
                ops.push_back(gen.coin() ? Correction::Z : Correction::I);
            }
            rule.entries.push_back({name, ops});
        }
    }
    c.components.push_back(bank);
    if (gen.coin()) {
        c.feedforward = rule;
    }
    return c;
}

}  // namespace

TEST(netlist, parses_minimal_document) {
    Circuit c = parse_netlist(MINIMAL);
    ASSERT_EQ(c.name, "tiny");
    ASSERT_EQ(c.num_emitters, 1u);
    ASSERT_EQ(c.modes.size(), 4u);
    ASSERT_EQ(c.components.size(), 4u);
    ASSERT_FALSE(c.feedforward.has_value());
    Circuit h = build_heralded_z();
    h.name = "tiny";
    ASSERT_EQ(c, h);
}

TEST(netlist, input_defaults_to_first_mode) {
    Circuit c = parse_netlist("circuit x\nemitters 2\nmodes 5 6\nmirror in=5 out=6\ndetect D1=(6,H)\n");
    ASSERT_EQ(c.input.mode, SpatialMode{5});
    ASSERT_EQ(c.input.pol, Polarization::H);
    ASSERT_EQ(c.input.emitters, (std::vector<EmitterLabel>{EmitterLabel::plus, EmitterLabel::plus}));
}

TEST(netlist, serialized_two_qubit_header) {
    std::string text = serialize_netlist(build_two_qubit({}));
    const std::string head =
        "circuit klm2\nemitters 2\nmodes 0 1 2 3 4 5 6 7 8 9 10 11 12 13 15 16 17\n"
        "input mode=0 pol=H emitters=++\nhwp mode=0 theta=27.367805158622673\n";
    ASSERT_EQ(text.substr(0, head.size()), head);
    ASSERT_NE(text.find("attenuator mode=1 coeff=rnom^2 sink=T2\n"), std::string::npos);
    ASSERT_NE(text.find("feedforward D1=II D2=ZI D3=ZZ D4=IZ\n"), std::string::npos);
}

TEST(netlist, round_trip_builtin_circuits) {
    ProtocolParams base;
    for (const auto &c : props::all_builders(base, 8)) {
        std::string text = serialize_netlist(c);
        Circuit back = parse_netlist(text);
        ASSERT_EQ(back, c) << c.name;
        ASSERT_EQ(serialize_netlist(back), text);
    }
}

TEST(netlist, round_trip_shipped_files) {
    size_t seen = 0;
    for (const auto &entry : std::filesystem::directory_iterator(WGQ_NETLIST_DIR)) {
        if (entry.path().extension() != ".wgq") {
            continue;
        }
        std::string text = read(entry.path());
        Circuit c = parse_netlist(text);
        ASSERT_EQ(serialize_netlist(c), props::without_header(text)) << entry.path();
        ASSERT_EQ(parse_netlist(serialize_netlist(c)), c);
        seen++;
    }
    ASSERT_GE(seen, 4u);
}

TEST(netlist, shipped_files_equal_builders) {
    ProtocolParams p;
    ASSERT_EQ(parse_netlist(read(std::filesystem::path(WGQ_NETLIST_DIR) / "klm2.wgq")), build_two_qubit(p));
    p.n = 3;
    ASSERT_EQ(parse_netlist(read(std::filesystem::path(WGQ_NETLIST_DIR) / "klm3.wgq")), build_three_qubit(p));
    p.n = 5;
    ASSERT_EQ(parse_netlist(read(std::filesystem::path(WGQ_NETLIST_DIR) / "klm5.wgq")), build_n_qubit(p));
    ASSERT_EQ(parse_netlist(read(std::filesystem::path(WGQ_NETLIST_DIR) / "heralded_z.wgq")), build_heralded_z());
}

TEST(netlist, property_round_trip_random_circuits) {
    props::Gen gen(51);
    size_t accepted = 0;
    for (int i = 0; i < 400; i++) {
        Circuit c = random_circuit(gen);
        try {
            c.validate();
        } catch (const CircuitError &) {
            continue;
        }
        accepted++;
        std::string text = serialize_netlist(c);
        Circuit back = parse_netlist(text);
        ASSERT_EQ(back, c) << text;
        ASSERT_EQ(serialize_netlist(back), text);
    }
    ASSERT_GT(accepted, 100u);
}

TEST(netlist, error_positions) {
    struct Case {
        std::string text;
        size_t line, column;
        std::string fragment;
    };
    const Case cases[] = {
        {"emitters 1\n", 1, 1, "circuit"},
        {"circuit a\nemitters 1\nhwp mode=0 theta=1\n", 3, 1, "before the 'emitters' and 'modes'"},
        {"circuit a\nemitters 1\nmodes 0 1\nfrobnicate x=1\n", 4, 1, "unknown statement"},
        {"circuit a\nemitters 1\nmodes 0 1\nhwp mode=0 theta=abc\n", 4, 18, "theta"},
        {"circuit a\nemitters 1\nmodes 0 1\nhwp mode=0 theta=\n", 4, 18, "missing value"},
        {"circuit a\nemitters 1\nmodes 0 0\n", 3, 9, "declared twice"},
        {"circuit a\nemitters 0\n", 2, 10, "emitter count"},
        {"circuit a\nemitters 1\nmodes 0 1\nmirror in=0 out=1\ndetect D1=(1,H)\nhwp mode=1 theta=0\n", 6, 1, ""},
        {"circuit a\nemitters 1\nmodes 0 1\nhwp mode=7 theta=0\ndetect D1=(1,H)\n", 4, 10, "not declared"},
        {"circuit a\nemitters 1\nmodes 0 1\nhwp mode=0 theta=0 extra=1\n", 4, 20, "unknown argument"},
        {"circuit a\nemitters 1\nmodes 0 1\nmixer a=0 b=1 u00=1 u01=1 u10=0 u11=1\n", 4, 1, "not unitary"},
        {"circuit a\nemitters 1\nmodes 0 1\nmirror in=0 out=1\ndetect D1=(1,H)\nfeedforward D7=I\n", 6, 13, "unknown detector"},
    };
    for (const auto &c : cases) {
        ParseError e = parse_error(c.text);
        EXPECT_EQ(e.line, c.line) << c.text;
        EXPECT_EQ(e.column, c.column) << c.text;
        EXPECT_NE(e.message.find(c.fragment), std::string::npos) << e.message;
        EXPECT_EQ(std::string(e.what()), "line " + std::to_string(e.line) + ", column " + std::to_string(e.column) + ": " + e.message);
    }
}

TEST(netlist, rejects_missing_bank_at_end_of_input) {
    ParseError e = parse_error("circuit a\nemitters 1\nmodes 0 1\nmirror in=0 out=1\n");
    ASSERT_EQ(e.line, 4u);
    ASSERT_NE(e.message.find("'detect'"), std::string::npos);
}

TEST(netlist, rejects_control_characters) {
    ParseError e = parse_error("circuit a\x01\n");
    ASSERT_EQ(e.line, 1u);
    ASSERT_EQ(e.column, 10u);
}
