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

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "dense_oracle.h"
#include "test_util.h"
#include "wgq/analysis.h"
#include "wgq/cli.h"
#include "wgq/netlist.h"
#include "wgq/report.h"

using namespace wgq;

namespace {

/// Collects the first failure of a criterion; later checks still run.
struct Verdict {
    std::string failure;
    std::vector<std::string> notes;

    void check(bool ok, const std::string &what) {
        if (!ok && failure.empty()) {
            failure = what;
        }
    }
    void near(double got, double want, double tol, const std::string &what) {
        check(std::abs(got - want) <= tol, fmt::format("{}: got {:.12g}, want {:.12g} +- {:.1e}", what, got, want, tol));
    }
    void note(const std::string &text) {
        notes.push_back(text);
    }
};

EmitterParams at(double purcell, double detuning) {
    EmitterParams p;
    p.purcell = Purcell::finite(purcell);
    p.detuning = detuning;
    return p;
}

ProtocolKind kind_for(size_t n) {
    return protocol_for(n);
}

double simulated_success(size_t n, const EmitterParams &nominal) {
    ProtocolParams p;
    p.n = n;
    p.nominal = nominal;
    return run_protocol(n == 1 ? ProtocolKind::heralded_z : kind_for(n), p).success_probability();
}

std::vector<int> sign_row(const EmitterState &conditioned) {
    size_t n = conditioned.num_emitters();
    std::vector<int> out;
    for (size_t minus = 0; minus <= n; minus++) {
        ConfigBits config = 0;
        for (size_t k = n - minus; k < n; k++) {
            config |= ConfigBits{1} << k;
        }
        out.push_back(conditioned[config].real() > 0 ? 1 : -1);
    }
    return out;
}

void ac1(Verdict &v) {
    double closed = heralded_z_success(at(100, 0.1));
    double sim = simulated_success(1, at(100, 0.1));
    v.near(closed, 0.9433, 5e-4, "closed form");
    v.near(sim, closed, 1e-10, "simulation vs closed form");
    v.note(fmt::format("p_h={:.6f}", sim));
}

void success_criterion(Verdict &v, size_t n, const std::vector<std::tuple<double, double, double, double>> &points) {
    for (auto [pf, d, want, tol] : points) {
        double closed = success_probability(n, at(pf, d));
        double sim = simulated_success(n, at(pf, d));
        v.near(closed, want, tol, fmt::format("closed form P={} d={}", pf, d));
        v.near(sim, closed, 1e-10, fmt::format("simulation vs closed form P={} d={}", pf, d));
        v.note(fmt::format("p{}({},{})={:.6f}", n, pf, d, sim));
    }
}

void ac2(Verdict &v) {
    success_criterion(v, 2, {{100, 0, 0.9610, 1.5e-3}, {100, 0.15, 0.8115, 5e-4}, {10, 0, 0.683, 1e-3}});
}

void ac3(Verdict &v) {
    success_criterion(v, 3, {{100, 0, 0.9420, 1.5e-3}, {100, 0.15, 0.7310, 5e-4}, {10, 0, 0.564, 1e-3}});
}

void ac4(Verdict &v) {
    struct Table {
        ProtocolKind kind;
        size_t n;
        std::vector<std::vector<int>> rows;
        std::vector<std::string> ops;
    };
    const Table tables[] = {
        {ProtocolKind::klm2, 2, {{1, 1, 1}, {1, 1, -1}, {1, -1, 1}, {1, -1, -1}}, {"II", "ZI", "ZZ", "IZ"}},
        {ProtocolKind::klm3, 3, {{1, 1, 1, 1}, {1, -1, -1, 1}, {1, -1, 1, -1}, {1, 1, -1, -1}}, {"III", "ZIZ", "ZZZ", "IZI"}},
    };
    double worst = 1;
    for (const auto &t : tables) {
        ProtocolParams p;
        p.n = t.n;
        ProtocolRun run = run_protocol(t.kind, p);
        v.check(run.outcomes.size() == 4, fmt::format("{}: {} outcomes", run.circuit_name, run.outcomes.size()));
        for (size_t q = 0; q < run.outcomes.size() && q < 4; q++) {
            const auto &o = run.outcomes[q];
            std::string tag = fmt::format("{} {}", run.circuit_name, o.detector);
            v.near(o.probability, 0.25, 1e-10, tag + " probability");
            v.check(sign_row(o.conditioned) == t.rows[q], tag + " heralded state differs from the table row");
            v.check(corrections_string(o.ops) == t.ops[q], tag + " feedforward differs from the table");
            v.check(o.fidelity.has_value() && *o.fidelity >= 1 - 1e-10, tag + " fidelity below 1 - 1e-10");
            worst = std::min(worst, o.fidelity.value_or(0));
        }
    }
    v.note(fmt::format("min fidelity 1-{:.1e}", 1 - worst));
}

void ac5(Verdict &v) {
    double worst_f = 1;
    double worst_p = 0;
    for (size_t n = 2; n <= 8; n++) {
        ProtocolParams p;
        p.n = n;
        ProtocolRun run = run_protocol(ProtocolKind::klmN, p);
        for (const auto &o : run.outcomes) {
            worst_f = std::min(worst_f, o.fidelity.value_or(0));
            v.check(o.fidelity.value_or(0) >= 1 - 1e-10, fmt::format("klm{} {} fidelity", n, o.detector));
        }
        for (double pf : {1.0, 5.0, 20.0, 100.0, 1000.0}) {
            for (double d : {-0.5, -0.2, 0.0, 0.15, 0.4}) {
                p.nominal = at(pf, d);
                double sim = run_protocol(ProtocolKind::klmN, p).success_probability();
                double want = std::pow(std::norm(scatter_coeffs(p.nominal).r), double(n));
                worst_p = std::max(worst_p, std::abs(sim - want));
                v.near(sim, want, 1e-10, fmt::format("klm{} success P={} d={}", n, pf, d));
            }
        }
    }
    props::Gen gen(5);
    for (size_t n : {2, 3}) {
        for (int trial = 0; trial < 10; trial++) {
            ProtocolParams p;
            p.n = n;
            p.nominal = gen.params();
            p.offsets = gen.offsets(n, 0.3);
            ProtocolRun a = run_protocol(kind_for(n), p);
            ProtocolRun b = run_protocol(ProtocolKind::klmN, p);
            v.near(b.success_probability(), a.success_probability(), 1e-10, fmt::format("N={} generic vs dedicated success", n));
            v.near(*b.weighted_fidelity(), *a.weighted_fidelity(), 1e-10, fmt::format("N={} generic vs dedicated fidelity", n));
        }
    }
    v.note(fmt::format("N=2..8, min F 1-{:.1e}, max |p-|r|^2N| {:.1e}", 1 - worst_f, worst_p));
}

void ac6(Verdict &v) {
    struct Case {
        size_t n;
        std::vector<std::vector<int>> rows;
    };
    const Case cases[] = {
        {2, {{1, 1, 1}, {1, 1, -1}, {1, -1, 1}, {1, -1, -1}}},
        {3, {{1, 1, 1, 1}, {1, -1, -1, 1}, {1, -1, 1, -1}, {1, 1, -1, -1}}},
    };
    double worst = 0;
    for (const auto &c : cases) {
        ProtocolParams p;
        p.n = c.n;
        p.nominal = at(100, 0.1);
        Circuit circuit = build_protocol(kind_for(c.n), p);
        Environment env = make_environment(p);
        cplx r = env.emitters[0].r;
        cplx unit = c.n == 2 ? r * r / (2 * std::sqrt(3.0)) : r * r * r / 4.0;
        ExecutionResult res = execute(circuit, initial_state(circuit), env, true);

        // Post-BS step: every occupied slot carries +-unit on the KLM support.
        size_t last_mixer = 0;
        for (size_t i = 0; i < res.trace->size(); i++) {
            if ((*res.trace)[i].kind == "mixer") {
                last_mixer = i;
            }
        }
        SystemState post = change_basis((*res.trace)[last_mixer].state, Basis::plusminus);
        size_t occupied = 0;
        for (const auto &[slot, a] : post.amplitudes()) {
            if (std::abs(a) < 1e-14) {
                continue;
            }
            occupied++;
            double dev = std::min(std::abs(a / unit - 1.0), std::abs(a / unit + 1.0));
            worst = std::max(worst, dev);
            v.check(dev <= 1e-10, fmt::format("klm{} post-BS amplitude off pattern by {:.2e}", c.n, dev));
        }
        v.check(occupied == 4 * (c.n + 1), fmt::format("klm{} post-BS has {} occupied slots", c.n, occupied));

        // Detector slots carry the table sign rows.
        SystemState pm = change_basis(res.final_state, Basis::plusminus);
        const auto &bank = circuit.detector_bank().detectors;
        for (size_t q = 0; q < 4; q++) {
            size_t k = 0;
            for (size_t minus = 0; minus <= c.n; minus++) {
                ConfigBits config = 0;
                for (size_t b = c.n - minus; b < c.n; b++) {
                    config |= ConfigBits{1} << b;
                }
                cplx a = pm.amplitude({bank[q].mode, bank[q].pol, config});
                double dev = std::abs(a / unit - double(c.rows[q][k++]));
                worst = std::max(worst, dev);
                v.check(dev <= 1e-10, fmt::format("klm{} {} amplitude off by {:.2e}", c.n, bank[q].id, dev));
            }
        }
    }
    v.note(fmt::format("max slot deviation {:.1e}", worst));
}

void ac7(Verdict &v) {
    props::Gen gen(7);
    double worst = 0;
    size_t runs = 0;
    for (int i = 0; i < 200; i++) {
        ProtocolParams base;
        base.nominal = gen.params();
        for (const auto &c : props::all_builders(base, 6)) {
            Environment env = make_environment(c.num_emitters, base.nominal, gen.offsets(c.num_emitters, 0.4));
            ProtocolRun run = run_circuit(c, env);
            double dev = std::abs(run.success_probability() + run.sink_total() - 1);
            worst = std::max(worst, dev);
            v.check(dev <= 1e-10, fmt::format("{} off by {:.2e}", c.name, dev));
            runs++;
        }
    }
    v.note(fmt::format("{} runs, max |sum-1| {:.1e}", runs, worst));
}

void ac8(Verdict &v) {
    // (a) unbroadened fidelity across the detuning grid
    for (size_t n : {2, 3}) {
        BroadeningModel m;
        for (double d : default_grid(SweepKind::fig8)) {
            v.near(averaged_fidelity(n, at(100, d), m).mean, 1, 1e-10, fmt::format("N={} sigma=0 d={}", n, d));
        }
    }
    // (b) strict decrease in sigma
    for (size_t n : {2, 3}) {
        double prev = 2;
        for (double sigma : {0.0, 0.1, 0.2}) {
            BroadeningModel m;
            m.sigma = sigma;
            double f = averaged_fidelity(n, at(100, 0), m).mean;
            v.check(f < prev, fmt::format("N={} not decreasing at sigma={}", n, sigma));
            prev = f;
        }
    }
    // (c) quadrature vs sampling
    double worst_z = 0;
    for (size_t n : {2, 3}) {
        for (double sigma : {0.1, 0.2}) {
            BroadeningModel gh;
            gh.sigma = sigma;
            BroadeningModel mc = gh;
            mc.method = AveragingMethod::monte_carlo;
            mc.samples = 1000000;
            mc.seed = 20260101 + n;
            double a = averaged_fidelity(n, at(100, 0), gh).mean;
            AveragedFidelity b = averaged_fidelity(n, at(100, 0), mc);
            double z = std::abs(a - b.mean) / b.standard_error;
            worst_z = std::max(worst_z, z);
            v.check(z <= 3, fmt::format("N={} sigma={}: GH {:.9f} vs MC {:.9f} ({:.2f} SE)", n, sigma, a, b.mean, z));
        }
    }
    // (d) dense re-implementation
    props::Gen gen(8);
    double worst_dense = 0;
    for (int i = 0; i < 20; i++) {
        size_t n = 2 + size_t(i % 2);
        ProtocolParams p;
        p.n = n;
        p.nominal = at(100, gen.uniform(-0.3, 0.3));
        p.offsets = gen.offsets(n, 0.4);
        Circuit c = build_protocol(kind_for(n), p);
        std::vector<cplx> r;
        for (double o : p.offsets) {
            r.push_back(oracle::dense_reflection(100, p.nominal.detuning + o));
        }
        double dense = oracle::dense_run(c, r, oracle::dense_reflection(100, p.nominal.detuning)).weighted_fidelity;
        double f = conditioned_fidelity(n, p.nominal, p.offsets);
        worst_dense = std::max(worst_dense, std::abs(dense - f));
        v.near(f, dense, 1e-10, fmt::format("dense oracle N={} vector {}", n, i));
    }
    v.note(fmt::format("max GH/MC gap {:.2f} SE, max dense gap {:.1e}", worst_z, worst_dense));
}

std::string run_cli_capture(const std::vector<std::string> &args, int &code) {
    std::vector<const char *> argv = {"wgq"};
    for (const auto &a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out;
    std::ostringstream err;
    code = run_cli(int(argv.size()), argv.data(), out, err);
    return out.str();
}

void ac9(Verdict &v) {
    size_t files = 0;
    for (const auto &entry : std::filesystem::directory_iterator(WGQ_NETLIST_DIR)) {
        if (entry.path().extension() != ".wgq") {
            continue;
        }
        std::ifstream in(entry.path());
        std::stringstream ss;
        ss << in.rdbuf();
        Circuit c = parse_netlist(ss.str());
        v.check(parse_netlist(serialize_netlist(c)) == c, entry.path().filename().string() + " does not round-trip");
        v.check(serialize_netlist(c) == props::without_header(ss.str()), entry.path().filename().string() + " is not in canonical form");
        files++;
    }
    v.check(files >= 4, fmt::format("only {} shipped netlists", files));
    for (const auto &extra : std::vector<std::vector<std::string>>{{}, {"--purcell", "100", "--detuning", "0.1", "--offsets=0.2,-0.1"}}) {
        std::vector<std::string> run = {"run", "--protocol", "klm2"};
        std::vector<std::string> exec = {"exec", (std::filesystem::path(WGQ_NETLIST_DIR) / "klm2.wgq").string()};
        run.insert(run.end(), extra.begin(), extra.end());
        exec.insert(exec.end(), extra.begin(), extra.end());
        int a_code = 0;
        int b_code = 0;
        std::string a = run_cli_capture(run, a_code);
        std::string b = run_cli_capture(exec, b_code);
        v.check(a_code == 0 && b_code == 0, "run/exec exit status");
        if (a_code == 0 && b_code == 0) {
            v.check(without_meta(nlohmann::json::parse(a)).dump(2) == without_meta(nlohmann::json::parse(b)).dump(2),
                    "exec klm2.wgq differs from run --protocol klm2");
        }
    }
    v.note(fmt::format("{} netlists round-trip; exec == run", files));
}

void ac10(Verdict &v) {
    auto t0 = std::chrono::steady_clock::now();
    SweepResult fig6 = sweep(SweepKind::fig6, {});
    double sweep_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    v.check(fig6.grid.size() == 100, "fig6 grid");
    v.check(sweep_s < 10, fmt::format("fig6 sweep took {:.2f} s", sweep_s));

    ProtocolParams p;
    p.n = 10;
    p.nominal = at(100, 0);
    t0 = std::chrono::steady_clock::now();
    ProtocolRun run = run_protocol(ProtocolKind::klmN, p);
    double run_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    v.check(run_s < 1, fmt::format("N=10 run took {:.3f} s", run_s));
    v.near(run.success_probability(), 0.8195444703372955751, 1e-10, "N=10 success");
    v.note(fmt::format("fig6 {:.3f} s, N=10 {:.3f} s", sweep_s, run_s));
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void(Verdict &)>>> criteria = {
        {"AC1 heralded-Z success", ac1},
        {"AC2 two-qubit success", ac2},
        {"AC3 three-qubit success", ac3},
        {"AC4 herald tables", ac4},
        {"AC5 N-emitter generalization", ac5},
        {"AC6 intermediate amplitudes", ac6},
        {"AC7 norm bookkeeping", ac7},
        {"AC8 broadening properties", ac8},
        {"AC9 netlist round trip", ac9},
        {"AC10 performance", ac10},
    };
    size_t failed = 0;
    for (const auto &[name, body] : criteria) {
        Verdict v;
        try {
            body(v);
        } catch (const std::exception &e) {
            v.check(false, fmt::format("exception: {}", e.what()));
        }
        bool ok = v.failure.empty();
        failed += ok ? 0 : 1;
        std::string detail = ok ? "" : v.failure;
        for (const auto &n : v.notes) {
            if (ok) {
                detail += (detail.empty() ? "" : "; ") + n;
            }
        }
        std::cout << fmt::format("{} {:<32} {}\n", ok ? "PASS" : "FAIL", name, detail);
    }
    std::cout << fmt::format("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
