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

#include "wgq/verify.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include <fmt/format.h>

#include "wgq/analysis.h"
#include "wgq/kernel.h"
#include "wgq/netlist.h"

namespace wgq {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng &rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

EmitterParams random_params(Rng &rng) {
    EmitterParams p;
    p.purcell = uniform(rng, 0, 1) < 0.1 ? Purcell::ideal() : Purcell::finite(std::exp(uniform(rng, 0.0, 6.0)));
    p.detuning = uniform(rng, -0.5, 0.5);
    return p;
}

std::vector<double> random_offsets(Rng &rng, size_t n, double scale) {
    std::vector<double> out(n);
    for (auto &d : out) {
        d = uniform(rng, -scale, scale);
    }
    return out;
}

/// Tracks the worst deviation seen against a tolerance.
struct Check {
    explicit Check(double tol) : tolerance(tol) {}
    double tolerance;
    double worst = 0;
    std::string failure;

    void near(double got, double want) {
        double d = std::abs(got - want);
        if (!(d <= worst)) {
            worst = d;
        }
    }
    void expect(bool ok, const std::string &what) {
        if (!ok && failure.empty()) {
            failure = what;
        }
    }
    PropertyResult result(const std::string &name) const {
        bool ok = failure.empty() && worst <= tolerance;
        std::string detail = failure.empty() ? fmt::format("max deviation {:.3g} (tol {:.0e})", worst, tolerance)
                                             : failure;
        return {name, ok, detail};
    }
};

std::vector<std::pair<std::string, Circuit>> all_builders(size_t n_generic) {
    ProtocolParams p2;
    ProtocolParams p3;
    p3.n = 3;
    ProtocolParams pn;
    pn.n = n_generic;
    return {
        {"klm2", build_two_qubit(p2)},
        {"klm3", build_three_qubit(p3)},
        {"klmN", build_n_qubit(pn)},
        {"heralded_z", build_heralded_z()},
    };
}

Environment random_environment(Rng &rng, size_t n) {
    EmitterParams nominal = random_params(rng);
    return make_environment(n, nominal, random_offsets(rng, n, 0.3));
}

SystemState random_state(Rng &rng, size_t n, const std::vector<SpatialMode> &modes) {
    Amplitudes amps;
    size_t count = 1 + rng() % 8;
    double norm = 0;
    for (size_t i = 0; i < count; i++) {
        Slot s{modes[rng() % modes.size()], rng() % 2 ? Polarization::H : Polarization::V, rng() % (1u << n)};
        cplx a(uniform(rng, -1, 1), uniform(rng, -1, 1));
        amps.push_back({s, a});
    }
    SystemState raw = SystemState::from_amplitudes(n, Basis::energy, amps);
    norm = raw.photon_norm();
    for (auto &[s, a] : amps) {
        a /= std::sqrt(norm);
    }
    return SystemState::from_amplitudes(n, Basis::energy, amps);
}

struct Property {
    std::string name;
    std::function<PropertyResult(const std::string &, Rng &)> run;
};

std::vector<Property> properties() {
    std::vector<Property> out;

    out.push_back({"scatter.t_minus_r", [](const std::string &name, Rng &rng) {
                       Check c{1e-12};
                       for (int i = 0; i < 200; i++) {
                           auto s = scatter_coeffs(random_params(rng));
                           c.near(std::abs(s.t - s.r - 1.0), 0);
                           c.expect(s.loss() >= -1e-15 && s.loss() <= 1, "loss outside [0, 1]");
                       }
                       return c.result(name);
                   }});

    out.push_back({"scatter.loss_closed_form", [](const std::string &name, Rng &rng) {
                       Check c{1e-12};
                       for (int i = 0; i < 200; i++) {
                           EmitterParams p = random_params(rng);
                           double inv = p.purcell.inverse();
                           double d = p.effective_detuning();
                           double want = 2 * inv / ((1 + inv) * (1 + inv) + 4 * d * d);
                           c.near(scatter_coeffs(p).loss(), want);
                       }
                       return c.result(name);
                   }});

    out.push_back({"scatter.monotonic", [](const std::string &name, Rng &rng) {
                       Check c{0};
                       for (int i = 0; i < 100; i++) {
                           double d = uniform(rng, -0.5, 0.5);
                           double p = std::exp(uniform(rng, 0, 5));
                           EmitterParams a{Purcell::finite(p), d, 0};
                           EmitterParams b{Purcell::finite(p * 1.5), d, 0};
                           EmitterParams e{Purcell::finite(p), std::abs(d) + 0.05, 0};
                           c.expect(heralded_z_success(b) > heralded_z_success(a), "not increasing in P");
                           c.expect(heralded_z_success(e) < heralded_z_success(a), "not decreasing in |d|");
                       }
                       return c.result(name);
                   }});

    out.push_back({"hwp.involutory", [](const std::string &name, Rng &rng) {
                       Check c{1e-12};
                       for (int i = 0; i < 100; i++) {
                           Matrix2 m = hwp_matrix(uniform(rng, -360, 360));
                           Matrix2 sq = m * m;
                           c.near(std::abs(sq.m00 - 1.0) + std::abs(sq.m01) + std::abs(sq.m10) + std::abs(sq.m11 - 1.0), 0);
                       }
                       return c.result(name);
                   }});

    out.push_back({"state.norm_conservation", [](const std::string &name, Rng &rng) {
                       Check c{1e-10};
                       for (int i = 0; i < 50; i++) {
                           for (const auto &[label, circuit] : all_builders(2 + rng() % 5)) {
                               Environment env = random_environment(rng, circuit.num_emitters);
                               auto r = execute(circuit, initial_state(circuit), env, true);
                               for (const auto &step : *r.trace) {
                                   c.near(step.state.total_norm(), 1.0);
                               }
                               double total = 0;
                               for (const auto &o : r.outcomes) {
                                   total += o.probability;
                               }
                               c.near(total + r.final_state.sink_total(), 1.0);
                           }
                       }
                       return c.result(name);
                   }});

    out.push_back({"state.linearity", [](const std::string &name, Rng &rng) {
                       Check c{1e-12};
                       std::vector<SpatialMode> modes = {{0}, {1}, {2}};
                       for (int i = 0; i < 100; i++) {
                           size_t n = 1 + rng() % 3;
                           SystemState a = random_state(rng, n, modes);
                           SystemState b = random_state(rng, n, modes);
                           cplx alpha(uniform(rng, -1, 1), uniform(rng, -1, 1));
                           cplx beta(uniform(rng, -1, 1), uniform(rng, -1, 1));
                           Amplitudes mix;
                           for (const auto &[s, x] : a.amplitudes()) {
                               mix.push_back({s, alpha * x});
                           }
                           for (const auto &[s, x] : b.amplitudes()) {
                               mix.push_back({s, beta * x});
                           }
                           SystemState ab = SystemState::from_amplitudes(n, Basis::energy, mix);
                           ScatterCoeffs coeffs = scatter_coeffs(random_params(rng));
                           std::vector<std::function<SystemState(SystemState)>> ops = {
                               [&](SystemState s) { return apply_polarization_unitary(std::move(s), {0}, hwp_matrix(17)); },
                               [&](SystemState s) { return apply_mode_mixer(std::move(s), {0}, {1}, vbs_matrix(0, 2)); },
                               [&](SystemState s) { return apply_attenuator(std::move(s), {1}, 0.7, {"L"}); },
                               [&](SystemState s) {
                                   return apply_emitter_scatter(std::move(s), {2}, 0, coeffs, {2}, {"E"});
                               },
                               [&](SystemState s) { return change_basis(std::move(s), Basis::plusminus); },
                           };
                           for (const auto &op : ops) {
                               SystemState ra = op(a);
                               SystemState rb = op(b);
                               SystemState rab = op(ab);
                               for (const auto &[s, x] : rab.amplitudes()) {
                                   c.near(std::abs(x - (alpha * ra.amplitude(s) + beta * rb.amplitude(s))), 0);
                               }
                               for (const auto &[s, x] : ra.amplitudes()) {
                                   c.near(std::abs(rab.amplitude(s) - (alpha * x + beta * rb.amplitude(s))), 0);
                               }
                           }
                       }
                       return c.result(name);
                   }});

    out.push_back({"state.scatter_diagonal", [](const std::string &name, Rng &rng) {
                       Check c{0};
                       std::vector<SpatialMode> modes = {{0}, {1}};
                       for (int i = 0; i < 100; i++) {
                           size_t n = 1 + rng() % 4;
                           SystemState s = random_state(rng, n, modes);
                           SystemState t = apply_emitter_scatter(
                               s, {0}, rng() % n, scatter_coeffs(random_params(rng)), {2}, {"E"});
                           for (const auto &[slot, a] : t.amplitudes()) {
                               if (slot.mode == SpatialMode{2}) {
                                   bool found = false;
                                   for (const auto &[orig, b] : s.amplitudes()) {
                                       found = found || (orig.mode == SpatialMode{0} && orig.config == slot.config &&
                                                         orig.pol == flipped(slot.pol));
                                   }
                                   c.expect(found, "scattering changed an emitter label");
                               }
                           }
                       }
                       return c.result(name);
                   }});

    out.push_back({"state.basis_round_trip", [](const std::string &name, Rng &rng) {
                       Check c{1e-12};
                       std::vector<SpatialMode> modes = {{0}, {1}};
                       for (int i = 0; i < 100; i++) {
                           size_t n = 1 + rng() % 5;
                           SystemState s = random_state(rng, n, modes);
                           SystemState back = change_basis(change_basis(s, Basis::plusminus), Basis::energy);
                           for (const auto &[slot, a] : s.amplitudes()) {
                               c.near(std::abs(back.amplitude(slot) - a), 0);
                           }
                           c.near(back.photon_norm(), s.photon_norm());
                       }
                       return c.result(name);
                   }});

    out.push_back({"circuit.trace_determinism", [](const std::string &name, Rng &rng) {
                       Check c{0};
                       for (int i = 0; i < 10; i++) {
                           for (const auto &[label, circuit] : all_builders(2 + rng() % 4)) {
                               Environment env = random_environment(rng, circuit.num_emitters);
                               auto a = execute(circuit, initial_state(circuit), env, false);
                               auto b = execute(circuit, initial_state(circuit), env, true);
                               auto d = execute(circuit, initial_state(circuit), env, false);
                               c.expect(a.final_state == b.final_state && a.final_state == d.final_state,
                                        fmt::format("{}: runs differ", label));
                               c.expect(a.sinks == b.sinks, fmt::format("{}: sinks differ", label));
                           }
                       }
                       return c.result(name);
                   }});

    out.push_back({"circuit.passivity", [](const std::string &name, Rng &) {
                       Check c{1e-12};
                       for (const auto &[label, circuit] : all_builders(6)) {
                           auto report = check_passive_unitarity(circuit);
                           for (const auto &e : report.entries) {
                               if (e.status != PassivityStatus::non_passive) {
                                   c.near(e.deviation, 0);
                               }
                           }
                           c.expect(report.ok(), fmt::format("{}: passive element violation", label));
                       }
                       return c.result(name);
                   }});

    out.push_back({"protocol.tables", [](const std::string &name, Rng &) {
                       Check c{1e-10};
                       for (size_t n : {2, 3}) {
                           ProtocolParams p;
                           p.n = n;
                           ProtocolRun run = run_protocol(n == 2 ? ProtocolKind::klm2 : ProtocolKind::klm3, p);
                           c.expect(run.outcomes.size() == 4, "expected four outcomes");
                           for (const auto &o : run.outcomes) {
                               c.near(o.probability, 0.25);
                               c.near(*o.fidelity, 1.0);
                           }
                       }
                       return c.result(name);
                   }});

    out.push_back({"protocol.klm_target", [](const std::string &name, Rng &rng) {
                       Check c{1e-10};
                       for (size_t n = 2; n <= 8; n++) {
                           ProtocolParams p;
                           p.n = n;
                           p.nominal = random_params(rng);
                           ProtocolRun run = run_protocol(ProtocolKind::klmN, p);
                           for (const auto &o : run.outcomes) {
                               c.near(*o.fidelity, 1.0);
                           }
                           c.near(run.success_probability(), success_probability(n, p.nominal));
                       }
                       return c.result(name);
                   }});

    out.push_back({"protocol.herald_completeness", [](const std::string &name, Rng &rng) {
                       Check c{1e-10};
                       for (int i = 0; i < 30; i++) {
                           size_t n = 2 + rng() % 4;
                           ProtocolParams p;
                           p.n = n;
                           p.nominal = random_params(rng);
                           p.offsets = random_offsets(rng, n, 0.4);
                           for (auto kind : {ProtocolKind::klmN, n == 2 ? ProtocolKind::klm2 : ProtocolKind::klmN,
                                             n == 3 ? ProtocolKind::klm3 : ProtocolKind::klmN}) {
                               ProtocolRun run = run_protocol(kind, p);
                               c.near(run.success_probability() + run.sink_total(), 1.0);
                           }
                       }
                       return c.result(name);
                   }});

    out.push_back({"analysis.closed_form_equivalence", [](const std::string &name, Rng &rng) {
                       Check c{1e-10};
                       for (int i = 0; i < 50; i++) {
                           size_t n = 2 + rng() % 4;
                           ProtocolParams p;
                           p.n = n;
                           p.nominal = random_params(rng);
                           c.near(run_protocol(protocol_for(n), p).success_probability(), success_probability(n, p.nominal));
                       }
                       return c.result(name);
                   }});

    out.push_back({"analysis.fidelity_sigma_monotone", [](const std::string &name, Rng &rng) {
                       Check c{0};
                       for (size_t n : {2, 3}) {
                           EmitterParams p{Purcell::finite(100), uniform(rng, -0.3, 0.3), 0};
                           double prev = 2;
                           for (double sigma : {0.0, 0.05, 0.1, 0.2}) {
                               BroadeningModel m;
                               m.sigma = sigma;
                               m.order = 12;
                               double f = averaged_fidelity(n, p, m).mean;
                               c.expect(f <= prev + 1e-12, fmt::format("N={} fidelity rose at sigma={}", n, sigma));
                               c.expect(f >= 0 && f <= 1 + 1e-12, "fidelity outside [0, 1]");
                               prev = f;
                           }
                       }
                       return c.result(name);
                   }});

    out.push_back({"kernel.matches_simulator", [](const std::string &name, Rng &rng) {
                       Check c{1e-10};
                       for (const auto &[label, circuit] : all_builders(4)) {
                           if (!circuit.feedforward.has_value()) {
                               continue;
                           }
                           cplx rn = scatter_coeffs(random_params(rng)).r;
                           auto k = FidelityKernel::compile(circuit, rn);
                           c.near(k.max_deviation(circuit, 20, rng()), 0);
                       }
                       return c.result(name);
                   }});

    out.push_back({"netlist.round_trip", [](const std::string &name, Rng &) {
                       Check c{0};
                       for (const auto &[label, circuit] : all_builders(5)) {
                           std::string text = serialize_netlist(circuit);
                           Circuit back = parse_netlist(text);
                           c.expect(back == circuit, fmt::format("{}: parse(serialize(c)) != c", label));
                           c.expect(serialize_netlist(back) == text, fmt::format("{}: serialization not idempotent", label));
                       }
                       return c.result(name);
                   }});

    return out;
}

}  // namespace

std::vector<std::string> property_names() {
    std::vector<std::string> out;
    for (const auto &p : properties()) {
        out.push_back(p.name);
    }
    return out;
}

std::vector<PropertyResult> run_verification(const std::string &filter, uint64_t seed) {
    std::vector<PropertyResult> out;
    for (const auto &p : properties()) {
        if (!filter.empty() && p.name.find(filter) == std::string::npos) {
            continue;
        }
        Rng rng(seed);
        try {
            out.push_back(p.run(p.name, rng));
        } catch (const std::exception &e) {
            out.push_back({p.name, false, fmt::format("exception: {}", e.what())});
        }
    }
    return out;
}

}  // namespace wgq
