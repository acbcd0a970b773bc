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

#include "wgq/circuit.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include <fmt/format.h>

namespace wgq {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string with_index(std::optional<size_t> index, const std::string &message) {
    if (index.has_value()) {
        return fmt::format("component {}: {}", *index, message);
    }
    return message;
}

}  // namespace

CircuitError::CircuitError(std::optional<size_t> index, const std::string &message)
    : InvalidParameter(with_index(index, message)), component_index(index) {
}

Matrix2 bs_matrix() {
    double s = 1.0 / std::numbers::sqrt2;
    return {s, s, s, -s};
}

Matrix2 bs_prime_matrix() {
    double s = 1.0 / std::numbers::sqrt2;
    return {-s, s, s, s};
}

Matrix2 vbs_matrix(int k, int n) {
    if (n < 1 || k < 0 || k >= n) {
        throw InvalidParameter(fmt::format("VBS stage needs 0 <= k < n, got k={} n={}", k, n));
    }
    double peel = 1.0 / std::sqrt(double(n + 1 - k));
    double keep = std::sqrt(double(n - k) / double(n + 1 - k));
    // Columns are the images of |u> and |l>.
    return {-keep, peel, peel, keep};
}

Matrix2 MixerConvention::matrix() const {
    switch (kind) {
        case MixerKind::bs:
            return bs_matrix();
        case MixerKind::bs_prime:
            return bs_prime_matrix();
        case MixerKind::vbs:
            return vbs_matrix(k, n);
        case MixerKind::custom:
            return custom;
    }
    throw InvalidParameter("unknown mixer kind");
}

std::string component_kind(const Component &c) {
    return std::visit(
        overloaded{
            [](const Pbs &) { return "pbs"; },
            [](const Mixer &) { return "mixer"; },
            [](const Hwp &) { return "hwp"; },
            [](const Attenuator &) { return "attenuator"; },
            [](const EmitterScatter &) { return "scatter"; },
            [](const Mirror &) { return "mirror"; },
            [](const DetectorBank &) { return "detect"; },
        },
        c);
}

const FeedforwardEntry *FeedforwardRule::find(const std::string &detector) const {
    for (const auto &e : entries) {
        if (e.detector == detector) {
            return &e;
        }
    }
    return nullptr;
}

std::string corrections_string(const std::vector<Correction> &ops) {
    std::string out;
    for (auto op : ops) {
        out.push_back(op == Correction::I ? 'I' : 'Z');
    }
    return out;
}

std::vector<Correction> parse_corrections(const std::string &text) {
    std::vector<Correction> out;
    for (char c : text) {
        if (c == 'I') {
            out.push_back(Correction::I);
        } else if (c == 'Z') {
            out.push_back(Correction::Z);
        } else {
            throw InvalidParameter(fmt::format("bad correction '{}' in '{}', expected I or Z", c, text));
        }
    }
    return out;
}

void Circuit::validate(bool require_detectors) const {
    if (num_emitters < 1 || num_emitters > MAX_EMITTERS) {
        throw CircuitError(std::nullopt, fmt::format("emitter count {} out of range [1, {}]", num_emitters, MAX_EMITTERS));
    }
    std::set<SpatialMode> declared;
    for (auto m : modes) {
        if (!declared.insert(m).second) {
            throw CircuitError(std::nullopt, fmt::format("mode {} declared twice", m.label));
        }
    }
    auto need = [&](std::optional<size_t> i, SpatialMode m) {
        if (!declared.count(m)) {
            throw CircuitError(i, fmt::format("mode {} is not declared", m.label));
        }
    };
    need(std::nullopt, input.mode);
    if (input.emitters.size() != num_emitters) {
        throw CircuitError(
            std::nullopt,
            fmt::format("input prepares {} emitters but the circuit has {}", input.emitters.size(), num_emitters));
    }

    std::set<SinkId> sinks;
    auto need_sink = [&](size_t i, const SinkId &s) {
        if (s.name.empty()) {
            throw CircuitError(i, "empty sink name");
        }
        if (!sinks.insert(s).second) {
            throw CircuitError(i, fmt::format("sink '{}' is used by more than one component", s.name));
        }
    };

    size_t banks = 0;
    for (size_t i = 0; i < components.size(); i++) {
        std::visit(
            overloaded{
                [&](const Pbs &c) {
                    std::set<std::pair<SpatialMode, Polarization>> seen;
                    for (const auto &r : c.routing) {
                        need(i, r.in);
                        need(i, r.out);
                        if (!seen.insert({r.in, r.pol}).second) {
                            throw CircuitError(i, fmt::format("PBS routes ({},{}) twice", r.in.label, pol_char(r.pol)));
                        }
                    }
                },
                [&](const Mixer &c) {
                    need(i, c.a);
                    need(i, c.b);
                    if (c.a == c.b) {
                        throw CircuitError(i, "mixer needs two distinct modes");
                    }
                    Matrix2 u;
                    try {
                        u = c.convention.matrix();
                    } catch (const InvalidParameter &e) {
                        throw CircuitError(i, e.what());
                    }
                    if (!u.is_unitary()) {
                        throw CircuitError(i, "mixer matrix is not unitary");
                    }
                },
                [&](const Hwp &c) {
                    need(i, c.mode);
                    if (!std::isfinite(c.theta_degrees)) {
                        throw CircuitError(i, "HWP angle must be finite");
                    }
                },
                [&](const Attenuator &c) {
                    need(i, c.mode);
                    need_sink(i, c.sink);
                    if (c.coefficient.symbolic) {
                        if (c.coefficient.power < 0) {
                            throw CircuitError(i, "attenuator power must be >= 0");
                        }
                    } else if (std::abs(c.coefficient.value) > 1.0 + 1e-12) {
                        throw CircuitError(i, "attenuator coefficient magnitude exceeds 1");
                    }
                },
                [&](const EmitterScatter &c) {
                    need(i, c.in);
                    need(i, c.out);
                    need_sink(i, c.sink);
                    if (c.emitter >= num_emitters) {
                        throw CircuitError(
                            i, fmt::format("emitter index {} out of range for {} emitters", c.emitter, num_emitters));
                    }
                },
                [&](const Mirror &c) {
                    need(i, c.in);
                    need(i, c.out);
                },
                [&](const DetectorBank &c) {
                    banks++;
                    if (i + 1 != components.size()) {
                        throw CircuitError(i, "the detector bank must be the final component");
                    }
                    if (c.detectors.empty()) {
                        throw CircuitError(i, "empty detector bank");
                    }
                    std::set<std::string> ids;
                    std::set<std::pair<SpatialMode, Polarization>> keys;
                    for (const auto &d : c.detectors) {
                        need(i, d.mode);
                        if (!ids.insert(d.id).second) {
                            throw CircuitError(i, fmt::format("detector '{}' declared twice", d.id));
                        }
                        if (!keys.insert({d.mode, d.pol}).second) {
                            throw CircuitError(
                                i, fmt::format("two detectors watch ({},{})", d.mode.label, pol_char(d.pol)));
                        }
                    }
                },
            },
            components[i]);
    }
    if (require_detectors && banks != 1) {
        throw CircuitError(std::nullopt, "a circuit needs exactly one detector bank");
    }

    if (feedforward.has_value()) {
        if (banks != 1) {
            throw CircuitError(std::nullopt, "feedforward rules need a detector bank");
        }
        const auto &bank = std::get<DetectorBank>(components.back());
        std::set<std::string> seen;
        for (const auto &e : feedforward->entries) {
            if (!seen.insert(e.detector).second) {
                throw CircuitError(std::nullopt, fmt::format("feedforward for '{}' given twice", e.detector));
            }
            if (e.ops.size() != num_emitters) {
                throw CircuitError(
                    std::nullopt,
                    fmt::format("feedforward for '{}' has {} entries, expected {}", e.detector, e.ops.size(), num_emitters));
            }
            bool known = std::any_of(
                bank.detectors.begin(), bank.detectors.end(), [&](const DetectorKey &d) { return d.id == e.detector; });
            if (!known) {
                throw CircuitError(std::nullopt, fmt::format("feedforward names unknown detector '{}'", e.detector));
            }
        }
        for (const auto &d : bank.detectors) {
            if (!seen.count(d.id)) {
                throw CircuitError(std::nullopt, fmt::format("detector '{}' has no feedforward rule", d.id));
            }
        }
    }
}

const DetectorBank &Circuit::detector_bank() const {
    if (components.empty() || !std::holds_alternative<DetectorBank>(components.back())) {
        throw CircuitError(std::nullopt, "circuit has no detector bank");
    }
    return std::get<DetectorBank>(components.back());
}

Environment Environment::uniform(size_t num_emitters, const EmitterParams &params) {
    Environment env;
    env.emitters.assign(num_emitters, scatter_coeffs(params));
    env.r_nominal = env.emitters.empty() ? cplx(-1.0) : env.emitters[0].r;
    return env;
}

SystemState initial_state(const Circuit &circuit) {
    return new_state(circuit.num_emitters, circuit.input.mode, circuit.input.pol, circuit.input.emitters);
}

SystemState apply_component(SystemState state, const Component &component, const Environment &env) {
    return std::visit(
        overloaded{
            [&](const Pbs &c) { return apply_pbs(std::move(state), c.routing); },
            [&](const Mixer &c) { return apply_mode_mixer(std::move(state), c.a, c.b, c.convention.matrix()); },
            [&](const Hwp &c) { return apply_polarization_unitary(std::move(state), c.mode, hwp_matrix(c.theta_degrees)); },
            [&](const Attenuator &c) {
                cplx coefficient = c.coefficient.symbolic ? std::pow(env.r_nominal, c.coefficient.power) : c.coefficient.value;
                if (c.coefficient.symbolic && c.coefficient.power == 0) {
                    coefficient = 1.0;
                }
                return apply_attenuator(std::move(state), c.mode, coefficient, c.sink);
            },
            [&](const EmitterScatter &c) {
                if (c.emitter >= env.emitters.size()) {
                    throw InvalidParameter(fmt::format("no scattering data for emitter {}", c.emitter));
                }
                return apply_emitter_scatter(std::move(state), c.in, c.emitter, env.emitters[c.emitter], c.out, c.sink);
            },
            [&](const Mirror &c) { return apply_mirror(std::move(state), c.in, c.out); },
            [&](const DetectorBank &) { return std::move(state); },
        },
        component);
}

ExecutionResult execute(const Circuit &circuit, const SystemState &initial, const Environment &env, bool trace) {
    circuit.validate(false);
    if (initial.num_emitters() != circuit.num_emitters) {
        throw CircuitError(
            std::nullopt,
            fmt::format("initial state has {} emitters, circuit expects {}", initial.num_emitters(), circuit.num_emitters));
    }
    std::set<SpatialMode> declared(circuit.modes.begin(), circuit.modes.end());
    for (const auto &[slot, a] : initial.amplitudes()) {
        if (!declared.count(slot.mode)) {
            throw CircuitError(std::nullopt, fmt::format("initial state occupies undeclared mode {}", slot.mode.label));
        }
    }

    SystemState state = initial;
    for (const auto &c : circuit.components) {
        if (const auto *a = std::get_if<Attenuator>(&c)) {
            state.declare_sink(a->sink);
        } else if (const auto *s = std::get_if<EmitterScatter>(&c)) {
            state.declare_sink(s->sink);
        }
    }

    ExecutionResult result{{}, {}, state, std::nullopt};
    if (trace) {
        result.trace.emplace();
    }
    const DetectorBank *bank = nullptr;
    for (size_t i = 0; i < circuit.components.size(); i++) {
        const Component &c = circuit.components[i];
        if (const auto *b = std::get_if<DetectorBank>(&c)) {
            bank = b;
            break;
        }
        try {
            state = apply_component(std::move(state), c, env);
        } catch (const CircuitError &) {
            throw;
        } catch (const InvalidParameter &e) {
            throw CircuitError(i, fmt::format("{}: {}", component_kind(c), e.what()));
        }
        if (trace) {
            result.trace->push_back({i, component_kind(c), state});
        }
    }
    if (bank != nullptr) {
        try {
            result.outcomes = measure_detector_bank(state, bank->detectors);
        } catch (const InvalidParameter &e) {
            throw CircuitError(circuit.components.size() - 1, fmt::format("detect: {}", e.what()));
        }
    }
    result.sinks = state.sinks();
    result.final_state = std::move(state);
    return result;
}

std::string export_trace(const std::vector<TraceStep> &trace) {
    std::string out;
    for (const auto &step : trace) {
        out += fmt::format("# step {} {}\n", step.component_index, step.kind);
        out += step.state.dump();
    }
    return out;
}

bool PassivityReport::ok() const {
    return std::none_of(
        entries.begin(), entries.end(), [](const PassivityEntry &e) { return e.status == PassivityStatus::violation; });
}

std::vector<PassivityEntry> PassivityReport::violations() const {
    std::vector<PassivityEntry> out;
    for (const auto &e : entries) {
        if (e.status == PassivityStatus::violation) {
            out.push_back(e);
        }
    }
    return out;
}

PassivityReport check_passive_unitarity(const Circuit &circuit, double tolerance) {
    PassivityReport report{{}, tolerance};
    std::vector<std::pair<SpatialMode, Polarization>> basis;
    for (auto m : circuit.modes) {
        basis.push_back({m, Polarization::H});
        basis.push_back({m, Polarization::V});
    }
    Environment env;

    for (size_t i = 0; i < circuit.components.size(); i++) {
        const Component &c = circuit.components[i];
        std::string kind = component_kind(c);
        if (std::holds_alternative<DetectorBank>(c)) {
            continue;
        }
        if (std::holds_alternative<Attenuator>(c) || std::holds_alternative<EmitterScatter>(c)) {
            report.entries.push_back({i, kind, PassivityStatus::non_passive, 0.0});
            continue;
        }

        // Images of each basis slot.
        std::vector<SystemState> images;
        bool failed = false;
        for (const auto &[mode, pol] : basis) {
            SystemState s = SystemState::from_amplitudes(1, Basis::energy, {{{mode, pol, 0}, 1.0}});
            try {
                images.push_back(apply_component(std::move(s), c, env));
            } catch (const InvalidParameter &) {
                failed = true;
                break;
            }
        }
        // Routing elements: norms only.
        bool routing = std::holds_alternative<Pbs>(c) || std::holds_alternative<Mirror>(c);
        double deviation = failed ? 1.0 : 0.0;
        for (size_t a = 0; a < images.size() && !failed; a++) {
            for (size_t b = a; b < (routing ? a + 1 : images.size()); b++) {
                cplx g = 0;
                for (const auto &[slot, x] : images[a].amplitudes()) {
                    g += std::conj(x) * images[b].amplitude(slot);
                }
                double target = a == b ? 1.0 : 0.0;
                deviation = std::max(deviation, std::abs(g - target));
            }
        }
        auto status = deviation <= tolerance ? PassivityStatus::passive_ok : PassivityStatus::violation;
        report.entries.push_back({i, kind, status, deviation});
    }
    return report;
}

}  // namespace wgq
