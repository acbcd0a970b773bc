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

#include "wgq/protocols.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>

#include <fmt/format.h>

namespace wgq {

namespace {

constexpr Polarization H = Polarization::H;
constexpr Polarization V = Polarization::V;

SpatialMode m(uint32_t label) {
    return SpatialMode{label};
}

/// Accumulates components and records every mode in order of first use.
class Builder {
   public:
    Builder(std::string name, size_t n, SpatialMode input, Polarization pol) {
        circuit_.name = std::move(name);
        circuit_.num_emitters = n;
        circuit_.input = {input, pol, std::vector<EmitterLabel>(n, EmitterLabel::plus)};
        use(input);
    }

    void pbs(std::vector<PbsRoute> routes) {
        for (const auto &r : routes) {
            use(r.in);
            use(r.out);
        }
        circuit_.components.push_back(Pbs{std::move(routes)});
    }
    void mixer(uint32_t a, uint32_t b, MixerConvention convention) {
        use(m(a));
        use(m(b));
        circuit_.components.push_back(Mixer{m(a), m(b), convention});
    }
    void hwp(uint32_t mode, double theta) {
        use(m(mode));
        circuit_.components.push_back(Hwp{m(mode), theta});
    }
    void attenuator(uint32_t mode, int power, const std::string &sink) {
        use(m(mode));
        circuit_.components.push_back(Attenuator{m(mode), AttenuatorCoefficient::rnom_power(power), SinkId{sink}});
    }
    void scatter(uint32_t in, size_t emitter, uint32_t out, const std::string &sink) {
        use(m(in));
        use(m(out));
        circuit_.components.push_back(EmitterScatter{m(in), emitter, m(out), SinkId{sink}});
    }
    void mirror(uint32_t in, uint32_t out) {
        use(m(in));
        use(m(out));
        circuit_.components.push_back(Mirror{m(in), m(out)});
    }
    void declare(uint32_t mode) {
        use(m(mode));
    }
    void detect(std::vector<DetectorKey> keys) {
        for (const auto &k : keys) {
            use(k.mode);
        }
        circuit_.components.push_back(DetectorBank{std::move(keys)});
    }
    void feedforward(std::vector<std::pair<std::string, std::string>> rows) {
        FeedforwardRule rule;
        for (auto &[id, ops] : rows) {
            rule.entries.push_back({id, parse_corrections(ops)});
        }
        circuit_.feedforward = std::move(rule);
    }

    Circuit finish() {
        std::sort(circuit_.modes.begin(), circuit_.modes.end());
        circuit_.validate();
        return std::move(circuit_);
    }

   private:
    void use(SpatialMode mode) {
        if (seen_.insert(mode).second) {
            circuit_.modes.push_back(mode);
        }
    }
    Circuit circuit_;
    std::set<SpatialMode> seen_;
};

MixerConvention bs() {
    return {MixerKind::bs, 0, 0, Matrix2::identity()};
}
MixerConvention bs_prime() {
    return {MixerKind::bs_prime, 0, 0, Matrix2::identity()};
}
MixerConvention vbs(int k, int n) {
    return {MixerKind::vbs, k, n, Matrix2::identity()};
}

void require_n(const ProtocolParams &params, size_t n, const char *what) {
    params.validate();
    if (params.n != n) {
        throw InvalidParameter(fmt::format("{} needs N = {}, got {}", what, n, params.n));
    }
}

}  // namespace

std::string protocol_name(ProtocolKind kind) {
    switch (kind) {
        case ProtocolKind::klm2:
            return "klm2";
        case ProtocolKind::klm3:
            return "klm3";
        case ProtocolKind::klmN:
            return "klmN";
        case ProtocolKind::heralded_z:
            return "heralded_z";
    }
    return "?";
}

ProtocolKind parse_protocol_kind(const std::string &text) {
    for (auto k : {ProtocolKind::klm2, ProtocolKind::klm3, ProtocolKind::klmN, ProtocolKind::heralded_z}) {
        if (protocol_name(k) == text) {
            return k;
        }
    }
    throw InvalidParameter(fmt::format("unknown protocol '{}', expected klm2, klm3, klmN or heralded_z", text));
}

void ProtocolParams::validate() const {
    if (n < 2 || n > MAX_EMITTERS) {
        throw InvalidParameter(fmt::format("N must be in [2, {}], got {}", MAX_EMITTERS, n));
    }
    nominal.validate();
    if (!offsets.empty() && offsets.size() != n) {
        throw InvalidParameter(fmt::format("expected {} offsets, got {}", n, offsets.size()));
    }
    for (double d : offsets) {
        if (!std::isfinite(d)) {
            throw InvalidParameter("offsets must be finite");
        }
    }
}

Circuit build_two_qubit(const ProtocolParams &params) {
    require_n(params, 2, "build_two_qubit");
    Builder b("klm2", 2, m(0), H);
    b.hwp(0, params.rounded_prep_angle ? KLM2_PREP_ANGLE_ROUNDED : KLM2_PREP_ANGLE);
    b.pbs({{m(0), H, m(1)}, {m(0), V, m(2)}});
    b.pbs({{m(2), V, m(12)}});
    b.scatter(12, 1, 13, "D'1");
    b.pbs({{m(13), H, m(4)}});
    b.mixer(3, 4, bs_prime());
    b.pbs({{m(4), H, m(15)}});
    b.scatter(15, 0, 16, "D'2");
    b.pbs({{m(16), V, m(17)}});
    b.attenuator(1, 2, "T2");
    b.attenuator(3, 1, "T1");
    b.pbs({{m(3), H, m(5)}, {m(17), V, m(5)}});
    b.hwp(1, 22.5);
    b.hwp(5, 22.5);
    b.mirror(1, 6);
    b.mirror(5, 7);
    b.mixer(6, 7, bs());
    b.pbs({{m(6), H, m(8)}, {m(6), V, m(9)}});
    b.pbs({{m(7), H, m(10)}, {m(7), V, m(11)}});
    b.detect({{"D1", m(8), H}, {"D2", m(9), V}, {"D3", m(11), V}, {"D4", m(10), H}});
    b.feedforward({{"D1", "II"}, {"D2", "ZI"}, {"D3", "ZZ"}, {"D4", "IZ"}});
    return b.finish();
}

Circuit build_three_qubit(const ProtocolParams &params) {
    require_n(params, 3, "build_three_qubit");
    Builder b("klm3", 3, m(0), H);
    b.hwp(0, 30.0);
    b.pbs({{m(0), H, m(1)}, {m(0), V, m(2)}});
    b.pbs({{m(2), V, m(21)}});
    b.scatter(21, 2, 22, "D'1");
    b.pbs({{m(22), H, m(4)}});
    b.mixer(3, 4, vbs(1, 3));
    b.pbs({{m(4), H, m(23)}});
    b.scatter(23, 1, 24, "D'2");
    b.pbs({{m(24), V, m(6)}});
    b.mixer(5, 6, vbs(2, 3));
    b.attenuator(1, 3, "T3");
    b.hwp(3, 45.0);
    b.attenuator(3, 2, "T2");
    b.pbs({{m(1), H, m(7)}, {m(3), V, m(7)}});
    b.attenuator(5, 1, "T1");
    b.pbs({{m(6), V, m(25)}});
    b.scatter(25, 0, 26, "D'3");
    b.pbs({{m(26), H, m(27)}});
    b.pbs({{m(5), V, m(8)}, {m(27), H, m(8)}});
    b.hwp(7, 22.5);
    b.hwp(8, 22.5);
    b.mirror(7, 9);
    b.mirror(8, 10);
    b.mixer(9, 10, bs());
    b.pbs({{m(9), H, m(31)}, {m(9), V, m(32)}});
    b.pbs({{m(10), H, m(33)}, {m(10), V, m(34)}});
    b.detect({{"D1", m(31), H}, {"D2", m(32), V}, {"D3", m(34), V}, {"D4", m(33), H}});
    b.feedforward({{"D1", "III"}, {"D2", "ZIZ"}, {"D3", "ZZZ"}, {"D4", "IZI"}});
    return b.finish();
}

Circuit build_n_qubit(const ProtocolParams &params) {
    params.validate();
    const size_t n = params.n;
    const uint32_t N = uint32_t(n);
    auto peel = [](uint32_t j) { return 100 + j; };
    auto scattered = [](uint32_t j) { return 200 + j; };
    auto pair_mode = [](uint32_t p) { return 300 + p; };

    Builder b(fmt::format("klm{}", n), n, m(0), V);
    uint32_t chain = 0;
    for (uint32_t j = 1; j <= N; j++) {
        b.mixer(peel(j), chain, vbs(int(j - 1), int(N)));
        b.attenuator(peel(j), int(N + 1 - j), fmt::format("T{}", N + 1 - j));
        b.scatter(chain, N - j, scattered(j), fmt::format("D'{}", j));
        if (j < N) {
            b.hwp(scattered(j), 45.0);
        }
        chain = scattered(j);
    }

    // Branch b < N sits on peel(b+1) in V; branch N on scattered(N) in H.
    // Even branches go to H, odd ones to V, two per pair mode.
    auto branch_mode = [&](uint32_t br) { return br < N ? peel(br + 1) : scattered(N); };
    auto branch_pol = [&](uint32_t br) { return br < N ? V : H; };
    const uint32_t pairs = (N + 2) / 2;
    const uint32_t k = std::bit_ceil(pairs);
    for (uint32_t br = 0; br <= N; br++) {
        Polarization want = br % 2 == 0 ? H : V;
        if (branch_pol(br) != want) {
            b.hwp(branch_mode(br), 45.0);
        }
    }
    for (uint32_t p = 0; p < pairs; p++) {
        std::vector<PbsRoute> routes;
        for (uint32_t br = 2 * p; br <= std::min(2 * p + 1, N); br++) {
            routes.push_back({m(branch_mode(br)), br % 2 == 0 ? H : V, m(pair_mode(p))});
        }
        b.pbs(std::move(routes));
        b.hwp(pair_mode(p), 22.5);
    }
    for (uint32_t p = pairs; p < k; p++) {
        b.declare(pair_mode(p));
    }
    for (uint32_t h = 1; h < k; h <<= 1) {
        for (uint32_t i = 0; i < k; i++) {
            if ((i & h) == 0) {
                b.mixer(pair_mode(i), pair_mode(i + h), bs());
            }
        }
    }

    std::vector<DetectorKey> keys;
    std::vector<std::pair<std::string, std::string>> rows;
    for (uint32_t q = 0; q < k; q++) {
        for (Polarization pol : {H, V}) {
            std::string id = fmt::format("D{}", 2 * q + (pol == H ? 1 : 2));
            keys.push_back({id, m(pair_mode(q)), pol});
            auto sign = [&](uint32_t br) {
                int s = std::popcount(q & (br / 2)) % 2 == 0 ? 1 : -1;
                if (pol == V && br % 2 == 1) {
                    s = -s;
                }
                return s;
            };
            std::string ops(n, 'I');
            for (uint32_t br = 1; br <= N; br++) {
                if (sign(br) != sign(br - 1)) {
                    ops[N - br] = 'Z';
                }
            }
            rows.push_back({id, ops});
        }
    }
    b.detect(std::move(keys));
    b.feedforward(std::move(rows));
    return b.finish();
}

Circuit build_heralded_z() {
    Builder b("heralded_z", 1, m(1), H);
    b.pbs({{m(1), H, m(3)}});
    b.scatter(3, 0, 4, "D'1");
    b.pbs({{m(4), V, m(2)}});
    b.detect({{"D1", m(2), V}});
    return b.finish();
}

Circuit build_protocol(ProtocolKind kind, const ProtocolParams &params) {
    switch (kind) {
        case ProtocolKind::klm2:
            return build_two_qubit(params);
        case ProtocolKind::klm3:
            return build_three_qubit(params);
        case ProtocolKind::klmN:
            return build_n_qubit(params);
        case ProtocolKind::heralded_z:
            return build_heralded_z();
    }
    throw InvalidParameter("unknown protocol");
}

Environment make_environment(size_t num_emitters, const EmitterParams &nominal, const std::vector<double> &offsets) {
    nominal.validate();
    if (!offsets.empty() && offsets.size() != num_emitters) {
        throw InvalidParameter(fmt::format("expected {} offsets, got {}", num_emitters, offsets.size()));
    }
    Environment env;
    env.r_nominal = scatter_coeffs(nominal).r;
    for (size_t i = 0; i < num_emitters; i++) {
        EmitterParams actual = nominal;
        actual.offset += offsets.empty() ? 0.0 : offsets[i];
        env.emitters.push_back(scatter_coeffs(actual));
    }
    return env;
}

Environment make_environment(const ProtocolParams &params) {
    params.validate();
    return make_environment(params.n, params.nominal, params.offsets);
}

EmitterState klm_target(size_t n) {
    if (n < 2 || n > MAX_EMITTERS) {
        throw InvalidParameter(fmt::format("KLM target needs N in [2, {}], got {}", MAX_EMITTERS, n));
    }
    EmitterState s(n, Basis::plusminus);
    const ConfigBits all = (ConfigBits(1) << n) - 1;
    const double amp = 1.0 / std::sqrt(double(n + 1));
    for (size_t a = 0; a <= n; a++) {
        // e1..ea in |+>, the rest in |->.
        s[all & ~((ConfigBits(1) << a) - 1)] = amp;
    }
    return s;
}

EmitterState apply_feedforward(const EmitterState &state, const std::vector<Correction> &ops) {
    if (state.basis() != Basis::plusminus) {
        throw InvalidParameter("feedforward acts on states in the +/- basis");
    }
    if (ops.size() != state.num_emitters()) {
        throw InvalidParameter(
            fmt::format("feedforward has {} entries for {} emitters", ops.size(), state.num_emitters()));
    }
    ConfigBits mask = 0;
    for (size_t i = 0; i < ops.size(); i++) {
        if (ops[i] == Correction::Z) {
            mask |= ConfigBits(1) << i;
        }
    }
    EmitterState out = state;
    for (ConfigBits c = 0; c < (ConfigBits(1) << state.num_emitters()); c++) {
        if (std::popcount(c & mask) % 2 == 1) {
            out[c] = -out[c];
        }
    }
    return out;
}

double ProtocolRun::success_probability() const {
    double total = 0;
    for (const auto &o : outcomes) {
        total += o.probability;
    }
    return total;
}

double ProtocolRun::sink_total() const {
    double total = 0;
    for (const auto &[id, p] : sinks) {
        total += p;
    }
    return total;
}

std::optional<double> ProtocolRun::weighted_fidelity() const {
    double num = 0;
    double den = 0;
    bool any = false;
    for (const auto &o : outcomes) {
        if (o.fidelity.has_value()) {
            num += o.probability * *o.fidelity;
            den += o.probability;
            any = true;
        }
    }
    if (!any || den <= 0) {
        return std::nullopt;
    }
    return num / den;
}

bool detector_id_less(const std::string &a, const std::string &b) {
    auto split = [](const std::string &s) {
        size_t i = s.size();
        while (i > 0 && std::isdigit(static_cast<unsigned char>(s[i - 1]))) {
            i--;
        }
        std::string digits = s.substr(i);
        return std::make_tuple(s.substr(0, i), digits.size(), digits);
    };
    return split(a) < split(b);
}

ProtocolRun run_circuit(const Circuit &circuit, const Environment &env) {
    circuit.validate();
    ExecutionResult result = execute(circuit, initial_state(circuit), env);
    ProtocolRun run{circuit.name, circuit.num_emitters, {}, result.sinks};
    std::optional<EmitterState> target;
    if (circuit.feedforward.has_value() && circuit.num_emitters >= 2) {
        target = klm_target(circuit.num_emitters);
    }
    for (auto &o : result.outcomes) {
        HeraldedOutcome h{
            o.detector,
            o.probability,
            o.conditioned.in_basis(Basis::plusminus).with_phase_convention(),
            EmitterState(circuit.num_emitters, Basis::plusminus),
            std::vector<Correction>(circuit.num_emitters, Correction::I),
            std::nullopt};
        if (circuit.feedforward.has_value()) {
            if (const auto *entry = circuit.feedforward->find(o.detector)) {
                h.ops = entry->ops;
            }
        }
        h.corrected = apply_feedforward(h.conditioned, h.ops).with_phase_convention();
        if (target.has_value()) {
            h.fidelity = state_fidelity(*target, h.corrected);
        }
        run.outcomes.push_back(std::move(h));
    }
    std::stable_sort(run.outcomes.begin(), run.outcomes.end(), [](const auto &a, const auto &b) {
        return detector_id_less(a.detector, b.detector);
    });
    return run;
}

ProtocolRun run_protocol(ProtocolKind kind, const ProtocolParams &params) {
    Circuit circuit = build_protocol(kind, params);
    if (kind == ProtocolKind::heralded_z) {
        params.nominal.validate();
        std::vector<double> offsets;
        if (!params.offsets.empty()) {
            offsets = {params.offsets[0]};
        }
        return run_circuit(circuit, make_environment(1, params.nominal, offsets));
    }
    return run_circuit(circuit, make_environment(params));
}

}  // namespace wgq
