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

#include "wgq/kernel.h"

#include <bit>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "wgq/protocols.h"

namespace wgq {

namespace {

constexpr double TERM_EPS = 1e-15;
constexpr size_t MAX_KERNEL_EMITTERS = 12;

/// Runs the circuit and returns each detector's corrected, unnormalized state.
std::vector<EmitterState> simulate_corrected(const Circuit &circuit, const std::vector<cplx> &r, cplx r_nominal) {
    Environment env;
    env.r_nominal = r_nominal;
    for (cplx ri : r) {
        env.emitters.push_back({ri, ri + 1.0});
    }
    ExecutionResult result = execute(circuit, initial_state(circuit), env);
    const auto &bank = circuit.detector_bank();
    const size_t n = circuit.num_emitters;
    std::vector<EmitterState> out;
    for (const auto &d : bank.detectors) {
        EmitterState s(n, Basis::energy);
        for (const auto &[slot, a] : result.final_state.amplitudes()) {
            if (slot.mode == d.mode && slot.pol == d.pol) {
                s[slot.config] = a;
            }
        }
        EmitterState pm = s.in_basis(Basis::plusminus);
        if (circuit.feedforward.has_value()) {
            if (const auto *entry = circuit.feedforward->find(d.id)) {
                pm = apply_feedforward(pm, entry->ops);
            }
        }
        out.push_back(std::move(pm));
    }
    return out;
}

}  // namespace

FidelityKernel FidelityKernel::compile(const Circuit &circuit, cplx r_nominal) {
    circuit.validate();
    const size_t n = circuit.num_emitters;
    if (n > MAX_KERNEL_EMITTERS) {
        throw InvalidParameter(fmt::format("fidelity kernel supports up to {} emitters, got {}", MAX_KERNEL_EMITTERS, n));
    }
    const size_t corners = size_t(1) << n;
    const size_t dim = size_t(1) << n;
    const auto &bank = circuit.detector_bank();

    // values[d][config][corner]
    std::vector<std::vector<std::vector<cplx>>> values(
        bank.detectors.size(), std::vector<std::vector<cplx>>(dim, std::vector<cplx>(corners)));
    for (size_t corner = 0; corner < corners; corner++) {
        std::vector<cplx> r(n);
        for (size_t i = 0; i < n; i++) {
            r[i] = (corner >> i) & 1 ? 1.0 : 0.0;
        }
        auto states = simulate_corrected(circuit, r, r_nominal);
        for (size_t d = 0; d < states.size(); d++) {
            for (size_t c = 0; c < dim; c++) {
                values[d][c][corner] = states[d][c];
            }
        }
    }

    FidelityKernel k;
    k.num_emitters_ = n;
    k.r_nominal_ = r_nominal;
    for (size_t d = 0; d < bank.detectors.size(); d++) {
        Detector det{bank.detectors[d].id, {}};
        for (size_t c = 0; c < dim; c++) {
            auto &v = values[d][c];
            for (size_t bit = 1; bit < corners; bit <<= 1) {
                for (size_t s = 0; s < corners; s++) {
                    if (s & bit) {
                        v[s] -= v[s ^ bit];
                    }
                }
            }
            Amplitude amp{c, {}};
            for (size_t s = 0; s < corners; s++) {
                if (std::abs(v[s]) > TERM_EPS) {
                    amp.terms.push_back({s, v[s]});
                }
            }
            if (!amp.terms.empty()) {
                det.amplitudes.push_back(std::move(amp));
            }
        }
        k.detectors_.push_back(std::move(det));
    }

    double dev = k.max_deviation(circuit, 4, 0x5eed);
    if (dev > 1e-10) {
        throw InvalidParameter(fmt::format(
            "circuit '{}' is not multilinear in the reflection amplitudes (deviation {:.3g}); "
            "an emitter is probably scattered more than once",
            circuit.name,
            dev));
    }
    return k;
}

std::vector<EmitterState> FidelityKernel::evaluate(const std::vector<cplx> &r) const {
    if (r.size() != num_emitters_) {
        throw InvalidParameter(fmt::format("kernel expects {} reflection amplitudes, got {}", num_emitters_, r.size()));
    }
    std::vector<cplx> products(size_t(1) << num_emitters_);
    products[0] = 1.0;
    for (size_t s = 1; s < products.size(); s++) {
        size_t low = std::countr_zero(s);
        products[s] = products[s & (s - 1)] * r[low];
    }
    std::vector<EmitterState> out;
    for (const auto &det : detectors_) {
        EmitterState s(num_emitters_, Basis::plusminus);
        for (const auto &amp : det.amplitudes) {
            cplx total = 0;
            for (const auto &t : amp.terms) {
                total += t.coefficient * products[t.monomial];
            }
            s[amp.config] = total;
        }
        out.push_back(std::move(s));
    }
    return out;
}

FidelityKernel::Summary FidelityKernel::summarize(const std::vector<cplx> &r, const EmitterState &target) const {
    auto states = evaluate(r);
    Summary sum{0, 0, {}, {}};
    for (const auto &s : states) {
        double p = s.norm_squared();
        double ov = std::norm(inner_product(target, s));
        sum.success += p;
        sum.overlap += ov;
        sum.probabilities.push_back(p);
        sum.fidelities.push_back(p > 0 ? ov / (p * target.norm_squared()) : 0.0);
    }
    return sum;
}

double FidelityKernel::max_deviation(const Circuit &circuit, size_t points, uint64_t seed) const {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> mag(0.0, 1.0);
    std::uniform_real_distribution<double> phase(-std::numbers::pi, std::numbers::pi);
    double worst = 0;
    for (size_t p = 0; p < points; p++) {
        std::vector<cplx> r(num_emitters_);
        for (auto &ri : r) {
            ri = std::polar(mag(rng), phase(rng));
        }
        auto fast = evaluate(r);
        auto slow = simulate_corrected(circuit, r, r_nominal_);
        for (size_t d = 0; d < fast.size(); d++) {
            for (size_t c = 0; c < fast[d].amplitudes().size(); c++) {
                worst = std::max(worst, std::abs(fast[d][c] - slow[d][c]));
            }
        }
    }
    return worst;
}

}  // namespace wgq
