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

#include "wgq/state.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include <fmt/format.h>

namespace wgq {

namespace {

constexpr double INV_SQRT2 = 1.0 / std::numbers::sqrt2;

// Slots with |amplitude|^2 below this are treated as unoccupied by the detector coverage check.
constexpr double OCCUPANCY_EPS = 1e-28;

bool slot_less(const std::pair<Slot, cplx> &a, const std::pair<Slot, cplx> &b) {
    return a.first < b.first;
}

// Sorts and sums repeated slots; drops exact zeros.
void canonicalize(Amplitudes &amps) {
    std::stable_sort(amps.begin(), amps.end(), slot_less);
    size_t w = 0;
    for (size_t i = 0; i < amps.size();) {
        Slot s = amps[i].first;
        cplx acc = 0;
        for (; i < amps.size() && amps[i].first == s; i++) {
            acc += amps[i].second;
        }
        if (acc != cplx(0)) {
            amps[w++] = {s, acc};
        }
    }
    amps.resize(w);
}

// Sorts; a repeated slot means two inputs were routed onto the same output.
void canonicalize_no_collisions(Amplitudes &amps, const char *what) {
    std::sort(amps.begin(), amps.end(), slot_less);
    for (size_t i = 1; i < amps.size(); i++) {
        if (amps[i - 1].first == amps[i].first) {
            const Slot &s = amps[i].first;
            throw InvalidParameter(fmt::format(
                "{}: routing collision on mode {} pol {} config {}",
                what,
                s.mode.label,
                pol_char(s.pol),
                s.config));
        }
    }
}

void check_emitter_count(size_t n) {
    if (n < 1 || n > MAX_EMITTERS) {
        throw InvalidParameter(fmt::format("emitter count must be in [1, {}], got {}", MAX_EMITTERS, n));
    }
}

std::string format_real(double x) {
    // +0.0 folds negative zero so dumps are stable.
    return fmt::format("{:.15g}", x + 0.0);
}

}  // namespace

char pol_char(Polarization p) {
    return p == Polarization::H ? 'H' : 'V';
}

Polarization parse_polarization(const std::string &text) {
    if (text == "H" || text == "h") {
        return Polarization::H;
    }
    if (text == "V" || text == "v") {
        return Polarization::V;
    }
    throw InvalidParameter(fmt::format("unknown polarization '{}'", text));
}

std::string config_string(ConfigBits config, size_t num_emitters, Basis basis) {
    std::string out;
    out.reserve(num_emitters);
    for (size_t k = 0; k < num_emitters; k++) {
        bool set = (config >> k) & 1;
        if (basis == Basis::energy) {
            out.push_back(set ? '1' : '0');
        } else {
            out.push_back(set ? '-' : '+');
        }
    }
    return out;
}

SystemState::SystemState(size_t num_emitters, Basis basis) : num_emitters_(num_emitters), basis_(basis) {
    check_emitter_count(num_emitters);
}

SystemState SystemState::from_amplitudes(size_t num_emitters, Basis basis, Amplitudes amplitudes) {
    SystemState s(num_emitters, basis);
    for (const auto &[slot, a] : amplitudes) {
        if (slot.config >> num_emitters) {
            throw InvalidParameter(fmt::format("config {} has bits beyond emitter count {}", slot.config, num_emitters));
        }
    }
    canonicalize(amplitudes);
    s.amplitudes_ = std::move(amplitudes);
    return s;
}

cplx SystemState::amplitude(const Slot &slot) const {
    auto it = std::lower_bound(
        amplitudes_.begin(), amplitudes_.end(), std::pair<Slot, cplx>{slot, 0}, slot_less);
    if (it != amplitudes_.end() && it->first == slot) {
        return it->second;
    }
    return 0;
}

double SystemState::photon_norm() const {
    double t = 0;
    for (const auto &e : amplitudes_) {
        t += std::norm(e.second);
    }
    return t;
}

double SystemState::sink_total() const {
    double t = 0;
    for (const auto &e : sinks_) {
        t += e.second;
    }
    return t;
}

double SystemState::mode_probability(SpatialMode mode) const {
    double t = 0;
    for (const auto &e : amplitudes_) {
        if (e.first.mode == mode) {
            t += std::norm(e.second);
        }
    }
    return t;
}

void SystemState::add_sink(const SinkId &sink, double probability) {
    if (!(probability >= 0)) {
        throw InvalidParameter(fmt::format("negative probability {} routed to sink {}", probability, sink.name));
    }
    sinks_[sink] += probability;
}

void SystemState::declare_sink(const SinkId &sink) {
    sinks_.try_emplace(sink, 0.0);
}

void SystemState::replace_amplitudes(Amplitudes sorted_unique) {
    amplitudes_ = std::move(sorted_unique);
}

std::string SystemState::dump() const {
    std::string out;
    for (const auto &[slot, a] : amplitudes_) {
        out += fmt::format(
            "{},{},{},{},{}\n",
            slot.mode.label,
            pol_char(slot.pol),
            config_string(slot.config, num_emitters_, basis_),
            format_real(a.real()),
            format_real(a.imag()));
    }
    return out;
}

SystemState new_state(size_t num_emitters, SpatialMode mode, Polarization pol, std::span<const EmitterLabel> emitters) {
    check_emitter_count(num_emitters);
    if (emitters.size() != num_emitters) {
        throw InvalidParameter(
            fmt::format("expected {} emitter labels, got {}", num_emitters, emitters.size()));
    }
    double magnitude = std::pow(INV_SQRT2, (double)num_emitters);
    Amplitudes amps;
    amps.reserve(size_t{1} << num_emitters);
    for (ConfigBits c = 0; c < (ConfigBits{1} << num_emitters); c++) {
        double sign = 1;
        for (size_t k = 0; k < num_emitters; k++) {
            if (emitters[k] == EmitterLabel::minus && ((c >> k) & 1)) {
                sign = -sign;
            }
        }
        amps.push_back({{mode, pol, c}, sign * magnitude});
    }
    SystemState s(num_emitters, Basis::energy);
    s.replace_amplitudes(std::move(amps));
    return s;
}

SystemState apply_polarization_unitary(SystemState state, SpatialMode mode, const PolarizationMatrix &m) {
    if (!m.is_unitary()) {
        throw InvalidParameter(fmt::format("polarization matrix is not unitary (error {:.3g})", m.unitarity_error()));
    }
    Amplitudes out;
    out.reserve(state.amplitudes().size() * 2);
    for (const auto &[slot, a] : state.amplitudes()) {
        if (slot.mode != mode) {
            out.push_back({slot, a});
            continue;
        }
        // Column `slot.pol` of m is the image of this polarization.
        cplx to_h = slot.pol == Polarization::H ? m.m00 : m.m01;
        cplx to_v = slot.pol == Polarization::H ? m.m10 : m.m11;
        if (to_h != cplx(0)) {
            out.push_back({{mode, Polarization::H, slot.config}, to_h * a});
        }
        if (to_v != cplx(0)) {
            out.push_back({{mode, Polarization::V, slot.config}, to_v * a});
        }
    }
    canonicalize(out);
    state.replace_amplitudes(std::move(out));
    return state;
}

SystemState apply_mode_mixer(SystemState state, SpatialMode a, SpatialMode b, const Matrix2 &u) {
    if (a == b) {
        throw InvalidParameter(fmt::format("mode mixer needs two distinct modes, got {} twice", a.label));
    }
    if (!u.is_unitary()) {
        throw InvalidParameter(fmt::format("mode mixer matrix is not unitary (error {:.3g})", u.unitarity_error()));
    }
    Amplitudes out;
    out.reserve(state.amplitudes().size() * 2);
    for (const auto &[slot, x] : state.amplitudes()) {
        if (slot.mode != a && slot.mode != b) {
            out.push_back({slot, x});
            continue;
        }
        bool from_a = slot.mode == a;
        cplx to_a = from_a ? u.m00 : u.m01;
        cplx to_b = from_a ? u.m10 : u.m11;
        if (to_a != cplx(0)) {
            out.push_back({{a, slot.pol, slot.config}, to_a * x});
        }
        if (to_b != cplx(0)) {
            out.push_back({{b, slot.pol, slot.config}, to_b * x});
        }
    }
    canonicalize(out);
    state.replace_amplitudes(std::move(out));
    return state;
}

SystemState apply_pbs(SystemState state, std::span<const PbsRoute> routing) {
    std::map<std::pair<SpatialMode, Polarization>, SpatialMode> table;
    for (const auto &route : routing) {
        if (!table.emplace(std::pair{route.in, route.pol}, route.out).second) {
            throw InvalidParameter(
                fmt::format("PBS routes ({},{}) twice", route.in.label, pol_char(route.pol)));
        }
    }
    Amplitudes out = state.amplitudes();
    for (auto &[slot, a] : out) {
        auto it = table.find({slot.mode, slot.pol});
        if (it != table.end()) {
            slot.mode = it->second;
        }
    }
    canonicalize_no_collisions(out, "PBS");
    state.replace_amplitudes(std::move(out));
    return state;
}

SystemState apply_mirror(SystemState state, SpatialMode in, SpatialMode out_mode) {
    Amplitudes out = state.amplitudes();
    for (auto &[slot, a] : out) {
        if (slot.mode == in) {
            slot.mode = out_mode;
        }
    }
    canonicalize_no_collisions(out, "mirror");
    state.replace_amplitudes(std::move(out));
    return state;
}

SystemState apply_attenuator(SystemState state, SpatialMode mode, cplx coefficient, const SinkId &sink) {
    double gain = std::norm(coefficient);
    if (!std::isfinite(gain) || gain > 1.0 + 1e-12) {
        throw InvalidParameter(fmt::format("attenuator coefficient magnitude {} exceeds 1", std::sqrt(gain)));
    }
    Amplitudes out;
    out.reserve(state.amplitudes().size());
    double lost = 0;
    for (const auto &[slot, a] : state.amplitudes()) {
        if (slot.mode != mode) {
            out.push_back({slot, a});
            continue;
        }
        lost += std::norm(a);
        cplx b = a * coefficient;
        if (b != cplx(0)) {
            out.push_back({slot, b});
        }
    }
    state.replace_amplitudes(std::move(out));
    state.add_sink(sink, std::max(0.0, 1.0 - gain) * lost);
    return state;
}

SystemState apply_emitter_scatter(
    SystemState state,
    SpatialMode in_mode,
    size_t emitter,
    const ScatterCoeffs &coeffs,
    SpatialMode reflected_out,
    const SinkId &herald_sink) {
    if (state.basis() != Basis::energy) {
        throw InvalidParameter("emitter scattering requires the energy basis");
    }
    if (emitter >= state.num_emitters()) {
        throw InvalidParameter(
            fmt::format("emitter index {} out of range for {} emitters", emitter, state.num_emitters()));
    }
    double reflectance = std::norm(coeffs.r);
    if (!std::isfinite(reflectance) || reflectance > 1.0 + 1e-12) {
        throw InvalidParameter(fmt::format("reflection magnitude {} exceeds 1", std::sqrt(reflectance)));
    }
    Amplitudes out;
    out.reserve(state.amplitudes().size());
    double incident = 0;
    for (const auto &[slot, a] : state.amplitudes()) {
        if (slot.mode != in_mode) {
            out.push_back({slot, a});
            continue;
        }
        incident += std::norm(a);
        bool minus = (slot.config >> emitter) & 1;
        cplx b = (minus ? -coeffs.r : coeffs.r) * a;
        if (b != cplx(0)) {
            out.push_back({{reflected_out, flipped(slot.pol), slot.config}, b});
        }
    }
    canonicalize_no_collisions(out, "emitter scatter");
    state.replace_amplitudes(std::move(out));
    state.add_sink(herald_sink, std::max(0.0, 1.0 - reflectance) * incident);
    return state;
}

SystemState change_basis(SystemState state, Basis target) {
    if (state.basis() == target) {
        return state;
    }
    Amplitudes cur = state.amplitudes();
    Amplitudes next;
    for (size_t k = 0; k < state.num_emitters(); k++) {
        ConfigBits bit = ConfigBits{1} << k;
        next.clear();
        next.reserve(cur.size() * 2);
        for (const auto &[slot, a] : cur) {
            Slot lo = slot;
            lo.config &= ~bit;
            Slot hi = slot;
            hi.config |= bit;
            bool set = slot.config & bit;
            next.push_back({lo, a * INV_SQRT2});
            next.push_back({hi, set ? -a * INV_SQRT2 : a * INV_SQRT2});
        }
        canonicalize(next);
        std::swap(cur, next);
    }
    SystemState out(state.num_emitters(), target);
    out.replace_amplitudes(std::move(cur));
    for (const auto &[sink, p] : state.sinks()) {
        out.add_sink(sink, p);
    }
    return out;
}

EmitterState::EmitterState(size_t num_emitters, Basis basis)
    : num_emitters_(num_emitters), basis_(basis), amplitudes_(size_t{1} << num_emitters) {
    check_emitter_count(num_emitters);
}

EmitterState EmitterState::from_amplitudes(size_t num_emitters, Basis basis, std::vector<cplx> amplitudes) {
    EmitterState s(num_emitters, basis);
    if (amplitudes.size() != s.amplitudes_.size()) {
        throw InvalidParameter(
            fmt::format("expected {} amplitudes, got {}", s.amplitudes_.size(), amplitudes.size()));
    }
    s.amplitudes_ = std::move(amplitudes);
    return s;
}

double EmitterState::norm_squared() const {
    double t = 0;
    for (const auto &a : amplitudes_) {
        t += std::norm(a);
    }
    return t;
}

EmitterState EmitterState::normalized() const {
    double n = std::sqrt(norm_squared());
    if (n == 0) {
        throw InvalidParameter("cannot normalize a zero emitter state");
    }
    EmitterState out = *this;
    for (auto &a : out.amplitudes_) {
        a /= n;
    }
    return out;
}

EmitterState EmitterState::in_basis(Basis target) const {
    if (target == basis_) {
        return *this;
    }
    // Fast Walsh-Hadamard transform, normalized per emitter.
    EmitterState out = *this;
    out.basis_ = target;
    auto &v = out.amplitudes_;
    for (size_t half = 1; half < v.size(); half <<= 1) {
        for (size_t i = 0; i < v.size(); i += half << 1) {
            for (size_t j = i; j < i + half; j++) {
                cplx x = v[j];
                cplx y = v[j + half];
                v[j] = (x + y) * INV_SQRT2;
                v[j + half] = (x - y) * INV_SQRT2;
            }
        }
    }
    return out;
}

EmitterState EmitterState::with_phase_convention() const {
    EmitterState pm = in_basis(Basis::plusminus);
    cplx ref = pm.amplitudes_[0];
    if (std::abs(ref) <= 1e-12) {
        ref = 0;
        for (const auto &a : amplitudes_) {
            if (std::abs(a) > 1e-12) {
                ref = a;
                break;
            }
        }
    }
    EmitterState out = *this;
    if (ref == cplx(0)) {
        return out;
    }
    cplx phase = std::conj(ref) / std::abs(ref);
    for (auto &a : out.amplitudes_) {
        a *= phase;
    }
    return out;
}

std::string EmitterState::str() const {
    std::string out;
    for (ConfigBits c = 0; c < amplitudes_.size(); c++) {
        cplx a = amplitudes_[c];
        if (std::abs(a) <= 1e-12) {
            continue;
        }
        if (!out.empty()) {
            out += ' ';
        }
        if (std::abs(a.imag()) <= 1e-12) {
            out += fmt::format("{:+.6f}", a.real() + 0.0);
        } else {
            out += fmt::format("({:+.6f}{:+.6f}i)", a.real() + 0.0, a.imag() + 0.0);
        }
        out += fmt::format("|{}>", config_string(c, num_emitters_, basis_));
    }
    return out.empty() ? "0" : out;
}

cplx inner_product(const EmitterState &a, const EmitterState &b) {
    if (a.num_emitters() != b.num_emitters()) {
        throw InvalidParameter("inner product of emitter states with different sizes");
    }
    EmitterState bb = b.in_basis(a.basis());
    cplx t = 0;
    for (size_t i = 0; i < a.amplitudes().size(); i++) {
        t += std::conj(a.amplitudes()[i]) * bb.amplitudes()[i];
    }
    return t;
}

double state_fidelity(const EmitterState &a, const EmitterState &b) {
    double na = a.norm_squared();
    double nb = b.norm_squared();
    if (na == 0 || nb == 0) {
        throw InvalidParameter("fidelity with a zero emitter state");
    }
    return std::norm(inner_product(a, b)) / (na * nb);
}

std::vector<DetectorOutcome> measure_detector_bank(const SystemState &state, std::span<const DetectorKey> bank) {
    std::map<std::pair<SpatialMode, Polarization>, size_t> index;
    std::set<std::string> ids;
    for (size_t i = 0; i < bank.size(); i++) {
        if (!ids.insert(bank[i].id).second) {
            throw InvalidParameter(fmt::format("detector '{}' declared twice", bank[i].id));
        }
        if (!index.emplace(std::pair{bank[i].mode, bank[i].pol}, i).second) {
            throw InvalidParameter(fmt::format(
                "detector '{}' watches ({},{}) which is already covered",
                bank[i].id,
                bank[i].mode.label,
                pol_char(bank[i].pol)));
        }
    }

    std::vector<EmitterState> conditioned;
    conditioned.reserve(bank.size());
    for (size_t i = 0; i < bank.size(); i++) {
        conditioned.emplace_back(state.num_emitters(), state.basis());
    }
    for (const auto &[slot, a] : state.amplitudes()) {
        auto it = index.find({slot.mode, slot.pol});
        if (it == index.end()) {
            if (std::norm(a) > OCCUPANCY_EPS) {
                throw InvalidParameter(fmt::format(
                    "occupied slot ({},{}) is not covered by any detector", slot.mode.label, pol_char(slot.pol)));
            }
            continue;
        }
        conditioned[it->second][slot.config] = a;
    }

    std::vector<DetectorOutcome> outcomes;
    for (size_t i = 0; i < bank.size(); i++) {
        double p = conditioned[i].norm_squared();
        if (p < DETECTOR_THRESHOLD) {
            continue;
        }
        outcomes.push_back({bank[i].id, p, conditioned[i].normalized()});
    }
    return outcomes;
}

}  // namespace wgq
