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

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wgq/circuit.h"

namespace wgq {

/// 0.5 * acos(1/sqrt(3)) in degrees; sends |H> to (|H> + sqrt2 |V>)/sqrt3.
constexpr double KLM2_PREP_ANGLE = 27.367805158622672842;
constexpr double KLM2_PREP_ANGLE_ROUNDED = 27.4;

enum class ProtocolKind : uint8_t { klm2, klm3, klmN, heralded_z };

/// "klm2", "klm3", "klmN", "heralded_z".
std::string protocol_name(ProtocolKind kind);
ProtocolKind parse_protocol_kind(const std::string &text);

struct ProtocolParams {
    size_t n = 2;
    /// Calibration point; attenuators are fixed at r(nominal)^j.
    EmitterParams nominal;
    /// Per-emitter detuning offsets added on top of nominal; empty means all zero.
    std::vector<double> offsets;
    bool rounded_prep_angle = false;

    double offset(size_t emitter) const {
        return offsets.empty() ? 0.0 : offsets[emitter];
    }
    void validate() const;
};

Circuit build_two_qubit(const ProtocolParams &params);
Circuit build_three_qubit(const ProtocolParams &params);
/// Peeling chain of N splitters, then a balanced Hadamard network onto 2K
/// detectors where K is the smallest power of two with 2K >= N+1.
Circuit build_n_qubit(const ProtocolParams &params);
/// Single emitter between two PBS passes; one detector on the flipped output.
Circuit build_heralded_z();
Circuit build_protocol(ProtocolKind kind, const ProtocolParams &params);

/// Actual coefficients per emitter (nominal plus offset) and r_nominal.
Environment make_environment(const ProtocolParams &params);
/// Uniform environment for an arbitrary circuit at a single operating point.
Environment make_environment(size_t num_emitters, const EmitterParams &nominal, const std::vector<double> &offsets);

/// Equal superposition of the N+1 configurations |+>^a |->^(N-a), in the +/- basis.
EmitterState klm_target(size_t n);

/// Diagonal sign flips in the +/- basis. The state must be in that basis.
EmitterState apply_feedforward(const EmitterState &state, const std::vector<Correction> &ops);

struct HeraldedOutcome {
    std::string detector;
    double probability;
    /// +/- basis, normalized, phase convention applied.
    EmitterState conditioned;
    EmitterState corrected;
    std::vector<Correction> ops;
    /// |<klm_target|corrected>|^2 when the circuit has feedforward and N >= 2.
    std::optional<double> fidelity;
};

struct ProtocolRun {
    std::string circuit_name;
    size_t n;
    /// Sorted by detector id (natural order, so D2 precedes D10).
    std::vector<HeraldedOutcome> outcomes;
    std::map<SinkId, double> sinks;

    double success_probability() const;
    double sink_total() const;
    /// Herald-weighted fidelity; nullopt when no outcome carries a fidelity.
    std::optional<double> weighted_fidelity() const;
};

/// Natural "D2 < D10" ordering on detector ids.
bool detector_id_less(const std::string &a, const std::string &b);

ProtocolRun run_circuit(const Circuit &circuit, const Environment &env);
ProtocolRun run_protocol(ProtocolKind kind, const ProtocolParams &params);

}  // namespace wgq
