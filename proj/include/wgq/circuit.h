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
#include <variant>
#include <vector>

#include "wgq/scatter.h"
#include "wgq/state.h"

namespace wgq {

enum class MixerKind : uint8_t {
    /// |u> -> (|u>+|l>)/sqrt2, |l> -> (|u>-|l>)/sqrt2
    bs,
    /// |u> -> (|l>-|u>)/sqrt2, |l> -> (|u>+|l>)/sqrt2
    bs_prime,
    /// Unbalanced splitter of a peeling chain; see vbs_matrix.
    vbs,
    custom,
};

/// |l> -> |u>/sqrt(n+1-k) + sqrt((n-k)/(n+1-k)) |l>,
/// |u> -> |l>/sqrt(n+1-k) - sqrt((n-k)/(n+1-k)) |u>.   Requires 0 <= k < n.
Matrix2 vbs_matrix(int k, int n);
Matrix2 bs_matrix();
Matrix2 bs_prime_matrix();

struct MixerConvention {
    MixerKind kind = MixerKind::bs;
    int k = 0;
    int n = 0;
    Matrix2 custom = Matrix2::identity();

    Matrix2 matrix() const;
    bool operator==(const MixerConvention &) const = default;
};

/// Attenuator transmission: either a fixed complex number or r_nominal^power,
/// resolved against the execution environment.
struct AttenuatorCoefficient {
    bool symbolic = false;
    int power = 0;
    cplx value = 1.0;

    static AttenuatorCoefficient fixed(cplx v) {
        return {false, 0, v};
    }
    static AttenuatorCoefficient rnom_power(int j) {
        return {true, j, 1.0};
    }
    bool operator==(const AttenuatorCoefficient &) const = default;
};

struct Pbs {
    std::vector<PbsRoute> routing;
    bool operator==(const Pbs &) const = default;
};
struct Mixer {
    SpatialMode a;
    SpatialMode b;
    MixerConvention convention;
    bool operator==(const Mixer &) const = default;
};
struct Hwp {
    SpatialMode mode;
    double theta_degrees;
    bool operator==(const Hwp &) const = default;
};
struct Attenuator {
    SpatialMode mode;
    AttenuatorCoefficient coefficient;
    SinkId sink;
    bool operator==(const Attenuator &) const = default;
};
struct EmitterScatter {
    SpatialMode in;
    size_t emitter;
    SpatialMode out;
    SinkId sink;
    bool operator==(const EmitterScatter &) const = default;
};
struct Mirror {
    SpatialMode in;
    SpatialMode out;
    bool operator==(const Mirror &) const = default;
};
struct DetectorBank {
    std::vector<DetectorKey> detectors;
    bool operator==(const DetectorBank &) const = default;
};

using Component = std::variant<Pbs, Mixer, Hwp, Attenuator, EmitterScatter, Mirror, DetectorBank>;

/// "pbs", "mixer", "hwp", "attenuator", "scatter", "mirror", "detect".
std::string component_kind(const Component &c);

enum class Correction : uint8_t { I, Z };

/// Per-detector single-emitter corrections acting in the |+>/|-> basis.
struct FeedforwardEntry {
    std::string detector;
    std::vector<Correction> ops;
    bool operator==(const FeedforwardEntry &) const = default;
};
struct FeedforwardRule {
    std::vector<FeedforwardEntry> entries;

    const FeedforwardEntry *find(const std::string &detector) const;
    bool operator==(const FeedforwardRule &) const = default;
};

/// "IZ" style rendering, emitter e1 first.
std::string corrections_string(const std::vector<Correction> &ops);
std::vector<Correction> parse_corrections(const std::string &text);

/// Initial photon slot and emitter preparation.
struct InputSpec {
    SpatialMode mode;
    Polarization pol = Polarization::H;
    std::vector<EmitterLabel> emitters;
    bool operator==(const InputSpec &) const = default;
};

/// Raised for structural problems in a circuit or a component failing during execution.
struct CircuitError : InvalidParameter {
    CircuitError(std::optional<size_t> component_index, const std::string &message);
    std::optional<size_t> component_index;
};

/// A straight-line optical program: components run in order, the detector bank last.
struct Circuit {
    std::string name;
    size_t num_emitters = 1;
    std::vector<SpatialMode> modes;
    InputSpec input;
    std::vector<Component> components;
    std::optional<FeedforwardRule> feedforward;

    /// Throws CircuitError. With require_detectors the circuit must end in
    /// exactly one detector bank; otherwise a bank is optional (but still last).
    void validate(bool require_detectors = true) const;
    /// The final component; throws CircuitError if absent.
    const DetectorBank &detector_bank() const;
    bool operator==(const Circuit &) const = default;
};

/// Per-run physical values that components resolve at execution time.
struct Environment {
    /// Reflection data for each emitter, indexed like EmitterScatter::emitter.
    std::vector<ScatterCoeffs> emitters;
    /// Reflection amplitude at the calibration point, used by symbolic attenuators.
    cplx r_nominal = -1.0;

    static Environment uniform(size_t num_emitters, const EmitterParams &params);
};

struct TraceStep {
    size_t component_index;
    std::string kind;
    SystemState state;
    bool operator==(const TraceStep &) const = default;
};

struct ExecutionResult {
    std::vector<DetectorOutcome> outcomes;
    std::map<SinkId, double> sinks;
    /// State just before the detector bank (or after the last component).
    SystemState final_state;
    std::optional<std::vector<TraceStep>> trace;
};

SystemState initial_state(const Circuit &circuit);

SystemState apply_component(SystemState state, const Component &component, const Environment &env);

ExecutionResult execute(const Circuit &circuit, const SystemState &initial, const Environment &env, bool trace = false);

/// One block per step: "# step <index> <kind>" followed by SystemState::dump() lines.
std::string export_trace(const std::vector<TraceStep> &trace);

enum class PassivityStatus : uint8_t { passive_ok, violation, non_passive };

struct PassivityEntry {
    size_t component_index;
    std::string kind;
    PassivityStatus status;
    /// max |G - I| over the Gram matrix of basis images (passive kinds only).
    double deviation;
};

struct PassivityReport {
    std::vector<PassivityEntry> entries;
    double tolerance;

    bool ok() const;
    std::vector<PassivityEntry> violations() const;
};

/// Basis sweep over every declared (mode, polarization): each mixer, HWP, PBS
/// and mirror must map the sweep onto an orthonormal set. Attenuators and
/// emitter scatterers are listed as non-passive.
PassivityReport check_passive_unitarity(const Circuit &circuit, double tolerance = 1e-12);

}  // namespace wgq
