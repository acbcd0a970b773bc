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

#include <compare>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wgq/scatter.h"

namespace wgq {

/// Hard cap on the emitter register; configurations are stored as bitmasks and
/// conditioned emitter states are dense vectors of length 2^N.
constexpr size_t MAX_EMITTERS = 20;

enum class Polarization : uint8_t { H = 0, V = 1 };

inline Polarization flipped(Polarization p) {
    return p == Polarization::H ? Polarization::V : Polarization::H;
}
char pol_char(Polarization p);
/// Accepts "H"/"h"/"V"/"v".
Polarization parse_polarization(const std::string &text);

struct SpatialMode {
    uint32_t label = 0;
    auto operator<=>(const SpatialMode &) const = default;
};

/// Which single-emitter basis the configuration bits refer to.
/// energy: bit clear = |g+>, bit set = |g->.  plusminus: bit clear = |+>, bit set = |->.
enum class Basis : uint8_t { energy, plusminus };

enum class EmitterLabel : uint8_t { plus, minus };

/// Bit k describes emitter e_{k+1}.
using ConfigBits = uint64_t;

/// Renders a configuration, emitter e1 first: '0'/'1' in the energy basis, '+'/'-' otherwise.
std::string config_string(ConfigBits config, size_t num_emitters, Basis basis);

struct SinkId {
    std::string name;
    auto operator<=>(const SinkId &) const = default;
};

struct Slot {
    SpatialMode mode;
    Polarization pol;
    ConfigBits config;
    auto operator<=>(const Slot &) const = default;
};

using Amplitudes = std::vector<std::pair<Slot, cplx>>;

/// Single photon (spatial mode x polarization) times N emitter qubits, plus
/// probability sinks for heralded failures and attenuator loss.
///
/// Amplitudes are kept sorted by slot so every traversal is deterministic.
class SystemState {
   public:
    explicit SystemState(size_t num_emitters, Basis basis = Basis::energy);

    /// Builds a state from arbitrary (possibly unsorted, possibly repeated)
    /// slot amplitudes; repeated slots are summed.
    static SystemState from_amplitudes(size_t num_emitters, Basis basis, Amplitudes amplitudes);

    size_t num_emitters() const {
        return num_emitters_;
    }
    Basis basis() const {
        return basis_;
    }
    const Amplitudes &amplitudes() const {
        return amplitudes_;
    }
    const std::map<SinkId, double> &sinks() const {
        return sinks_;
    }

    cplx amplitude(const Slot &slot) const;
    double photon_norm() const;
    double sink_total() const;
    /// Photon norm plus all sink probability; 1 for a normalized run.
    double total_norm() const {
        return photon_norm() + sink_total();
    }
    double mode_probability(SpatialMode mode) const;

    void add_sink(const SinkId &sink, double probability);
    /// Ensures the sink exists (with zero probability) so reports list it.
    void declare_sink(const SinkId &sink);

    /// Internal: replaces the amplitudes. The vector must already be sorted and unique.
    void replace_amplitudes(Amplitudes sorted_unique);

    /// One line per slot, "mode,pol,config,re,im", in slot order.
    std::string dump() const;

    bool operator==(const SystemState &other) const = default;

   private:
    size_t num_emitters_;
    Basis basis_;
    Amplitudes amplitudes_;
    std::map<SinkId, double> sinks_;
};

/// Prepares one photon in (mode, pol) and emitters in the given |+>/|-> labels,
/// expanded into the energy basis.
SystemState new_state(size_t num_emitters, SpatialMode mode, Polarization pol, std::span<const EmitterLabel> emitters);

SystemState apply_polarization_unitary(SystemState state, SpatialMode mode, const PolarizationMatrix &m);

/// Mixes modes a and b: new_a = u00 a + u01 b, new_b = u10 a + u11 b.
SystemState apply_mode_mixer(SystemState state, SpatialMode a, SpatialMode b, const Matrix2 &u);

struct PbsRoute {
    SpatialMode in;
    Polarization pol;
    SpatialMode out;
    bool operator==(const PbsRoute &) const = default;
};

/// Polarization-conditioned relabeling of spatial modes. Slots whose (mode, pol)
/// has no route are left in place. No reflection phase is applied.
SystemState apply_pbs(SystemState state, std::span<const PbsRoute> routing);

/// Moves every slot of `in` to `out`.
SystemState apply_mirror(SystemState state, SpatialMode in, SpatialMode out);

SystemState apply_attenuator(SystemState state, SpatialMode mode, cplx coefficient, const SinkId &sink);

/// Reflection off emitter `emitter`: |g+->|pol>_in -> (+-r)|g+->|flipped pol>_out.
/// The transmitted and free-space branches are traced into `herald_sink`.
SystemState apply_emitter_scatter(
    SystemState state,
    SpatialMode in_mode,
    size_t emitter,
    const ScatterCoeffs &coeffs,
    SpatialMode reflected_out,
    const SinkId &herald_sink);

/// Per-emitter Hadamard relabeling between {g+, g-} and {+, -}.
SystemState change_basis(SystemState state, Basis target);

/// Dense emitter-register state, indexed by ConfigBits.
class EmitterState {
   public:
    EmitterState(size_t num_emitters, Basis basis);
    static EmitterState from_amplitudes(size_t num_emitters, Basis basis, std::vector<cplx> amplitudes);

    size_t num_emitters() const {
        return num_emitters_;
    }
    Basis basis() const {
        return basis_;
    }
    const std::vector<cplx> &amplitudes() const {
        return amplitudes_;
    }
    cplx operator[](ConfigBits config) const {
        return amplitudes_[config];
    }
    cplx &operator[](ConfigBits config) {
        return amplitudes_[config];
    }

    double norm_squared() const;
    EmitterState normalized() const;
    EmitterState in_basis(Basis target) const;
    /// Global phase fixed so the all-|+> amplitude is real and non-negative
    /// (falls back to the first non-negligible amplitude when that one vanishes).
    EmitterState with_phase_convention() const;

    /// "+0.57735|++> -0.57735|--> ..." with amplitudes below 1e-12 omitted.
    std::string str() const;

   private:
    size_t num_emitters_;
    Basis basis_;
    std::vector<cplx> amplitudes_;
};

/// <a|b>, converting b into a's basis when they differ.
cplx inner_product(const EmitterState &a, const EmitterState &b);
/// |<a|b>|^2 / (|a|^2 |b|^2).
double state_fidelity(const EmitterState &a, const EmitterState &b);

struct DetectorKey {
    std::string id;
    SpatialMode mode;
    Polarization pol;
    bool operator==(const DetectorKey &) const = default;
};

struct DetectorOutcome {
    std::string detector;
    double probability;
    /// Normalized, in the basis of the measured state.
    EmitterState conditioned;
};

/// Outcomes below this click probability are omitted.
constexpr double DETECTOR_THRESHOLD = 1e-14;

/// Projects the photon onto each detector slot. Outcomes come back in bank order.
/// Throws InvalidParameter when an occupied slot is not covered by the bank.
std::vector<DetectorOutcome> measure_detector_bank(const SystemState &state, std::span<const DetectorKey> bank);

}  // namespace wgq
