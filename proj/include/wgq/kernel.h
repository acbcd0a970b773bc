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

#include <string>
#include <vector>

#include "wgq/circuit.h"

namespace wgq {

/// Unnormalized, feedforward-corrected emitter amplitudes (+/- basis) for
/// every detector as multilinear polynomials in the per-emitter reflection
/// amplitudes r_1..r_N, with the attenuators frozen at a fixed r_nominal.
///
/// Built by probing the simulator at r_i in {0, 1} and Moebius-inverting,
/// then checked against the simulator at random points. Circuits where an
/// emitter scatters more than once along one path are not multilinear and are
/// rejected by that check.
class FidelityKernel {
   public:
    static FidelityKernel compile(const Circuit &circuit, cplx r_nominal);

    struct Term {
        ConfigBits monomial;
        cplx coefficient;
    };
    struct Amplitude {
        ConfigBits config;
        std::vector<Term> terms;
    };
    struct Detector {
        std::string id;
        std::vector<Amplitude> amplitudes;
    };

    size_t num_emitters() const {
        return num_emitters_;
    }
    const std::vector<Detector> &detectors() const {
        return detectors_;
    }

    /// Corrected, unnormalized state per detector.
    std::vector<EmitterState> evaluate(const std::vector<cplx> &r) const;

    struct Summary {
        /// Sum over detectors of |psi_q|^2.
        double success;
        /// Sum over detectors of |<target|psi_q>|^2.
        double overlap;
        /// Per-detector probability and fidelity (fidelity 0 when probability is 0).
        std::vector<double> probabilities;
        std::vector<double> fidelities;
    };
    Summary summarize(const std::vector<cplx> &r, const EmitterState &target) const;

    /// Largest amplitude deviation from the simulator over `points` random r vectors.
    double max_deviation(const Circuit &circuit, size_t points, uint64_t seed) const;

   private:
    size_t num_emitters_ = 0;
    cplx r_nominal_;
    std::vector<Detector> detectors_;
};

}  // namespace wgq
