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

#include <complex>
#include <string>
#include <vector>

#include "wgq/circuit.h"

namespace wgq::oracle {

struct DenseOutcome {
    std::string detector;
    double probability;
    /// Fidelity of the fed-forward emitter state with the KLM target.
    double fidelity;
};

struct DenseRun {
    std::vector<DenseOutcome> outcomes;
    double success = 0;
    double weighted_fidelity = 0;
};

/// Runs `circuit` as a dense linear map over (mode, polarization, emitter
/// configuration), one complex reflection amplitude per emitter.
DenseRun dense_run(const Circuit &circuit, const std::vector<std::complex<double>> &r, std::complex<double> r_nominal);

/// Lorentzian reflection amplitude, written out from scratch.
std::complex<double> dense_reflection(double purcell, double detuning);

}  // namespace wgq::oracle
