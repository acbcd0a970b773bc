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

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wgq/protocols.h"

namespace wgq {

/// Herald probability is zero, so a conditioned fidelity does not exist.
struct UndefinedFidelityError : std::domain_error {
    using std::domain_error::domain_error;
};

/// A Gauss-Hermite tensor grid would exceed the configured evaluation budget.
struct QuadratureBudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// |r(P, d)|^(2N); the closed form of the summed herald probability.
double success_probability(size_t n, const EmitterParams &params);

/// Protocol used for an N-emitter fidelity: klm2, klm3, or the generic chain.
ProtocolKind protocol_for(size_t n);

enum class FidelityWeighting : uint8_t {
    /// sum_q P(D_q) F_q / sum_q P(D_q)
    herald,
    /// Unweighted mean of F_q over detectors that can click.
    detector_mean,
};

/// Fidelity of the feedforward-corrected heralded states with the KLM target.
/// Throws UndefinedFidelityError when no detector can click.
double conditioned_fidelity(
    size_t n,
    const EmitterParams &nominal,
    const std::vector<double> &offsets,
    FidelityWeighting weighting = FidelityWeighting::herald);

enum class AveragingMethod : uint8_t { gauss_hermite, monte_carlo };

/// Independent per-emitter offsets drawn from N(0, sigma^2).
struct BroadeningModel {
    double sigma = 0.0;
    AveragingMethod method = AveragingMethod::gauss_hermite;
    size_t order = 20;
    size_t samples = 100000;
    uint64_t seed = 1;
    /// Largest Gauss-Hermite tensor grid (order^N points) accepted.
    size_t budget = 1000000;

    void validate() const;
};

struct AveragedFidelity {
    double mean;
    /// Zero for quadrature.
    double standard_error;
    size_t evaluations;
};

AveragedFidelity averaged_fidelity(
    size_t n,
    const EmitterParams &nominal,
    const BroadeningModel &model,
    FidelityWeighting weighting = FidelityWeighting::herald);

enum class SweepKind : uint8_t { fig5a, fig5b, fig6, fig7, fig8 };

std::string sweep_kind_name(SweepKind kind);
SweepKind parse_sweep_kind(const std::string &text);

struct SweepSeries {
    std::string name;
    std::vector<double> values;
};

struct SweepResult {
    std::string kind;
    std::string axis;
    std::vector<double> grid;
    std::vector<SweepSeries> series;
};

struct SweepOptions {
    /// Empty selects the default grid of the kind.
    std::vector<double> grid;
    /// Evaluate success probabilities with the closed form instead of the simulator.
    bool closed_form = false;
    /// Method, order, samples and seed for fig8; sigma is set per series.
    BroadeningModel broadening;
    FidelityWeighting weighting = FidelityWeighting::herald;
    /// 0 reads WGQ_THREADS, falling back to the hardware concurrency.
    size_t threads = 0;
};

/// Default grid of a kind: Purcell 1..200 or detuning -0.5..0.5.
std::vector<double> default_grid(SweepKind kind);

/// Grid points are evaluated in parallel; results are assembled by index.
SweepResult sweep(SweepKind kind, const SweepOptions &options = {});

/// Header "axis,series...", then one row per grid point at 6 significant digits.
std::string sweep_csv(const SweepResult &result);
/// Line chart of the same data.
std::string sweep_svg(const SweepResult &result);

/// Thread count from WGQ_THREADS, else the hardware concurrency (at least 1).
size_t default_thread_count();

/// Runs body(i) for i in [0, count) on up to `threads` workers.
/// The first exception thrown by any body is rethrown.
void parallel_for(size_t count, size_t threads, const std::function<void(size_t)> &body);

}  // namespace wgq
