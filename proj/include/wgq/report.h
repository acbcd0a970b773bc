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

#include <json.hpp>

#include "wgq/analysis.h"
#include "wgq/protocols.h"

namespace wgq {

constexpr const char *RUN_REPORT_SCHEMA = "wgq-run-report/1";
constexpr const char *FIDELITY_REPORT_SCHEMA = "wgq-fidelity-report/1";

/// Invocation echo and timing. Serialized under "meta"; everything else in a
/// report depends only on the inputs.
struct ReportMeta {
    std::vector<std::string> argv;
    double elapsed_seconds = 0;
};

struct RunInputs {
    EmitterParams nominal;
    std::vector<double> offsets;
    cplx r_nominal;
};

nlohmann::json purcell_json(const Purcell &p);

nlohmann::json run_report_json(const ProtocolRun &run, const RunInputs &inputs, const ReportMeta &meta);
/// Columns kind,id,probability,fidelity,corrections; kind is detector, sink or total.
std::string run_report_csv(const ProtocolRun &run);
std::string run_report_text(const ProtocolRun &run, const RunInputs &inputs);

struct FidelityInputs {
    size_t n;
    EmitterParams nominal;
    BroadeningModel model;
    FidelityWeighting weighting;
};

nlohmann::json fidelity_report_json(const FidelityInputs &inputs, const AveragedFidelity &result, const ReportMeta &meta);

nlohmann::json coeffs_json(const EmitterParams &params, const ScatterCoeffs &c);

/// Drops the "meta" object, for comparisons between equivalent invocations.
nlohmann::json without_meta(nlohmann::json report);

}  // namespace wgq
