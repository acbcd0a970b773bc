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

#include "wgq/report.h"

#include <fmt/format.h>

namespace wgq {

using nlohmann::json;

namespace {

json complex_json(cplx z) {
    return json::array({z.real(), z.imag()});
}

json meta_json(const ReportMeta &meta) {
    return {{"argv", meta.argv}, {"elapsed_seconds", meta.elapsed_seconds}};
}

const char *weighting_name(FidelityWeighting w) {
    return w == FidelityWeighting::herald ? "herald" : "detector_mean";
}

}  // namespace

json purcell_json(const Purcell &p) {
    if (p.is_ideal()) {
        return "ideal";
    }
    return p.value();
}

json run_report_json(const ProtocolRun &run, const RunInputs &inputs, const ReportMeta &meta) {
    json detectors = json::array();
    for (const auto &o : run.outcomes) {
        detectors.push_back({
            {"id", o.detector},
            {"probability", o.probability},
            {"fidelity", o.fidelity.has_value() ? json(*o.fidelity) : json(nullptr)},
            {"corrections", corrections_string(o.ops)},
            {"conditioned", o.conditioned.str()},
            {"corrected", o.corrected.str()},
        });
    }
    json sinks = json::object();
    for (const auto &[id, p] : run.sinks) {
        sinks[id.name] = p;
    }
    auto fidelity = run.weighted_fidelity();
    return {
        {"schema", RUN_REPORT_SCHEMA},
        {"circuit", run.circuit_name},
        {"n", run.n},
        {"parameters",
         {{"purcell", purcell_json(inputs.nominal.purcell)},
          {"detuning", inputs.nominal.detuning},
          {"offsets", inputs.offsets},
          {"r_nominal", complex_json(inputs.r_nominal)}}},
        {"detectors", detectors},
        {"sinks", sinks},
        {"success_probability", run.success_probability()},
        {"sink_total", run.sink_total()},
        {"weighted_fidelity", fidelity.has_value() ? json(*fidelity) : json(nullptr)},
        {"meta", meta_json(meta)},
    };
}

std::string run_report_csv(const ProtocolRun &run) {
    std::string out = "kind,id,probability,fidelity,corrections\n";
    for (const auto &o : run.outcomes) {
        out += fmt::format(
            "detector,{},{:.17g},{},{}\n",
            o.detector,
            o.probability,
            o.fidelity.has_value() ? fmt::format("{:.17g}", *o.fidelity) : "",
            corrections_string(o.ops));
    }
    for (const auto &[id, p] : run.sinks) {
        out += fmt::format("sink,{},{:.17g},,\n", id.name, p);
    }
    auto f = run.weighted_fidelity();
    out += fmt::format(
        "total,success,{:.17g},{},\n", run.success_probability(), f.has_value() ? fmt::format("{:.17g}", *f) : "");
    return out;
}

std::string run_report_text(const ProtocolRun &run, const RunInputs &inputs) {
    std::string out = fmt::format(
        "circuit {}  N={}  P={}  d={}\n", run.circuit_name, run.n, inputs.nominal.purcell.str(), inputs.nominal.detuning);
    for (const auto &o : run.outcomes) {
        out += fmt::format("  {:<4} p={:.10f}", o.detector, o.probability);
        if (o.fidelity.has_value()) {
            out += fmt::format("  F={:.10f}", *o.fidelity);
        }
        out += fmt::format("  ff={}\n", corrections_string(o.ops));
        out += fmt::format("       conditioned {}\n       corrected   {}\n", o.conditioned.str(), o.corrected.str());
    }
    for (const auto &[id, p] : run.sinks) {
        out += fmt::format("  sink {:<4} {:.10f}\n", id.name, p);
    }
    out += fmt::format("success probability {:.10f}\n", run.success_probability());
    if (auto f = run.weighted_fidelity()) {
        out += fmt::format("weighted fidelity   {:.10f}\n", *f);
    }
    return out;
}

json fidelity_report_json(const FidelityInputs &inputs, const AveragedFidelity &result, const ReportMeta &meta) {
    const auto &m = inputs.model;
    json method = m.method == AveragingMethod::gauss_hermite
                      ? json{{"name", "gauss-hermite"}, {"order", m.order}}
                      : json{{"name", "monte-carlo"}, {"samples", m.samples}, {"seed", m.seed}};
    return {
        {"schema", FIDELITY_REPORT_SCHEMA},
        {"n", inputs.n},
        {"parameters",
         {{"purcell", purcell_json(inputs.nominal.purcell)},
          {"detuning", inputs.nominal.detuning},
          {"sigma", m.sigma}}},
        {"method", method},
        {"weighting", weighting_name(inputs.weighting)},
        {"fidelity", result.mean},
        {"standard_error", result.standard_error},
        {"evaluations", result.evaluations},
        {"meta", meta_json(meta)},
    };
}

json coeffs_json(const EmitterParams &params, const ScatterCoeffs &c) {
    return {
        {"purcell", purcell_json(params.purcell)},
        {"detuning", params.detuning},
        {"offset", params.offset},
        {"r", complex_json(c.r)},
        {"t", complex_json(c.t)},
        {"reflectance", c.reflectance()},
        {"loss", c.loss()},
    };
}

json without_meta(json report) {
    report.erase("meta");
    return report;
}

}  // namespace wgq
