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

#include "wgq/cli.h"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "wgq/analysis.h"
#include "wgq/netlist.h"
#include "wgq/report.h"
#include "wgq/verify.h"

namespace wgq {

namespace {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PhysicsViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr double NORM_TOLERANCE = 1e-10;

std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(fmt::format("cannot open '{}'", path));
    }
    std::stringstream ss;
    ss << in.rdbuf();
    if (in.bad()) {
        throw IoError(fmt::format("cannot read '{}'", path));
    }
    return ss.str();
}

void write_file(const std::string &path, const std::string &text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw IoError(fmt::format("cannot open '{}' for writing", path));
    }
    f << text;
    if (!f) {
        throw IoError(fmt::format("cannot write '{}'", path));
    }
}

/// Writes to `path` when given, otherwise to `out`.
void emit(std::ostream &out, const std::string &path, const std::string &text) {
    if (path.empty()) {
        out << text;
    } else {
        write_file(path, text);
    }
}

std::vector<double> parse_list(const std::string &text, const char *what) {
    std::vector<double> out;
    if (text.empty()) {
        return out;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        size_t used = 0;
        double v = 0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception &) {
            used = 0;
        }
        if (used == 0 || used != item.size() || !std::isfinite(v)) {
            throw InvalidParameter(fmt::format("bad number '{}' in {}", item, what));
        }
        out.push_back(v);
    }
    return out;
}

/// Flags shared by every command that needs an operating point.
struct PointFlags {
    std::string purcell = "ideal";
    double detuning = 0;
    std::string offsets;

    void add(CLI::App *app) {
        app->add_option("--purcell", purcell, "Purcell factor P, or 'ideal'")->capture_default_str();
        app->add_option("--detuning", detuning, "detuning d in units of gamma_1D")->capture_default_str();
        app->add_option("--offsets", offsets, "comma-separated per-emitter offsets, e.g. --offsets=0.1,-0.1");
    }
    EmitterParams params() const {
        EmitterParams p;
        p.purcell = parse_purcell(purcell);
        p.detuning = detuning;
        p.validate();
        return p;
    }
    std::vector<double> offset_list() const {
        return parse_list(offsets, "--offsets");
    }
};

void check_norm(const ProtocolRun &run) {
    double total = run.success_probability() + run.sink_total();
    if (std::abs(total - 1.0) > NORM_TOLERANCE) {
        throw PhysicsViolation(fmt::format("probability bookkeeping off by {:.3g}", total - 1.0));
    }
}

std::string render_run(
    const ProtocolRun &run, const RunInputs &inputs, const ReportMeta &meta, const std::string &format) {
    if (format == "json") {
        return run_report_json(run, inputs, meta).dump(2) + "\n";
    }
    if (format == "csv") {
        return run_report_csv(run);
    }
    return run_report_text(run, inputs);
}

FidelityWeighting parse_weighting(const std::string &text) {
    if (text == "herald") {
        return FidelityWeighting::herald;
    }
    return FidelityWeighting::detector_mean;
}

AveragingMethod parse_method(const std::string &text) {
    if (text == "gh" || text == "gauss-hermite") {
        return AveragingMethod::gauss_hermite;
    }
    return AveragingMethod::monte_carlo;
}

}  // namespace

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    auto started = std::chrono::steady_clock::now();
    ReportMeta meta;
    for (int i = 0; i < argc; i++) {
        meta.argv.emplace_back(argv[i]);
    }
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count(); };

    CLI::App app{"Waveguide-QED heralded KLM state simulator", "wgq"};
    app.require_subcommand(1);
    const std::vector<std::string> formats = {"json", "csv", "text"};
    const std::vector<std::string> methods = {"gh", "gauss-hermite", "mc", "monte-carlo"};
    const std::vector<std::string> weightings = {"herald", "detector-mean"};

    // coeffs
    auto *coeffs = app.add_subcommand("coeffs", "reflection and transmission of one emitter");
    PointFlags coeffs_point;
    coeffs_point.add(coeffs);
    std::string coeffs_format = "text";
    coeffs->add_option("--format", coeffs_format)->check(CLI::IsMember({"json", "text"}))->capture_default_str();

    // run
    auto *run = app.add_subcommand("run", "run a built-in protocol");
    PointFlags run_point;
    run_point.add(run);
    std::string run_protocol_name = "klm2";
    size_t run_n = 0;
    bool run_rounded = false;
    std::string run_format = "json";
    std::string run_output;
    run->add_option("--protocol", run_protocol_name)
        ->check(CLI::IsMember({"klm2", "klm3", "klmN", "heralded_z"}))
        ->capture_default_str();
    run->add_option("--n", run_n, "emitter count (klmN; implied for klm2/klm3)");
    run->add_flag("--rounded-angle", run_rounded, "use the rounded 27.4 degree preparation angle in klm2");
    run->add_option("--format", run_format)->check(CLI::IsMember(formats))->capture_default_str();
    run->add_option("--output", run_output, "write the report here instead of stdout");

    // sweep
    auto *sw = app.add_subcommand("sweep", "success and fidelity parameter sweeps");
    std::string sw_kind;
    std::string sw_grid;
    double sw_from = NAN;
    double sw_to = NAN;
    size_t sw_points = 0;
    std::string sw_out;
    std::string sw_svg;
    bool sw_closed = false;
    std::string sw_method = "gh";
    size_t sw_order = 20;
    size_t sw_samples = 100000;
    uint64_t sw_seed = 1;
    std::string sw_weighting = "herald";
    size_t sw_threads = 0;
    sw->add_option("--kind", sw_kind)->required()->check(CLI::IsMember({"fig5a", "fig5b", "fig6", "fig7", "fig8"}));
    sw->add_option("--grid", sw_grid, "comma-separated grid values");
    sw->add_option("--from", sw_from, "first grid value (with --to and --points)");
    sw->add_option("--to", sw_to, "last grid value");
    sw->add_option("--points", sw_points, "number of grid points")->check(CLI::Range(size_t(2), size_t(100000)));
    sw->add_option("--out", sw_out, "CSV path (stdout when absent)");
    sw->add_option("--svg", sw_svg, "also write an SVG chart here");
    sw->add_flag("--closed-form", sw_closed, "closed-form success probabilities instead of simulation");
    sw->add_option("--method", sw_method)->check(CLI::IsMember(methods))->capture_default_str();
    sw->add_option("--order", sw_order)->check(CLI::Range(size_t(1), size_t(200)))->capture_default_str();
    sw->add_option("--samples", sw_samples)->check(CLI::PositiveNumber)->capture_default_str();
    sw->add_option("--seed", sw_seed)->capture_default_str();
    sw->add_option("--weighting", sw_weighting)->check(CLI::IsMember(weightings))->capture_default_str();
    sw->add_option("--threads", sw_threads, "worker threads (default WGQ_THREADS or all cores)");

    // fidelity
    auto *fid = app.add_subcommand("fidelity", "broadening-averaged fidelity");
    size_t fid_n = 2;
    std::string fid_purcell = "100";
    double fid_detuning = 0;
    double fid_sigma = 0;
    std::string fid_method = "gh";
    size_t fid_order = 20;
    size_t fid_samples = 100000;
    uint64_t fid_seed = 1;
    size_t fid_budget = 1000000;
    std::string fid_weighting = "herald";
    std::string fid_format = "json";
    fid->add_option("--n", fid_n)->check(CLI::Range(size_t(2), MAX_EMITTERS))->capture_default_str();
    fid->add_option("--purcell", fid_purcell)->capture_default_str();
    fid->add_option("--detuning", fid_detuning)->capture_default_str();
    fid->add_option("--sigma", fid_sigma, "broadening width in units of gamma_1D")->capture_default_str();
    fid->add_option("--method", fid_method)->check(CLI::IsMember(methods))->capture_default_str();
    fid->add_option("--order", fid_order)->check(CLI::Range(size_t(1), size_t(200)))->capture_default_str();
    fid->add_option("--samples", fid_samples)->check(CLI::PositiveNumber)->capture_default_str();
    fid->add_option("--seed", fid_seed)->capture_default_str();
    fid->add_option("--budget", fid_budget, "largest Gauss-Hermite grid")->capture_default_str();
    fid->add_option("--weighting", fid_weighting)->check(CLI::IsMember(weightings))->capture_default_str();
    fid->add_option("--format", fid_format)->check(CLI::IsMember({"json", "text"}))->capture_default_str();

    // exec
    auto *ex = app.add_subcommand("exec", "execute a .wgq netlist");
    std::string ex_path;
    PointFlags ex_point;
    ex_point.add(ex);
    std::string ex_format = "json";
    std::string ex_output;
    ex->add_option("netlist", ex_path, "path to a .wgq file")->required();
    ex->add_option("--format", ex_format)->check(CLI::IsMember(formats))->capture_default_str();
    ex->add_option("--output", ex_output, "write the report here instead of stdout");

    // verify
    auto *ver = app.add_subcommand("verify", "run the invariant suite");
    std::string ver_filter;
    uint64_t ver_seed = 20260101;
    ver->add_option("--filter", ver_filter, "only properties whose name contains this");
    ver->add_option("--seed", ver_seed)->capture_default_str();

    // netlist
    auto *nl = app.add_subcommand("netlist", "print the netlist of a built-in protocol");
    std::string nl_protocol = "klm2";
    size_t nl_n = 0;
    bool nl_rounded = false;
    std::string nl_output;
    nl->add_option("--protocol", nl_protocol)
        ->check(CLI::IsMember({"klm2", "klm3", "klmN", "heralded_z"}))
        ->capture_default_str();
    nl->add_option("--n", nl_n);
    nl->add_flag("--rounded-angle", nl_rounded);
    nl->add_option("--output", nl_output);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e, out, err);
        return code == 0 ? EXIT_OK : EXIT_FLAGS;
    }

    auto protocol_params = [](const std::string &name, size_t n, const PointFlags &point, bool rounded) {
        ProtocolKind kind = parse_protocol_kind(name);
        ProtocolParams p;
        p.nominal = point.params();
        p.offsets = point.offset_list();
        p.rounded_prep_angle = rounded;
        if (kind == ProtocolKind::klm2) {
            p.n = 2;
        } else if (kind == ProtocolKind::klm3) {
            p.n = 3;
        } else if (kind == ProtocolKind::klmN) {
            p.n = n == 0 ? 2 : n;
        } else {
            p.n = 2;
        }
        if ((kind == ProtocolKind::klm2 || kind == ProtocolKind::klm3) && n != 0 && n != p.n) {
            throw InvalidParameter(fmt::format("{} has N = {}, got --n {}", name, p.n, n));
        }
        return std::pair{kind, p};
    };

    try {
        if (coeffs->parsed()) {
            EmitterParams p = coeffs_point.params();
            auto offsets = coeffs_point.offset_list();
            if (offsets.size() > 1) {
                throw InvalidParameter("coeffs takes at most one offset");
            }
            if (!offsets.empty()) {
                p.offset = offsets[0];
            }
            ScatterCoeffs c = scatter_coeffs(p);
            if (coeffs_format == "json") {
                out << coeffs_json(p, c).dump(2) << "\n";
            } else {
                out << fmt::format("r      = {:+.12f}{:+.12f}i\n", c.r.real(), c.r.imag());
                out << fmt::format("t      = {:+.12f}{:+.12f}i\n", c.t.real(), c.t.imag());
                out << fmt::format("|r|^2  = {:.12f}\n", c.reflectance());
                out << fmt::format("loss   = {:.12f}\n", c.loss());
            }
            return EXIT_OK;
        }

        if (run->parsed()) {
            auto [kind, p] = protocol_params(run_protocol_name, run_n, run_point, run_rounded);
            ProtocolRun result = run_protocol(kind, p);
            RunInputs inputs{p.nominal, p.offsets, scatter_coeffs(p.nominal).r};
            meta.elapsed_seconds = elapsed();
            emit(out, run_output, render_run(result, inputs, meta, run_format));
            check_norm(result);
            return EXIT_OK;
        }

        if (ex->parsed()) {
            std::string text = read_file(ex_path);
            Circuit circuit = parse_netlist(text);
            EmitterParams nominal = ex_point.params();
            auto offsets = ex_point.offset_list();
            Environment env = make_environment(circuit.num_emitters, nominal, offsets);
            ProtocolRun result = run_circuit(circuit, env);
            RunInputs inputs{nominal, offsets, env.r_nominal};
            meta.elapsed_seconds = elapsed();
            emit(out, ex_output, render_run(result, inputs, meta, ex_format));
            check_norm(result);
            return EXIT_OK;
        }

        if (sw->parsed()) {
            SweepKind kind = parse_sweep_kind(sw_kind);
            SweepOptions opt;
            if (!sw_grid.empty()) {
                opt.grid = parse_list(sw_grid, "--grid");
            } else if (sw_points > 0 || !std::isnan(sw_from) || !std::isnan(sw_to)) {
                if (sw_points == 0 || std::isnan(sw_from) || std::isnan(sw_to)) {
                    throw InvalidParameter("--from, --to and --points go together");
                }
                for (size_t i = 0; i < sw_points; i++) {
                    opt.grid.push_back(sw_from + (sw_to - sw_from) * double(i) / double(sw_points - 1));
                }
            }
            opt.closed_form = sw_closed;
            opt.broadening.method = parse_method(sw_method);
            opt.broadening.order = sw_order;
            opt.broadening.samples = sw_samples;
            opt.broadening.seed = sw_seed;
            opt.weighting = parse_weighting(sw_weighting);
            opt.threads = sw_threads;
            SweepResult result = sweep(kind, opt);
            emit(out, sw_out, sweep_csv(result));
            if (!sw_svg.empty()) {
                write_file(sw_svg, sweep_svg(result));
            }
            return EXIT_OK;
        }

        if (fid->parsed()) {
            FidelityInputs inputs;
            inputs.n = fid_n;
            inputs.nominal.purcell = parse_purcell(fid_purcell);
            inputs.nominal.detuning = fid_detuning;
            inputs.nominal.validate();
            inputs.model.sigma = fid_sigma;
            inputs.model.method = parse_method(fid_method);
            inputs.model.order = fid_order;
            inputs.model.samples = fid_samples;
            inputs.model.seed = fid_seed;
            inputs.model.budget = fid_budget;
            inputs.weighting = parse_weighting(fid_weighting);
            AveragedFidelity result = averaged_fidelity(fid_n, inputs.nominal, inputs.model, inputs.weighting);
            meta.elapsed_seconds = elapsed();
            if (fid_format == "json") {
                out << fidelity_report_json(inputs, result, meta).dump(2) << "\n";
            } else {
                out << fmt::format("fidelity {:.12f}", result.mean);
                if (result.standard_error > 0) {
                    out << fmt::format(" +- {:.3g}", result.standard_error);
                }
                out << fmt::format("  ({} evaluations)\n", result.evaluations);
            }
            return EXIT_OK;
        }

        if (ver->parsed()) {
            auto results = run_verification(ver_filter, ver_seed);
            if (results.empty()) {
                err << fmt::format("no property matches '{}'\n", ver_filter);
                return EXIT_FLAGS;
            }
            size_t failed = 0;
            for (const auto &r : results) {
                out << fmt::format("{} {:<36} {}\n", r.passed ? "PASS" : "FAIL", r.name, r.detail);
                failed += r.passed ? 0 : 1;
            }
            out << fmt::format("{} passed, {} failed\n", results.size() - failed, failed);
            return failed == 0 ? EXIT_OK : EXIT_PHYSICS;
        }

        if (nl->parsed()) {
            PointFlags ideal;
            auto [kind, p] = protocol_params(nl_protocol, nl_n, ideal, nl_rounded);
            emit(out, nl_output, serialize_netlist(build_protocol(kind, p)));
            return EXIT_OK;
        }
    } catch (const IoError &e) {
        err << "error: " << e.what() << "\n";
        return EXIT_IO;
    } catch (const ParseError &e) {
        err << fmt::format("{}:{}:{}: {}\n", ex_path, e.line, e.column, e.message);
        return EXIT_PARSE;
    } catch (const PhysicsViolation &e) {
        err << "physics violation: " << e.what() << "\n";
        return EXIT_PHYSICS;
    } catch (const UndefinedFidelityError &e) {
        err << "physics violation: " << e.what() << "\n";
        return EXIT_PHYSICS;
    } catch (const QuadratureBudgetError &e) {
        err << "error: " << e.what() << "\n";
        return EXIT_FLAGS;
    } catch (const CircuitError &e) {
        err << "circuit error: " << e.what() << "\n";
        return EXIT_PHYSICS;
    } catch (const InvalidParameter &e) {
        err << "error: " << e.what() << "\n";
        return EXIT_FLAGS;
    }
    return EXIT_FLAGS;
}

}  // namespace wgq
