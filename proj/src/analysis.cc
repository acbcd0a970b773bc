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

#include "wgq/analysis.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "wgq/kernel.h"
#include "wgq/quadrature.h"

namespace wgq {

namespace {

constexpr size_t MC_CHUNK = 4096;

double weighted(const FidelityKernel::Summary &s, FidelityWeighting weighting) {
    if (s.success <= 0) {
        throw UndefinedFidelityError("no detector can click, fidelity is undefined");
    }
    if (weighting == FidelityWeighting::herald) {
        return s.overlap / s.success;
    }
    double total = 0;
    size_t count = 0;
    for (size_t i = 0; i < s.probabilities.size(); i++) {
        if (s.probabilities[i] >= DETECTOR_THRESHOLD) {
            total += s.fidelities[i];
            count++;
        }
    }
    return total / double(count);
}

/// Fidelity as a function of the offsets, through a kernel compiled once.
struct FidelityModel {
    FidelityKernel kernel;
    EmitterState target;
    EmitterParams nominal;
    FidelityWeighting weighting;

    double operator()(const std::vector<double> &offsets) const {
        std::vector<cplx> r(offsets.size());
        for (size_t i = 0; i < offsets.size(); i++) {
            EmitterParams p = nominal;
            p.offset += offsets[i];
            r[i] = scatter_coeffs(p).r;
        }
        return weighted(kernel.summarize(r, target), weighting);
    }
};

FidelityModel make_model(size_t n, const EmitterParams &nominal, FidelityWeighting weighting) {
    ProtocolParams params;
    params.n = n;
    params.nominal = nominal;
    Circuit circuit = build_protocol(protocol_for(n), params);
    return {FidelityKernel::compile(circuit, scatter_coeffs(nominal).r), klm_target(n), nominal, weighting};
}

}  // namespace

double success_probability(size_t n, const EmitterParams &params) {
    if (n < 1) {
        throw InvalidParameter("success probability needs N >= 1");
    }
    params.validate();
    return std::pow(scatter_coeffs(params).reflectance(), double(n));
}

ProtocolKind protocol_for(size_t n) {
    if (n == 2) {
        return ProtocolKind::klm2;
    }
    if (n == 3) {
        return ProtocolKind::klm3;
    }
    return ProtocolKind::klmN;
}

double conditioned_fidelity(
    size_t n, const EmitterParams &nominal, const std::vector<double> &offsets, FidelityWeighting weighting) {
    ProtocolParams params;
    params.n = n;
    params.nominal = nominal;
    params.offsets = offsets;
    ProtocolRun run = run_protocol(protocol_for(n), params);
    if (run.outcomes.empty()) {
        throw UndefinedFidelityError("no detector can click, fidelity is undefined");
    }
    if (weighting == FidelityWeighting::herald) {
        return *run.weighted_fidelity();
    }
    double total = 0;
    for (const auto &o : run.outcomes) {
        total += *o.fidelity;
    }
    return total / double(run.outcomes.size());
}

void BroadeningModel::validate() const {
    if (!std::isfinite(sigma) || sigma < 0) {
        throw InvalidParameter(fmt::format("sigma must be finite and >= 0, got {}", sigma));
    }
    if (method == AveragingMethod::gauss_hermite && order < 1) {
        throw InvalidParameter("Gauss-Hermite order must be >= 1");
    }
    if (method == AveragingMethod::monte_carlo && samples < 1) {
        throw InvalidParameter("Monte-Carlo needs at least one sample");
    }
}

AveragedFidelity averaged_fidelity(
    size_t n, const EmitterParams &nominal, const BroadeningModel &model, FidelityWeighting weighting) {
    model.validate();
    if (model.sigma == 0) {
        return {conditioned_fidelity(n, nominal, {}, weighting), 0.0, 1};
    }

    if (model.method == AveragingMethod::gauss_hermite) {
        double points = std::pow(double(model.order), double(n));
        if (points > double(model.budget)) {
            throw QuadratureBudgetError(fmt::format(
                "Gauss-Hermite grid of {}^{} points exceeds the budget of {}; use monte-carlo instead",
                model.order,
                n,
                model.budget));
        }
        FidelityModel f = make_model(n, nominal, weighting);
        GaussHermiteRule rule = gauss_hermite(model.order);
        std::vector<double> offsets(n);
        std::vector<size_t> idx(n, 0);
        double total = 0;
        size_t evaluations = 0;
        const double scale = std::numbers::sqrt2 * model.sigma;
        while (true) {
            double w = 1;
            for (size_t i = 0; i < n; i++) {
                offsets[i] = scale * rule.nodes[idx[i]];
                w *= rule.weights[idx[i]];
            }
            total += w * f(offsets);
            evaluations++;
            size_t i = 0;
            while (i < n && ++idx[i] == model.order) {
                idx[i] = 0;
                i++;
            }
            if (i == n) {
                break;
            }
        }
        return {total / std::pow(std::numbers::pi, 0.5 * double(n)), 0.0, evaluations};
    }

    FidelityModel f = make_model(n, nominal, weighting);
    const size_t chunks = (model.samples + MC_CHUNK - 1) / MC_CHUNK;
    std::vector<double> sums(chunks, 0.0);
    std::vector<double> squares(chunks, 0.0);
    for (size_t c = 0; c < chunks; c++) {
        // Each chunk has its own stream so the result does not depend on scheduling.
        std::seed_seq seq{uint32_t(model.seed), uint32_t(model.seed >> 32), uint32_t(c), uint32_t(c >> 32)};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> normal(0.0, model.sigma);
        size_t count = std::min(MC_CHUNK, model.samples - c * MC_CHUNK);
        std::vector<double> offsets(n);
        for (size_t s = 0; s < count; s++) {
            for (auto &d : offsets) {
                d = normal(rng);
            }
            double v = f(offsets);
            sums[c] += v;
            squares[c] += v * v;
        }
    }
    double sum = 0;
    double sq = 0;
    for (size_t c = 0; c < chunks; c++) {
        sum += sums[c];
        sq += squares[c];
    }
    double count = double(model.samples);
    double mean = sum / count;
    double var = count > 1 ? std::max(0.0, (sq - count * mean * mean) / (count - 1)) : 0.0;
    return {mean, std::sqrt(var / count), model.samples};
}

std::string sweep_kind_name(SweepKind kind) {
    switch (kind) {
        case SweepKind::fig5a:
            return "fig5a";
        case SweepKind::fig5b:
            return "fig5b";
        case SweepKind::fig6:
            return "fig6";
        case SweepKind::fig7:
            return "fig7";
        case SweepKind::fig8:
            return "fig8";
    }
    return "?";
}

SweepKind parse_sweep_kind(const std::string &text) {
    for (auto k : {SweepKind::fig5a, SweepKind::fig5b, SweepKind::fig6, SweepKind::fig7, SweepKind::fig8}) {
        if (sweep_kind_name(k) == text) {
            return k;
        }
    }
    throw InvalidParameter(fmt::format("unknown sweep kind '{}', expected fig5a, fig5b, fig6, fig7 or fig8", text));
}

std::vector<double> default_grid(SweepKind kind) {
    std::vector<double> grid;
    if (kind == SweepKind::fig5a || kind == SweepKind::fig6) {
        for (int i = 0; i < 100; i++) {
            grid.push_back(1.0 + 199.0 * i / 99.0);
        }
    } else {
        int points = kind == SweepKind::fig8 ? 41 : 101;
        for (int i = 0; i < points; i++) {
            grid.push_back(-0.5 + double(i) / double(points - 1));
        }
    }
    return grid;
}

size_t default_thread_count() {
    if (const char *env = std::getenv("WGQ_THREADS")) {
        char *end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) {
            return size_t(v);
        }
    }
    return std::max<size_t>(1, std::thread::hardware_concurrency());
}

void parallel_for(size_t count, size_t threads, const std::function<void(size_t)> &body) {
    threads = std::max<size_t>(1, std::min(threads, count));
    if (threads == 1) {
        for (size_t i = 0; i < count; i++) {
            body(i);
        }
        return;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (size_t t = 0; t < threads; t++) {
        pool.emplace_back([&] {
            while (true) {
                size_t i = next.fetch_add(1);
                if (i >= count) {
                    return;
                }
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) {
                        error = std::current_exception();
                    }
                    next = count;
                }
            }
        });
    }
    for (auto &t : pool) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

SweepResult sweep(SweepKind kind, const SweepOptions &options) {
    SweepResult result;
    result.kind = sweep_kind_name(kind);
    result.grid = options.grid.empty() ? default_grid(kind) : options.grid;
    for (size_t i = 0; i < result.grid.size(); i++) {
        if (!std::isfinite(result.grid[i]) || (i > 0 && result.grid[i] <= result.grid[i - 1])) {
            throw InvalidParameter("sweep grid must be finite and strictly increasing");
        }
    }
    bool over_purcell = kind == SweepKind::fig5a || kind == SweepKind::fig6;
    result.axis = over_purcell ? "purcell" : "detuning";
    if (over_purcell) {
        for (double p : result.grid) {
            if (p <= 0) {
                throw InvalidParameter("Purcell grid values must be > 0");
            }
        }
    }

    // One curve: a label and a function of the grid value.
    struct Curve {
        std::string name;
        std::function<double(double)> eval;
    };
    std::vector<Curve> curves;

    auto success = [closed = options.closed_form](size_t n, EmitterParams p) {
        if (closed) {
            return n == 1 ? heralded_z_success(p) : success_probability(n, p);
        }
        ProtocolParams params;
        params.n = std::max<size_t>(n, 2);
        params.nominal = p;
        return run_protocol(n == 1 ? ProtocolKind::heralded_z : protocol_for(n), params).success_probability();
    };
    auto at = [](double purcell, double detuning) {
        EmitterParams p;
        p.purcell = Purcell::finite(purcell);
        p.detuning = detuning;
        return p;
    };

    std::vector<size_t> orders;
    switch (kind) {
        case SweepKind::fig5a:
        case SweepKind::fig5b:
            orders = {1};
            break;
        case SweepKind::fig6:
        case SweepKind::fig7:
            orders = {2, 3};
            break;
        case SweepKind::fig8:
            orders = {2, 3};
            break;
    }

    if (kind == SweepKind::fig8) {
        for (size_t n : orders) {
            for (double sigma : {0.0, 0.1, 0.2}) {
                BroadeningModel model = options.broadening;
                model.sigma = sigma;
                curves.push_back({fmt::format("F{}_sigma{}", n, sigma), [n, model, &options, &at](double d) {
                                      return averaged_fidelity(n, at(100.0, d), model, options.weighting).mean;
                                  }});
            }
        }
    } else if (over_purcell) {
        for (size_t n : orders) {
            for (double d : {0.0, 0.1, 0.15}) {
                std::string label = n == 1 ? "ph" : fmt::format("p{}", n);
                curves.push_back({fmt::format("{}_d{}", label, d), [n, d, &success, &at](double p) {
                                      return success(n, at(p, d));
                                  }});
            }
        }
    } else {
        for (size_t n : orders) {
            for (double p : {100.0, 50.0, 10.0}) {
                std::string label = n == 1 ? "ph" : fmt::format("p{}", n);
                curves.push_back({fmt::format("{}_P{}", label, p), [n, p, &success, &at](double d) {
                                      return success(n, at(p, d));
                                  }});
            }
        }
    }

    const size_t points = result.grid.size();
    std::vector<double> values(curves.size() * points);
    size_t threads = options.threads == 0 ? default_thread_count() : options.threads;
    parallel_for(values.size(), threads, [&](size_t k) {
        size_t c = k / points;
        size_t i = k % points;
        values[k] = curves[c].eval(result.grid[i]);
    });
    for (size_t c = 0; c < curves.size(); c++) {
        SweepSeries s{curves[c].name, {}};
        s.values.assign(values.begin() + long(c * points), values.begin() + long((c + 1) * points));
        result.series.push_back(std::move(s));
    }
    return result;
}

std::string sweep_csv(const SweepResult &result) {
    std::string out = result.axis;
    for (const auto &s : result.series) {
        out += "," + s.name;
    }
    out += "\n";
    for (size_t i = 0; i < result.grid.size(); i++) {
        out += fmt::format("{:.6g}", result.grid[i]);
        for (const auto &s : result.series) {
            out += fmt::format(",{:.6g}", s.values[i]);
        }
        out += "\n";
    }
    return out;
}

std::string sweep_svg(const SweepResult &result) {
    const double width = 640;
    const double height = 420;
    const double left = 60;
    const double right = 170;
    const double top = 20;
    const double bottom = 50;
    double x0 = result.grid.front();
    double x1 = result.grid.back();
    double y0 = 1.0;
    double y1 = 0.0;
    for (const auto &s : result.series) {
        for (double v : s.values) {
            y0 = std::min(y0, v);
            y1 = std::max(y1, v);
        }
    }
    if (y1 - y0 < 1e-9) {
        y0 -= 0.05;
        y1 += 0.05;
    }
    if (x1 == x0) {
        x1 = x0 + 1;
    }
    auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * (width - left - right); };
    auto py = [&](double y) { return top + (y1 - y) / (y1 - y0) * (height - top - bottom); };
    static const char *colors[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"};

    std::string out = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" font-family=\"sans-serif\" "
        "font-size=\"12\">\n",
        width,
        height);
    out += fmt::format(
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
        left,
        top,
        width - left - right,
        height - top - bottom);
    for (int t = 0; t <= 4; t++) {
        double x = x0 + (x1 - x0) * t / 4.0;
        double y = y0 + (y1 - y0) * t / 4.0;
        out += fmt::format(
            "<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:.3g}</text>\n", px(x), height - bottom + 16, x);
        out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.4g}</text>\n", left - 4, py(y) + 4, y);
    }
    out += fmt::format(
        "<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n",
        (left + width - right) / 2,
        height - 12,
        result.axis);
    for (size_t c = 0; c < result.series.size(); c++) {
        const auto &s = result.series[c];
        const char *color = colors[c % 6];
        out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"", color);
        for (size_t i = 0; i < result.grid.size(); i++) {
            out += fmt::format("{}{:.2f},{:.2f}", i ? " " : "", px(result.grid[i]), py(s.values[i]));
        }
        out += "\"/>\n";
        double ly = top + 16 + 18 * double(c);
        out += fmt::format(
            "<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"{}\" stroke-width=\"2\"/>\n",
            width - right + 10,
            ly - 4,
            width - right + 30,
            ly - 4,
            color);
        out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\">{}</text>\n", width - right + 36, ly, s.name);
    }
    out += "</svg>\n";
    return out;
}

}  // namespace wgq
