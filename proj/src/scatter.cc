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

#include "wgq/scatter.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

namespace wgq {

Purcell Purcell::finite(double value) {
    if (!std::isfinite(value) || value <= 0) {
        throw InvalidParameter(fmt::format("Purcell factor must be finite and > 0, got {}", value));
    }
    return Purcell(false, value);
}

double Purcell::value() const {
    return ideal_ ? std::numeric_limits<double>::infinity() : value_;
}

std::string Purcell::str() const {
    return ideal_ ? "ideal" : fmt::format("{}", value_);
}

Purcell parse_purcell(const std::string &text) {
    if (text == "ideal" || text == "inf" || text == "infinity") {
        return Purcell::ideal();
    }
    size_t used = 0;
    double v;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception &) {
        throw InvalidParameter(fmt::format("cannot parse Purcell factor '{}'", text));
    }
    if (used != text.size()) {
        throw InvalidParameter(fmt::format("cannot parse Purcell factor '{}'", text));
    }
    return Purcell::finite(v);
}

void EmitterParams::validate() const {
    if (!std::isfinite(detuning) || !std::isfinite(offset)) {
        throw InvalidParameter(fmt::format("detuning and offset must be finite (got {}, {})", detuning, offset));
    }
}

ScatterCoeffs scatter_coeffs(const EmitterParams &params) {
    params.validate();
    cplx denominator(1.0 + params.purcell.inverse(), -2.0 * params.effective_detuning());
    cplx r = -1.0 / denominator;
    return {r, r + 1.0};
}

Matrix2 Matrix2::operator*(const Matrix2 &o) const {
    return {
        m00 * o.m00 + m01 * o.m10,
        m00 * o.m01 + m01 * o.m11,
        m10 * o.m00 + m11 * o.m10,
        m10 * o.m01 + m11 * o.m11,
    };
}

Matrix2 Matrix2::adjoint() const {
    return {std::conj(m00), std::conj(m10), std::conj(m01), std::conj(m11)};
}

double Matrix2::unitarity_error() const {
    Matrix2 g = adjoint() * *this;
    return std::max({std::abs(g.m00 - 1.0), std::abs(g.m01), std::abs(g.m10), std::abs(g.m11 - 1.0)});
}

PolarizationMatrix hwp_matrix(double theta_degrees) {
    double two_theta = 2.0 * theta_degrees * std::numbers::pi / 180.0;
    double c = std::cos(two_theta);
    double s = std::sin(two_theta);
    return {c, s, s, -c};
}

double heralded_z_success(const EmitterParams &params) {
    return scatter_coeffs(params).reflectance();
}

}  // namespace wgq
