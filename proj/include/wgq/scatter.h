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
#include <stdexcept>
#include <string>

namespace wgq {

using cplx = std::complex<double>;

/// Raised when a physical parameter or operator argument is outside its domain.
struct InvalidParameter : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Purcell factor P = gamma_1D / gamma'. The ideal value (no free-space decay)
/// is represented explicitly so that resonant reflection is exactly -1.
class Purcell {
   public:
    static Purcell ideal() {
        return Purcell(true, 0.0);
    }
    /// Throws InvalidParameter unless value is finite and > 0.
    static Purcell finite(double value);

    bool is_ideal() const {
        return ideal_;
    }
    /// P itself; +infinity for the ideal sentinel.
    double value() const;
    /// 1/P; exactly 0 for the ideal sentinel.
    double inverse() const {
        return ideal_ ? 0.0 : 1.0 / value_;
    }
    std::string str() const;

    bool operator==(const Purcell &other) const = default;

   private:
    Purcell(bool ideal, double value) : ideal_(ideal), value_(value) {
    }
    bool ideal_;
    double value_;
};

/// Parses "ideal", "inf" or a positive real number.
Purcell parse_purcell(const std::string &text);

/// Dimensionless single-emitter parameters. Detuning and offset are in units
/// of gamma_1D; the offset is an inhomogeneous shift added to the detuning.
struct EmitterParams {
    Purcell purcell = Purcell::ideal();
    double detuning = 0.0;
    double offset = 0.0;

    double effective_detuning() const {
        return detuning + offset;
    }
    void validate() const;
};

/// Reflection / transmission amplitudes of one emitter. t = r + 1.
struct ScatterCoeffs {
    cplx r;
    cplx t;

    double reflectance() const {
        return std::norm(r);
    }
    /// Probability lost to non-guided modes, 1 - |r|^2 - |t|^2.
    double loss() const {
        return 1.0 - std::norm(r) - std::norm(t);
    }
};

ScatterCoeffs scatter_coeffs(const EmitterParams &params);

/// 2x2 complex matrix acting on the {H, V} polarization basis, row major.
struct Matrix2 {
    cplx m00, m01, m10, m11;

    static Matrix2 identity() {
        return {1.0, 0.0, 0.0, 1.0};
    }
    bool operator==(const Matrix2 &) const = default;
    Matrix2 operator*(const Matrix2 &o) const;
    Matrix2 adjoint() const;
    /// Largest entry of |M^dagger M - I|.
    double unitarity_error() const;
    bool is_unitary(double tol = 1e-10) const {
        return unitarity_error() <= tol;
    }
};

using PolarizationMatrix = Matrix2;

/// Half-wave plate with fast axis at theta degrees:
/// [[cos 2t, sin 2t], [sin 2t, -cos 2t]].
PolarizationMatrix hwp_matrix(double theta_degrees);

/// Success probability of the heralded Z device, |r|^2.
double heralded_z_success(const EmitterParams &params);

}  // namespace wgq
