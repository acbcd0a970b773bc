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

#include "wgq/quadrature.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include <fmt/format.h>

#include "wgq/scatter.h"

namespace wgq {

GaussHermiteRule gauss_hermite(size_t order) {
    if (order < 1 || order > 200) {
        throw InvalidParameter(fmt::format("Gauss-Hermite order must be in [1, 200], got {}", order));
    }
    const size_t n = order;
    const double pim4 = std::pow(std::numbers::pi, -0.25);

    // Golub-Welsch eigenvalues as starting points, polished by Newton below.
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(long(n));
    Eigen::VectorXd sub(std::max<long>(long(n) - 1, 0));
    for (long k = 0; k + 1 < long(n); k++) {
        sub[k] = std::sqrt(double(k + 1) / 2.0);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
    tri.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd &guess = tri.eigenvalues();

    std::vector<double> x(n);
    std::vector<double> w(n);
    for (size_t i = 0; i < (n + 1) / 2; i++) {
        double z = guess[long(n - 1 - i)];
        double pp = 0;
        for (int iter = 0; iter < 100; iter++) {
            // Orthonormal recurrence for the Hermite polynomials.
            double p1 = pim4;
            double p2 = 0;
            for (size_t j = 0; j < n; j++) {
                double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / double(j + 1)) * p2 - std::sqrt(double(j) / double(j + 1)) * p3;
            }
            pp = std::sqrt(2.0 * double(n)) * p2;
            double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    if (n % 2 == 1) {
        x[n / 2] = 0.0;
    }
    GaussHermiteRule rule;
    for (size_t i = 0; i < n; i++) {
        rule.nodes.push_back(x[n - 1 - i]);
        rule.weights.push_back(w[n - 1 - i]);
    }
    return rule;
}

double gaussian_expectation(const GaussHermiteRule &rule, double sigma, const std::function<double(double)> &f) {
    if (!std::isfinite(sigma) || sigma < 0) {
        throw InvalidParameter(fmt::format("sigma must be finite and >= 0, got {}", sigma));
    }
    double total = 0;
    for (size_t i = 0; i < rule.nodes.size(); i++) {
        total += rule.weights[i] * f(std::numbers::sqrt2 * sigma * rule.nodes[i]);
    }
    return total / std::sqrt(std::numbers::pi);
}

}  // namespace wgq
