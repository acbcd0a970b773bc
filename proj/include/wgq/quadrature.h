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

#include <cstddef>
#include <functional>
#include <vector>

namespace wgq {

/// Nodes and weights for the weight function exp(-x^2) on the real line.
/// Nodes are ascending.
struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Throws InvalidParameter for order 0 or order above 200.
GaussHermiteRule gauss_hermite(size_t order);

/// E[f(X)] for X ~ N(0, sigma^2) with the given rule.
double gaussian_expectation(const GaussHermiteRule &rule, double sigma, const std::function<double(double)> &f);

}  // namespace wgq
