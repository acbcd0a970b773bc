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
#include <string>
#include <vector>

namespace wgq {

struct PropertyResult {
    std::string name;
    bool passed;
    /// Worst observed deviation or a short failure description.
    std::string detail;
};

/// Names of every built-in property, e.g. "state.norm_conservation".
std::vector<std::string> property_names();

/// Runs properties whose name contains `filter` (all when empty).
std::vector<PropertyResult> run_verification(const std::string &filter = "", uint64_t seed = 20260101);

}  // namespace wgq
