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

#include <stdexcept>
#include <string>
#include <string_view>

#include "wgq/circuit.h"

namespace wgq {

/// Rejected netlist text. Line and column are 1-based.
struct ParseError : std::runtime_error {
    ParseError(size_t line, size_t column, const std::string &message);
    size_t line;
    size_t column;
    std::string message;
};

/// Parses a .wgq document. The grammar is described in docs/netlist.md.
Circuit parse_netlist(std::string_view text);

/// Canonical text; parse_netlist(serialize_netlist(c)) == c.
std::string serialize_netlist(const Circuit &circuit);

}  // namespace wgq
