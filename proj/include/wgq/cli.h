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

#include <ostream>

namespace wgq {

enum ExitCode : int {
    EXIT_OK = 0,
    EXIT_IO = 1,
    EXIT_FLAGS = 2,
    EXIT_PARSE = 3,
    EXIT_PHYSICS = 4,
};

/// Entry point of the `wgq` tool; returns the process exit code.
int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

}  // namespace wgq
