// Copyright 2026 The qcbridge Authors
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

/**
 * @file
 * Command-line front end. Every command writes `<outdir>/<group>-<command>-<seed>.csv`
 * and a JSON report next to it.
 *
 * Exit codes: 0 success, 1 usage or validation error, 2 numerical failure.
 */

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace qcb::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;

/// Environment variable naming the default output directory.
inline constexpr const char *kOutdirEnv = "QCB_OUTDIR";

/// `args` excludes the program name.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace qcb::cli
