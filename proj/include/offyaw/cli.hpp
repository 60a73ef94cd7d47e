/* Copyright 2026 The offyaw Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace offyaw::cli {

// Exit statuses shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitIoError = 3;

// Runs one invocation; args[0] is the program name. Subcommands: rasterize,
// eval, gradcheck, refine, synth.
int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace offyaw::cli
