/* Copyright 2026 The MetaInf Authors. All Rights Reserved.

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

namespace metainf {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIntegrity = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitInfeasible = 4;
inline constexpr int kExitProvider = 5;

// Command-line entry point. Results go to `out` as JSON, diagnostics to `err`.
//
//   metainf [--config FILE] [--data-dir DIR] <command> ...
//     ingest PATH [--format jsonl|csv] [--catalog FILE]
//     synth [--seed N] [--out DIR] [--spec FILE]
//     train [--selector KIND] [--style STYLE] [--rank K]
//     select --task-desc TEXT --model ID --hardware ID [--batch-size N]
//            [--prompt-count N] [--price P] [--budget B]
//     evaluate [--trials N] [--seed N] [--synth-seed N] [--style S] [--rank K]
//              [--out-dir DIR]
//     ablate [--trials N] [--seed N] [--synth-seed N] [--styles ...]
//            [--ranks ...] [--out-dir DIR]
//     serve [--host H] [--port P]
int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace metainf
