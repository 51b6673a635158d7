/* Copyright 2026 The Drivedet Authors. All Rights Reserved.

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
#ifndef DRIVEDET_TOOLS_COMMANDS_H_
#define DRIVEDET_TOOLS_COMMANDS_H_

#include <ostream>
#include <string>
#include <vector>

namespace drivedet {

inline constexpr char kToolVersion[] = "drivedet 0.1.0";

// Environment variable holding the default --jobs value.
inline constexpr char kJobsEnvVar[] = "DRIVEDET_JOBS";

// Entry point of the `drivedet` tool. `args` excludes the program name.
// Returns 0 on success, 1 on runtime or input errors and 2 on usage errors.
int RunCommand(const std::vector<std::string>& args, std::ostream& out,
               std::ostream& err);

}  // namespace drivedet

#endif  // DRIVEDET_TOOLS_COMMANDS_H_
