/**
 * Copyright 2026 The fedsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FEDSIM_CLI_HPP
#define FEDSIM_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace fedsim::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kRuntimeError = 1,     ///< run aborted, format error, insufficient data
  kInvalidConfig = 2,    ///< configuration or usage error
  kDigestMismatch = 3,   ///< checkpoint belongs to a different configuration
};

int cmd_run(const std::string& config_path, const std::vector<unsigned long long>& seed_override,
            std::ostream& out, std::ostream& err);
int cmd_resume(const std::string& checkpoint_path, const std::string& config_path,
               const std::vector<unsigned long long>& seed_override, std::ostream& out, std::ostream& err);
int cmd_distribute(const std::string& config_path, const std::string& out_csv,
                   const std::vector<unsigned long long>& seed_override, std::ostream& out, std::ostream& err);
int cmd_inspect(const std::string& metrics_path, const std::string& csv_path, std::ostream& out, std::ostream& err);

/// Entry point shared by the fedsim binary and the tests; args exclude argv[0].
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fedsim::cli

#endif  // FEDSIM_CLI_HPP
