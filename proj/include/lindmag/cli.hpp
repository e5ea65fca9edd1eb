// Copyright 2026 The lindmag Authors
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

#include "lindmag/ensemble.hpp"
#include "lindmag/integrators.hpp"
#include "lindmag/models.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lindmag {

inline constexpr const char* kLibraryVersion = "0.1.0";

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitRunFailure = 3, kExitIo = 4 };

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelSpec {
  std::string name;  // built-in name; empty when file is set
  std::string file;
  nlohmann::json params = nlohmann::json::object();
};

struct RunConfig {
  ModelSpec model;
  std::vector<SchemeConfig> schemes;  // each carries its own delta
  double delta = 0.0;                 // model time units
  double t_stop = 0.0;
  int n_traj = 1000;
  int n_repeats = 1;
  std::uint64_t master_seed = 1;
  int fourier_p = kDefaultFourierOrder;
  std::vector<std::string> observables;
  bool observables_given = false;
  bool compare_exact = true;
  std::vector<double> deltas;      // converge
  std::vector<double> angles_deg;  // rpm-yield
  double exact_t_stop = 0.0;       // rpm-yield steady state horizon; 0 means t_stop
  nlohmann::json resolved;         // canonical form written to meta.json

  int n_steps(double step) const;
};

// {"value": v, "unit": u} converted to the model time unit. Plain numbers are rejected.
double to_model_time(const nlohmann::json& quantity, const std::string& model_unit);

LindbladModel build_model(const ModelSpec& spec);
// Throws ConfigError with a schema message.
RunConfig parse_run_config(const nlohmann::json& j);
nlohmann::json preset_config(const std::string& name);
std::vector<std::string> preset_names();

void write_results_csv(const std::string& path, const std::vector<EnsembleEstimate>& runs,
                       const std::optional<ExactSeries>& exact);

int cli_main(int argc, char** argv);

}  // namespace lindmag
