// Copyright 2026 The NSQST Authors
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
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nsqst/quantum.hpp"
#include "nsqst/training.hpp"

namespace nsqst::cli {

class ConfigError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

enum class TargetKind { Qcd, Afh, Ghz };

struct TargetSpec {
    TargetKind kind = TargetKind::Qcd;
    int qubits = 6;
    double qcd_mass = 1.2;
    double qcd_coupling = 0.8;
    double qcd_time = 1.8;
    int qcd_steps = 2;
    double afh_time = 0.8;
    int afh_steps = 4;
    double ghz_theta = 1.5707963267948966;
};

std::string to_string(TargetKind kind);

/// Everything one pipeline run needs. Files default to fixed names inside
/// the output directory.
struct ExperimentConfig {
    TargetSpec target;
    training::TrainConfig train;
    std::optional<std::uint64_t> seed;
    std::filesystem::path output = ".";
    unsigned threads = 0;
    std::size_t shadow_count = 100;
    bool use_shadow_file = false;
    bool resume = false;

    std::filesystem::path target_file() const { return output / "target.json"; }
    std::filesystem::path shadow_file() const { return output / "shadows.nsqs"; }
    std::filesystem::path checkpoint_file() const { return output / "checkpoint.nsqc"; }
    std::filesystem::path metrics_file() const { return output / "metrics.jsonl"; }
    std::filesystem::path table_file() const { return output / "evaluation.csv"; }
    std::filesystem::path report_file() const { return output / "report.json"; }

    /// Throws ConfigError when the seed is missing or a value is out of range.
    void validate() const;
    std::uint64_t required_seed() const;
};

/// Parses "key = value" lines; '#' starts a comment. Unknown keys, repeated
/// keys and malformed values are errors that name the line.
ExperimentConfig parse_config(std::istream& in, const std::string& origin = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);
/// Documented key set, in the order the README lists it.
std::vector<std::string> config_keys();

/// Target file: JSON with format, version, target kind, metadata, amplitudes.
struct TargetFile {
    TargetSpec spec;
    quantum::StateVector state{1};
};
quantum::StateVector build_target(const TargetSpec& spec);
void write_target_file(const std::filesystem::path& path, const TargetSpec& spec, const quantum::StateVector& state);
TargetFile read_target_file(const std::filesystem::path& path);

/// Observable recorded during training: <H_kin> for QCD, the mean staggered
/// S^x for AFH, the relative phase for GHZ.
std::function<double(std::span<const nqs::cplx>)> training_observable(const TargetSpec& spec);

int cmd_prepare(const ExperimentConfig& config, std::ostream& out);
int cmd_collect(const ExperimentConfig& config, std::ostream& out);
int cmd_train(const ExperimentConfig& config, std::ostream& out);
int cmd_evaluate(const ExperimentConfig& config, std::ostream& out);

/// One row of the evaluation table.
struct PhaseRow {
    BitString s = 0;
    double target_sqrt_p = 0.0;
    double target_phase = 0.0;
    double model_sqrt_p = 0.0;
    /// Aligned so both states agree at the most probable target string;
    /// NaN where sqrt(p) < 0.1.
    double model_phase = 0.0;
};
std::vector<PhaseRow> phase_table(std::span<const nqs::cplx> model, const quantum::StateVector& target);

}  // namespace nsqst::cli
