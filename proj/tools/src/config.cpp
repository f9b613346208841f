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

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "nsqst_cli/cli.hpp"

namespace nsqst::cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& v) {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument("not a finite number");
    return d;
}

std::uint64_t to_u64(const std::string& v) {
    std::uint64_t x = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size()) throw std::invalid_argument("not a non-negative integer");
    return x;
}

int to_int(const std::string& v) {
    const auto x = to_u64(v);
    if (x > 1'000'000'000) throw std::invalid_argument("integer out of range");
    return static_cast<int>(x);
}

bool to_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("expected true or false");
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
    static const std::vector<std::pair<std::string, Setter>> table = {
        {"target", [](ExperimentConfig& c, const std::string& v) {
             if (v == "qcd") c.target.kind = TargetKind::Qcd;
             else if (v == "afh") c.target.kind = TargetKind::Afh;
             else if (v == "ghz") c.target.kind = TargetKind::Ghz;
             else throw std::invalid_argument("expected qcd, afh or ghz");
         }},
        {"qubits", [](ExperimentConfig& c, const std::string& v) { c.target.qubits = to_int(v); }},
        {"qcd_mass", [](ExperimentConfig& c, const std::string& v) { c.target.qcd_mass = to_double(v); }},
        {"qcd_coupling", [](ExperimentConfig& c, const std::string& v) { c.target.qcd_coupling = to_double(v); }},
        {"qcd_time", [](ExperimentConfig& c, const std::string& v) { c.target.qcd_time = to_double(v); }},
        {"qcd_steps", [](ExperimentConfig& c, const std::string& v) { c.target.qcd_steps = to_int(v); }},
        {"afh_time", [](ExperimentConfig& c, const std::string& v) { c.target.afh_time = to_double(v); }},
        {"afh_steps", [](ExperimentConfig& c, const std::string& v) { c.target.afh_steps = to_int(v); }},
        {"ghz_theta", [](ExperimentConfig& c, const std::string& v) { c.target.ghz_theta = to_double(v); }},
        {"protocol", [](ExperimentConfig& c, const std::string& v) { c.train.protocol = training::parse_protocol(v); }},
        {"layers", [](ExperimentConfig& c, const std::string& v) { c.train.arch.layers = to_int(v); }},
        {"heads", [](ExperimentConfig& c, const std::string& v) { c.train.arch.heads = to_int(v); }},
        {"dim", [](ExperimentConfig& c, const std::string& v) { c.train.arch.dim = to_int(v); }},
        {"init_scale", [](ExperimentConfig& c, const std::string& v) { c.train.init_scale = to_double(v); }},
        {"iterations", [](ExperimentConfig& c, const std::string& v) { c.train.iterations = to_u64(v); }},
        {"shadows_per_iter", [](ExperimentConfig& c, const std::string& v) { c.train.shadows_per_iter = to_u64(v); }},
        {"mc_samples", [](ExperimentConfig& c, const std::string& v) { c.train.mc_samples = to_u64(v); }},
        {"overlap_mode", [](ExperimentConfig& c, const std::string& v) {
             if (v == "mc") c.train.overlap_mode = training::OverlapMode::MonteCarlo;
             else if (v == "exhaustive") c.train.overlap_mode = training::OverlapMode::Exhaustive;
             else throw std::invalid_argument("expected mc or exhaustive");
         }},
        {"lr", [](ExperimentConfig& c, const std::string& v) { c.train.lr = to_double(v); }},
        {"reuse_shadows", [](ExperimentConfig& c, const std::string& v) { c.train.reuse_shadows = to_bool(v); }},
        {"noise", [](ExperimentConfig& c, const std::string& v) {
             const double p = c.train.noise.parameter;
             if (v == "none") c.train.noise = shadows::NoiseModel::none();
             else if (v == "amplitude_damping") c.train.noise = shadows::NoiseModel::amplitude_damping(p);
             else if (v == "cnot_depolarizing") c.train.noise = shadows::NoiseModel::cnot_depolarizing(p);
             else throw std::invalid_argument("expected none, amplitude_damping or cnot_depolarizing");
         }},
        {"noise_parameter", [](ExperimentConfig& c, const std::string& v) { c.train.noise.parameter = to_double(v); }},
        {"f_strategy", [](ExperimentConfig& c, const std::string& v) { c.train.f_strategy = training::parse_f_strategy(v); }},
        {"samples_per_basis", [](ExperimentConfig& c, const std::string& v) { c.train.samples_per_basis = to_u64(v); }},
        {"batch_size", [](ExperimentConfig& c, const std::string& v) { c.train.batch_size = to_u64(v); }},
        {"epochs", [](ExperimentConfig& c, const std::string& v) { c.train.epochs = to_u64(v); }},
        {"nnqst_lr", [](ExperimentConfig& c, const std::string& v) { c.train.nnqst_lr = to_double(v); }},
        {"adam_beta1", [](ExperimentConfig& c, const std::string& v) { c.train.adam.beta1 = to_double(v); }},
        {"adam_beta2", [](ExperimentConfig& c, const std::string& v) { c.train.adam.beta2 = to_double(v); }},
        {"adam_epsilon", [](ExperimentConfig& c, const std::string& v) { c.train.adam.epsilon = to_double(v); }},
        {"seed", [](ExperimentConfig& c, const std::string& v) { c.seed = to_u64(v); }},
        {"output", [](ExperimentConfig& c, const std::string& v) { c.output = v; }},
        {"threads", [](ExperimentConfig& c, const std::string& v) { c.threads = static_cast<unsigned>(to_int(v)); }},
        {"shadow_count", [](ExperimentConfig& c, const std::string& v) { c.shadow_count = to_u64(v); }},
        {"use_shadow_file", [](ExperimentConfig& c, const std::string& v) { c.use_shadow_file = to_bool(v); }},
        {"resume", [](ExperimentConfig& c, const std::string& v) { c.resume = to_bool(v); }},
    };
    return table;
}

}  // namespace

std::string to_string(TargetKind kind) {
    switch (kind) {
        case TargetKind::Qcd: return "qcd";
        case TargetKind::Afh: return "afh";
        case TargetKind::Ghz: return "ghz";
    }
    return "?";
}

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& [k, _] : setters()) keys.push_back(k);
    return keys;
}

ExperimentConfig parse_config(std::istream& in, const std::string& origin) {
    ExperimentConfig config;
    // The noise kind may be given before its parameter, so apply it last.
    std::optional<std::pair<std::string, int>> noise_line;
    std::set<std::string> seen;
    std::string line;
    int number = 0;
    auto fail = [&](int ln, const std::string& msg) {
        throw ConfigError(origin + ":" + std::to_string(ln) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(number, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto& table = setters();
        const auto it = std::find_if(table.begin(), table.end(), [&](const auto& kv) { return kv.first == key; });
        if (it == table.end()) fail(number, "unknown key '" + key + "'");
        if (!seen.insert(key).second) fail(number, "key '" + key + "' given twice");
        if (value.empty()) fail(number, "key '" + key + "' has no value");
        if (key == "noise") {
            noise_line = {value, number};
            continue;
        }
        try {
            it->second(config, value);
        } catch (const std::exception& e) {
            fail(number, "bad value '" + value + "' for '" + key + "': " + e.what());
        }
    }
    if (noise_line) {
        try {
            for (const auto& [k, set] : setters()) {
                if (k == "noise") set(config, noise_line->first);
            }
        } catch (const std::exception& e) {
            fail(noise_line->second, "bad value '" + noise_line->first + "' for 'noise': " + e.what());
        }
    } else if (seen.count("noise_parameter")) {
        throw ConfigError(origin + ": noise_parameter given without noise");
    }
    config.train.arch.n = config.target.qubits;
    return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    return parse_config(in, path.string());
}

void ExperimentConfig::validate() const {
    if (!seed) throw ConfigError("a seed is required (config key 'seed' or --seed)");
    if (target.qubits < 2 || target.qubits > 10) throw ConfigError("qubits must be in [2, 10]");
    if (target.kind == TargetKind::Qcd && target.qubits != 6) throw ConfigError("the qcd target has exactly 6 qubits");
    if (target.qcd_steps < 1 || target.afh_steps < 1) throw ConfigError("Trotter step counts must be positive");
    if (shadow_count == 0) throw ConfigError("shadow_count must be positive");
    try {
        training::TrainConfig t = train;
        t.arch.n = target.qubits;
        t.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

std::uint64_t ExperimentConfig::required_seed() const {
    if (!seed) throw ConfigError("a seed is required (config key 'seed' or --seed)");
    return *seed;
}

}  // namespace nsqst::cli
