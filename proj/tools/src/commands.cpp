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

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "nsqst/shadows.hpp"
#include "nsqst/targets.hpp"
#include "nsqst_cli/cli.hpp"

namespace nsqst::cli {

using nlohmann::json;
using nqs::cplx;

namespace {

constexpr const char* kTargetFormat = "nsqst-target";
constexpr int kTargetVersion = 1;
constexpr const char* kMetricsFormat = "nsqst-metrics";
constexpr int kMetricsVersion = 1;
constexpr const char* kReportFormat = "nsqst-report";
constexpr int kReportVersion = 1;

double wrap_phase(double x) {
    const double two_pi = 2.0 * std::numbers::pi;
    double r = std::fmod(x, two_pi);
    if (r < 0.0) r += two_pi;
    return r >= two_pi ? 0.0 : r;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double kinetic_energy(const quantum::StateVector& state) {
    const auto h = targets::qcd_kinetic_hamiltonian();
    return quantum::expectation(state, h.terms);
}

double mean_staggered_sx(const quantum::StateVector& state) {
    const auto profile = targets::staggered_sx_profile(state);
    double acc = 0.0;
    for (std::size_t j = 0; j < profile.size(); ++j) acc += (j % 2 == 0 ? 1.0 : -1.0) * profile[j];
    return acc / static_cast<double>(profile.size());
}

double ghz_relative_phase(std::span<const cplx> psi) {
    const cplx a = psi.front();
    const cplx b = psi.back();
    if (std::abs(a) == 0.0 || std::abs(b) == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return wrap_phase(std::arg(b / a));
}

json target_metadata(const TargetSpec& spec) {
    json meta;
    switch (spec.kind) {
        case TargetKind::Qcd:
            meta = {{"mass", spec.qcd_mass}, {"coupling", spec.qcd_coupling}, {"time", spec.qcd_time},
                    {"steps", spec.qcd_steps}};
            break;
        case TargetKind::Afh:
            meta = {{"time", spec.afh_time}, {"steps", spec.afh_steps}};
            break;
        case TargetKind::Ghz:
            meta = {{"theta", spec.ghz_theta}};
            break;
    }
    return meta;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::trunc) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::out | mode);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << std::setprecision(17);
    return out;
}

training::TrainConfig effective_train_config(const ExperimentConfig& config, int n) {
    training::TrainConfig t = config.train;
    t.arch.n = n;
    t.seed = config.required_seed();
    return t;
}

training::WaveModel model_of(const training::Checkpoint& ckpt) {
    return ckpt.networks.size() == 1 ? training::WaveModel::full(ckpt.networks[0])
                                     : training::WaveModel::split(ckpt.networks[0], ckpt.networks[1]);
}

}  // namespace

quantum::StateVector build_target(const TargetSpec& spec) {
    switch (spec.kind) {
        case TargetKind::Qcd:
            return targets::prepare_qcd_state(spec.qcd_mass, spec.qcd_coupling, spec.qcd_time, spec.qcd_steps);
        case TargetKind::Afh:
            return targets::prepare_afh_state(spec.qubits, spec.afh_time, spec.afh_steps);
        case TargetKind::Ghz:
            return targets::prepare_ghz(spec.qubits, spec.ghz_theta);
    }
    throw std::logic_error("unknown target kind");
}

void write_target_file(const std::filesystem::path& path, const TargetSpec& spec, const quantum::StateVector& state) {
    json amps = json::array();
    for (const cplx& a : state.amplitudes()) amps.push_back({a.real(), a.imag()});
    json doc = {{"format", kTargetFormat},
                {"version", kTargetVersion},
                {"target", to_string(spec.kind)},
                {"qubits", state.qubits()},
                {"metadata", target_metadata(spec)},
                {"amplitudes", std::move(amps)}};
    auto out = open_out(path);
    out << doc.dump() << '\n';
}

TargetFile read_target_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open target file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw std::runtime_error("target file " + path.string() + " is not valid JSON: " + e.what());
    }
    try {
        if (doc.at("format") != kTargetFormat) throw std::runtime_error("not a target file");
        const int version = doc.at("version").get<int>();
        if (version != kTargetVersion) throw std::runtime_error("unsupported target file version " + std::to_string(version));
        TargetFile f;
        const std::string kind = doc.at("target").get<std::string>();
        if (kind == "qcd") f.spec.kind = TargetKind::Qcd;
        else if (kind == "afh") f.spec.kind = TargetKind::Afh;
        else if (kind == "ghz") f.spec.kind = TargetKind::Ghz;
        else throw std::runtime_error("unknown target kind '" + kind + "'");
        f.spec.qubits = doc.at("qubits").get<int>();
        const auto& meta = doc.at("metadata");
        if (f.spec.kind == TargetKind::Qcd) {
            f.spec.qcd_mass = meta.at("mass");
            f.spec.qcd_coupling = meta.at("coupling");
            f.spec.qcd_time = meta.at("time");
            f.spec.qcd_steps = meta.at("steps");
        } else if (f.spec.kind == TargetKind::Afh) {
            f.spec.afh_time = meta.at("time");
            f.spec.afh_steps = meta.at("steps");
        } else {
            f.spec.ghz_theta = meta.at("theta");
        }
        const auto& arr = doc.at("amplitudes");
        std::vector<cplx> amps;
        amps.reserve(arr.size());
        for (const auto& a : arr) amps.emplace_back(a.at(0).get<double>(), a.at(1).get<double>());
        if (amps.size() != (std::size_t{1} << f.spec.qubits)) throw std::runtime_error("amplitude count does not match qubits");
        f.state = quantum::StateVector(f.spec.qubits, std::move(amps));
        return f;
    } catch (const json::exception& e) {
        throw std::runtime_error("target file " + path.string() + ": " + e.what());
    }
}

std::function<double(std::span<const cplx>)> training_observable(const TargetSpec& spec) {
    const int n = spec.qubits;
    switch (spec.kind) {
        case TargetKind::Qcd:
            return [n](std::span<const cplx> psi) {
                return kinetic_energy(quantum::StateVector(n, {psi.begin(), psi.end()}));
            };
        case TargetKind::Afh:
            return [n](std::span<const cplx> psi) {
                return mean_staggered_sx(quantum::StateVector(n, {psi.begin(), psi.end()}));
            };
        case TargetKind::Ghz:
            return ghz_relative_phase;
    }
    return {};
}

std::vector<PhaseRow> phase_table(std::span<const cplx> model, const quantum::StateVector& target) {
    if (model.size() != target.dimension()) throw std::invalid_argument("phase_table: dimension mismatch");
    const auto amps = target.amplitudes();
    std::size_t peak = 0;
    for (std::size_t s = 1; s < amps.size(); ++s) {
        if (std::norm(amps[s]) > std::norm(amps[peak])) peak = s;
    }
    const double offset = std::arg(amps[peak]) - std::arg(model[peak]);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<PhaseRow> rows(amps.size());
    for (std::size_t s = 0; s < amps.size(); ++s) {
        PhaseRow& r = rows[s];
        r.s = s;
        r.target_sqrt_p = std::abs(amps[s]);
        r.model_sqrt_p = std::abs(model[s]);
        r.target_phase = r.target_sqrt_p < 0.1 ? nan : wrap_phase(std::arg(amps[s]));
        r.model_phase = r.model_sqrt_p < 0.1 ? nan : wrap_phase(std::arg(model[s]) + offset);
    }
    return rows;
}

int cmd_prepare(const ExperimentConfig& config, std::ostream& out) {
    config.validate();
    const auto state = build_target(config.target);
    write_target_file(config.target_file(), config.target, state);
    spdlog::info("wrote {} target on {} qubits to {}", to_string(config.target.kind), state.qubits(),
                 config.target_file().string());
    out << std::setprecision(10);
    out << "target " << to_string(config.target.kind) << " qubits " << state.qubits() << '\n';
    if (config.target.kind == TargetKind::Qcd) out << "<H_kin> " << kinetic_energy(state) << '\n';
    out << "S^x";
    for (double v : targets::staggered_sx_profile(state)) out << ' ' << v;
    out << '\n';
    return 0;
}

int cmd_collect(const ExperimentConfig& config, std::ostream& out) {
    config.validate();
    const auto target = read_target_file(config.target_file());
    const auto set = shadows::collect_shadows(target.state, config.shadow_count, config.train.noise,
                                              derive_seed(config.required_seed(), "collect"));
    shadows::save_shadow_set(config.shadow_file(), set);
    spdlog::info("wrote {} shadows ({}) to {}", set.shadows.size(), set.noise.describe(), config.shadow_file().string());
    out << "shadows " << set.shadows.size() << " qubits " << set.n << " noise " << set.noise.describe() << '\n';
    return 0;
}

int cmd_train(const ExperimentConfig& config, std::ostream& out) {
    config.validate();
    const auto target = read_target_file(config.target_file());
    const int n = target.state.qubits();
    const auto tc = effective_train_config(config, n);

    training::RunOptions options;
    options.observable = training_observable(target.spec);
    if (config.use_shadow_file) {
        options.fixed_shadows = shadows::load_shadow_set(config.shadow_file());
        if (options.fixed_shadows->n != n) throw std::runtime_error("shadow file qubit count does not match the target");
    }
    const bool resuming = config.resume && std::filesystem::exists(config.checkpoint_file());
    if (resuming) {
        std::ifstream in(config.checkpoint_file(), std::ios::binary);
        options.resume = training::read_checkpoint(in);
        spdlog::info("resuming from {} at {} iteration {}", config.checkpoint_file().string(), options.resume->stage,
                     options.resume->next_iteration);
    }
    auto metrics_out = open_out(config.metrics_file(), resuming ? std::ios::app : std::ios::trunc);
    if (!resuming) {
        metrics_out << json{{"format", kMetricsFormat}, {"version", kMetricsVersion}, {"protocol", to_string(tc.protocol)},
                            {"target", to_string(target.spec.kind)}, {"seed", tc.seed}}
                           .dump()
                    << '\n';
    }
    options.on_metrics = [&](const training::Metrics& m) {
        metrics_out << json{{"stage", m.stage},
                            {"iter", m.iteration},
                            {"loss_est", number_or_null(m.loss_estimate)},
                            {"exact_infid", m.exact_infidelity},
                            {"excluded_samples", m.excluded_samples},
                            {"elapsed_ms", m.elapsed_ms},
                            {"observable", number_or_null(m.observable)}}
                           .dump()
                    << '\n';
        metrics_out.flush();
        spdlog::debug("{} {} loss {:.6f} infidelity {:.6f}", m.stage, m.iteration, m.loss_estimate, m.exact_infidelity);
    };
    const auto result = training::run_protocol(tc, target.state, options);

    const auto tmp = config.checkpoint_file().string() + ".tmp";
    {
        auto ck = open_out(tmp, std::ios::trunc | std::ios::binary);
        training::write_checkpoint(ck, result.checkpoint);
    }
    std::filesystem::rename(tmp, config.checkpoint_file());
    const double final_infid = training::exact_infidelity(result.final_wave_function, target.state);
    out << std::setprecision(8) << "protocol " << to_string(tc.protocol) << " records " << result.metrics.size()
        << " final_infidelity " << final_infid;
    if (!result.metrics.empty()) out << " tail_mean_infidelity " << training::tail_mean_infidelity(result.metrics);
    out << '\n';
    spdlog::info("checkpoint written to {}", config.checkpoint_file().string());
    return 0;
}

int cmd_evaluate(const ExperimentConfig& config, std::ostream& out) {
    const auto target = read_target_file(config.target_file());
    std::ifstream in(config.checkpoint_file(), std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint " + config.checkpoint_file().string());
    const auto ckpt = training::read_checkpoint(in);
    for (const auto& net : ckpt.networks) {
        if (net.qubits() != target.state.qubits()) {
            throw std::runtime_error("checkpoint network has " + std::to_string(net.qubits()) +
                                     " qubits but the target has " + std::to_string(target.state.qubits()));
        }
    }
    const auto psi = model_of(ckpt).wave_function();
    const int n = target.state.qubits();
    const quantum::StateVector model_state(n, psi);
    const double infid = training::exact_infidelity(psi, target.state);
    const auto rows = phase_table(psi, target.state);

    auto csv = open_out(config.table_file());
    csv << std::setprecision(10) << "index,bits,target_sqrt_p,target_phase,model_sqrt_p,model_phase\n";
    auto cell = [](double v) {
        if (!std::isfinite(v)) return std::string();
        std::ostringstream os;
        os << std::setprecision(12) << v;
        return os.str();
    };
    for (const auto& r : rows) {
        csv << r.s << ',' << nsqst::to_string(r.s, n) << ',' << cell(r.target_sqrt_p) << ',' << cell(r.target_phase)
            << ',' << cell(r.model_sqrt_p) << ',' << cell(r.model_phase) << '\n';
    }

    json report = {{"format", kReportFormat},
                   {"version", kReportVersion},
                   {"target", to_string(target.spec.kind)},
                   {"protocol", to_string(ckpt.protocol)},
                   {"exact_infidelity", infid}};
    out << std::setprecision(8) << "exact_infidelity " << infid << '\n';
    switch (target.spec.kind) {
        case TargetKind::Qcd: {
            const double model_e = kinetic_energy(model_state);
            const double target_e = kinetic_energy(target.state);
            report["h_kin"] = {{"model", model_e}, {"target", target_e}};
            out << "<H_kin> model " << model_e << " target " << target_e << '\n';
            break;
        }
        case TargetKind::Afh: {
            const auto pm = targets::staggered_sx_profile(model_state);
            const auto pt = targets::staggered_sx_profile(target.state);
            report["sx_profile"] = {{"model", pm}, {"target", pt}};
            out << "S^x model";
            for (double v : pm) out << ' ' << v;
            out << "\nS^x target";
            for (double v : pt) out << ' ' << v;
            out << '\n';
            break;
        }
        case TargetKind::Ghz: {
            const double model_phase = ghz_relative_phase(psi);
            const double target_phase = ghz_relative_phase(target.state.amplitudes());
            report["relative_phase"] = {{"model", number_or_null(model_phase)}, {"target", target_phase}};
            out << "relative_phase model " << model_phase << " target " << target_phase << '\n';
            break;
        }
    }
    auto rep = open_out(config.report_file());
    rep << report.dump(2) << '\n';
    spdlog::info("wrote {} and {}", config.table_file().string(), config.report_file().string());
    return 0;
}

}  // namespace nsqst::cli
