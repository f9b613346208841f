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
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "nsqst/binary_io.hpp"
#include "nsqst/targets.hpp"
#include "nsqst/training.hpp"

namespace nsqst::training {

std::string to_string(Protocol p) {
    switch (p) {
        case Protocol::Nnqst: return "nnqst";
        case Protocol::Nsqst: return "nsqst";
        case Protocol::NsqstPretrain: return "nsqst_pretrain";
        case Protocol::Hybrid: return "hybrid";
    }
    throw std::invalid_argument("unknown protocol");
}

Protocol parse_protocol(const std::string& text) {
    for (Protocol p : {Protocol::Nnqst, Protocol::Nsqst, Protocol::NsqstPretrain, Protocol::Hybrid}) {
        if (to_string(p) == text) return p;
    }
    throw std::invalid_argument("unknown protocol '" + text + "' (expected nnqst, nsqst, nsqst_pretrain, hybrid)");
}

std::string to_string(FStrategy s) { return s == FStrategy::NoiseFree ? "noise_free" : "analytic"; }

FStrategy parse_f_strategy(const std::string& text) {
    if (text == "noise_free") return FStrategy::NoiseFree;
    if (text == "analytic") return FStrategy::Analytic;
    throw std::invalid_argument("unknown f strategy '" + text + "' (expected noise_free or analytic)");
}

void TrainConfig::validate() const {
    arch.validate();
    if (!(init_scale >= 0.0) || !std::isfinite(init_scale)) throw std::invalid_argument("init_scale must be >= 0");
    if (!(lr > 0.0) || !(nnqst_lr > 0.0)) throw std::invalid_argument("learning rates must be positive");
    if (shadows_per_iter == 0) throw std::invalid_argument("shadows_per_iter must be positive");
    if (overlap_mode == OverlapMode::MonteCarlo && mc_samples == 0) {
        throw std::invalid_argument("mc_samples must be positive");
    }
    if (protocol == Protocol::Hybrid && mc_samples == 0) throw std::invalid_argument("mc_samples must be positive");
    if (batch_size == 0 || samples_per_basis == 0) {
        throw std::invalid_argument("batch_size and samples_per_basis must be positive");
    }
    if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0 && adam.epsilon > 0.0)) {
        throw std::invalid_argument("invalid Adam hyperparameters");
    }
    noise.validate(arch.n);
}

namespace {

using Clock = std::chrono::steady_clock;

const char* pretrain_stage = "pretrain";

std::string shadow_stage(Protocol p) {
    switch (p) {
        case Protocol::Nnqst: return "nnqst";
        case Protocol::Hybrid: return "hybrid";
        default: return "nsqst";
    }
}

bool is_split(Protocol p) { return p == Protocol::NsqstPretrain || p == Protocol::Hybrid; }

class Runner {
   public:
    Runner(const TrainConfig& config, const StateVector& target, const RunOptions& options)
        : config_(config), target_(target), options_(options), start_(Clock::now()) {}

    RunResult run() {
        const int n = target_.qubits();
        if (config_.arch.n != n) {
            throw std::invalid_argument("architecture has n=" + std::to_string(config_.arch.n) +
                                        " but the target has " + std::to_string(n) + " qubits");
        }
        std::string stage;
        std::size_t next = 0;
        if (options_.resume) {
            adopt(*options_.resume);
            stage = options_.resume->stage;
            next = options_.resume->next_iteration;
        } else {
            init_networks();
            stage = is_split(config_.protocol) ? pretrain_stage : shadow_stage(config_.protocol);
            adam_ = AdamState(trainable_for(stage).size());
        }

        if (stage == pretrain_stage) {
            run_nnqst_stage(stage, next, config_.epochs);
            if (next >= config_.epochs) {
                stage = shadow_stage(config_.protocol);
                next = 0;
                adam_ = AdamState(trainable_for(stage).size());
            }
        }
        if (stage == "nnqst") {
            run_nnqst_stage(stage, next, config_.epochs);
        } else if (stage == "nsqst" || stage == "hybrid") {
            run_shadow_stage(stage, next);
        } else if (stage != pretrain_stage) {
            throw std::invalid_argument("checkpoint has unknown stage '" + stage + "'");
        }

        RunResult result;
        result.metrics = std::move(metrics_);
        result.checkpoint = {config_.protocol, stage, next, networks_, adam_};
        result.final_wave_function = model().wave_function();
        return result;
    }

   private:
    void adopt(const Checkpoint& ckpt) {
        if (ckpt.protocol != config_.protocol) throw std::invalid_argument("checkpoint protocol does not match config");
        const std::size_t want = is_split(config_.protocol) ? 2 : 1;
        if (ckpt.networks.size() != want) throw std::invalid_argument("checkpoint has the wrong number of networks");
        for (const auto& net : ckpt.networks) {
            if (!(net.arch() == config_.arch)) throw std::invalid_argument("checkpoint architecture does not match config");
        }
        networks_ = ckpt.networks;
        const std::size_t expected =
            ckpt.stage == pretrain_stage ? networks_[0].size() : trainable_for(ckpt.stage).size();
        if (ckpt.adam.m.size() != expected || ckpt.adam.v.size() != expected) {
            throw std::invalid_argument("checkpoint optimizer state does not match the trainable network");
        }
        adam_ = ckpt.adam;
    }

    void init_networks() {
        Rng rng0 = substream(config_.seed, "init", 0);
        if (is_split(config_.protocol)) {
            Rng rng1 = substream(config_.seed, "init", 1);
            networks_.push_back(nqs::init_network(config_.arch, nqs::HeadMode::AmplitudeOnly, rng0, config_.init_scale));
            networks_.push_back(nqs::init_network(config_.arch, nqs::HeadMode::PhaseOnly, rng1, config_.init_scale));
        } else {
            networks_.push_back(nqs::init_network(config_.arch, nqs::HeadMode::Full, rng0, config_.init_scale));
        }
    }

    Network& trainable_for(const std::string& stage) {
        return (stage == pretrain_stage || networks_.size() == 1) ? networks_[0] : networks_[1];
    }
    Network& trainable() { return trainable_for(current_stage_); }

    WaveModel model() const {
        return networks_.size() == 1 ? WaveModel::full(networks_[0]) : WaveModel::split(networks_[0], networks_[1]);
    }

    void record(const std::string& stage, std::size_t iteration, double loss, std::size_t excluded) {
        if (!std::isfinite(loss)) {
            throw NonFiniteError(stage + " iteration " + std::to_string(iteration) + ": loss estimate is not finite");
        }
        Metrics m;
        m.stage = stage;
        m.iteration = iteration;
        m.loss_estimate = loss;
        const auto psi = model().wave_function();
        m.exact_infidelity = exact_infidelity(psi, target_);
        m.excluded_samples = excluded;
        m.elapsed_ms = std::chrono::duration<double, std::milli>(Clock::now() - start_).count();
        m.observable = options_.observable ? options_.observable(psi) : std::numeric_limits<double>::quiet_NaN();
        if (options_.on_metrics) options_.on_metrics(m);
        metrics_.push_back(std::move(m));
    }

    void run_nnqst_stage(const std::string& stage, std::size_t& next, std::size_t epochs) {
        current_stage_ = stage;
        const int n = target_.qubits();
        std::vector<Measurement> data;
        if (stage == pretrain_stage) {
            // Same sample budget as full NNQST, all in the computational basis.
            const std::vector<PauliBasis> z{PauliBasis{std::string(static_cast<std::size_t>(n), 'Z')}};
            const std::size_t per = config_.samples_per_basis * targets::nnqst_basis_set(n).size();
            data = sample_measurements(target_, z, per, derive_seed(config_.seed, "dataset"));
        } else {
            const auto bases = targets::nnqst_basis_set(n);
            data = sample_measurements(target_, bases, config_.samples_per_basis, derive_seed(config_.seed, "dataset"));
        }
        Network& net = trainable();
        if (epochs == 0 && next == 0) {
            // Zero-length stage: one record of the initial state, no update.
            const auto r = nnqst_loss_grad(net, data);
            record(stage, 0, r.loss, r.clamped);
            return;
        }
        for (; next < epochs; ++next) {
            const auto r = nnqst_epoch(net, adam_, data, config_.batch_size, config_.nnqst_lr, config_.adam,
                                       config_.seed, next);
            record(stage, next, r.mean_loss, r.clamped);
        }
    }

    void run_shadow_stage(const std::string& stage, std::size_t& next) {
        current_stage_ = stage;
        const int n = target_.qubits();
        const double f = config_.f_strategy == FStrategy::Analytic ? shadows::f_analytic(config_.noise, n)
                                                                   : shadows::f_noiseless(n);
        std::optional<OverlapReferences> fixed;
        if (options_.fixed_shadows) {
            if (options_.fixed_shadows->n != n) throw std::invalid_argument("shadow set qubit count does not match target");
            fixed = OverlapReferences::from_shadows(*options_.fixed_shadows);
        } else if (config_.reuse_shadows) {
            fixed = OverlapReferences::from_shadows(shadows::collect_shadows(
                target_, config_.shadows_per_iter, config_.noise, derive_seed(config_.seed, "shadows", 0)));
        }
        Network& net = trainable();
        auto evaluate = [&](std::size_t iteration) {
            std::optional<OverlapReferences> fresh;
            if (!fixed) {
                fresh = OverlapReferences::from_shadows(shadows::collect_shadows(
                    target_, config_.shadows_per_iter, config_.noise, derive_seed(config_.seed, "shadows", iteration)));
            }
            const OverlapReferences& refs = fixed ? *fixed : *fresh;
            Rng rng = substream(config_.seed, "mc", iteration);
            if (stage == "hybrid") {
                std::map<BitString, std::size_t> counts;
                for (BitString s : networks_[0].sample(config_.mc_samples, rng)) counts[s] += 1;
                std::vector<BitString> support;
                std::vector<double> probs;
                for (const auto& [s, c] : counts) {
                    support.push_back(s);
                    probs.push_back(static_cast<double>(c) / static_cast<double>(config_.mc_samples));
                }
                return hybrid_objective(net, support, probs, refs, f);
            }
            return nsqst_objective(model(), refs, f, {config_.overlap_mode, config_.mc_samples}, rng);
        };
        if (config_.iterations == 0 && next == 0) {
            // Zero-length stage: one record of the initial state, no update.
            const auto r = evaluate(0);
            record(stage, 0, r.loss, r.excluded);
            return;
        }
        for (; next < config_.iterations; ++next) {
            const auto r = evaluate(next);
            record(stage, next, r.loss, r.excluded);
            adam_step(adam_, net.mutable_params(), r.grad, config_.lr, config_.adam);
        }
    }

    const TrainConfig& config_;
    const StateVector& target_;
    const RunOptions& options_;
    Clock::time_point start_;
    std::vector<Network> networks_;
    AdamState adam_;
    std::string current_stage_;
    std::vector<Metrics> metrics_;
};

bool all_z(const PauliBasis& b) {
    return std::all_of(b.letters.begin(), b.letters.end(), [](char c) { return c == 'Z'; });
}

constexpr std::string_view kCheckpointMagic = "NSQC";
constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace

RunResult run_protocol(const TrainConfig& config, const StateVector& target, const RunOptions& options) {
    config.validate();
    return Runner(config, target, options).run();
}

EpochResult nnqst_epoch(Network& net, AdamState& adam, std::span<const Measurement> data, std::size_t batch_size,
                        double lr, const AdamConfig& config, std::uint64_t seed, std::size_t epoch) {
    if (data.empty() || batch_size == 0) throw std::invalid_argument("nnqst_epoch: empty data or zero batch size");
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng = substream(seed, "shuffle", epoch);
    rng.shuffle(std::span<std::size_t>(order));
    std::vector<Measurement> batch;
    double loss_sum = 0.0;
    std::size_t batches = 0;
    EpochResult out;
    for (std::size_t b = 0; b < order.size(); b += batch_size) {
        batch.clear();
        for (std::size_t k = b; k < std::min(order.size(), b + batch_size); ++k) batch.push_back(data[order[k]]);
        const auto r = nnqst_loss_grad(net, batch);
        adam_step(adam, net.mutable_params(), r.grad, lr, config);
        loss_sum += r.loss;
        out.clamped += r.clamped;
        ++batches;
    }
    out.mean_loss = loss_sum / static_cast<double>(batches);
    return out;
}

Network pretrain_amplitudes(Network amplitude, std::span<const Measurement> z_dataset, const TrainConfig& config) {
    if (amplitude.mode() != nqs::HeadMode::AmplitudeOnly) {
        throw std::invalid_argument("pretrain_amplitudes: network must be amplitude-only");
    }
    for (const auto& m : z_dataset) {
        if (!all_z(m.basis)) throw std::invalid_argument("pretrain_amplitudes: dataset contains a non-Z basis");
    }
    AdamState adam(amplitude.size());
    for (std::size_t e = 0; e < config.epochs; ++e) {
        nnqst_epoch(amplitude, adam, z_dataset, config.batch_size, config.nnqst_lr, config.adam, config.seed, e);
    }
    return amplitude;
}

double tail_mean_infidelity(const std::vector<Metrics>& metrics, std::size_t window) {
    if (metrics.empty() || window == 0) throw std::invalid_argument("tail_mean_infidelity: no records");
    const std::string& stage = metrics.back().stage;
    double sum = 0.0;
    std::size_t count = 0;
    for (auto it = metrics.rbegin(); it != metrics.rend() && it->stage == stage && count < window; ++it, ++count) {
        sum += it->exact_infidelity;
    }
    return sum / static_cast<double>(count);
}

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
    io::ByteWriter w(out);
    w.put_magic(kCheckpointMagic);
    w.put<std::uint32_t>(kCheckpointVersion);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(ckpt.protocol));
    w.put_string(ckpt.stage);
    w.put<std::uint64_t>(ckpt.next_iteration);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(ckpt.networks.size()));
    for (const auto& net : ckpt.networks) nqs::write_network(out, net);
    w.put<std::uint64_t>(ckpt.adam.step);
    w.put<std::uint64_t>(ckpt.adam.m.size());
    for (double v : ckpt.adam.m) w.put<double>(v);
    for (double v : ckpt.adam.v) w.put<double>(v);
}

Checkpoint read_checkpoint(std::istream& in) {
    io::ByteReader r(in);
    r.expect_magic(kCheckpointMagic);
    const auto version = r.get<std::uint32_t>();
    if (version != kCheckpointVersion) {
        throw io::FormatError("unsupported checkpoint version " + std::to_string(version));
    }
    Checkpoint c;
    const auto proto = r.get<std::uint8_t>();
    if (proto > static_cast<std::uint8_t>(Protocol::Hybrid)) throw io::FormatError("bad protocol tag in checkpoint");
    c.protocol = static_cast<Protocol>(proto);
    c.stage = r.get_string(64);
    c.next_iteration = r.get<std::uint64_t>();
    const auto nets = r.get<std::uint32_t>();
    if (nets == 0 || nets > 2) throw io::FormatError("bad network count in checkpoint");
    for (std::uint32_t k = 0; k < nets; ++k) c.networks.push_back(nqs::read_network(in));
    c.adam.step = r.get<std::uint64_t>();
    const auto size = r.get<std::uint64_t>();
    if (size > (std::uint64_t{1} << 32)) throw io::FormatError("optimizer state too large");
    c.adam.m.resize(size);
    c.adam.v.resize(size);
    for (auto& v : c.adam.m) v = r.get<double>();
    for (auto& v : c.adam.v) v = r.get<double>();
    r.expect_end();
    return c;
}

}  // namespace nsqst::training
