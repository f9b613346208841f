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

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "nsqst/binary_io.hpp"
#include "nsqst/targets.hpp"
#include "nsqst/training.hpp"

using namespace nsqst;
using namespace nsqst::training;

namespace {

TrainConfig small_config(Protocol p, int n = 4) {
    TrainConfig cfg;
    cfg.protocol = p;
    cfg.arch = nqs::Architecture{n, 2, 4, 8};
    cfg.iterations = 6;
    cfg.shadows_per_iter = 20;
    cfg.mc_samples = 200;
    cfg.samples_per_basis = 16;
    cfg.batch_size = 32;
    cfg.epochs = 3;
    cfg.seed = 42;
    return cfg;
}

void expect_same_metrics(const std::vector<Metrics>& a, const std::vector<Metrics>& b) {
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].stage, b[i].stage);
        EXPECT_EQ(a[i].iteration, b[i].iteration);
        EXPECT_EQ(a[i].loss_estimate, b[i].loss_estimate) << i;
        EXPECT_EQ(a[i].exact_infidelity, b[i].exact_infidelity) << i;
        EXPECT_EQ(a[i].excluded_samples, b[i].excluded_samples);
    }
}

std::string serialize(const Checkpoint& c) {
    std::ostringstream out;
    write_checkpoint(out, c);
    return out.str();
}

const Protocol kAll[] = {Protocol::Nnqst, Protocol::Nsqst, Protocol::NsqstPretrain, Protocol::Hybrid};

}  // namespace

TEST(Protocol, ParseAndPrintRoundTrip) {
    for (Protocol p : kAll) EXPECT_EQ(parse_protocol(to_string(p)), p);
    EXPECT_EQ(to_string(Protocol::NsqstPretrain), "nsqst_pretrain");
    EXPECT_THROW(parse_protocol("nsqst-pretrain"), std::invalid_argument);
    EXPECT_EQ(parse_f_strategy("noise_free"), FStrategy::NoiseFree);
    EXPECT_EQ(parse_f_strategy("analytic"), FStrategy::Analytic);
    EXPECT_THROW(parse_f_strategy("exact"), std::invalid_argument);
}

TEST(TrainConfig, ValidateRejectsBadValues) {
    const auto good = small_config(Protocol::Nsqst);
    EXPECT_NO_THROW(good.validate());
    auto c = good;
    c.lr = 0.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = good;
    c.nnqst_lr = -1.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = good;
    c.shadows_per_iter = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = good;
    c.mc_samples = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = good;
    c.batch_size = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = good;
    c.init_scale = std::nan("");
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = good;
    c.adam.beta1 = 1.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = good;
    c.arch.heads = 3;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = good;
    c.noise = shadows::NoiseModel::amplitude_damping(1.5);
    EXPECT_THROW(c.validate(), std::invalid_argument);
    // Exhaustive overlaps need no Monte Carlo samples.
    c = good;
    c.mc_samples = 0;
    c.overlap_mode = OverlapMode::Exhaustive;
    EXPECT_NO_THROW(c.validate());
}

TEST(RunProtocol, RejectsQubitMismatch) {
    EXPECT_THROW(run_protocol(small_config(Protocol::Nsqst, 4), targets::prepare_ghz(3, 0.0)), std::invalid_argument);
}

TEST(RunProtocol, StagesAndRecordCounts) {
    const auto target = targets::prepare_ghz(4, 0.0);
    for (Protocol p : kAll) {
        const auto cfg = small_config(p);
        const auto r = run_protocol(cfg, target);
        std::size_t pre = 0, main = 0;
        for (const auto& m : r.metrics) (m.stage == "pretrain" ? pre : main) += 1;
        const bool split = p == Protocol::NsqstPretrain || p == Protocol::Hybrid;
        EXPECT_EQ(pre, split ? cfg.epochs : 0u) << to_string(p);
        EXPECT_EQ(main, p == Protocol::Nnqst ? cfg.epochs : cfg.iterations) << to_string(p);
        EXPECT_EQ(r.checkpoint.networks.size(), split ? 2u : 1u);
        EXPECT_EQ(r.checkpoint.next_iteration, p == Protocol::Nnqst ? cfg.epochs : cfg.iterations);
        for (const auto& m : r.metrics) {
            EXPECT_GE(m.exact_infidelity, -1e-12);
            EXPECT_LE(m.exact_infidelity, 1.0 + 1e-12);
            EXPECT_TRUE(std::isnan(m.observable));
        }
        // Last record's infidelity is that of the state before the last update;
        // the final wave function is normalized.
        double norm = 0.0;
        for (const auto& a : r.final_wave_function) norm += std::norm(a);
        EXPECT_NEAR(norm, 1.0, 1e-10);
    }
}

TEST(RunProtocol, ZeroIterationsRecordsInitialState) {
    const auto target = targets::prepare_ghz(4, 0.0);
    for (Protocol p : {Protocol::Nsqst, Protocol::Nnqst}) {
        auto cfg = small_config(p);
        cfg.iterations = 0;
        cfg.epochs = 0;
        const auto r = run_protocol(cfg, target);
        ASSERT_EQ(r.metrics.size(), 1u) << to_string(p);
        EXPECT_EQ(r.metrics[0].iteration, 0u);
        Rng rng = substream(cfg.seed, "init", 0);
        const auto init = nqs::init_network(cfg.arch, nqs::HeadMode::Full, rng, cfg.init_scale);
        EXPECT_EQ(r.checkpoint.networks[0], init);
        EXPECT_NEAR(r.metrics[0].exact_infidelity, exact_infidelity(WaveModel::full(init), target), 1e-14);
    }
}

TEST(RunProtocol, BitReproducible) {
    const auto target = targets::prepare_afh_state(4);
    for (Protocol p : kAll) {
        const auto cfg = small_config(p);
        const auto a = run_protocol(cfg, target);
        const auto b = run_protocol(cfg, target);
        expect_same_metrics(a.metrics, b.metrics);
        EXPECT_EQ(serialize(a.checkpoint), serialize(b.checkpoint));
    }
    auto other = small_config(Protocol::Nsqst);
    other.seed = 43;
    EXPECT_NE(run_protocol(other, target).metrics.back().loss_estimate,
              run_protocol(small_config(Protocol::Nsqst), target).metrics.back().loss_estimate);
}

TEST(RunProtocol, ResumeIsBitIdentical) {
    const auto target = targets::prepare_afh_state(4);
    for (Protocol p : kAll) {
        const auto full_cfg = small_config(p);
        const auto full = run_protocol(full_cfg, target);
        // Stop halfway through the final stage, round-trip the checkpoint, resume.
        auto half_cfg = full_cfg;
        (p == Protocol::Nnqst ? half_cfg.epochs : half_cfg.iterations) = 3;
        const auto half = run_protocol(half_cfg, target);
        std::istringstream in(serialize(half.checkpoint));
        RunOptions opts;
        opts.resume = read_checkpoint(in);
        const auto rest = run_protocol(full_cfg, target, opts);
        auto joined = half.metrics;
        joined.insert(joined.end(), rest.metrics.begin(), rest.metrics.end());
        expect_same_metrics(joined, full.metrics);
        EXPECT_EQ(serialize(rest.checkpoint), serialize(full.checkpoint)) << to_string(p);
    }
}

TEST(RunProtocol, RejectsPretrainCheckpointWithPhaseSizedOptimizer) {
    const auto target = targets::prepare_afh_state(4);
    const auto cfg = small_config(Protocol::NsqstPretrain);
    auto ckpt = run_protocol(cfg, target).checkpoint;
    ckpt.stage = "pretrain";
    ckpt.next_iteration = 1;
    ckpt.adam = AdamState(ckpt.networks[1].size());
    RunOptions opts;
    opts.resume = ckpt;
    EXPECT_THROW(run_protocol(cfg, target, opts), std::invalid_argument);
    ckpt.adam = AdamState(ckpt.networks[0].size());
    opts.resume = ckpt;
    EXPECT_NO_THROW(run_protocol(cfg, target, opts));
}

TEST(RunProtocol, RejectsIncompatibleCheckpoints) {
    const auto target = targets::prepare_ghz(4, 0.0);
    const auto base = run_protocol(small_config(Protocol::Nsqst), target).checkpoint;
    RunOptions opts;
    opts.resume = base;
    EXPECT_THROW(run_protocol(small_config(Protocol::Nnqst), target, opts), std::invalid_argument);
    auto wide = small_config(Protocol::Nsqst);
    wide.arch.dim = 12;
    EXPECT_THROW(run_protocol(wide, target, opts), std::invalid_argument);
    auto bad_stage = base;
    bad_stage.stage = "warmup";
    opts.resume = bad_stage;
    EXPECT_THROW(run_protocol(small_config(Protocol::Nsqst), target, opts), std::invalid_argument);
    auto bad_adam = base;
    bad_adam.adam = AdamState(3);
    opts.resume = bad_adam;
    EXPECT_THROW(run_protocol(small_config(Protocol::Nsqst), target, opts), std::invalid_argument);
}

TEST(RunProtocol, PretrainedAmplitudesStayFrozen) {
    const auto target = targets::prepare_afh_state(4);
    for (Protocol p : {Protocol::NsqstPretrain, Protocol::Hybrid}) {
        auto only_pretrain = small_config(p);
        only_pretrain.iterations = 0;
        const auto a = run_protocol(only_pretrain, target);
        const auto b = run_protocol(small_config(p), target);
        EXPECT_EQ(a.checkpoint.networks[0], b.checkpoint.networks[0]) << to_string(p);
        EXPECT_NE(a.checkpoint.networks[1], b.checkpoint.networks[1]) << to_string(p);
        // Initial phase network is untouched by pretraining.
        Rng rng1 = substream(only_pretrain.seed, "init", 1);
        EXPECT_EQ(a.checkpoint.networks[1],
                  nqs::init_network(only_pretrain.arch, nqs::HeadMode::PhaseOnly, rng1, only_pretrain.init_scale));
    }
}

TEST(RunProtocol, FixedShadowsMatchReusedShadows) {
    const auto target = targets::prepare_ghz(4, 0.7);
    auto cfg = small_config(Protocol::Nsqst);
    cfg.reuse_shadows = true;
    const auto reused = run_protocol(cfg, target);
    RunOptions opts;
    opts.fixed_shadows =
        shadows::collect_shadows(target, cfg.shadows_per_iter, cfg.noise, derive_seed(cfg.seed, "shadows", 0));
    cfg.reuse_shadows = false;
    const auto fixed = run_protocol(cfg, target, opts);
    expect_same_metrics(reused.metrics, fixed.metrics);
    const auto fresh = run_protocol(cfg, target);
    EXPECT_NE(fresh.metrics.back().loss_estimate, fixed.metrics.back().loss_estimate);
    ShadowSet wrong = *opts.fixed_shadows;
    wrong.n = 3;
    opts.fixed_shadows = wrong;
    EXPECT_THROW(run_protocol(cfg, target, opts), std::invalid_argument);
}

TEST(RunProtocol, CallbacksAndObservable) {
    const auto target = targets::prepare_ghz(4, 0.0);
    std::size_t calls = 0;
    RunOptions opts;
    opts.on_metrics = [&](const Metrics&) { ++calls; };
    opts.observable = [](std::span<const cplx> psi) { return std::norm(psi[0]); };
    const auto r = run_protocol(small_config(Protocol::Nsqst), target, opts);
    EXPECT_EQ(calls, r.metrics.size());
    for (const auto& m : r.metrics) {
        EXPECT_GT(m.observable, 0.0);
        EXPECT_LT(m.observable, 1.0);
    }
}

TEST(RunProtocol, AnalyticFChangesObjectiveUnderNoise) {
    const auto target = targets::prepare_ghz(4, 0.0);
    auto cfg = small_config(Protocol::Nsqst);
    cfg.noise = shadows::NoiseModel::amplitude_damping(0.8);
    cfg.iterations = 1;
    const auto a = run_protocol(cfg, target);
    cfg.f_strategy = FStrategy::Analytic;
    const auto b = run_protocol(cfg, target);
    EXPECT_NE(a.metrics[0].loss_estimate, b.metrics[0].loss_estimate);
    EXPECT_EQ(a.metrics[0].exact_infidelity, b.metrics[0].exact_infidelity);
}

TEST(TailMeanInfidelity, UsesFinalStageWindow) {
    std::vector<Metrics> m;
    for (std::size_t i = 0; i < 5; ++i) m.push_back({"pretrain", i, 0.0, 0.9, 0, 0.0, 0.0});
    for (std::size_t i = 0; i < 4; ++i) m.push_back({"nsqst", i, 0.0, 0.1 * double(i + 1), 0, 0.0, 0.0});
    EXPECT_NEAR(tail_mean_infidelity(m, 2), 0.35, 1e-15);
    EXPECT_NEAR(tail_mean_infidelity(m, 100), 0.25, 1e-15);
    EXPECT_THROW(tail_mean_infidelity({}, 3), std::invalid_argument);
    EXPECT_THROW(tail_mean_infidelity(m, 0), std::invalid_argument);
}

TEST(Checkpoint, RoundTripAndRejection) {
    const auto r = run_protocol(small_config(Protocol::Hybrid), targets::prepare_ghz(4, 0.0));
    const std::string bytes = serialize(r.checkpoint);
    std::istringstream in(bytes);
    const auto back = read_checkpoint(in);
    EXPECT_EQ(back.protocol, r.checkpoint.protocol);
    EXPECT_EQ(back.stage, r.checkpoint.stage);
    EXPECT_EQ(back.next_iteration, r.checkpoint.next_iteration);
    EXPECT_EQ(back.networks, r.checkpoint.networks);
    EXPECT_EQ(back.adam, r.checkpoint.adam);
    EXPECT_EQ(serialize(back), bytes);

    auto expect_format_error = [](const std::string& b) {
        std::istringstream s(b);
        EXPECT_THROW(read_checkpoint(s), io::FormatError);
    };
    expect_format_error(bytes.substr(0, bytes.size() / 2));
    expect_format_error("XXXX" + bytes.substr(4));
    auto bad_version = bytes;
    bad_version[4] = 99;
    expect_format_error(bad_version);
    expect_format_error("");
}
