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

#include <benchmark/benchmark.h>

#include <numbers>

#include "nsqst/clifford.hpp"
#include "nsqst/nqs.hpp"
#include "nsqst/shadows.hpp"
#include "nsqst/targets.hpp"
#include "nsqst/training.hpp"

using namespace nsqst;

namespace {

nqs::Architecture reference_arch() { return nqs::Architecture{6, 2, 4, 8}; }

nqs::Network reference_network(nqs::HeadMode mode = nqs::HeadMode::Full) {
    Rng rng(7);
    return nqs::init_network(reference_arch(), mode, rng, 0.1);
}

void BM_SampleUniformClifford(benchmark::State& state) {
    Rng rng(1);
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(clifford::sample_uniform_clifford(n, rng));
}
BENCHMARK(BM_SampleUniformClifford)->Arg(2)->Arg(6)->Arg(10);

void BM_Decompose(benchmark::State& state) {
    Rng rng(2);
    const auto c = clifford::sample_uniform_clifford(6, rng);
    for (auto _ : state) benchmark::DoNotOptimize(clifford::decompose(c));
}
BENCHMARK(BM_Decompose);

void BM_StabilizerAmplitude(benchmark::State& state) {
    Rng rng(3);
    const auto phi = clifford::stabilizer_state(clifford::sample_uniform_clifford(6, rng), 5);
    BitString s = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(phi.amplitude(s));
        s = (s + 1) & 63u;
    }
}
BENCHMARK(BM_StabilizerAmplitude);

void BM_CollectShadows(benchmark::State& state) {
    const auto target = targets::prepare_ghz(6, std::numbers::pi / 2);
    const auto noise = state.range(0) ? shadows::NoiseModel::amplitude_damping(0.9) : shadows::NoiseModel::none();
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(shadows::collect_shadows(target, 100, noise, ++seed));
}
BENCHMARK(BM_CollectShadows)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_NetworkForward(benchmark::State& state) {
    const auto net = reference_network();
    BitString s = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(net.forward(s));
        s = (s + 1) & 63u;
    }
}
BENCHMARK(BM_NetworkForward);

void BM_GradLogPsi(benchmark::State& state) {
    const auto net = reference_network();
    BitString s = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(net.grad_log_psi(s));
        s = (s + 1) & 63u;
    }
}
BENCHMARK(BM_GradLogPsi);

void BM_NetworkSample(benchmark::State& state) {
    const auto net = reference_network();
    Rng rng(4);
    for (auto _ : state) benchmark::DoNotOptimize(net.sample(static_cast<std::size_t>(state.range(0)), rng));
}
BENCHMARK(BM_NetworkSample)->Arg(5000)->Unit(benchmark::kMillisecond);

// One NSQST iteration at the reference scale: N = 100 shadows, L = 5000.
void BM_NsqstIteration(benchmark::State& state) {
    const auto target = targets::prepare_ghz(6, std::numbers::pi / 2);
    const auto net = reference_network();
    const auto model = training::WaveModel::full(net);
    const double f = shadows::f_noiseless(6);
    Rng rng(5);
    std::uint64_t seed = 0;
    for (auto _ : state) {
        const auto set = shadows::collect_shadows(target, 100, shadows::NoiseModel::none(), ++seed);
        const auto refs = training::OverlapReferences::from_shadows(set);
        benchmark::DoNotOptimize(
            training::nsqst_objective(model, refs, f, {training::OverlapMode::MonteCarlo, 5000}, rng));
    }
}
BENCHMARK(BM_NsqstIteration)->Unit(benchmark::kMillisecond);

// One NNQST epoch: 21 bases x 512 samples, batch 128.
void BM_NnqstEpoch(benchmark::State& state) {
    const auto target = targets::prepare_qcd_state();
    const auto data = training::sample_measurements(target, targets::nnqst_basis_set(6), 512, 6);
    auto net = reference_network();
    training::AdamState adam(net.size());
    std::size_t epoch = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(training::nnqst_epoch(net, adam, data, 128, 1e-3, {}, 8, epoch++));
    }
}
BENCHMARK(BM_NnqstEpoch)->Unit(benchmark::kMillisecond);

void BM_ExactInfidelityObjective(benchmark::State& state) {
    const auto target = targets::prepare_afh_state();
    const auto net = reference_network();
    const auto model = training::WaveModel::full(net);
    for (auto _ : state) benchmark::DoNotOptimize(training::exact_infidelity_objective(model, target));
}
BENCHMARK(BM_ExactInfidelityObjective)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
