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
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsqst/nqs.hpp"
#include "nsqst/quantum.hpp"
#include "nsqst/shadows.hpp"

namespace nsqst::training {

using nqs::cplx;
using nqs::Network;
using quantum::PauliBasis;
using quantum::StateVector;
using shadows::ShadowSet;

class NonFiniteError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- optimizer

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::uint64_t step = 0;

    explicit AdamState(std::size_t size = 0) : m(size, 0.0), v(size, 0.0) {}
    bool operator==(const AdamState&) const = default;
};

/// Bias-corrected Adam update in place. Throws NonFiniteError, leaving
/// state and params untouched, if any gradient entry is not finite.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad, double lr,
               const AdamConfig& config = {});

// ---------------------------------------------------------------- models

/// psi(s) as seen by the shadow objectives: either one full network, or an
/// amplitude network paired with a phase network whose parameters are the
/// only trainable ones.
class WaveModel {
   public:
    static WaveModel full(const Network& net);
    static WaveModel split(const Network& amplitude, const Network& phase);

    int qubits() const { return amplitude_->qubits(); }
    bool is_split() const { return phase_ != nullptr; }
    const Network& trainable() const { return is_split() ? *phase_ : *amplitude_; }
    std::size_t size() const { return trainable().size(); }

    cplx psi(BitString s) const;
    /// Exact ancestral samples from |psi|^2.
    std::vector<BitString> sample(std::size_t count, Rng& rng) const { return amplitude_->sample(count, rng); }
    /// grad += Re[kappa D(s)], D = d log psi / d lambda over trainable params.
    void accumulate(BitString s, cplx kappa, std::span<double> grad) const;
    /// Exhaustive table of psi.
    std::vector<cplx> wave_function() const;

   private:
    WaveModel(const Network* amplitude, const Network* phase) : amplitude_(amplitude), phase_(phase) {}
    const Network* amplitude_;
    const Network* phase_;
};

// ---------------------------------------------------------------- NNQST

struct Measurement {
    PauliBasis basis;
    BitString outcome = 0;
};

/// Guard on the number of non-Z letters in a basis.
inline constexpr int kMaxRotatedQubits = 16;

/// |<s,B|psi>|^2, summing the 2^K computational strings that overlap with
/// the rotated product state.
double nnqst_prob(const Network& net, BitString s, const PauliBasis& basis);

struct NnqstResult {
    double loss = 0.0;
    std::vector<double> grad;
    /// Samples whose probability fell below 1e-300; their loss term is
    /// clamped and they contribute no gradient.
    std::size_t clamped = 0;
};

/// Mean negative log-likelihood of the batch and its gradient.
NnqstResult nnqst_loss_grad(const Network& net, std::span<const Measurement> batch);

struct EpochResult {
    double mean_loss = 0.0;
    std::size_t clamped = 0;
};

/// One pass over the data in batches of batch_size, shuffled by the
/// ("shuffle", epoch) substream of seed, with an Adam step per batch.
EpochResult nnqst_epoch(Network& net, AdamState& adam, std::span<const Measurement> data, std::size_t batch_size,
                        double lr, const AdamConfig& config, std::uint64_t seed, std::size_t epoch);

/// Draws samples_per_basis outcomes of the exact target in each basis.
std::vector<Measurement> sample_measurements(const StateVector& target, std::span<const PauliBasis> bases,
                                             std::size_t samples_per_basis, std::uint64_t seed);

// ---------------------------------------------------------------- NSQST

enum class OverlapMode : std::uint8_t { MonteCarlo = 0, Exhaustive = 1 };

/// Amplitudes phi_i(s) of a set of reference states, evaluated lazily on the
/// strings a gradient estimate needs.
class OverlapReferences {
   public:
    /// Stabilizer states of a shadow set.
    static OverlapReferences from_shadows(const ShadowSet& set);
    /// Dense reference states (e.g. the exact target) with weights.
    static OverlapReferences from_states(std::vector<StateVector> states, std::vector<double> weights = {});
    /// Stabilizer states with explicit weights (expectations over
    /// enumerated Cliffords and outcomes).
    static OverlapReferences from_weighted_shadows(const std::vector<shadows::ClassicalShadow>& shadows, int n,
                                                   std::vector<double> weights);

    int qubits() const { return n_; }
    std::size_t size() const { return weights_.size(); }
    /// Weights sum to one; the uniform case is 1/N.
    const std::vector<double>& weights() const { return weights_; }
    /// conj(phi_i(s)) for every reference i and every listed string, laid
    /// out as [i * strings.size() + k].
    std::vector<cplx> conj_table(std::span<const BitString> strings) const;

   private:
    int n_ = 0;
    std::vector<double> weights_;
    std::vector<clifford::StabilizerState> stabilizers_;
    std::vector<StateVector> dense_;
};

struct ObjectiveResult {
    /// 1 - (1 - 1/f)/2^n - (1/f) sum_i w_i |A_i|^2.
    double loss = 0.0;
    /// Estimated overlaps <phi_i|psi>.
    std::vector<cplx> overlaps;
    std::vector<double> grad;
    std::size_t excluded = 0;
};

/// MC overlap (1/L) sum phi*(s)/psi*(s) over the samples, the estimate of
/// <phi|psi>. Samples with |psi(s)| < 1e-150 are excluded and counted.
cplx mc_overlap(const WaveModel& model, const clifford::StabilizerState& phi, std::span<const BitString> samples,
                std::size_t* excluded = nullptr);

struct NsqstOptions {
    OverlapMode mode = OverlapMode::MonteCarlo;
    std::size_t mc_samples = 5000;
};

/// Shadow-estimated infidelity and its gradient. MonteCarlo mode draws
/// options.mc_samples strings from |psi|^2; Exhaustive mode weights all 2^n
/// strings by |psi|^2. Throws if every sample is excluded.
ObjectiveResult nsqst_objective(const WaveModel& model, const OverlapReferences& refs, double f,
                                const NsqstOptions& options, Rng& rng);

std::vector<double> nsqst_grad(const WaveModel& model, const ShadowSet& set, double f, const NsqstOptions& options,
                               Rng& rng);
double nsqst_loss(const WaveModel& model, const ShadowSet& set, double f, const NsqstOptions& options, Rng& rng);

/// 1 - |<target|psi>|^2 by exhaustive summation.
double exact_infidelity(const WaveModel& model, const StateVector& target);
double exact_infidelity(std::span<const cplx> psi, const StateVector& target);
/// Exact infidelity and its gradient over the trainable parameters.
ObjectiveResult exact_infidelity_objective(const WaveModel& model, const StateVector& target);

/// Hybrid objective for psi~(s) = e^{i phase(s)} sqrt(P(s)) over the support;
/// gradient over the phase network only.
ObjectiveResult hybrid_objective(const Network& phase, std::span<const BitString> support,
                                 std::span<const double> probabilities, const OverlapReferences& refs, double f);
std::vector<double> hybrid_grad(const Network& phase, std::span<const BitString> support,
                                std::span<const double> probabilities, const ShadowSet& set, double f);

// ---------------------------------------------------------------- protocols

enum class Protocol : std::uint8_t { Nnqst = 0, Nsqst = 1, NsqstPretrain = 2, Hybrid = 3 };
enum class FStrategy : std::uint8_t { NoiseFree = 0, Analytic = 1 };

std::string to_string(Protocol p);
Protocol parse_protocol(const std::string& text);
std::string to_string(FStrategy s);
FStrategy parse_f_strategy(const std::string& text);

struct TrainConfig {
    Protocol protocol = Protocol::Nsqst;
    nqs::Architecture arch;
    double init_scale = 0.1;

    // Shadow stage.
    std::size_t iterations = 2000;
    std::size_t shadows_per_iter = 100;
    std::size_t mc_samples = 5000;
    OverlapMode overlap_mode = OverlapMode::MonteCarlo;
    double lr = 1e-2;
    bool reuse_shadows = false;
    shadows::NoiseModel noise;
    FStrategy f_strategy = FStrategy::NoiseFree;

    // NNQST stage (also the pre-training of the split protocols).
    std::size_t samples_per_basis = 512;
    std::size_t batch_size = 128;
    std::size_t epochs = 200;
    double nnqst_lr = 1e-3;

    AdamConfig adam;
    std::uint64_t seed = 0;

    void validate() const;
};

struct Metrics {
    std::string stage;
    std::size_t iteration = 0;
    double loss_estimate = 0.0;
    double exact_infidelity = 0.0;
    std::size_t excluded_samples = 0;
    double elapsed_ms = 0.0;
    /// Optional observable of the model state; NaN when not requested.
    double observable = 0.0;
};

/// Resumable state of a run.
struct Checkpoint {
    Protocol protocol = Protocol::Nsqst;
    std::string stage;
    std::uint64_t next_iteration = 0;
    std::vector<Network> networks;
    AdamState adam;
};

struct RunOptions {
    std::optional<Checkpoint> resume;
    /// When set, every shadow-stage iteration uses this set instead of
    /// collecting fresh shadows.
    std::optional<ShadowSet> fixed_shadows;
    /// Called once per recorded metric.
    std::function<void(const Metrics&)> on_metrics;
    /// Exact observable of the model wave function, recorded per metric.
    std::function<double(std::span<const cplx>)> observable;
};

struct RunResult {
    std::vector<Metrics> metrics;
    Checkpoint checkpoint;
    std::vector<cplx> final_wave_function;
};

RunResult run_protocol(const TrainConfig& config, const StateVector& target, const RunOptions& options = {});

/// Mean exact infidelity over the last window records of the final stage.
double tail_mean_infidelity(const std::vector<Metrics>& metrics, std::size_t window = 100);

/// Trains an amplitude-only network on computational-basis data for
/// config.epochs epochs with the NNQST hyperparameters of config.
Network pretrain_amplitudes(Network amplitude, std::span<const Measurement> z_dataset, const TrainConfig& config);

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);

}  // namespace nsqst::training
