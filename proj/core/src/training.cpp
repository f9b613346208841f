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

#include "nsqst/training.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

#include "nsqst/parallel.hpp"

namespace nsqst::training {

namespace {

constexpr double kMinAmplitude = 1e-150;
constexpr double kMinRatio = 1e-12;
constexpr double kMinProbability = 1e-300;

double pow2(int n) { return std::ldexp(1.0, n); }

// Sums per-index gradient buffers in index order.
std::vector<double> reduce_in_order(const std::vector<std::vector<double>>& parts, std::size_t size) {
    std::vector<double> out(size, 0.0);
    for (const auto& p : parts) {
        if (p.empty()) continue;
        for (std::size_t k = 0; k < size; ++k) out[k] += p[k];
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------- Adam

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad, double lr,
               const AdamConfig& config) {
    if (state.m.size() != params.size() || state.v.size() != params.size() || grad.size() != params.size()) {
        throw std::invalid_argument("adam_step: size mismatch between state, parameters and gradient");
    }
    for (std::size_t k = 0; k < grad.size(); ++k) {
        if (!std::isfinite(grad[k])) {
            throw NonFiniteError("adam_step: gradient entry " + std::to_string(k) + " is " + std::to_string(grad[k]));
        }
    }
    state.step += 1;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(config.beta1, t);
    const double c2 = 1.0 - std::pow(config.beta2, t);
    for (std::size_t k = 0; k < params.size(); ++k) {
        state.m[k] = config.beta1 * state.m[k] + (1.0 - config.beta1) * grad[k];
        state.v[k] = config.beta2 * state.v[k] + (1.0 - config.beta2) * grad[k] * grad[k];
        const double mhat = state.m[k] / c1;
        const double vhat = state.v[k] / c2;
        params[k] -= lr * mhat / (std::sqrt(vhat) + config.epsilon);
    }
}

// ---------------------------------------------------------------- WaveModel

WaveModel WaveModel::full(const Network& net) { return WaveModel(&net, nullptr); }

WaveModel WaveModel::split(const Network& amplitude, const Network& phase) {
    if (amplitude.qubits() != phase.qubits()) throw std::invalid_argument("WaveModel: qubit count mismatch");
    if (!amplitude.has_logits()) throw std::invalid_argument("WaveModel: amplitude network has no logit head");
    if (!phase.has_phase()) throw std::invalid_argument("WaveModel: phase network has no phase head");
    return WaveModel(&amplitude, &phase);
}

cplx WaveModel::psi(BitString s) const {
    const auto a = amplitude_->forward(s);
    if (!phase_) return a.value();
    return std::polar(std::exp(a.log_sqrt_p), phase_->forward(s).phase);
}

void WaveModel::accumulate(BitString s, cplx kappa, std::span<double> grad) const {
    if (phase_) {
        phase_->accumulate_log_psi_gradient(s, 0.0, -kappa.imag(), grad);
    } else {
        amplitude_->accumulate_log_psi_gradient(s, kappa.real(), -kappa.imag(), grad);
    }
}

std::vector<cplx> WaveModel::wave_function() const {
    return phase_ ? nqs::wave_function(*amplitude_, *phase_) : nqs::wave_function(*amplitude_);
}

// ---------------------------------------------------------------- NNQST

namespace {

struct RotatedTerms {
    std::vector<BitString> strings;
    std::vector<cplx> coefficients;  // <s,B|t>
};

RotatedTerms rotated_terms(BitString s, const PauliBasis& basis, int n) {
    if (basis.qubits() != n) throw std::invalid_argument("nnqst_prob: basis length does not match qubit count");
    std::vector<int> rotated;
    for (int q = 0; q < n; ++q) {
        if (basis.letters[static_cast<std::size_t>(q)] != 'Z') rotated.push_back(q);
    }
    if (static_cast<int>(rotated.size()) > kMaxRotatedQubits) {
        throw std::invalid_argument("nnqst_prob: basis rotates " + std::to_string(rotated.size()) +
                                    " qubits, limit is " + std::to_string(kMaxRotatedQubits));
    }
    const std::size_t count = std::size_t{1} << rotated.size();
    const double norm = std::pow(2.0, -0.5 * static_cast<double>(rotated.size()));
    RotatedTerms out;
    out.strings.reserve(count);
    out.coefficients.reserve(count);
    for (std::size_t a = 0; a < count; ++a) {
        BitString t = s;
        cplx c = norm;
        for (std::size_t k = 0; k < rotated.size(); ++k) {
            const int q = rotated[k];
            const int tb = static_cast<int>((a >> k) & 1u);
            const int sb = bit_at(s, q, n);
            if (tb != sb) t = flip_bit(t, q, n);
            if (sb & tb) c = -c;
            if (tb && basis.letters[static_cast<std::size_t>(q)] == 'Y') c *= cplx(0.0, -1.0);
        }
        out.strings.push_back(t);
        out.coefficients.push_back(c);
    }
    return out;
}

}  // namespace

double nnqst_prob(const Network& net, BitString s, const PauliBasis& basis) {
    const auto terms = rotated_terms(s, basis, net.qubits());
    cplx amp = 0.0;
    for (std::size_t k = 0; k < terms.strings.size(); ++k) {
        amp += terms.coefficients[k] * net.forward(terms.strings[k]).value();
    }
    return std::norm(amp);
}

NnqstResult nnqst_loss_grad(const Network& net, std::span<const Measurement> batch) {
    if (batch.empty()) throw std::invalid_argument("nnqst_loss_grad: empty batch");
    const int n = net.qubits();
    std::map<BitString, cplx> psi;
    std::vector<RotatedTerms> terms;
    terms.reserve(batch.size());
    for (const auto& m : batch) {
        terms.push_back(rotated_terms(m.outcome, m.basis, n));
        for (BitString t : terms.back().strings) psi.emplace(t, cplx{});
    }
    std::vector<BitString> keys;
    keys.reserve(psi.size());
    for (const auto& kv : psi) keys.push_back(kv.first);
    std::vector<cplx> values(keys.size());
    parallel_for(keys.size(), [&](std::size_t k) { values[k] = net.forward(keys[k]).value(); });
    for (std::size_t k = 0; k < keys.size(); ++k) psi[keys[k]] = values[k];

    NnqstResult result;
    std::map<BitString, cplx> kappa;
    const double inv_batch = 1.0 / static_cast<double>(batch.size());
    for (const auto& rt : terms) {
        cplx amp = 0.0;
        for (std::size_t k = 0; k < rt.strings.size(); ++k) amp += rt.coefficients[k] * psi[rt.strings[k]];
        const double p = std::norm(amp);
        if (p < kMinProbability) {
            result.loss -= std::log(kMinProbability) * inv_batch;
            result.clamped += 1;
            continue;
        }
        result.loss -= std::log(p) * inv_batch;
        // d(-log p) = -2 Re[sum_t c_t psi(t) D(t) / amp]
        for (std::size_t k = 0; k < rt.strings.size(); ++k) {
            kappa[rt.strings[k]] += -2.0 * inv_batch * rt.coefficients[k] * psi[rt.strings[k]] / amp;
        }
    }
    std::vector<BitString> ks;
    std::vector<cplx> kv;
    for (const auto& [s, c] : kappa) {
        ks.push_back(s);
        kv.push_back(c);
    }
    std::vector<std::vector<double>> parts(ks.size());
    const WaveModel model = WaveModel::full(net);
    parallel_for(ks.size(), [&](std::size_t k) {
        parts[k].assign(net.size(), 0.0);
        model.accumulate(ks[k], kv[k], parts[k]);
    });
    result.grad = reduce_in_order(parts, net.size());
    return result;
}

std::vector<Measurement> sample_measurements(const StateVector& target, std::span<const PauliBasis> bases,
                                             std::size_t samples_per_basis, std::uint64_t seed) {
    std::vector<Measurement> out;
    out.reserve(bases.size() * samples_per_basis);
    for (std::size_t b = 0; b < bases.size(); ++b) {
        const auto rotated = quantum::rotate_to_basis(target, bases[b]);
        const auto probs = quantum::probabilities(rotated);
        std::vector<double> cdf(probs.size());
        std::partial_sum(probs.begin(), probs.end(), cdf.begin());
        Rng rng = substream(seed, "dataset", b);
        for (std::size_t k = 0; k < samples_per_basis; ++k) {
            const double u = rng.uniform() * cdf.back();
            const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
            const auto idx = static_cast<BitString>(std::min<std::ptrdiff_t>(it - cdf.begin(), static_cast<std::ptrdiff_t>(cdf.size() - 1)));
            out.push_back({bases[b], idx});
        }
    }
    return out;
}

// ---------------------------------------------------------------- references

OverlapReferences OverlapReferences::from_shadows(const ShadowSet& set) {
    if (set.shadows.empty()) throw std::invalid_argument("OverlapReferences: empty shadow set");
    std::vector<double> w(set.shadows.size(), 1.0 / static_cast<double>(set.shadows.size()));
    return from_weighted_shadows(set.shadows, set.n, std::move(w));
}

OverlapReferences OverlapReferences::from_weighted_shadows(const std::vector<shadows::ClassicalShadow>& shadows,
                                                           int n, std::vector<double> weights) {
    if (shadows.size() != weights.size()) throw std::invalid_argument("OverlapReferences: weight count mismatch");
    OverlapReferences r;
    r.n_ = n;
    r.weights_ = std::move(weights);
    std::vector<std::optional<clifford::StabilizerState>> built(shadows.size());
    parallel_for(shadows.size(), [&](std::size_t i) {
        built[i].emplace(clifford::stabilizer_state(shadows[i].clifford, shadows[i].outcome));
    });
    r.stabilizers_.reserve(built.size());
    for (auto& b : built) r.stabilizers_.push_back(std::move(*b));
    return r;
}

OverlapReferences OverlapReferences::from_states(std::vector<StateVector> states, std::vector<double> weights) {
    if (states.empty()) throw std::invalid_argument("OverlapReferences: no reference states");
    if (weights.empty()) weights.assign(states.size(), 1.0 / static_cast<double>(states.size()));
    if (weights.size() != states.size()) throw std::invalid_argument("OverlapReferences: weight count mismatch");
    OverlapReferences r;
    r.n_ = states.front().qubits();
    r.weights_ = std::move(weights);
    r.dense_ = std::move(states);
    return r;
}

std::vector<cplx> OverlapReferences::conj_table(std::span<const BitString> strings) const {
    const std::size_t m = strings.size();
    std::vector<cplx> out(size() * m);
    parallel_for(size(), [&](std::size_t i) {
        for (std::size_t k = 0; k < m; ++k) {
            const cplx a = dense_.empty() ? stabilizers_[i].amplitude(strings[k]) : dense_[i][strings[k]];
            out[i * m + k] = std::conj(a);
        }
    });
    return out;
}

// ---------------------------------------------------------------- objectives

namespace {

// Shared estimator: overlaps A_i = sum_s w_s phi_i*(s)/psi*(s) and the
// per-string seeds kappa_s of the gradient sum_s Re[kappa_s D(s)].
struct Estimate {
    double loss = 0.0;
    std::vector<cplx> overlaps;
    std::vector<cplx> kappa;
};

Estimate estimate(std::span<const BitString> strings, std::span<const double> weights, std::span<const cplx> psi,
                  const OverlapReferences& refs, double f) {
    if (f == 0.0) throw std::invalid_argument("shadow objective: f must be nonzero");
    const std::size_t m = strings.size();
    const auto table = refs.conj_table(strings);
    Estimate e;
    e.overlaps.assign(refs.size(), cplx{});
    std::vector<cplx> ratio(m);
    for (std::size_t k = 0; k < m; ++k) ratio[k] = weights[k] / std::conj(psi[k]);
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < refs.size(); ++i) {
        cplx a = 0.0;
        for (std::size_t k = 0; k < m; ++k) a += table[i * m + k] * ratio[k];
        e.overlaps[i] = a;
        sum_sq += refs.weights()[i] * std::norm(a);
    }
    const int n = refs.qubits();
    e.loss = 1.0 - (1.0 - 1.0 / f) / pow2(n) - sum_sq / f;
    e.kappa.assign(m, cplx{});
    for (std::size_t k = 0; k < m; ++k) {
        cplx acc = 0.0;
        for (std::size_t i = 0; i < refs.size(); ++i) {
            acc += refs.weights()[i] * table[i * m + k] * std::conj(e.overlaps[i]);
        }
        e.kappa[k] = -2.0 / f * ratio[k] * acc;
    }
    return e;
}

std::vector<double> accumulate_all(const WaveModel& model, std::span<const BitString> strings,
                                   std::span<const cplx> kappa) {
    std::vector<std::vector<double>> parts(strings.size());
    parallel_for(strings.size(), [&](std::size_t k) {
        if (kappa[k] == cplx{}) return;
        parts[k].assign(model.size(), 0.0);
        model.accumulate(strings[k], kappa[k], parts[k]);
    });
    return reduce_in_order(parts, model.size());
}

}  // namespace

cplx mc_overlap(const WaveModel& model, const clifford::StabilizerState& phi, std::span<const BitString> samples,
                std::size_t* excluded) {
    if (samples.empty()) throw std::invalid_argument("mc_overlap: no samples");
    std::map<BitString, std::size_t> counts;
    for (BitString s : samples) counts[s] += 1;
    cplx acc = 0.0;
    std::size_t kept = 0, dropped = 0;
    for (const auto& [s, c] : counts) {
        const cplx p = model.psi(s);
        if (std::abs(p) < kMinAmplitude) {
            dropped += c;
            continue;
        }
        acc += static_cast<double>(c) * std::conj(phi.amplitude(s)) / std::conj(p);
        kept += c;
    }
    if (excluded) *excluded = dropped;
    if (kept == 0) throw std::runtime_error("mc_overlap: every sample was excluded by the blow-up guard");
    return acc / static_cast<double>(kept);
}

ObjectiveResult nsqst_objective(const WaveModel& model, const OverlapReferences& refs, double f,
                                const NsqstOptions& options, Rng& rng) {
    const int n = model.qubits();
    if (refs.qubits() != n) throw std::invalid_argument("nsqst_objective: reference size does not match model");
    std::vector<BitString> strings;
    std::vector<double> weights;
    std::vector<cplx> psi;
    std::size_t excluded = 0;
    if (options.mode == OverlapMode::MonteCarlo) {
        if (options.mc_samples < 1) throw std::invalid_argument("nsqst_objective: need at least one MC sample");
        std::map<BitString, std::size_t> counts;
        for (BitString s : model.sample(options.mc_samples, rng)) counts[s] += 1;
        std::vector<BitString> all;
        std::vector<std::size_t> cnt;
        for (const auto& [s, c] : counts) {
            all.push_back(s);
            cnt.push_back(c);
        }
        std::vector<cplx> values(all.size());
        parallel_for(all.size(), [&](std::size_t k) { values[k] = model.psi(all[k]); });
        const double total = static_cast<double>(options.mc_samples);
        for (std::size_t k = 0; k < all.size(); ++k) {
            const double freq = static_cast<double>(cnt[k]) / total;
            const double mag = std::abs(values[k]);
            if (mag < kMinAmplitude || mag * mag / freq < kMinRatio) {
                excluded += cnt[k];
                continue;
            }
            strings.push_back(all[k]);
            weights.push_back(freq);
            psi.push_back(values[k]);
        }
    } else {
        const std::size_t dim = std::size_t{1} << n;
        std::vector<cplx> values(dim);
        parallel_for(dim, [&](std::size_t s) { values[s] = model.psi(s); });
        for (BitString s = 0; s < dim; ++s) {
            const double p = std::norm(values[s]);
            if (std::abs(values[s]) < kMinAmplitude) {
                excluded += 1;
                continue;
            }
            strings.push_back(s);
            weights.push_back(p);
            psi.push_back(values[s]);
        }
    }
    if (strings.empty()) throw std::runtime_error("nsqst_objective: every sample was excluded by the blow-up guard");
    const double kept = std::accumulate(weights.begin(), weights.end(), 0.0);
    for (auto& w : weights) w /= kept;

    const Estimate e = estimate(strings, weights, psi, refs, f);
    ObjectiveResult r;
    r.loss = e.loss;
    r.overlaps = e.overlaps;
    r.excluded = excluded;
    r.grad = accumulate_all(model, strings, e.kappa);
    return r;
}

std::vector<double> nsqst_grad(const WaveModel& model, const ShadowSet& set, double f, const NsqstOptions& options,
                               Rng& rng) {
    return nsqst_objective(model, OverlapReferences::from_shadows(set), f, options, rng).grad;
}

double nsqst_loss(const WaveModel& model, const ShadowSet& set, double f, const NsqstOptions& options, Rng& rng) {
    return nsqst_objective(model, OverlapReferences::from_shadows(set), f, options, rng).loss;
}

double exact_infidelity(std::span<const cplx> psi, const StateVector& target) {
    if (psi.size() != target.dimension()) throw std::invalid_argument("exact_infidelity: dimension mismatch");
    cplx ov = 0.0;
    for (std::size_t s = 0; s < psi.size(); ++s) ov += std::conj(psi[s]) * target[s];
    return 1.0 - std::norm(ov);
}

double exact_infidelity(const WaveModel& model, const StateVector& target) {
    if (model.qubits() != target.qubits()) throw std::invalid_argument("exact_infidelity: qubit count mismatch");
    return exact_infidelity(model.wave_function(), target);
}

ObjectiveResult exact_infidelity_objective(const WaveModel& model, const StateVector& target) {
    const auto refs = OverlapReferences::from_states({target});
    Rng unused(0);
    return nsqst_objective(model, refs, 1.0, {OverlapMode::Exhaustive, 0}, unused);
}

ObjectiveResult hybrid_objective(const Network& phase, std::span<const BitString> support,
                                 std::span<const double> probabilities, const OverlapReferences& refs, double f) {
    if (support.empty()) throw std::invalid_argument("hybrid_objective: empty support");
    if (support.size() != probabilities.size()) throw std::invalid_argument("hybrid_objective: size mismatch");
    if (!phase.has_phase()) throw std::invalid_argument("hybrid_objective: network has no phase head");
    const double total = std::accumulate(probabilities.begin(), probabilities.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("hybrid_objective: P must sum to 1 over S");
    std::vector<BitString> strings;
    std::vector<double> weights;
    std::vector<cplx> psi;
    for (std::size_t k = 0; k < support.size(); ++k) {
        if (probabilities[k] < 0.0) throw std::invalid_argument("hybrid_objective: negative probability");
        if (probabilities[k] == 0.0) continue;
        strings.push_back(support[k]);
        weights.push_back(probabilities[k]);
        psi.push_back(std::polar(std::sqrt(probabilities[k]), phase.forward(support[k]).phase));
    }
    const Estimate e = estimate(strings, weights, psi, refs, f);
    ObjectiveResult r;
    r.loss = e.loss;
    r.overlaps = e.overlaps;
    // Only the phase depends on lambda_2: D(s) = i d phase(s).
    std::vector<std::vector<double>> parts(strings.size());
    parallel_for(strings.size(), [&](std::size_t k) {
        parts[k].assign(phase.size(), 0.0);
        phase.accumulate_log_psi_gradient(strings[k], 0.0, -e.kappa[k].imag(), parts[k]);
    });
    r.grad = reduce_in_order(parts, phase.size());
    return r;
}

std::vector<double> hybrid_grad(const Network& phase, std::span<const BitString> support,
                                std::span<const double> probabilities, const ShadowSet& set, double f) {
    return hybrid_objective(phase, support, probabilities, OverlapReferences::from_shadows(set), f).grad;
}

}  // namespace nsqst::training
