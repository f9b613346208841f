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
#include <span>
#include <string>
#include <vector>

#include "nsqst/clifford.hpp"
#include "nsqst/quantum.hpp"

namespace nsqst::shadows {

using clifford::CliffordElement;
using quantum::KrausChannel;
using quantum::StateVector;

/// Noise afflicting the random-Clifford measurement segment.
struct NoiseModel {
    enum class Kind : std::uint8_t { None = 0, AmplitudeDamping = 1, CnotDepolarizing = 2, Custom = 3 };

    Kind kind = Kind::None;
    /// p for amplitude damping, f for CNOT depolarizing.
    double parameter = 1.0;
    /// Custom channel applied before measurement: arity 1 acts on every
    /// qubit, arity n acts on the whole register.
    KrausChannel custom;

    static NoiseModel none() { return {}; }
    static NoiseModel amplitude_damping(double p) { return {Kind::AmplitudeDamping, p, {}}; }
    static NoiseModel cnot_depolarizing(double f) { return {Kind::CnotDepolarizing, f, {}}; }
    static NoiseModel custom_channel(KrausChannel ch) { return {Kind::Custom, 1.0, std::move(ch)}; }

    void validate(int n) const;
    std::string describe() const;
    /// Channel applied to the register before measurement, when the model
    /// has one (identity for None; throws for CnotDepolarizing).
    KrausChannel channel(int n) const;
};

struct ClassicalShadow {
    CliffordElement clifford;
    BitString outcome = 0;
};

struct ShadowSet {
    int n = 0;
    std::vector<ClassicalShadow> shadows;
    NoiseModel noise;
    std::uint64_t seed = 0;
};

/// Draws N shadows. Shadow i uses substreams ("clifford", i) and
/// ("measurement", i) of seed, so the result does not depend on the worker
/// count. A nonempty fixed list replaces the random Clifford of shadow i by
/// fixed[i % fixed.size()].
ShadowSet collect_shadows(const StateVector& target, std::size_t count, const NoiseModel& noise,
                          std::uint64_t seed, std::span<const CliffordElement> fixed = {});

/// Outcome distribution of measuring U|target> under the noise model.
std::vector<double> outcome_distribution(const StateVector& target, const CliffordElement& u,
                                         const NoiseModel& noise);

/// Sum over s of <s|E(|s><s|)|s>.
double fid_of_channel(const KrausChannel& ch, int n);
/// (fid - 1) / (4^n - 1).
double f_of_channel(const KrausChannel& ch, int n);
double f_amplitude_damping(int n, double p);
/// 1 / (2^n + 1).
double f_noiseless(int n);
/// Inversion constant for a noise model under the analytic strategy; the
/// CNOT-depolarizing model has no closed form and falls back to f_noiseless.
double f_analytic(const NoiseModel& noise, int n);

/// Dense |phi> = U^dagger|b> of one shadow.
StateVector shadow_state(const ClassicalShadow& shadow, int n);
/// (1/f)|phi><phi| + (1 - 1/f) I / 2^n.
quantum::CMatrix snapshot_matrix(const ClassicalShadow& shadow, int n, double f);

/// Per-shadow <psi|rho_i|psi> with exact overlaps.
std::vector<double> fidelity_terms(const ShadowSet& set, const StateVector& psi, double f);
double estimate_fidelity(const ShadowSet& set, const StateVector& psi, double f);

/// Noisy-loss value predicted from the noiseless loss.
double transformed_loss(double noiseless_loss, double f, int n);

double median_of_means(std::span<const double> values, std::size_t k);

void write_shadow_set(std::ostream& out, const ShadowSet& set);
ShadowSet read_shadow_set(std::istream& in);
void save_shadow_set(const std::filesystem::path& path, const ShadowSet& set);
ShadowSet load_shadow_set(const std::filesystem::path& path);

}  // namespace nsqst::shadows
