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

#include <string>
#include <vector>

#include "nsqst/quantum.hpp"

namespace nsqst::targets {

using quantum::PauliBasis;
using quantum::PauliString;
using quantum::StateVector;

/// Sum of real-weighted Pauli strings on a fixed number of qubits.
struct Hamiltonian {
    int n = 0;
    std::vector<PauliString> terms;

    /// Throws unless every term has n letters.
    void validate() const;
};

/// First-order Trotterization of exp(-i H t): the terms are applied in the
/// stored order, each for t/steps, and the sweep is repeated steps times.
struct TrotterPlan {
    Hamiltonian hamiltonian;
    double total_time = 0.0;
    int steps = 1;
};

inline constexpr double kQcdMass = 1.2;
inline constexpr double kQcdCoupling = 0.8;
inline constexpr double kQcdTime = 1.8;
inline constexpr int kQcdSteps = 2;
inline constexpr double kAfhTime = 0.8;
inline constexpr int kAfhSteps = 4;
inline constexpr int kTargetQubits = 6;

/// Kinetic part of the single-cell SU(3) Hamiltonian. Each hopping term and
/// its conjugate combine into -(c/4)(X Z Z X + Y Z Z Y).
Hamiltonian qcd_kinetic_hamiltonian();

/// H_kin + m H_m + H_e/(2x) on 6 qubits, ordered kinetic, mass, electric.
/// Constant offsets are kept as identity strings.
Hamiltonian build_qcd_hamiltonian(double mass, double coupling);

/// Open-boundary Heisenberg chain in layers: every XX bond left to right,
/// then every YY bond, then every ZZ bond.
Hamiltonian build_afh_hamiltonian(int n);

StateVector trotter_evolve(const StateVector& initial, const TrotterPlan& plan);

/// |↓↓↓↑↑↑> with ↑ = |0>, i.e. the bit string 111000.
BitString qcd_initial_string();
/// |↑↓↑↓↑↓> = 010101 on n qubits.
BitString neel_string(int n);

StateVector prepare_qcd_state(double mass = kQcdMass, double coupling = kQcdCoupling, double time = kQcdTime,
                              int steps = kQcdSteps);
StateVector prepare_afh_state(int n = kTargetQubits, double time = kAfhTime, int steps = kAfhSteps);
/// (|0...0> + e^{i theta}|1...1>)/sqrt(2).
StateVector prepare_ghz(int n, double theta);

/// All-Z plus {X,Y}^2 on each adjacent pair: 4n-3 bases.
std::vector<PauliBasis> nnqst_basis_set(int n);

/// Per-site <sigma^x_j / 2>, no staggering sign applied.
std::vector<double> staggered_sx_profile(const StateVector& state);

}  // namespace nsqst::targets
