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

#include "nsqst/targets.hpp"

#include <cmath>
#include <stdexcept>

namespace nsqst::targets {

void Hamiltonian::validate() const {
    if (n < 1) throw std::invalid_argument("Hamiltonian: qubit count must be positive");
    for (const auto& t : terms) {
        if (t.qubits() != n) {
            throw std::invalid_argument("Hamiltonian: term " + t.letters + " does not act on " + std::to_string(n) +
                                        " qubits");
        }
    }
}

namespace {

std::string word(int n, std::initializer_list<std::pair<int, char>> letters) {
    std::string w(static_cast<std::size_t>(n), 'I');
    for (auto [q, c] : letters) w[static_cast<std::size_t>(q)] = c;
    return w;
}

}  // namespace

Hamiltonian qcd_kinetic_hamiltonian() {
    Hamiltonian h{6, {}};
    const double sign[3] = {1.0, -1.0, 1.0};
    for (int k = 0; k < 3; ++k) {
        for (char p : {'X', 'Y'}) {
            h.terms.emplace_back(-0.25 * sign[k], word(6, {{k, p}, {k + 1, 'Z'}, {k + 2, 'Z'}, {k + 3, p}}));
        }
    }
    return h;
}

Hamiltonian build_qcd_hamiltonian(double mass, double coupling) {
    if (coupling == 0.0 || !std::isfinite(coupling)) {
        throw std::invalid_argument("build_qcd_hamiltonian: coupling x must be finite and nonzero");
    }
    if (!std::isfinite(mass)) throw std::invalid_argument("build_qcd_hamiltonian: mass must be finite");
    Hamiltonian h = qcd_kinetic_hamiltonian();
    h.terms.emplace_back(3.0 * mass, "IIIIII");
    for (int q = 0; q < 6; ++q) {
        h.terms.emplace_back(q < 3 ? -0.5 * mass : 0.5 * mass, word(6, {{q, 'Z'}}));
    }
    const double e = 1.0 / (2.0 * coupling);
    h.terms.emplace_back(e, "IIIIII");
    for (auto [a, b] : {std::pair{0, 1}, std::pair{0, 2}, std::pair{1, 2}}) {
        h.terms.emplace_back(-e / 3.0, word(6, {{a, 'Z'}, {b, 'Z'}}));
    }
    return h;
}

Hamiltonian build_afh_hamiltonian(int n) {
    if (n < 2) throw std::invalid_argument("build_afh_hamiltonian: need at least 2 qubits");
    Hamiltonian h{n, {}};
    for (char p : {'X', 'Y', 'Z'}) {
        for (int i = 0; i + 1 < n; ++i) h.terms.emplace_back(1.0, word(n, {{i, p}, {i + 1, p}}));
    }
    return h;
}

StateVector trotter_evolve(const StateVector& initial, const TrotterPlan& plan) {
    plan.hamiltonian.validate();
    if (plan.hamiltonian.n != initial.qubits()) {
        throw std::invalid_argument("trotter_evolve: Hamiltonian acts on " + std::to_string(plan.hamiltonian.n) +
                                    " qubits, state has " + std::to_string(initial.qubits()));
    }
    if (plan.steps < 1) throw std::invalid_argument("trotter_evolve: steps must be >= 1");
    if (!std::isfinite(plan.total_time)) throw std::invalid_argument("trotter_evolve: time must be finite");
    StateVector psi = initial;
    const double dt = plan.total_time / plan.steps;
    for (int step = 0; step < plan.steps; ++step) {
        for (const auto& term : plan.hamiltonian.terms) psi.apply_pauli_rotation(term.letters, term.coefficient * dt);
    }
    return psi;
}

BitString qcd_initial_string() { return 0b111000; }

BitString neel_string(int n) {
    BitString s = 0;
    for (int q = 1; q < n; q += 2) s |= qubit_mask(q, n);
    return s;
}

StateVector prepare_qcd_state(double mass, double coupling, double time, int steps) {
    const TrotterPlan plan{build_qcd_hamiltonian(mass, coupling), time, steps};
    return trotter_evolve(StateVector::basis_state(6, qcd_initial_string()), plan);
}

StateVector prepare_afh_state(int n, double time, int steps) {
    const TrotterPlan plan{build_afh_hamiltonian(n), time, steps};
    return trotter_evolve(StateVector::basis_state(n, neel_string(n)), plan);
}

StateVector prepare_ghz(int n, double theta) {
    if (n < 2) throw std::invalid_argument("prepare_ghz: need at least 2 qubits");
    std::vector<quantum::cplx> amps(std::size_t{1} << n);
    amps.front() = 1.0 / std::sqrt(2.0);
    amps.back() = std::polar(1.0 / std::sqrt(2.0), theta);
    return StateVector(n, std::move(amps));
}

std::vector<PauliBasis> nnqst_basis_set(int n) {
    if (n < 2) throw std::invalid_argument("nnqst_basis_set: need at least 2 qubits");
    std::vector<PauliBasis> out;
    out.emplace_back(std::string(static_cast<std::size_t>(n), 'Z'));
    for (int i = 0; i + 1 < n; ++i) {
        for (char a : {'X', 'Y'})
            for (char b : {'X', 'Y'}) {
                std::string w(static_cast<std::size_t>(n), 'Z');
                w[static_cast<std::size_t>(i)] = a;
                w[static_cast<std::size_t>(i + 1)] = b;
                out.emplace_back(std::move(w));
            }
    }
    return out;
}

std::vector<double> staggered_sx_profile(const StateVector& state) {
    const int n = state.qubits();
    std::vector<double> out;
    for (int j = 0; j < n; ++j) {
        out.push_back(quantum::expectation(state, PauliString(0.5, word(n, {{j, 'X'}}))));
    }
    return out;
}

}  // namespace nsqst::targets
