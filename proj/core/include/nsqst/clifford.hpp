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
#include <vector>

#include "nsqst/bits.hpp"
#include "nsqst/quantum.hpp"
#include "nsqst/rng.hpp"

namespace nsqst::clifford {

using quantum::cplx;
using quantum::Gate;

/// Signed Pauli (-1)^sign * prod_q sigma(x_q, z_q) with sigma(1,1) = Y.
/// Masks are in lane order: qubit q is bit q.
struct PauliRow {
    std::uint64_t x = 0;
    std::uint64_t z = 0;
    bool sign = false;

    bool operator==(const PauliRow&) const = default;
};

/// Symplectic binary form of two rows.
inline int symplectic_product(const PauliRow& a, const PauliRow& b) {
    return parity((a.x & b.z) ^ (a.z & b.x));
}

/// n-qubit Clifford unitary U (modulo global phase) stored as its
/// stabilizer tableau: rows[i] = U X_i U^dagger and rows[n + i] = U Z_i
/// U^dagger.
class CliffordElement {
   public:
    CliffordElement() = default;
    /// Identity on n qubits.
    explicit CliffordElement(int n);
    /// Throws unless rows.size() == 2n and the rows form a symplectic basis.
    CliffordElement(int n, std::vector<PauliRow> rows);

    int qubits() const { return n_; }
    const std::vector<PauliRow>& rows() const { return rows_; }
    const PauliRow& destabilizer(int q) const { return rows_[static_cast<std::size_t>(q)]; }
    const PauliRow& stabilizer(int q) const { return rows_[static_cast<std::size_t>(n_ + q)]; }

    /// U <- G U.
    void prepend_h(int q);
    void prepend_s(int q);
    void prepend_cnot(int control, int target);
    void prepend(const Gate& g);

    /// U P U^dagger.
    PauliRow conjugate(const PauliRow& p) const;
    bool is_symplectic() const;

    bool operator==(const CliffordElement&) const = default;

   private:
    int n_ = 0;
    std::vector<PauliRow> rows_;
};

/// Tableau of "first, then second" (second * first as operators).
CliffordElement compose(const CliffordElement& first, const CliffordElement& second);

/// Tableau of the circuit (gates in time order) acting on n qubits.
CliffordElement from_circuit(int n, const std::vector<Gate>& circuit);

/// Exactly uniform draw from the n-qubit Clifford group modulo phases.
CliffordElement sample_uniform_clifford(int n, Rng& rng);

/// H/S/CNOT circuit, in time order, that implements U^dagger. The element's
/// canonical unitary is defined as the inverse of this circuit.
std::vector<Gate> inverse_circuit(const CliffordElement& c);

/// H/S/CNOT circuit, in time order, for the canonical unitary of c.
std::vector<Gate> decompose(const CliffordElement& c);

int cnot_count(const std::vector<Gate>& circuit);

/// Phase-exact stabilizer state in CH form, |phi> = omega U_C U_H |s>.
class StabilizerState {
   public:
    /// |b> on n qubits.
    StabilizerState(int n, BitString b);

    int qubits() const { return n_; }

    void apply_h(int q);
    void apply_s(int q);
    void apply_cnot(int control, int target);
    void apply(const Gate& g);

    /// <s|phi>.
    cplx amplitude(BitString s) const;

   private:
    struct Scalar {
        int e = 0;  // phase exp(i pi e / 4)
        int p = 0;  // magnitude sqrt(2)^p
        bool zero = false;
    };

    void right_cx(int q, int r);
    void right_cz(int q, int r);
    void right_s(int q);
    void update_s_vector(std::uint64_t t, std::uint64_t u, unsigned b);
    void refresh_rows() const;
    int bit(std::uint64_t mask, int q) const { return static_cast<int>((mask >> q) & 1u); }

    int n_;
    std::uint64_t gamma1_ = 0;
    std::uint64_t gamma2_ = 0;
    std::vector<std::uint64_t> f_;  // f_[j] bit p = F(p, j)
    std::vector<std::uint64_t> g_;
    std::vector<std::uint64_t> m_;
    std::uint64_t v_ = 0;
    std::uint64_t s_ = 0;
    Scalar omega_;
    // Row p of F and M, refreshed after gate updates for O(n) amplitudes.
    mutable std::vector<std::uint64_t> f_rows_;
    mutable std::vector<std::uint64_t> m_rows_;
    mutable bool rows_stale_ = true;
};

/// U^dagger |b> for the canonical unitary of c.
StabilizerState stabilizer_state(const CliffordElement& c, BitString b);

/// <s|U^dagger|b>.
cplx amplitude(const CliffordElement& c, BitString b, BitString s);

}  // namespace nsqst::clifford
