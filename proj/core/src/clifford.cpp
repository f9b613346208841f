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
#include <stdexcept>
#include <string>

#include "nsqst/clifford.hpp"

namespace nsqst::clifford {

namespace {

void check_n(int n) {
    if (n < 1 || n > kMaxDenseQubits) {
        throw std::invalid_argument("Clifford qubit count must be in [1, " + std::to_string(kMaxDenseQubits) +
                                    "], got " + std::to_string(n));
    }
}

std::uint64_t lane(int q) { return std::uint64_t{1} << q; }

// Pauli i^e X(x) Z(z).
struct PhasedPauli {
    std::uint64_t x = 0;
    std::uint64_t z = 0;
    int e = 0;

    PhasedPauli& operator*=(const PhasedPauli& rhs) {
        e = (e + rhs.e + 2 * parity(z & rhs.x)) & 3;
        x ^= rhs.x;
        z ^= rhs.z;
        return *this;
    }
};

PhasedPauli to_phased(const PauliRow& r) {
    return {r.x, r.z, (std::popcount(r.x & r.z) + (r.sign ? 2 : 0)) & 3};
}

PauliRow from_phased(const PhasedPauli& p) {
    const int rest = (p.e - std::popcount(p.x & p.z)) & 3;
    if (rest & 1) throw std::logic_error("Pauli product is not Hermitian");
    return {p.x, p.z, rest == 2};
}

}  // namespace

// ---------------------------------------------------------------- tableau

CliffordElement::CliffordElement(int n) : n_(n) {
    check_n(n);
    rows_.resize(static_cast<std::size_t>(2 * n));
    for (int q = 0; q < n; ++q) {
        rows_[static_cast<std::size_t>(q)].x = lane(q);
        rows_[static_cast<std::size_t>(n + q)].z = lane(q);
    }
}

CliffordElement::CliffordElement(int n, std::vector<PauliRow> rows) : n_(n), rows_(std::move(rows)) {
    check_n(n);
    if (rows_.size() != static_cast<std::size_t>(2 * n)) {
        throw std::invalid_argument("CliffordElement: expected 2n rows");
    }
    const std::uint64_t mask = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
    for (const auto& r : rows_) {
        if ((r.x | r.z) & ~mask) throw std::invalid_argument("CliffordElement: row has bits beyond n qubits");
    }
    if (!is_symplectic()) throw std::invalid_argument("CliffordElement: rows are not a symplectic basis");
}

void CliffordElement::prepend_h(int q) {
    const std::uint64_t b = lane(q);
    for (auto& r : rows_) {
        if ((r.x & b) && (r.z & b)) r.sign = !r.sign;
        const std::uint64_t xq = r.x & b, zq = r.z & b;
        r.x = (r.x & ~b) | zq;
        r.z = (r.z & ~b) | xq;
    }
}

void CliffordElement::prepend_s(int q) {
    const std::uint64_t b = lane(q);
    for (auto& r : rows_) {
        if ((r.x & b) && (r.z & b)) r.sign = !r.sign;
        if (r.x & b) r.z ^= b;
    }
}

void CliffordElement::prepend_cnot(int control, int target) {
    if (control == target) throw std::invalid_argument("CNOT needs distinct qubits");
    for (auto& r : rows_) {
        const int xa = static_cast<int>((r.x >> control) & 1u), za = static_cast<int>((r.z >> control) & 1u);
        const int xb = static_cast<int>((r.x >> target) & 1u), zb = static_cast<int>((r.z >> target) & 1u);
        if (xa & zb & (xb ^ za ^ 1)) r.sign = !r.sign;
        if (xa) r.x ^= lane(target);
        if (zb) r.z ^= lane(control);
    }
}

void CliffordElement::prepend(const Gate& g) {
    const int k = g.arity();
    for (int i = 0; i < k; ++i) {
        if (g.targets[i] < 0 || g.targets[i] >= n_) throw std::out_of_range("Clifford gate target out of range");
    }
    switch (g.kind) {
        case quantum::GateKind::H:
            prepend_h(g.targets[0]);
            break;
        case quantum::GateKind::S:
            prepend_s(g.targets[0]);
            break;
        case quantum::GateKind::Z:
            prepend_s(g.targets[0]);
            prepend_s(g.targets[0]);
            break;
        case quantum::GateKind::X:
            prepend_h(g.targets[0]);
            prepend_s(g.targets[0]);
            prepend_s(g.targets[0]);
            prepend_h(g.targets[0]);
            break;
        case quantum::GateKind::Y:
            prepend(Gate::z(g.targets[0]));
            prepend(Gate::x(g.targets[0]));
            break;
        case quantum::GateKind::CNOT:
            prepend_cnot(g.targets[0], g.targets[1]);
            break;
        default:
            throw std::invalid_argument("gate " + g.name() + " is not a Clifford generator");
    }
}

PauliRow CliffordElement::conjugate(const PauliRow& p) const {
    // p = i^{|x&z|} (-1)^sign prod X_q^{x_q} Z_q^{z_q}, mapped factor by factor.
    PhasedPauli acc;
    acc.e = (std::popcount(p.x & p.z) + (p.sign ? 2 : 0)) & 3;
    for (int q = 0; q < n_; ++q) {
        if ((p.x >> q) & 1u) acc *= to_phased(destabilizer(q));
        if ((p.z >> q) & 1u) acc *= to_phased(stabilizer(q));
    }
    return from_phased(acc);
}

bool CliffordElement::is_symplectic() const {
    for (int i = 0; i < n_; ++i) {
        for (int j = 0; j < n_; ++j) {
            if (symplectic_product(destabilizer(i), destabilizer(j)) != 0) return false;
            if (symplectic_product(stabilizer(i), stabilizer(j)) != 0) return false;
            if (symplectic_product(destabilizer(i), stabilizer(j)) != (i == j ? 1 : 0)) return false;
        }
    }
    return true;
}

CliffordElement compose(const CliffordElement& first, const CliffordElement& second) {
    if (first.qubits() != second.qubits()) throw std::invalid_argument("compose: qubit count mismatch");
    std::vector<PauliRow> rows;
    rows.reserve(first.rows().size());
    for (const auto& r : first.rows()) rows.push_back(second.conjugate(r));
    return CliffordElement(first.qubits(), std::move(rows));
}

CliffordElement from_circuit(int n, const std::vector<Gate>& circuit) {
    CliffordElement c(n);
    for (const auto& g : circuit) c.prepend(g);
    return c;
}

// ---------------------------------------------------------------- sampling

namespace {

PauliRow random_row(int n, Rng& rng) {
    const std::uint64_t mask = (std::uint64_t{1} << n) - 1;
    const std::uint64_t bits = rng();
    return {bits & mask, (bits >> n) & mask, false};
}

// Projects u onto the symplectic complement of the pairs found so far.
PauliRow project(PauliRow u, const std::vector<PauliRow>& v, const std::vector<PauliRow>& w) {
    const PauliRow u0 = u;
    for (std::size_t j = 0; j < v.size(); ++j) {
        if (symplectic_product(u0, w[j])) {
            u.x ^= v[j].x;
            u.z ^= v[j].z;
        }
        if (symplectic_product(u0, v[j])) {
            u.x ^= w[j].x;
            u.z ^= w[j].z;
        }
    }
    return u;
}

}  // namespace

CliffordElement sample_uniform_clifford(int n, Rng& rng) {
    check_n(n);
    // Symplectic Gram-Schmidt with rejection: each pair (v_k, w_k) is uniform
    // over the admissible choices given the earlier pairs, so the resulting
    // symplectic basis is uniform. Signs are independent fair bits.
    std::vector<PauliRow> v, w;
    for (int k = 0; k < n; ++k) {
        PauliRow a;
        do {
            a = project(random_row(n, rng), v, w);
        } while (a.x == 0 && a.z == 0);
        PauliRow b;
        do {
            b = project(random_row(n, rng), v, w);
        } while (symplectic_product(a, b) != 1);
        v.push_back(a);
        w.push_back(b);
    }
    std::vector<PauliRow> rows(static_cast<std::size_t>(2 * n));
    for (int k = 0; k < n; ++k) {
        rows[static_cast<std::size_t>(k)] = v[static_cast<std::size_t>(k)];
        rows[static_cast<std::size_t>(n + k)] = w[static_cast<std::size_t>(k)];
    }
    for (auto& r : rows) r.sign = rng.bit();
    return CliffordElement(n, std::move(rows));
}

// ---------------------------------------------------------------- synthesis

std::vector<Gate> inverse_circuit(const CliffordElement& c) {
    const int n = c.qubits();
    CliffordElement t = c;
    std::vector<Gate> gates;
    auto h = [&](int q) {
        t.prepend_h(q);
        gates.push_back(Gate::h(q));
    };
    auto s = [&](int q) {
        t.prepend_s(q);
        gates.push_back(Gate::s(q));
    };
    auto cx = [&](int a, int b) {
        t.prepend_cnot(a, b);
        gates.push_back(Gate::cnot(a, b));
    };
    auto xbit = [&](const PauliRow& r, int q) { return ((r.x >> q) & 1u) != 0; };
    auto zbit = [&](const PauliRow& r, int q) { return ((r.z >> q) & 1u) != 0; };

    for (int i = 0; i < n; ++i) {
        // Destabilizer row i -> +-X_i.
        {
            const PauliRow& d = t.destabilizer(i);
            if (!xbit(d, i)) {
                if (zbit(d, i)) {
                    h(i);
                } else {
                    int j = i + 1;
                    while (j < n && !xbit(t.destabilizer(i), j)) ++j;
                    if (j == n) {
                        j = i + 1;
                        while (j < n && !zbit(t.destabilizer(i), j)) ++j;
                        if (j == n) throw std::logic_error("inverse_circuit: empty destabilizer row");
                        h(j);
                    }
                    cx(j, i);
                }
            }
            for (int j = i + 1; j < n; ++j) {
                const PauliRow& r = t.destabilizer(i);
                if (zbit(r, j)) {
                    if (xbit(r, j)) {
                        s(j);
                    } else {
                        h(j);
                    }
                }
            }
            for (int j = i + 1; j < n; ++j) {
                if (xbit(t.destabilizer(i), j)) cx(i, j);
            }
            if (zbit(t.destabilizer(i), i)) s(i);
        }
        // Stabilizer row i -> +-Z_i while keeping the destabilizer fixed.
        {
            if (xbit(t.stabilizer(i), i)) {
                h(i);
                s(i);
                h(i);
            }
            for (int j = i + 1; j < n; ++j) {
                const PauliRow& r = t.stabilizer(i);
                if (xbit(r, j)) {
                    if (zbit(r, j)) s(j);
                    h(j);
                }
            }
            for (int j = i + 1; j < n; ++j) {
                if (zbit(t.stabilizer(i), j)) cx(j, i);
            }
        }
    }
    for (int i = 0; i < n; ++i) {
        if (t.destabilizer(i).sign) {
            s(i);
            s(i);
        }
        if (t.stabilizer(i).sign) {
            h(i);
            s(i);
            s(i);
            h(i);
        }
    }
    if (!(t == CliffordElement(n))) throw std::logic_error("inverse_circuit: reduction did not reach identity");
    return gates;
}

std::vector<Gate> decompose(const CliffordElement& c) {
    const std::vector<Gate> inv = inverse_circuit(c);
    std::vector<Gate> out;
    out.reserve(inv.size() * 2);
    for (auto it = inv.rbegin(); it != inv.rend(); ++it) {
        if (it->kind == quantum::GateKind::S) {
            for (int k = 0; k < 3; ++k) out.push_back(*it);
        } else {
            out.push_back(*it);
        }
    }
    return out;
}

int cnot_count(const std::vector<Gate>& circuit) {
    return static_cast<int>(std::count_if(circuit.begin(), circuit.end(),
                                          [](const Gate& g) { return g.kind == quantum::GateKind::CNOT; }));
}

}  // namespace nsqst::clifford
