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

#include "nsqst/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nsqst::quantum {

namespace {

constexpr cplx kI{0.0, 1.0};

void check_qubits(int n) {
    if (n < 1 || n > kMaxDenseQubits) {
        throw std::invalid_argument("qubit count must be in [1, " + std::to_string(kMaxDenseQubits) +
                                    "], got " + std::to_string(n));
    }
}

void check_targets(const Gate& g, int n) {
    const int k = g.arity();
    for (int i = 0; i < k; ++i) {
        if (g.targets[i] < 0 || g.targets[i] >= n) {
            throw std::out_of_range("gate " + g.name() + ": target " + std::to_string(g.targets[i]) +
                                    " out of range for " + std::to_string(n) + " qubits");
        }
    }
    if (k == 2 && g.targets[0] == g.targets[1]) {
        throw std::invalid_argument("gate " + g.name() + ": duplicate targets");
    }
}

// Applies a 2x2 or 4x4 operator to the elements data[base + stride * i],
// i in [0, 2^n), acting on the given qubits.
void apply_local(cplx* data, std::size_t stride, int n, std::span<const int> targets, const CMatrix& m) {
    const std::size_t dim = std::size_t{1} << n;
    if (targets.size() == 1) {
        const std::size_t mask = qubit_mask(targets[0], n);
        const cplx m00 = m(0, 0), m01 = m(0, 1), m10 = m(1, 0), m11 = m(1, 1);
        for (std::size_t i = 0; i < dim; ++i) {
            if (i & mask) continue;
            cplx& a = data[stride * i];
            cplx& b = data[stride * (i | mask)];
            const cplx a0 = a, b0 = b;
            a = m00 * a0 + m01 * b0;
            b = m10 * a0 + m11 * b0;
        }
        return;
    }
    const std::size_t hi = qubit_mask(targets[0], n);
    const std::size_t lo = qubit_mask(targets[1], n);
    for (std::size_t i = 0; i < dim; ++i) {
        if (i & (hi | lo)) continue;
        const std::size_t idx[4] = {i, i | lo, i | hi, i | hi | lo};
        cplx in[4];
        for (int k = 0; k < 4; ++k) in[k] = data[stride * idx[k]];
        for (int r = 0; r < 4; ++r) {
            cplx acc = 0.0;
            for (int c = 0; c < 4; ++c) acc += m(r, c) * in[c];
            data[stride * idx[r]] = acc;
        }
    }
}

CMatrix conj(const CMatrix& m) {
    CMatrix out(m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = std::conj(m(r, c));
    return out;
}

struct PauliMasks {
    BitString flip = 0;   // X or Y
    BitString phase = 0;  // Z or Y
    int y_count = 0;
};

PauliMasks masks_of(std::string_view letters) {
    const int n = static_cast<int>(letters.size());
    PauliMasks m;
    for (int q = 0; q < n; ++q) {
        const BitString bit = qubit_mask(q, n);
        switch (letters[static_cast<std::size_t>(q)]) {
            case 'I':
                break;
            case 'X':
                m.flip |= bit;
                break;
            case 'Y':
                m.flip |= bit;
                m.phase |= bit;
                ++m.y_count;
                break;
            case 'Z':
                m.phase |= bit;
                break;
            default:
                throw std::invalid_argument("invalid Pauli letter in '" + std::string(letters) + "'");
        }
    }
    return m;
}

cplx i_power(int k) {
    static constexpr cplx table[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    return table[((k % 4) + 4) % 4];
}

std::vector<int> all_targets(const Gate& g) {
    return g.arity() == 1 ? std::vector<int>{g.targets[0]} : std::vector<int>{g.targets[0], g.targets[1]};
}

}  // namespace

// ---------------------------------------------------------------- CMatrix

CMatrix::CMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw std::invalid_argument("CMatrix: data size does not match shape");
    }
}

CMatrix CMatrix::identity(std::size_t dim) {
    CMatrix m(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
}

CMatrix CMatrix::adjoint() const {
    CMatrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) out(c, r) = std::conj((*this)(r, c));
    return out;
}

CMatrix CMatrix::operator*(const CMatrix& rhs) const {
    if (cols_ != rhs.rows_) {
        throw std::invalid_argument("CMatrix: shape mismatch in product");
    }
    CMatrix out(rows_, rhs.cols_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t k = 0; k < cols_; ++k) {
            const cplx a = (*this)(r, k);
            if (a == cplx{}) continue;
            for (std::size_t c = 0; c < rhs.cols_; ++c) out(r, c) += a * rhs(k, c);
        }
    return out;
}

CMatrix CMatrix::operator*(cplx scale) const {
    CMatrix out = *this;
    for (auto& v : out.data_) v *= scale;
    return out;
}

CMatrix CMatrix::kron(const CMatrix& rhs) const {
    CMatrix out(rows_ * rhs.rows_, cols_ * rhs.cols_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c)
            for (std::size_t r2 = 0; r2 < rhs.rows_; ++r2)
                for (std::size_t c2 = 0; c2 < rhs.cols_; ++c2)
                    out(r * rhs.rows_ + r2, c * rhs.cols_ + c2) = (*this)(r, c) * rhs(r2, c2);
    return out;
}

double CMatrix::distance(const CMatrix& rhs) const {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_) {
        throw std::invalid_argument("CMatrix: shape mismatch in distance");
    }
    double d = 0.0;
    for (std::size_t i = 0; i < data_.size(); ++i) d = std::max(d, std::abs(data_[i] - rhs.data_[i]));
    return d;
}

bool CMatrix::is_unitary(double tol) const {
    if (rows_ != cols_) return false;
    return (adjoint() * *this).distance(identity(rows_)) <= tol;
}

// ---------------------------------------------------------------- Gate

Gate Gate::sdg(int q) { return unitary(q, CMatrix(2, 2, {1.0, 0.0, 0.0, -kI})); }

Gate Gate::unitary(int q, CMatrix u) {
    if (u.rows() != 2 || !u.is_unitary(1e-12)) {
        throw std::invalid_argument("Gate::unitary: expected a 2x2 unitary");
    }
    return {GateKind::Unitary1, {q, q}, 0.0, std::move(u)};
}

Gate Gate::unitary(int a, int b, CMatrix u) {
    if (u.rows() != 4 || !u.is_unitary(1e-12)) {
        throw std::invalid_argument("Gate::unitary: expected a 4x4 unitary");
    }
    return {GateKind::Unitary2, {a, b}, 0.0, std::move(u)};
}

int Gate::arity() const {
    switch (kind) {
        case GateKind::CNOT:
        case GateKind::RZZ:
        case GateKind::Unitary2:
            return 2;
        default:
            return 1;
    }
}

CMatrix Gate::unitary_matrix() const {
    const double r = 1.0 / std::numbers::sqrt2;
    const double c = std::cos(angle / 2), s = std::sin(angle / 2);
    switch (kind) {
        case GateKind::H:
            return CMatrix(2, 2, {r, r, r, -r});
        case GateKind::S:
            return CMatrix(2, 2, {1.0, 0.0, 0.0, kI});
        case GateKind::X:
            return CMatrix(2, 2, {0.0, 1.0, 1.0, 0.0});
        case GateKind::Y:
            return CMatrix(2, 2, {0.0, -kI, kI, 0.0});
        case GateKind::Z:
            return CMatrix(2, 2, {1.0, 0.0, 0.0, -1.0});
        case GateKind::RX:
            return CMatrix(2, 2, {c, -kI * s, -kI * s, c});
        case GateKind::RY:
            return CMatrix(2, 2, {c, -s, s, c});
        case GateKind::RZ:
            return CMatrix(2, 2, {std::polar(1.0, -angle / 2), 0.0, 0.0, std::polar(1.0, angle / 2)});
        case GateKind::CNOT: {
            CMatrix m(4, 4);
            m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1.0;
            return m;
        }
        case GateKind::RZZ: {
            CMatrix m(4, 4);
            const cplx even = std::polar(1.0, -angle / 2), odd = std::polar(1.0, angle / 2);
            m(0, 0) = even;
            m(1, 1) = odd;
            m(2, 2) = odd;
            m(3, 3) = even;
            return m;
        }
        case GateKind::Unitary1:
        case GateKind::Unitary2:
            return matrix;
    }
    throw std::logic_error("unreachable gate kind");
}

std::string Gate::name() const {
    switch (kind) {
        case GateKind::H: return "H";
        case GateKind::S: return "S";
        case GateKind::X: return "X";
        case GateKind::Y: return "Y";
        case GateKind::Z: return "Z";
        case GateKind::CNOT: return "CNOT";
        case GateKind::RX: return "RX";
        case GateKind::RY: return "RY";
        case GateKind::RZ: return "RZ";
        case GateKind::RZZ: return "RZZ";
        case GateKind::Unitary1: return "U1";
        case GateKind::Unitary2: return "U2";
    }
    return "?";
}

// ---------------------------------------------------------------- StateVector

StateVector::StateVector(int n) : n_(n) {
    check_qubits(n);
    amps_.assign(std::size_t{1} << n, cplx{});
    amps_[0] = 1.0;
}

StateVector::StateVector(int n, std::vector<cplx> amplitudes) : n_(n), amps_(std::move(amplitudes)) {
    check_qubits(n);
    if (amps_.size() != (std::size_t{1} << n)) {
        throw std::invalid_argument("StateVector: expected 2^n amplitudes");
    }
    if (std::abs(norm_squared() - 1.0) > 1e-10) {
        throw std::invalid_argument("StateVector: amplitudes are not normalized");
    }
}

StateVector StateVector::basis_state(int n, BitString s) {
    StateVector psi(n);
    if (s >= psi.dimension()) {
        throw std::out_of_range("basis_state: bit string out of range");
    }
    psi.amps_[0] = 0.0;
    psi.amps_[s] = 1.0;
    return psi;
}

double StateVector::norm_squared() const {
    double acc = 0.0;
    for (const auto& a : amps_) acc += std::norm(a);
    return acc;
}

void StateVector::apply(const Gate& g) {
    check_targets(g, n_);
    const auto targets = all_targets(g);
    if (g.kind == GateKind::CNOT) {
        const BitString c = qubit_mask(g.targets[0], n_), t = qubit_mask(g.targets[1], n_);
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            if ((i & c) && !(i & t)) std::swap(amps_[i], amps_[i | t]);
        }
        return;
    }
    apply_local(amps_.data(), 1, n_, targets, g.unitary_matrix());
}

void StateVector::apply(std::span<const Gate> circuit) {
    for (const auto& g : circuit) apply(g);
}

void StateVector::apply_pauli_rotation(std::string_view letters, double angle) {
    if (static_cast<int>(letters.size()) != n_) {
        throw std::invalid_argument("apply_pauli_rotation: word length does not match qubit count");
    }
    const PauliMasks m = masks_of(letters);
    const double c = std::cos(angle), s = std::sin(angle);
    if (m.flip == 0) {
        // Diagonal word: exp(-i angle (+-1)).
        const cplx plus = std::polar(1.0, -angle), minus = std::polar(1.0, angle);
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            amps_[i] *= parity(i & m.phase) ? minus : plus;
        }
        return;
    }
    // P|i> = i^y (-1)^{|i & phase|} |i ^ flip>; pair each i with its image.
    const cplx base = i_power(m.y_count);
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        const std::size_t j = i ^ m.flip;
        if (j < i) continue;
        const cplx pij = base * (parity(j & m.phase) ? -1.0 : 1.0);  // <i|P|j>
        const cplx pji = base * (parity(i & m.phase) ? -1.0 : 1.0);  // <j|P|i>
        const cplx ai = amps_[i], aj = amps_[j];
        amps_[i] = c * ai - kI * s * pij * aj;
        amps_[j] = c * aj - kI * s * pji * ai;
    }
}

// ---------------------------------------------------------------- DensityMatrix

DensityMatrix::DensityMatrix(int n) : n_(n) {
    check_qubits(n);
    dim_ = std::size_t{1} << n;
    rho_.assign(dim_ * dim_, cplx{});
    rho_[0] = 1.0;
}

DensityMatrix DensityMatrix::from_state(const StateVector& psi) {
    DensityMatrix dm(psi.qubits());
    const auto a = psi.amplitudes();
    for (std::size_t r = 0; r < dm.dim_; ++r)
        for (std::size_t c = 0; c < dm.dim_; ++c) dm.rho_[r * dm.dim_ + c] = a[r] * std::conj(a[c]);
    return dm;
}

DensityMatrix::DensityMatrix(int n, std::vector<cplx> entries) : n_(n), rho_(std::move(entries)) {
    check_qubits(n);
    dim_ = std::size_t{1} << n;
    if (rho_.size() != dim_ * dim_) {
        throw std::invalid_argument("DensityMatrix: expected 4^n entries");
    }
    if (hermiticity_error() > 1e-10) {
        throw std::invalid_argument("DensityMatrix: not Hermitian");
    }
    if (std::abs(trace() - 1.0) > 1e-10) {
        throw std::invalid_argument("DensityMatrix: trace is not 1");
    }
    for (double d : diagonal()) {
        if (d < -1e-9) throw std::invalid_argument("DensityMatrix: negative diagonal entry");
    }
}

cplx DensityMatrix::trace() const {
    cplx t = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) t += rho_[i * dim_ + i];
    return t;
}

double DensityMatrix::hermiticity_error() const {
    double e = 0.0;
    for (std::size_t r = 0; r < dim_; ++r)
        for (std::size_t c = r; c < dim_; ++c)
            e = std::max(e, std::abs(rho_[r * dim_ + c] - std::conj(rho_[c * dim_ + r])));
    return e;
}

std::vector<double> DensityMatrix::diagonal() const {
    std::vector<double> d(dim_);
    for (std::size_t i = 0; i < dim_; ++i) d[i] = rho_[i * dim_ + i].real();
    return d;
}

void DensityMatrix::apply(const Gate& g) {
    check_targets(g, n_);
    const auto targets = all_targets(g);
    const CMatrix u = g.unitary_matrix();
    const CMatrix uc = conj(u);
    for (std::size_t c = 0; c < dim_; ++c) apply_local(rho_.data() + c, dim_, n_, targets, u);
    for (std::size_t r = 0; r < dim_; ++r) apply_local(rho_.data() + r * dim_, 1, n_, targets, uc);
}

void DensityMatrix::apply(std::span<const Gate> circuit) {
    for (const auto& g : circuit) apply(g);
}

void DensityMatrix::depolarize(double f, std::span<const int> targets) {
    BitString tmask = 0;
    for (int t : targets) {
        if (t < 0 || t >= n_) throw std::out_of_range("depolarize: target out of range");
        tmask |= qubit_mask(t, n_);
    }
    const std::size_t k = targets.size();
    const double mix = (1.0 - f) / static_cast<double>(std::size_t{1} << k);
    // Enumerate the 2^k assignments of the target bits.
    std::vector<BitString> subsets;
    for (BitString sub = tmask;; sub = (sub - 1) & tmask) {
        subsets.push_back(sub);
        if (sub == 0) break;
    }
    std::vector<cplx> out(rho_.size());
    for (std::size_t r = 0; r < dim_; ++r) {
        for (std::size_t c = 0; c < dim_; ++c) {
            cplx v = f * rho_[r * dim_ + c];
            if ((r & tmask) == (c & tmask)) {
                cplx tr = 0.0;
                const std::size_t rb = r & ~tmask, cb = c & ~tmask;
                for (BitString sub : subsets) tr += rho_[(rb | sub) * dim_ + (cb | sub)];
                v += mix * tr;
            }
            out[r * dim_ + c] = v;
        }
    }
    rho_ = std::move(out);
}

// ---------------------------------------------------------------- KrausChannel

double KrausChannel::trace_preservation_error() const {
    const std::size_t dim = std::size_t{1} << arity;
    CMatrix sum(dim, dim);
    for (const auto& k : operators) {
        if (k.rows() != dim || k.cols() != dim) {
            throw std::invalid_argument("KrausChannel: operator dimension does not match arity");
        }
        const CMatrix kk = k.adjoint() * k;
        for (std::size_t r = 0; r < dim; ++r)
            for (std::size_t c = 0; c < dim; ++c) sum(r, c) += kk(r, c);
    }
    return sum.distance(CMatrix::identity(dim));
}

void KrausChannel::validate(double tol) const {
    if (operators.empty()) throw std::invalid_argument("KrausChannel: no operators");
    if (trace_preservation_error() > tol) {
        throw std::invalid_argument("KrausChannel: not trace preserving");
    }
}

KrausChannel KrausChannel::identity(int arity) {
    return {{CMatrix::identity(std::size_t{1} << arity)}, arity};
}

KrausChannel KrausChannel::amplitude_damping(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("amplitude_damping: p must be in [0,1]");
    return {{CMatrix(2, 2, {1.0, 0.0, 0.0, std::sqrt(p)}), CMatrix(2, 2, {0.0, std::sqrt(1.0 - p), 0.0, 0.0})},
            1};
}

KrausChannel KrausChannel::depolarizing(int arity, double f) {
    if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument("depolarizing: f must be in [0,1]");
    if (arity < 1 || arity > 4) throw std::invalid_argument("depolarizing: arity must be in [1,4]");
    const CMatrix paulis[4] = {CMatrix::identity(2), Gate::x(0).unitary_matrix(), Gate::y(0).unitary_matrix(),
                               Gate::z(0).unitary_matrix()};
    const std::size_t count = std::size_t{1} << (2 * arity);
    const double d2 = static_cast<double>(count);
    KrausChannel ch{{}, arity};
    for (std::size_t word = 0; word < count; ++word) {
        CMatrix op = CMatrix::identity(1);
        for (int q = 0; q < arity; ++q) op = op.kron(paulis[(word >> (2 * (arity - 1 - q))) & 3u]);
        const double weight = word == 0 ? f + (1.0 - f) / d2 : (1.0 - f) / d2;
        if (weight > 0.0) ch.operators.push_back(op * cplx(std::sqrt(weight)));
    }
    return ch;
}

KrausChannel KrausChannel::tensor_power(const KrausChannel& ch, int copies) {
    if (copies < 1) throw std::invalid_argument("tensor_power: copies must be positive");
    KrausChannel out{{CMatrix::identity(1)}, 0};
    for (int c = 0; c < copies; ++c) {
        std::vector<CMatrix> next;
        for (const auto& a : out.operators)
            for (const auto& b : ch.operators) next.push_back(a.kron(b));
        out.operators = std::move(next);
        out.arity += ch.arity;
    }
    return out;
}

// ---------------------------------------------------------------- Pauli types

PauliString::PauliString(double c, std::string word) : coefficient(c), letters(std::move(word)) {
    if (letters.empty()) throw std::invalid_argument("PauliString: empty word");
    if (!std::isfinite(coefficient)) throw std::invalid_argument("PauliString: non-finite coefficient");
    masks_of(letters);
}

bool PauliString::is_identity() const {
    return std::all_of(letters.begin(), letters.end(), [](char c) { return c == 'I'; });
}

PauliBasis::PauliBasis(std::string word) : letters(std::move(word)) {
    if (letters.empty()) throw std::invalid_argument("PauliBasis: empty word");
    for (char c : letters) {
        if (c != 'X' && c != 'Y' && c != 'Z') throw std::invalid_argument("PauliBasis: letters must be X, Y or Z");
    }
}

int PauliBasis::non_z_count() const {
    return static_cast<int>(std::count_if(letters.begin(), letters.end(), [](char c) { return c != 'Z'; }));
}

// ---------------------------------------------------------------- operations

StateVector apply_gate(StateVector state, const Gate& g) {
    state.apply(g);
    return state;
}

DensityMatrix apply_kraus(const DensityMatrix& dm, const KrausChannel& ch, std::span<const int> targets) {
    if (static_cast<int>(targets.size()) != ch.arity) {
        throw std::invalid_argument("apply_kraus: channel arity " + std::to_string(ch.arity) + " does not match " +
                                    std::to_string(targets.size()) + " targets");
    }
    if (ch.arity > 2) {
        if (ch.arity != dm.qubits()) {
            throw std::invalid_argument("apply_kraus: channels on more than 2 qubits must act on all qubits");
        }
        for (int i = 0; i < ch.arity; ++i) {
            if (targets[static_cast<std::size_t>(i)] != i) {
                throw std::invalid_argument("apply_kraus: full-register channels take targets 0..n-1 in order");
            }
        }
    }
    const int n = dm.qubits();
    const std::size_t dim = dm.dimension();
    for (int t : targets) {
        if (t < 0 || t >= n) throw std::out_of_range("apply_kraus: target out of range");
    }
    std::vector<cplx> out(dim * dim);
    for (const auto& k : ch.operators) {
        std::vector<cplx> work(dm.entries().begin(), dm.entries().end());
        if (ch.arity > 2) {
            const CMatrix rho(dim, dim, work);
            const CMatrix res = k * rho * k.adjoint();
            for (std::size_t i = 0; i < out.size(); ++i) out[i] += res.data()[i];
            continue;
        }
        const CMatrix kc = conj(k);
        for (std::size_t c = 0; c < dim; ++c) apply_local(work.data() + c, dim, n, targets, k);
        for (std::size_t r = 0; r < dim; ++r) apply_local(work.data() + r * dim, 1, n, targets, kc);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += work[i];
    }
    DensityMatrix result(n);
    result.mutable_entries() = std::move(out);
    return result;
}

DensityMatrix apply_kraus_all(const DensityMatrix& dm, const KrausChannel& single) {
    if (single.arity != 1) throw std::invalid_argument("apply_kraus_all: expected a 1-qubit channel");
    DensityMatrix out = dm;
    for (int q = 0; q < dm.qubits(); ++q) {
        const int t[1] = {q};
        out = apply_kraus(out, single, t);
    }
    return out;
}

namespace {

BitString sample_index(std::span<const double> probs, Rng& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return i;
    }
    // Rounding left u above the total; return the last nonzero outcome.
    for (std::size_t i = probs.size(); i-- > 0;) {
        if (probs[i] > 0.0) return i;
    }
    return 0;
}

}  // namespace

std::vector<double> probabilities(const StateVector& state) {
    std::vector<double> p(state.dimension());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(state[i]);
    return p;
}

BitString measure_all(const StateVector& state, Rng& rng) {
    const auto p = probabilities(state);
    return sample_index(p, rng);
}

BitString measure_all(const DensityMatrix& dm, Rng& rng) {
    auto p = dm.diagonal();
    for (auto& v : p) v = std::max(v, 0.0);
    return sample_index(p, rng);
}

StateVector rotate_to_basis(StateVector state, const PauliBasis& basis) {
    if (basis.qubits() != state.qubits()) {
        throw std::invalid_argument("rotate_to_basis: basis length does not match qubit count");
    }
    for (int q = 0; q < state.qubits(); ++q) {
        switch (basis.letters[static_cast<std::size_t>(q)]) {
            case 'X':
                state.apply(Gate::h(q));
                break;
            case 'Y':
                state.apply(Gate::sdg(q));
                state.apply(Gate::h(q));
                break;
            default:
                break;
        }
    }
    return state;
}

StateVector apply_pauli(const StateVector& state, std::string_view letters) {
    if (static_cast<int>(letters.size()) != state.qubits()) {
        throw std::invalid_argument("apply_pauli: word length does not match qubit count");
    }
    const PauliMasks m = masks_of(letters);
    const cplx base = i_power(m.y_count);
    std::vector<cplx> out(state.dimension());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i ^ m.flip] = base * (parity(i & m.phase) ? -1.0 : 1.0) * state[i];
    }
    StateVector result(state.qubits());
    result.mutable_amplitudes() = std::move(out);
    return result;
}

double expectation(const StateVector& state, const PauliString& p) {
    if (p.qubits() != state.qubits()) {
        throw std::invalid_argument("expectation: word length does not match qubit count");
    }
    const PauliMasks m = masks_of(p.letters);
    const cplx base = i_power(m.y_count);
    cplx acc = 0.0;
    for (std::size_t i = 0; i < state.dimension(); ++i) {
        const cplx image = base * (parity(i & m.phase) ? -1.0 : 1.0) * state[i];
        acc += std::conj(state[i ^ m.flip]) * image;
    }
    if (std::abs(acc.imag()) > 1e-8) {
        throw std::logic_error("expectation: imaginary part " + std::to_string(acc.imag()) + " exceeds 1e-8");
    }
    return p.coefficient * acc.real();
}

double expectation(const StateVector& state, std::span<const PauliString> terms) {
    double acc = 0.0;
    for (const auto& t : terms) acc += expectation(state, t);
    return acc;
}

cplx inner_product(const StateVector& a, const StateVector& b) {
    if (a.dimension() != b.dimension()) throw std::invalid_argument("inner_product: dimension mismatch");
    cplx acc = 0.0;
    for (std::size_t i = 0; i < a.dimension(); ++i) acc += std::conj(a[i]) * b[i];
    return acc;
}

double fidelity(const StateVector& a, const StateVector& b) { return std::norm(inner_product(a, b)); }

StateVector random_state(int n, Rng& rng) {
    check_qubits(n);
    std::vector<cplx> amps(std::size_t{1} << n);
    double norm = 0.0;
    for (auto& a : amps) {
        a = {rng.normal(), rng.normal()};
        norm += std::norm(a);
    }
    for (auto& a : amps) a /= std::sqrt(norm);
    return StateVector(n, std::move(amps));
}

}  // namespace nsqst::quantum
