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

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "nsqst/clifford.hpp"

namespace nsqst::clifford {

// CH form after Bravyi, Browne, Calpin, Campbell, Gosset and Howard:
// U_C^-1 Z_p U_C = prod_j Z_j^{G(p,j)},
// U_C^-1 X_p U_C = i^{gamma_p} prod_j X_j^{F(p,j)} Z_j^{M(p,j)}.

StabilizerState::StabilizerState(int n, BitString b) : n_(n) {
    if (n < 1 || n > kMaxDenseQubits) throw std::invalid_argument("StabilizerState: qubit count out of range");
    if (b >> n) throw std::invalid_argument("StabilizerState: basis string out of range");
    f_.assign(static_cast<std::size_t>(n), 0);
    g_.assign(static_cast<std::size_t>(n), 0);
    m_.assign(static_cast<std::size_t>(n), 0);
    for (int q = 0; q < n; ++q) {
        f_[static_cast<std::size_t>(q)] = std::uint64_t{1} << q;
        g_[static_cast<std::size_t>(q)] = std::uint64_t{1} << q;
    }
    s_ = reverse_bits(b, n);
}

void StabilizerState::right_s(int q) {
    const std::uint64_t fq = f_[static_cast<std::size_t>(q)];
    m_[static_cast<std::size_t>(q)] ^= fq;
    gamma2_ ^= fq ^ (gamma1_ & fq);
    gamma1_ ^= fq;
}

void StabilizerState::right_cx(int q, int r) {
    g_[static_cast<std::size_t>(q)] ^= g_[static_cast<std::size_t>(r)];
    f_[static_cast<std::size_t>(r)] ^= f_[static_cast<std::size_t>(q)];
    m_[static_cast<std::size_t>(q)] ^= m_[static_cast<std::size_t>(r)];
}

void StabilizerState::right_cz(int q, int r) {
    m_[static_cast<std::size_t>(q)] ^= f_[static_cast<std::size_t>(r)];
    m_[static_cast<std::size_t>(r)] ^= f_[static_cast<std::size_t>(q)];
    gamma2_ ^= f_[static_cast<std::size_t>(q)] & f_[static_cast<std::size_t>(r)];
}

void StabilizerState::apply_s(int q) {
    const std::uint64_t bq = std::uint64_t{1} << q;
    for (int p = 0; p < n_; ++p) {
        if (g_[static_cast<std::size_t>(p)] & bq) m_[static_cast<std::size_t>(p)] ^= bq;
    }
    gamma1_ ^= bq;
    gamma2_ ^= gamma1_ & bq;
    rows_stale_ = true;
}

void StabilizerState::apply_cnot(int q, int r) {
    if (q == r) throw std::invalid_argument("StabilizerState: CNOT needs distinct qubits");
    const std::uint64_t bq = std::uint64_t{1} << q, br = std::uint64_t{1} << r;
    int b = 0;
    for (int p = 0; p < n_; ++p) {
        auto& gp = g_[static_cast<std::size_t>(p)];
        auto& fp = f_[static_cast<std::size_t>(p)];
        auto& mp = m_[static_cast<std::size_t>(p)];
        b ^= bit(mp, q) & bit(fp, r);
        if (gp & bq) gp ^= br;
        if (fp & br) fp ^= bq;
        if (mp & br) mp ^= bq;
    }
    if (b) gamma2_ ^= bq;
    const bool carry = (gamma1_ & bq) && (gamma1_ & br);
    if (gamma1_ & br) gamma1_ ^= bq;
    if (gamma2_ & br) gamma2_ ^= bq;
    if (carry) gamma2_ ^= bq;
    rows_stale_ = true;
}

void StabilizerState::update_s_vector(std::uint64_t t, std::uint64_t u, unsigned b) {
    if (t == u) {
        s_ = t;
        switch (b) {
            case 0:
                omega_.p += 1;
                return;
            case 1:
                omega_.e = (omega_.e + 1) % 8;
                return;
            case 2:
                omega_.zero = true;
                return;
            case 3:
                omega_.e = (omega_.e + 7) % 8;
                return;
            default:
                throw std::logic_error("update_s_vector: invalid phase " + std::to_string(b));
        }
    }
    const std::uint64_t ut = u ^ t;
    std::uint64_t nu0 = ~v_ & ut;
    std::uint64_t nu1 = v_ & ut;
    b %= 4;
    int q = 0;
    if (nu0) {
        q = std::countr_zero(nu0);
        nu0 ^= std::uint64_t{1} << q;
        for (int q1 = q + 1; q1 < n_; ++q1) {
            if (bit(nu0, q1)) right_cx(q, q1);
        }
        for (int q1 = 0; q1 < n_; ++q1) {
            if (bit(nu1, q1)) right_cz(q, q1);
        }
    } else {
        q = std::countr_zero(nu1);
        nu1 ^= std::uint64_t{1} << q;
        for (int q1 = q + 1; q1 < n_; ++q1) {
            if (bit(nu1, q1)) right_cx(q1, q);
        }
    }
    if (bit(t, q)) {
        s_ = u;
        omega_.e = (omega_.e + 2 * static_cast<int>(b)) % 8;
        b = (4 - b) % 4;
    } else {
        s_ = t;
    }
    // H^a S^b |+> = eta^{e1} S^{e2} H^{e3} |e4>, eta = exp(i pi / 4).
    const unsigned a = static_cast<unsigned>(bit(v_, q));
    const unsigned e1 = a * (b % 2) * (3 * b - 2);
    const unsigned e2 = b % 2;
    const bool e3 = (!a) != (a && (b % 2) > 0);
    const bool e4 = ((!a) && b >= 2) != (a && (b == 1 || b == 2));
    const std::uint64_t bq = std::uint64_t{1} << q;
    s_ = e4 ? (s_ | bq) : (s_ & ~bq);
    v_ = e3 ? (v_ | bq) : (v_ & ~bq);
    omega_.e = static_cast<int>((static_cast<unsigned>(omega_.e) + e1) % 8);
    if (e2) right_s(q);
}

void StabilizerState::apply_h(int q) {
    std::uint64_t row_f = 0, row_g = 0, row_m = 0;
    for (int j = 0; j < n_; ++j) {
        row_f |= static_cast<std::uint64_t>(bit(f_[static_cast<std::size_t>(j)], q)) << j;
        row_g |= static_cast<std::uint64_t>(bit(g_[static_cast<std::size_t>(j)], q)) << j;
        row_m |= static_cast<std::uint64_t>(bit(m_[static_cast<std::size_t>(j)], q)) << j;
    }
    // H commuted through U_C U_H maps |s> to
    // sqrt(1/2) [(-1)^alpha |t> + i^{gamma_q} (-1)^beta |u>].
    const std::uint64_t t = s_ ^ (row_g & v_);
    const std::uint64_t u = s_ ^ (row_f & ~v_) ^ (row_m & v_);
    const int alpha = std::popcount(row_g & ~v_ & s_);
    const int beta = std::popcount((row_m & ~v_ & s_) ^ (row_f & v_ & (row_m ^ s_)));
    if (alpha % 2) omega_.e = (omega_.e + 4) % 8;
    const unsigned phase = static_cast<unsigned>(bit(gamma1_, q) + 2 * bit(gamma2_, q));
    const unsigned b = (phase + 2u * static_cast<unsigned>(alpha) + 2u * static_cast<unsigned>(beta)) % 4;
    if (t == u) {
        s_ = t;
        if (b != 1 && b != 3) throw std::logic_error("StabilizerState::apply_h: state lost normalization");
        omega_.e = (omega_.e + (b == 1 ? 1 : 7)) % 8;
    } else {
        update_s_vector(t, u, b);
    }
    rows_stale_ = true;
}

void StabilizerState::apply(const Gate& g) {
    switch (g.kind) {
        case quantum::GateKind::H:
            apply_h(g.targets[0]);
            break;
        case quantum::GateKind::S:
            apply_s(g.targets[0]);
            break;
        case quantum::GateKind::CNOT:
            apply_cnot(g.targets[0], g.targets[1]);
            break;
        default:
            throw std::invalid_argument("StabilizerState: unsupported gate " + g.name());
    }
}

void StabilizerState::refresh_rows() const {
    f_rows_.assign(static_cast<std::size_t>(n_), 0);
    m_rows_.assign(static_cast<std::size_t>(n_), 0);
    for (int j = 0; j < n_; ++j) {
        for (int p = 0; p < n_; ++p) {
            f_rows_[static_cast<std::size_t>(p)] |= static_cast<std::uint64_t>(bit(f_[static_cast<std::size_t>(j)], p)) << j;
            m_rows_[static_cast<std::size_t>(p)] |= static_cast<std::uint64_t>(bit(m_[static_cast<std::size_t>(j)], p)) << j;
        }
    }
    rows_stale_ = false;
}

cplx StabilizerState::amplitude(BitString s) const {
    if (s >> n_) throw std::invalid_argument("StabilizerState::amplitude: basis string out of range");
    if (omega_.zero) return 0.0;
    if (rows_stale_) refresh_rows();
    const std::uint64_t x = reverse_bits(s, n_);
    // P = U_C^-1 X(x) U_C = i^e X(a) Z(c), and <x|U_C = <0|P because <0|U_C = <0|.
    std::uint64_t a = 0, c = 0;
    int e = 0;
    for (int p = 0; p < n_; ++p) {
        if (!bit(x, p)) continue;
        const std::uint64_t fa = f_rows_[static_cast<std::size_t>(p)];
        const std::uint64_t mc = m_rows_[static_cast<std::size_t>(p)];
        e += bit(gamma1_, p) + 2 * bit(gamma2_, p) + 2 * parity(c & fa);
        a ^= fa;
        c ^= mc;
    }
    // <0|X(a)Z(c) = (-1)^{a.c} <a|, then <a|U_H|s>.
    if ((a ^ s_) & ~v_) return 0.0;
    int sign = parity(a & c) ^ parity(a & s_ & v_);
    const int eta = (2 * e + 4 * sign + omega_.e) % 8;
    const double mag = std::pow(2.0, 0.5 * (omega_.p - std::popcount(v_)));
    return std::polar(mag, std::numbers::pi * eta / 4.0);
}

StabilizerState stabilizer_state(const CliffordElement& c, BitString b) {
    StabilizerState st(c.qubits(), b);
    for (const auto& g : inverse_circuit(c)) st.apply(g);
    return st;
}

cplx amplitude(const CliffordElement& c, BitString b, BitString s) { return stabilizer_state(c, b).amplitude(s); }

}  // namespace nsqst::clifford
