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

#include "nsqst/shadows.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "nsqst/binary_io.hpp"
#include "nsqst/parallel.hpp"

namespace nsqst::shadows {

namespace {

using quantum::cplx;
using quantum::DensityMatrix;

constexpr std::uint32_t kShadowFormatVersion = 1;

double pow2(int n) { return std::ldexp(1.0, n); }

BitString sample_from(std::span<const double> probs, Rng& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return i;
    }
    for (std::size_t i = probs.size(); i-- > 0;) {
        if (probs[i] > 0.0) return i;
    }
    return 0;
}

std::vector<double> clipped_diagonal(const DensityMatrix& dm) {
    auto d = dm.diagonal();
    for (auto& v : d) v = std::max(v, 0.0);
    return d;
}

}  // namespace

// ---------------------------------------------------------------- noise

void NoiseModel::validate(int n) const {
    switch (kind) {
        case Kind::None:
            return;
        case Kind::AmplitudeDamping:
            if (!(parameter >= 0.0 && parameter <= 1.0)) {
                throw std::invalid_argument("amplitude damping p must be in [0, 1], got " + std::to_string(parameter));
            }
            return;
        case Kind::CnotDepolarizing:
            if (!(parameter >= 0.0 && parameter <= 1.0)) {
                throw std::invalid_argument("CNOT depolarizing f must be in [0, 1], got " + std::to_string(parameter));
            }
            return;
        case Kind::Custom:
            custom.validate();
            if (custom.arity != 1 && custom.arity != n) {
                throw std::invalid_argument("custom channel arity must be 1 or n");
            }
            return;
    }
    throw std::invalid_argument("unknown noise kind");
}

std::string NoiseModel::describe() const {
    switch (kind) {
        case Kind::None:
            return "none";
        case Kind::AmplitudeDamping:
            return "amplitude_damping(p=" + std::to_string(parameter) + ")";
        case Kind::CnotDepolarizing:
            return "cnot_depolarizing(f=" + std::to_string(parameter) + ")";
        case Kind::Custom:
            return "custom(arity=" + std::to_string(custom.arity) + ", kraus=" + std::to_string(custom.operators.size()) +
                   ")";
    }
    return "?";
}

KrausChannel NoiseModel::channel(int n) const {
    switch (kind) {
        case Kind::None:
            return KrausChannel::identity(1);
        case Kind::AmplitudeDamping:
            return KrausChannel::amplitude_damping(parameter);
        case Kind::Custom:
            return custom;
        case Kind::CnotDepolarizing:
            break;
    }
    (void)n;
    throw std::invalid_argument("the CNOT-depolarizing model is not a pre-measurement channel");
}

// ---------------------------------------------------------------- collection

std::vector<double> outcome_distribution(const StateVector& target, const CliffordElement& u,
                                         const NoiseModel& noise) {
    const int n = target.qubits();
    if (u.qubits() != n) throw std::invalid_argument("outcome_distribution: Clifford size does not match target");
    const auto circuit = clifford::decompose(u);
    switch (noise.kind) {
        case NoiseModel::Kind::None: {
            StateVector psi = target;
            psi.apply(circuit);
            return quantum::probabilities(psi);
        }
        case NoiseModel::Kind::AmplitudeDamping: {
            // AD acts on populations independently of coherences: each
            // excited qubit relaxes with probability 1 - p.
            StateVector psi = target;
            psi.apply(circuit);
            auto probs = quantum::probabilities(psi);
            const double decay = 1.0 - noise.parameter;
            for (int q = 0; q < n; ++q) {
                const BitString m = qubit_mask(q, n);
                for (std::size_t s = 0; s < probs.size(); ++s) {
                    if (!(s & m)) continue;
                    const double moved = decay * probs[s];
                    probs[s] -= moved;
                    probs[s ^ m] += moved;
                }
            }
            return probs;
        }
        case NoiseModel::Kind::CnotDepolarizing: {
            DensityMatrix dm = DensityMatrix::from_state(target);
            for (const auto& g : circuit) {
                dm.apply(g);
                if (g.kind == quantum::GateKind::CNOT) {
                    const int t[2] = {g.targets[0], g.targets[1]};
                    dm.depolarize(noise.parameter, t);
                }
            }
            return clipped_diagonal(dm);
        }
        case NoiseModel::Kind::Custom: {
            StateVector psi = target;
            psi.apply(circuit);
            DensityMatrix dm = DensityMatrix::from_state(psi);
            if (noise.custom.arity == 1) {
                dm = quantum::apply_kraus_all(dm, noise.custom);
            } else {
                std::vector<int> all(static_cast<std::size_t>(n));
                std::iota(all.begin(), all.end(), 0);
                dm = quantum::apply_kraus(dm, noise.custom, all);
            }
            return clipped_diagonal(dm);
        }
    }
    throw std::invalid_argument("unknown noise kind");
}

ShadowSet collect_shadows(const StateVector& target, std::size_t count, const NoiseModel& noise,
                          std::uint64_t seed, std::span<const CliffordElement> fixed) {
    if (count < 1) throw std::invalid_argument("collect_shadows: need at least one shadow");
    const int n = target.qubits();
    noise.validate(n);
    for (const auto& c : fixed) {
        if (c.qubits() != n) throw std::invalid_argument("collect_shadows: fixed Clifford has wrong size");
    }
    ShadowSet set{n, std::vector<ClassicalShadow>(count), noise, seed};
    parallel_for(count, [&](std::size_t i) {
        ClassicalShadow& sh = set.shadows[i];
        if (fixed.empty()) {
            Rng crng = substream(seed, "clifford", i);
            sh.clifford = clifford::sample_uniform_clifford(n, crng);
        } else {
            sh.clifford = fixed[i % fixed.size()];
        }
        Rng mrng = substream(seed, "measurement", i);
        const auto probs = outcome_distribution(target, sh.clifford, noise);
        sh.outcome = sample_from(probs, mrng);
    });
    return set;
}

// ---------------------------------------------------------------- f(E)

double fid_of_channel(const KrausChannel& ch, int n) {
    ch.validate();
    if (ch.arity != 1 && ch.arity != n) throw std::invalid_argument("fid_of_channel: channel arity must be 1 or n");
    std::vector<int> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);
    double total = 0.0;
    const std::size_t dim = std::size_t{1} << n;
    for (BitString s = 0; s < dim; ++s) {
        const DensityMatrix in = DensityMatrix::from_state(StateVector::basis_state(n, s));
        const DensityMatrix out = ch.arity == 1 && n > 1 ? quantum::apply_kraus_all(in, ch)
                                                          : quantum::apply_kraus(in, ch, all);
        total += out(s, s).real();
    }
    return total;
}

double f_of_channel(const KrausChannel& ch, int n) {
    return (fid_of_channel(ch, n) - 1.0) / (pow2(2 * n) - 1.0);
}

double f_amplitude_damping(int n, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("f_amplitude_damping: p must be in [0, 1]");
    return (std::pow(1.0 + p, n) - 1.0) / (pow2(2 * n) - 1.0);
}

double f_noiseless(int n) { return 1.0 / (pow2(n) + 1.0); }

double f_analytic(const NoiseModel& noise, int n) {
    switch (noise.kind) {
        case NoiseModel::Kind::None:
        case NoiseModel::Kind::CnotDepolarizing:
            return f_noiseless(n);
        case NoiseModel::Kind::AmplitudeDamping:
            return f_amplitude_damping(n, noise.parameter);
        case NoiseModel::Kind::Custom:
            return f_of_channel(noise.custom, n);
    }
    throw std::invalid_argument("unknown noise kind");
}

// ---------------------------------------------------------------- estimators

StateVector shadow_state(const ClassicalShadow& shadow, int n) {
    const auto st = clifford::stabilizer_state(shadow.clifford, shadow.outcome);
    std::vector<cplx> amps(std::size_t{1} << n);
    for (BitString s = 0; s < amps.size(); ++s) amps[s] = st.amplitude(s);
    return StateVector(n, std::move(amps));
}

quantum::CMatrix snapshot_matrix(const ClassicalShadow& shadow, int n, double f) {
    if (f == 0.0) throw std::invalid_argument("snapshot_matrix: f must be nonzero");
    const StateVector phi = shadow_state(shadow, n);
    const std::size_t dim = phi.dimension();
    quantum::CMatrix m(dim, dim);
    for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c) m(r, c) = phi[r] * std::conj(phi[c]) / f;
    const double shift = (1.0 - 1.0 / f) / static_cast<double>(dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) += shift;
    return m;
}

std::vector<double> fidelity_terms(const ShadowSet& set, const StateVector& psi, double f) {
    if (f == 0.0) throw std::invalid_argument("estimate_fidelity: f must be nonzero");
    if (psi.qubits() != set.n) throw std::invalid_argument("estimate_fidelity: state size does not match shadows");
    if (set.shadows.empty()) throw std::invalid_argument("estimate_fidelity: empty shadow set");
    std::vector<double> out(set.shadows.size());
    const double offset = (1.0 - 1.0 / f) / pow2(set.n);
    parallel_for(out.size(), [&](std::size_t i) {
        const auto st = clifford::stabilizer_state(set.shadows[i].clifford, set.shadows[i].outcome);
        cplx ov = 0.0;
        for (BitString s = 0; s < psi.dimension(); ++s) {
            if (psi[s] != cplx{}) ov += std::conj(st.amplitude(s)) * psi[s];
        }
        out[i] = std::norm(ov) / f + offset;
    });
    return out;
}

double estimate_fidelity(const ShadowSet& set, const StateVector& psi, double f) {
    const auto terms = fidelity_terms(set, psi, f);
    return std::accumulate(terms.begin(), terms.end(), 0.0) / static_cast<double>(terms.size());
}

double transformed_loss(double noiseless_loss, double f, int n) {
    if (f == 0.0) throw std::invalid_argument("transformed_loss: f must be nonzero");
    const double d = pow2(n);
    return noiseless_loss / ((d + 1.0) * f) + ((d * d - 1.0) * f - d + 1.0) / (d * (d + 1.0) * f);
}

double median_of_means(std::span<const double> values, std::size_t k) {
    if (values.empty()) throw std::invalid_argument("median_of_means: empty input");
    if (k < 1 || k > values.size()) throw std::invalid_argument("median_of_means: k must be in [1, |values|]");
    const std::size_t batch = values.size() / k;
    std::vector<double> means(k);
    for (std::size_t b = 0; b < k; ++b) {
        const std::size_t lo = b * batch;
        const std::size_t hi = b + 1 == k ? values.size() : lo + batch;
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) acc += values[i];
        means[b] = acc / static_cast<double>(hi - lo);
    }
    std::sort(means.begin(), means.end());
    return k % 2 ? means[k / 2] : 0.5 * (means[k / 2 - 1] + means[k / 2]);
}

// ---------------------------------------------------------------- file format

void write_shadow_set(std::ostream& out, const ShadowSet& set) {
    io::ByteWriter w(out);
    w.put_magic("NSQS");
    w.put<std::uint32_t>(kShadowFormatVersion);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(set.n));
    w.put<std::uint64_t>(set.shadows.size());
    w.put<std::uint8_t>(static_cast<std::uint8_t>(set.noise.kind));
    w.put<double>(set.noise.parameter);
    if (set.noise.kind == NoiseModel::Kind::Custom) {
        w.put<std::uint32_t>(static_cast<std::uint32_t>(set.noise.custom.arity));
        w.put<std::uint32_t>(static_cast<std::uint32_t>(set.noise.custom.operators.size()));
        for (const auto& k : set.noise.custom.operators) {
            for (const auto& v : k.data()) {
                w.put<double>(v.real());
                w.put<double>(v.imag());
            }
        }
    }
    w.put<std::uint64_t>(set.seed);
    for (const auto& sh : set.shadows) {
        if (sh.clifford.qubits() != set.n) throw std::invalid_argument("write_shadow_set: inhomogeneous set");
        std::uint32_t signs = 0;
        for (std::size_t r = 0; r < sh.clifford.rows().size(); ++r) {
            const auto& row = sh.clifford.rows()[r];
            w.put<std::uint32_t>(static_cast<std::uint32_t>(row.x | (row.z << 16)));
            if (row.sign) signs |= std::uint32_t{1} << r;
        }
        w.put<std::uint32_t>(signs);
        w.put<std::uint32_t>(static_cast<std::uint32_t>(sh.outcome));
    }
}

ShadowSet read_shadow_set(std::istream& in) {
    io::ByteReader r(in);
    r.expect_magic("NSQS");
    const auto version = r.get<std::uint32_t>();
    if (version != kShadowFormatVersion) {
        throw io::FormatError("unsupported shadow file version " + std::to_string(version));
    }
    ShadowSet set;
    set.n = static_cast<int>(r.get<std::uint32_t>());
    if (set.n < 1 || set.n > kMaxDenseQubits) throw io::FormatError("shadow file: qubit count out of range");
    const auto count = r.get<std::uint64_t>();
    const auto kind = r.get<std::uint8_t>();
    if (kind > 3) throw io::FormatError("shadow file: unknown noise kind");
    set.noise.kind = static_cast<NoiseModel::Kind>(kind);
    set.noise.parameter = r.get<double>();
    if (set.noise.kind == NoiseModel::Kind::Custom) {
        set.noise.custom.arity = static_cast<int>(r.get<std::uint32_t>());
        if (set.noise.custom.arity < 1 || set.noise.custom.arity > set.n) {
            throw io::FormatError("shadow file: bad custom channel arity");
        }
        const auto ops = r.get<std::uint32_t>();
        if (ops > 4096) throw io::FormatError("shadow file: too many Kraus operators");
        const std::size_t dim = std::size_t{1} << set.noise.custom.arity;
        for (std::uint32_t k = 0; k < ops; ++k) {
            quantum::CMatrix m(dim, dim);
            for (std::size_t i = 0; i < dim; ++i)
                for (std::size_t j = 0; j < dim; ++j) {
                    const double re = r.get<double>();
                    const double im = r.get<double>();
                    m(i, j) = {re, im};
                }
            set.noise.custom.operators.push_back(std::move(m));
        }
    }
    try {
        set.noise.validate(set.n);
    } catch (const std::invalid_argument& e) {
        throw io::FormatError(std::string("shadow file: ") + e.what());
    }
    set.seed = r.get<std::uint64_t>();
    const std::uint32_t mask = (std::uint32_t{1} << set.n) - 1;
    for (std::uint64_t i = 0; i < count; ++i) {
        std::vector<clifford::PauliRow> rows(static_cast<std::size_t>(2 * set.n));
        for (auto& row : rows) {
            const auto packed = r.get<std::uint32_t>();
            row.x = packed & mask;
            row.z = (packed >> 16) & mask;
            if ((packed & 0xffffu & ~mask) || ((packed >> 16) & ~mask)) {
                throw io::FormatError("shadow file: tableau row has bits beyond n");
            }
        }
        const auto signs = r.get<std::uint32_t>();
        for (std::size_t k = 0; k < rows.size(); ++k) rows[k].sign = ((signs >> k) & 1u) != 0;
        const auto outcome = r.get<std::uint32_t>();
        if (outcome & ~mask) throw io::FormatError("shadow file: outcome has bits beyond n");
        try {
            set.shadows.push_back({CliffordElement(set.n, std::move(rows)), outcome});
        } catch (const std::invalid_argument& e) {
            throw io::FormatError(std::string("shadow file: ") + e.what());
        }
    }
    r.expect_end();
    return set;
}

void save_shadow_set(const std::filesystem::path& path, const ShadowSet& set) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_shadow_set(out, set);
}

ShadowSet load_shadow_set(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return read_shadow_set(in);
}

}  // namespace nsqst::shadows
