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

#include "nsqst/nqs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <unordered_map>

#include "nsqst/binary_io.hpp"

namespace nsqst::nqs {

void Architecture::validate() const {
    if (n < 1 || n > 30) throw std::invalid_argument("Architecture: n must be in [1, 30]");
    if (layers < 1 || heads < 1 || dim < 1) throw std::invalid_argument("Architecture: K, H and D must be positive");
    if (dim % heads != 0) {
        throw std::invalid_argument("Architecture: D=" + std::to_string(dim) + " is not divisible by H=" +
                                    std::to_string(heads));
    }
}

std::string to_string(HeadMode mode) {
    switch (mode) {
        case HeadMode::Full: return "full";
        case HeadMode::AmplitudeOnly: return "amplitude";
        case HeadMode::PhaseOnly: return "phase";
    }
    return "?";
}

HeadMode parse_head_mode(const std::string& text) {
    if (text == "full") return HeadMode::Full;
    if (text == "amplitude") return HeadMode::AmplitudeOnly;
    if (text == "phase") return HeadMode::PhaseOnly;
    throw std::invalid_argument("unknown head mode '" + text + "'");
}

std::size_t Layout::layer_size(const Architecture& arch) {
    const auto d = static_cast<std::size_t>(arch.dim);
    return 5 * d * d + d;
}

Layout make_layout(const Architecture& arch, HeadMode mode) {
    arch.validate();
    const auto d = static_cast<std::size_t>(arch.dim);
    const auto t = static_cast<std::size_t>(arch.n + 1);
    Layout l;
    std::size_t at = 0;
    l.token_embedding = at;
    at += 2 * d;
    l.position_embedding = at;
    at += t * d;
    for (int k = 0; k < arch.layers; ++k) {
        l.layer.push_back(at);
        at += Layout::layer_size(arch);
    }
    if (mode != HeadMode::PhaseOnly) {
        l.logit_head = at;
        at += d + 1;
    }
    if (mode != HeadMode::AmplitudeOnly) {
        l.phase_head = at;
        at += t * d + 1;
    }
    l.total = at;
    return l;
}

std::size_t param_count(const Architecture& arch, HeadMode mode) { return make_layout(arch, mode).total; }

double WaveAmplitude::wrapped_phase() const {
    const double two_pi = 2.0 * std::numbers::pi;
    double w = std::fmod(phase, two_pi);
    if (w < 0.0) w += two_pi;
    if (w >= two_pi) w = 0.0;
    return w;
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

namespace {

// log sigmoid(x), stable for large |x|.
double log_sigmoid(double x) { return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

}  // namespace

Network::Network(Architecture arch, HeadMode mode)
    : arch_(arch), mode_(mode), layout_(make_layout(arch, mode)), params_(layout_.total, 0.0) {}

Network::Network(Architecture arch, HeadMode mode, std::vector<double> params)
    : arch_(arch), mode_(mode), layout_(make_layout(arch, mode)), params_(std::move(params)) {
    if (params_.size() != layout_.total) {
        throw std::invalid_argument("Network: expected " + std::to_string(layout_.total) + " parameters, got " +
                                    std::to_string(params_.size()));
    }
    for (double v : params_) {
        if (!std::isfinite(v)) throw std::invalid_argument("Network: non-finite parameter");
    }
}

// Activations of one forward pass over the T = n + 1 positions of (0, s).
struct Network::Tape {
    struct Layer {
        std::vector<double> x, q, k, v, attn, c, y, pre;
    };
    std::vector<int> tokens;
    std::vector<Layer> layers;
    std::vector<double> out;  // final layer output, T x D
    std::vector<double> logits;
    double phase = 0.0;
};

void Network::run(BitString s, Tape& tape) const {
    const int n = arch_.n, d = arch_.dim, t = n + 1, nh = arch_.heads, dh = arch_.head_dim();
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    const double* p = params_.data();
    tape.tokens.assign(static_cast<std::size_t>(t), 0);
    for (int j = 1; j < t; ++j) tape.tokens[static_cast<std::size_t>(j)] = bit_at(s, j - 1, n);

    std::vector<double> x(static_cast<std::size_t>(t * d));
    for (int j = 0; j < t; ++j) {
        const double* te = p + layout_.token_embedding + tape.tokens[static_cast<std::size_t>(j)] * d;
        const double* pe = p + layout_.position_embedding + j * d;
        for (int a = 0; a < d; ++a) x[static_cast<std::size_t>(j * d + a)] = te[a] + pe[a];
    }
    tape.layers.resize(static_cast<std::size_t>(arch_.layers));
    for (int l = 0; l < arch_.layers; ++l) {
        auto& L = tape.layers[static_cast<std::size_t>(l)];
        const double* wq = p + layout_.layer[static_cast<std::size_t>(l)];
        const double* wk = wq + d * d;
        const double* wv = wk + d * d;
        const double* wo = wv + d * d;
        const double* w = wo + d * d;
        const double* b = w + d * d;
        L.x = x;
        const std::size_t td = static_cast<std::size_t>(t * d);
        L.q.assign(td, 0.0);
        L.k.assign(td, 0.0);
        L.v.assign(td, 0.0);
        for (int j = 0; j < t; ++j) {
            const double* xj = &L.x[static_cast<std::size_t>(j * d)];
            for (int a = 0; a < d; ++a) {
                double sq = 0.0, sk = 0.0, sv = 0.0;
                for (int e = 0; e < d; ++e) {
                    sq += wq[a * d + e] * xj[e];
                    sk += wk[a * d + e] * xj[e];
                    sv += wv[a * d + e] * xj[e];
                }
                L.q[static_cast<std::size_t>(j * d + a)] = sq;
                L.k[static_cast<std::size_t>(j * d + a)] = sk;
                L.v[static_cast<std::size_t>(j * d + a)] = sv;
            }
        }
        L.attn.assign(static_cast<std::size_t>(nh * t * t), 0.0);
        L.c.assign(td, 0.0);
        for (int h = 0; h < nh; ++h) {
            const int off = h * dh;
            for (int j = 0; j < t; ++j) {
                double* row = &L.attn[static_cast<std::size_t>((h * t + j) * t)];
                double mx = -INFINITY;
                for (int i = 0; i <= j; ++i) {
                    double sc = 0.0;
                    for (int a = 0; a < dh; ++a) {
                        sc += L.q[static_cast<std::size_t>(j * d + off + a)] * L.k[static_cast<std::size_t>(i * d + off + a)];
                    }
                    row[i] = sc * scale;
                    mx = std::max(mx, row[i]);
                }
                double z = 0.0;
                for (int i = 0; i <= j; ++i) {
                    row[i] = std::exp(row[i] - mx);
                    z += row[i];
                }
                for (int i = 0; i <= j; ++i) row[i] /= z;
                for (int i = 0; i <= j; ++i) {
                    for (int a = 0; a < dh; ++a) {
                        L.c[static_cast<std::size_t>(j * d + off + a)] +=
                            row[i] * L.v[static_cast<std::size_t>(i * d + off + a)];
                    }
                }
            }
        }
        L.y.assign(td, 0.0);
        L.pre.assign(td, 0.0);
        for (int j = 0; j < t; ++j) {
            const std::size_t o = static_cast<std::size_t>(j * d);
            for (int a = 0; a < d; ++a) {
                double acc = L.x[o + static_cast<std::size_t>(a)];
                for (int e = 0; e < d; ++e) acc += wo[a * d + e] * L.c[o + static_cast<std::size_t>(e)];
                L.y[o + static_cast<std::size_t>(a)] = acc;
            }
            for (int a = 0; a < d; ++a) {
                double acc = b[a];
                for (int e = 0; e < d; ++e) acc += w[a * d + e] * L.y[o + static_cast<std::size_t>(e)];
                L.pre[o + static_cast<std::size_t>(a)] = acc;
                x[o + static_cast<std::size_t>(a)] = L.y[o + static_cast<std::size_t>(a)] + std::max(acc, 0.0);
            }
        }
    }
    tape.out = x;
    tape.logits.assign(static_cast<std::size_t>(n), 0.0);
    if (has_logits()) {
        const double* wl = p + layout_.logit_head;
        for (int j = 0; j < n; ++j) {
            double acc = wl[d];
            for (int a = 0; a < d; ++a) acc += wl[a] * x[static_cast<std::size_t>(j * d + a)];
            tape.logits[static_cast<std::size_t>(j)] = acc;
        }
    }
    tape.phase = 0.0;
    if (has_phase()) {
        const double* wp = p + layout_.phase_head;
        double acc = wp[t * d];
        for (int i = 0; i < t * d; ++i) acc += wp[i] * x[static_cast<std::size_t>(i)];
        tape.phase = acc;
    }
}

WaveAmplitude Network::forward(BitString s) const {
    std::vector<double> logits;
    return forward(s, logits);
}

WaveAmplitude Network::forward(BitString s, std::vector<double>& logits) const {
    if (arch_.n < 64 && (s >> arch_.n)) throw std::invalid_argument("Network::forward: bit string longer than n");
    Tape tape;
    run(s, tape);
    double lp = 0.0;
    for (int j = 0; j < arch_.n; ++j) {
        const double l = tape.logits[static_cast<std::size_t>(j)];
        lp += bit_at(s, j, arch_.n) ? log_sigmoid(l) : log_sigmoid(-l);
    }
    logits = tape.logits;
    return {0.5 * lp, tape.phase};
}

void Network::backward(BitString s, std::span<const double> logit_seed, double phase_seed,
                       std::span<double> grad) const {
    const int n = arch_.n, d = arch_.dim, t = n + 1, nh = arch_.heads, dh = arch_.head_dim();
    if (grad.size() != params_.size()) throw std::invalid_argument("Network::backward: gradient size mismatch");
    if (has_logits() && logit_seed.size() != static_cast<std::size_t>(n)) {
        throw std::invalid_argument("Network::backward: expected n logit seeds");
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    Tape tape;
    run(s, tape);
    const double* p = params_.data();
    double* g = grad.data();
    const std::size_t td = static_cast<std::size_t>(t * d);
    std::vector<double> dx(td, 0.0);

    if (has_logits()) {
        const double* wl = p + layout_.logit_head;
        double* gl = g + layout_.logit_head;
        for (int j = 0; j < n; ++j) {
            const double sj = logit_seed[static_cast<std::size_t>(j)];
            if (sj == 0.0) continue;
            for (int a = 0; a < d; ++a) {
                gl[a] += sj * tape.out[static_cast<std::size_t>(j * d + a)];
                dx[static_cast<std::size_t>(j * d + a)] += sj * wl[a];
            }
            gl[d] += sj;
        }
    }
    if (has_phase() && phase_seed != 0.0) {
        const double* wp = p + layout_.phase_head;
        double* gp = g + layout_.phase_head;
        for (std::size_t i = 0; i < td; ++i) {
            gp[i] += phase_seed * tape.out[i];
            dx[i] += phase_seed * wp[i];
        }
        gp[td] += phase_seed;
    }

    std::vector<double> dy(td), dc(td), dq(td), dk(td), dv(td), da(static_cast<std::size_t>(t));
    for (int l = arch_.layers - 1; l >= 0; --l) {
        const auto& L = tape.layers[static_cast<std::size_t>(l)];
        const std::size_t base = layout_.layer[static_cast<std::size_t>(l)];
        const double* wq = p + base;
        const double* wk = wq + d * d;
        const double* wv = wk + d * d;
        const double* wo = wv + d * d;
        const double* w = wo + d * d;
        double* gwq = g + base;
        double* gwk = gwq + d * d;
        double* gwv = gwk + d * d;
        double* gwo = gwv + d * d;
        double* gw = gwo + d * d;
        double* gb = gw + d * d;

        // z = y + relu(W y + b)
        dy = dx;
        for (int j = 0; j < t; ++j) {
            const std::size_t o = static_cast<std::size_t>(j * d);
            for (int a = 0; a < d; ++a) {
                if (L.pre[o + static_cast<std::size_t>(a)] <= 0.0) continue;
                const double gpre = dx[o + static_cast<std::size_t>(a)];
                if (gpre == 0.0) continue;
                gb[a] += gpre;
                for (int e = 0; e < d; ++e) {
                    gw[a * d + e] += gpre * L.y[o + static_cast<std::size_t>(e)];
                    dy[o + static_cast<std::size_t>(e)] += w[a * d + e] * gpre;
                }
            }
        }
        // y = x + Wo c
        dx = dy;
        std::fill(dc.begin(), dc.end(), 0.0);
        for (int j = 0; j < t; ++j) {
            const std::size_t o = static_cast<std::size_t>(j * d);
            for (int a = 0; a < d; ++a) {
                const double gya = dy[o + static_cast<std::size_t>(a)];
                for (int e = 0; e < d; ++e) {
                    gwo[a * d + e] += gya * L.c[o + static_cast<std::size_t>(e)];
                    dc[o + static_cast<std::size_t>(e)] += wo[a * d + e] * gya;
                }
            }
        }
        // causal attention per head
        std::fill(dq.begin(), dq.end(), 0.0);
        std::fill(dk.begin(), dk.end(), 0.0);
        std::fill(dv.begin(), dv.end(), 0.0);
        for (int h = 0; h < nh; ++h) {
            const int off = h * dh;
            for (int j = 0; j < t; ++j) {
                const double* row = &L.attn[static_cast<std::size_t>((h * t + j) * t)];
                double dot = 0.0;
                for (int i = 0; i <= j; ++i) {
                    double acc = 0.0;
                    for (int a = 0; a < dh; ++a) {
                        const std::size_t ja = static_cast<std::size_t>(j * d + off + a);
                        const std::size_t ia = static_cast<std::size_t>(i * d + off + a);
                        acc += dc[ja] * L.v[ia];
                        dv[ia] += row[i] * dc[ja];
                    }
                    da[static_cast<std::size_t>(i)] = acc;
                    dot += row[i] * acc;
                }
                for (int i = 0; i <= j; ++i) {
                    const double ds = row[i] * (da[static_cast<std::size_t>(i)] - dot) * scale;
                    if (ds == 0.0) continue;
                    for (int a = 0; a < dh; ++a) {
                        const std::size_t ja = static_cast<std::size_t>(j * d + off + a);
                        const std::size_t ia = static_cast<std::size_t>(i * d + off + a);
                        dq[ja] += ds * L.k[ia];
                        dk[ia] += ds * L.q[ja];
                    }
                }
            }
        }
        // q, k, v = W{q,k,v} x
        for (int j = 0; j < t; ++j) {
            const std::size_t o = static_cast<std::size_t>(j * d);
            for (int a = 0; a < d; ++a) {
                const double ga = dq[o + static_cast<std::size_t>(a)];
                const double gk = dk[o + static_cast<std::size_t>(a)];
                const double gv = dv[o + static_cast<std::size_t>(a)];
                for (int e = 0; e < d; ++e) {
                    const double xe = L.x[o + static_cast<std::size_t>(e)];
                    gwq[a * d + e] += ga * xe;
                    gwk[a * d + e] += gk * xe;
                    gwv[a * d + e] += gv * xe;
                    dx[o + static_cast<std::size_t>(e)] += wq[a * d + e] * ga + wk[a * d + e] * gk + wv[a * d + e] * gv;
                }
            }
        }
    }
    for (int j = 0; j < t; ++j) {
        double* gt = g + layout_.token_embedding + tape.tokens[static_cast<std::size_t>(j)] * d;
        double* gpos = g + layout_.position_embedding + j * d;
        for (int a = 0; a < d; ++a) {
            gt[a] += dx[static_cast<std::size_t>(j * d + a)];
            gpos[a] += dx[static_cast<std::size_t>(j * d + a)];
        }
    }
}

void Network::accumulate_log_psi_gradient(BitString s, double re_seed, double phase_seed,
                                          std::span<double> grad) const {
    std::vector<double> seeds;
    if (has_logits() && re_seed != 0.0) {
        std::vector<double> logits;
        forward(s, logits);
        seeds.resize(static_cast<std::size_t>(arch_.n));
        for (int j = 0; j < arch_.n; ++j) {
            // d/dl of (1/2) log p(s_j | .) = (s_j - sigmoid(l)) / 2
            seeds[static_cast<std::size_t>(j)] =
                re_seed * 0.5 * (bit_at(s, j, arch_.n) - sigmoid(logits[static_cast<std::size_t>(j)]));
        }
    } else if (has_logits()) {
        seeds.assign(static_cast<std::size_t>(arch_.n), 0.0);
    }
    backward(s, seeds, has_phase() ? phase_seed : 0.0, grad);
}

std::vector<cplx> Network::grad_log_psi(BitString s) const {
    std::vector<double> re(params_.size(), 0.0), im(params_.size(), 0.0);
    accumulate_log_psi_gradient(s, 1.0, 0.0, re);
    accumulate_log_psi_gradient(s, 0.0, 1.0, im);
    std::vector<cplx> out(params_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = {re[i], im[i]};
    return out;
}

std::vector<BitString> Network::sample(std::size_t count, Rng& rng) const {
    const int n = arch_.n;
    std::vector<BitString> out;
    out.reserve(count);
    if (!has_logits()) {
        for (std::size_t k = 0; k < count; ++k) {
            BitString s = 0;
            for (int j = 0; j < n; ++j) s = (s << 1) | (rng.uniform() < 0.5 ? 1u : 0u);
            out.push_back(s);
        }
        return out;
    }
    // Logit j depends only on the first j bits; cache it per prefix.
    std::unordered_map<BitString, double> cache;
    std::vector<double> logits;
    for (std::size_t k = 0; k < count; ++k) {
        BitString prefix = 0;
        for (int j = 0; j < n; ++j) {
            const BitString key = (BitString{1} << j) | prefix;
            auto it = cache.find(key);
            if (it == cache.end()) {
                forward(prefix << (n - j), logits);
                it = cache.emplace(key, logits[static_cast<std::size_t>(j)]).first;
            }
            const int bit = rng.uniform() < sigmoid(it->second) ? 1 : 0;
            prefix = (prefix << 1) | static_cast<BitString>(bit);
        }
        out.push_back(prefix);
    }
    return out;
}

Network init_network(const Architecture& arch, HeadMode mode, Rng& rng, double scale) {
    if (!(scale >= 0.0) || !std::isfinite(scale)) throw std::invalid_argument("init_network: scale must be >= 0");
    Network net(arch, mode);
    const Layout& l = net.layout();
    auto params = net.mutable_params();
    const std::size_t body_end = l.layer.back() + Layout::layer_size(arch);
    for (std::size_t i = 0; i < body_end; ++i) params[i] = rng.uniform(-scale, scale);
    return net;
}

std::vector<cplx> wave_function(const Network& net) {
    const std::size_t dim = std::size_t{1} << net.qubits();
    std::vector<cplx> psi(dim);
    for (BitString s = 0; s < dim; ++s) psi[s] = net.forward(s).value();
    return psi;
}

std::vector<cplx> wave_function(const Network& amplitude, const Network& phase) {
    if (amplitude.qubits() != phase.qubits()) throw std::invalid_argument("wave_function: qubit count mismatch");
    const std::size_t dim = std::size_t{1} << amplitude.qubits();
    std::vector<cplx> psi(dim);
    for (BitString s = 0; s < dim; ++s) {
        psi[s] = std::polar(std::exp(amplitude.forward(s).log_sqrt_p), phase.forward(s).phase);
    }
    return psi;
}

namespace {
constexpr std::uint32_t kLayoutVersion = 1;
}

void write_network(std::ostream& out, const Network& net) {
    io::ByteWriter w(out);
    w.put<std::uint32_t>(kLayoutVersion);
    w.put<std::int32_t>(net.arch().n);
    w.put<std::int32_t>(net.arch().layers);
    w.put<std::int32_t>(net.arch().heads);
    w.put<std::int32_t>(net.arch().dim);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(net.mode()));
    w.put<std::uint64_t>(net.size());
    for (double v : net.params()) w.put<double>(v);
}

Network read_network(std::istream& in) {
    io::ByteReader r(in);
    const auto version = r.get<std::uint32_t>();
    if (version != kLayoutVersion) throw io::FormatError("unsupported parameter layout version " + std::to_string(version));
    Architecture arch;
    arch.n = r.get<std::int32_t>();
    arch.layers = r.get<std::int32_t>();
    arch.heads = r.get<std::int32_t>();
    arch.dim = r.get<std::int32_t>();
    const auto mode = r.get<std::uint8_t>();
    if (mode > 2) throw io::FormatError("unknown head mode in checkpoint");
    try {
        arch.validate();
    } catch (const std::invalid_argument& e) {
        throw io::FormatError(std::string("checkpoint: ") + e.what());
    }
    const auto count = r.get<std::uint64_t>();
    if (count != param_count(arch, static_cast<HeadMode>(mode))) {
        throw io::FormatError("checkpoint parameter count does not match its architecture");
    }
    std::vector<double> params(count);
    for (auto& v : params) v = r.get<double>();
    return Network(arch, static_cast<HeadMode>(mode), std::move(params));
}

}  // namespace nsqst::nqs
