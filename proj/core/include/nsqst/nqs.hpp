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

#include <complex>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "nsqst/bits.hpp"
#include "nsqst/rng.hpp"

namespace nsqst::nqs {

using cplx = std::complex<double>;

struct Architecture {
    int n = 6;
    int layers = 2;
    int heads = 4;
    int dim = 8;

    /// Throws unless all fields are positive and dim % heads == 0.
    void validate() const;
    int head_dim() const { return dim / heads; }
    bool operator==(const Architecture&) const = default;
};

/// Full networks carry both heads; the split protocols use one network per
/// head.
enum class HeadMode : std::uint8_t { Full = 0, AmplitudeOnly = 1, PhaseOnly = 2 };

std::string to_string(HeadMode mode);
HeadMode parse_head_mode(const std::string& text);

/// Offsets into the flat parameter vector. Per layer the block is
/// [Wq | Wk | Wv | Wo | W | b] with D x D row-major matrices; the heads are
/// [w_l (D) | b_l] and [w_p ((n+1) D) | b_p].
struct Layout {
    std::size_t token_embedding = 0;     // 2 x D
    std::size_t position_embedding = 0;  // (n+1) x D
    std::vector<std::size_t> layer;      // start of each layer block
    std::size_t logit_head = 0;          // absent for PhaseOnly
    std::size_t phase_head = 0;          // absent for AmplitudeOnly
    std::size_t total = 0;

    static std::size_t layer_size(const Architecture& arch);
};

Layout make_layout(const Architecture& arch, HeadMode mode);
std::size_t param_count(const Architecture& arch, HeadMode mode = HeadMode::Full);

struct WaveAmplitude {
    double log_sqrt_p = 0.0;
    /// Raw phase-head output.
    double phase = 0.0;

    /// Phase folded into [0, 2 pi).
    double wrapped_phase() const;
    cplx value() const { return std::polar(std::exp(log_sqrt_p), phase); }
};

/// Autoregressive transformer wave function psi(s) = sqrt(p(s)) e^{i phi(s)}.
class Network {
   public:
    Network() = default;
    /// Zero parameters.
    Network(Architecture arch, HeadMode mode);
    /// Throws unless params has param_count(arch, mode) finite entries.
    Network(Architecture arch, HeadMode mode, std::vector<double> params);

    const Architecture& arch() const { return arch_; }
    HeadMode mode() const { return mode_; }
    const Layout& layout() const { return layout_; }
    int qubits() const { return arch_.n; }
    std::size_t size() const { return params_.size(); }
    std::span<const double> params() const { return params_; }
    std::span<double> mutable_params() { return params_; }
    bool has_logits() const { return mode_ != HeadMode::PhaseOnly; }
    bool has_phase() const { return mode_ != HeadMode::AmplitudeOnly; }

    WaveAmplitude forward(BitString s) const;
    /// Also returns the n conditional logits; logits[j] gives
    /// p(s_{j+1} = 1 | s_1..s_j) = sigmoid(logits[j]).
    WaveAmplitude forward(BitString s, std::vector<double>& logits) const;

    /// grad += sum_j logit_seed[j] d logits[j] + phase_seed d phase.
    void backward(BitString s, std::span<const double> logit_seed, double phase_seed, std::span<double> grad) const;

    /// grad += re_seed d log sqrt p(s) + phase_seed d phase(s).
    void accumulate_log_psi_gradient(BitString s, double re_seed, double phase_seed, std::span<double> grad) const;

    /// d/d lambda [log sqrt p(s) + i phase(s)].
    std::vector<cplx> grad_log_psi(BitString s) const;

    /// Exact ancestral samples from p(s).
    std::vector<BitString> sample(std::size_t count, Rng& rng) const;

    bool operator==(const Network& o) const {
        return arch_ == o.arch_ && mode_ == o.mode_ && params_ == o.params_;
    }

   private:
    struct Tape;
    void run(BitString s, Tape& tape) const;

    Architecture arch_;
    HeadMode mode_ = HeadMode::Full;
    Layout layout_;
    std::vector<double> params_;
};

/// Entries uniform in [-scale, scale]; head weights and biases zero, so the
/// initial state is uniform with zero phase.
Network init_network(const Architecture& arch, HeadMode mode, Rng& rng, double scale);

double sigmoid(double x);

/// Exhaustive table of psi(s) for s in [0, 2^n).
std::vector<cplx> wave_function(const Network& net);
/// psi(s) = sqrt(p_amp(s)) e^{i phase_net(s)} for the split-network pair.
std::vector<cplx> wave_function(const Network& amplitude, const Network& phase);

void write_network(std::ostream& out, const Network& net);
Network read_network(std::istream& in);

}  // namespace nsqst::nqs
