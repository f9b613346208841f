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

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nsqst/bits.hpp"
#include "nsqst/rng.hpp"

namespace nsqst::quantum {

using cplx = std::complex<double>;

/// Small dense row-major complex matrix used for gates and Kraus operators.
class CMatrix {
   public:
    CMatrix() = default;
    CMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
    CMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> data);

    static CMatrix identity(std::size_t dim);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    cplx& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    cplx operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    std::span<const cplx> data() const { return data_; }

    CMatrix adjoint() const;
    CMatrix operator*(const CMatrix& rhs) const;
    CMatrix operator*(cplx scale) const;
    CMatrix kron(const CMatrix& rhs) const;
    /// Max-abs entrywise distance.
    double distance(const CMatrix& rhs) const;
    bool is_unitary(double tol = 1e-12) const;

   private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cplx> data_;
};

enum class GateKind { H, S, X, Y, Z, CNOT, RX, RY, RZ, RZZ, Unitary1, Unitary2 };

/// A 1- or 2-qubit gate. For two-qubit gates the matrix is written in the
/// basis |t0 t1> with targets[0] the more significant bit; for CNOT
/// targets[0] is the control.
struct Gate {
    GateKind kind = GateKind::H;
    std::array<int, 2> targets{0, 0};
    double angle = 0.0;
    CMatrix matrix;

    static Gate h(int q) { return {GateKind::H, {q, q}, 0.0, {}}; }
    static Gate s(int q) { return {GateKind::S, {q, q}, 0.0, {}}; }
    static Gate x(int q) { return {GateKind::X, {q, q}, 0.0, {}}; }
    static Gate y(int q) { return {GateKind::Y, {q, q}, 0.0, {}}; }
    static Gate z(int q) { return {GateKind::Z, {q, q}, 0.0, {}}; }
    static Gate cnot(int control, int target) { return {GateKind::CNOT, {control, target}, 0.0, {}}; }
    static Gate rx(int q, double theta) { return {GateKind::RX, {q, q}, theta, {}}; }
    static Gate ry(int q, double theta) { return {GateKind::RY, {q, q}, theta, {}}; }
    static Gate rz(int q, double theta) { return {GateKind::RZ, {q, q}, theta, {}}; }
    static Gate rzz(int a, int b, double theta) { return {GateKind::RZZ, {a, b}, theta, {}}; }
    /// S-dagger, used by the Y-basis rotation.
    static Gate sdg(int q);
    static Gate unitary(int q, CMatrix u);
    static Gate unitary(int a, int b, CMatrix u);

    int arity() const;
    CMatrix unitary_matrix() const;
    std::string name() const;
};

class StateVector {
   public:
    /// |0...0> on n qubits.
    explicit StateVector(int n);
    /// Validates the length and the normalization (1e-10).
    StateVector(int n, std::vector<cplx> amplitudes);

    static StateVector basis_state(int n, BitString s);

    int qubits() const { return n_; }
    std::size_t dimension() const { return amps_.size(); }
    std::span<const cplx> amplitudes() const { return amps_; }
    cplx operator[](BitString s) const { return amps_[s]; }
    double norm_squared() const;

    void apply(const Gate& g);
    void apply(std::span<const Gate> circuit);
    /// exp(-i * angle * P) for a Pauli word P given as letters over {I,X,Y,Z}.
    void apply_pauli_rotation(std::string_view letters, double angle);

    /// In-place access for builders that renormalize afterwards.
    std::vector<cplx>& mutable_amplitudes() { return amps_; }

   private:
    int n_;
    std::vector<cplx> amps_;
};

class DensityMatrix {
   public:
    explicit DensityMatrix(int n);
    static DensityMatrix from_state(const StateVector& psi);
    /// Validates Hermiticity and unit trace (1e-10) and positivity of the
    /// diagonal.
    DensityMatrix(int n, std::vector<cplx> entries);

    int qubits() const { return n_; }
    std::size_t dimension() const { return dim_; }
    cplx operator()(std::size_t r, std::size_t c) const { return rho_[r * dim_ + c]; }
    std::span<const cplx> entries() const { return rho_; }
    cplx trace() const;
    double hermiticity_error() const;
    std::vector<double> diagonal() const;

    void apply(const Gate& g);
    void apply(std::span<const Gate> circuit);
    /// fρ + (1-f) Tr_T(ρ) ⊗ I/2^k on the target qubits, computed without
    /// Kraus expansion.
    void depolarize(double f, std::span<const int> targets);

    std::vector<cplx>& mutable_entries() { return rho_; }

   private:
    int n_;
    std::size_t dim_;
    std::vector<cplx> rho_;
};

/// Completely positive map given by its Kraus operators on arity qubits.
struct KrausChannel {
    std::vector<CMatrix> operators;
    int arity = 1;

    /// Throws unless sum K^dagger K = I within tol.
    void validate(double tol = 1e-10) const;
    double trace_preservation_error() const;

    static KrausChannel identity(int arity);
    /// AD_{1,p}: rho_11 decays into rho_00 with probability 1-p; p = 1 is
    /// noiseless.
    static KrausChannel amplitude_damping(double p);
    /// D_{k,f}(rho) = f rho + (1-f) I/2^k.
    static KrausChannel depolarizing(int arity, double f);
    /// ch^{⊗copies} as a single channel on copies*arity qubits.
    static KrausChannel tensor_power(const KrausChannel& ch, int copies);
};

/// Pauli word over {I,X,Y,Z} with a real coefficient.
struct PauliString {
    double coefficient = 1.0;
    std::string letters;

    PauliString() = default;
    PauliString(double c, std::string word);
    int qubits() const { return static_cast<int>(letters.size()); }
    bool is_identity() const;
};

/// Measurement basis: one letter from {X,Y,Z} per qubit.
struct PauliBasis {
    std::string letters;

    PauliBasis() = default;
    explicit PauliBasis(std::string word);
    int qubits() const { return static_cast<int>(letters.size()); }
    /// Number of non-Z letters.
    int non_z_count() const;
    bool operator==(const PauliBasis&) const = default;
    auto operator<=>(const PauliBasis&) const = default;
};

StateVector apply_gate(StateVector state, const Gate& g);
DensityMatrix apply_kraus(const DensityMatrix& dm, const KrausChannel& ch, std::span<const int> targets);

/// Applies a 1-qubit channel independently to every qubit.
DensityMatrix apply_kraus_all(const DensityMatrix& dm, const KrausChannel& single);

BitString measure_all(const StateVector& state, Rng& rng);
BitString measure_all(const DensityMatrix& dm, Rng& rng);
std::vector<double> probabilities(const StateVector& state);

/// Per-qubit rotation so that a computational-basis measurement realizes a
/// measurement in basis B: H for X, S^dagger then H for Y, nothing for Z.
StateVector rotate_to_basis(StateVector state, const PauliBasis& basis);

/// P|psi> for a Pauli word (coefficient not applied).
StateVector apply_pauli(const StateVector& state, std::string_view letters);

/// Real part of sum coeff * <psi|P|psi>. Throws std::logic_error if the
/// imaginary part exceeds 1e-8.
double expectation(const StateVector& state, const PauliString& p);
double expectation(const StateVector& state, std::span<const PauliString> terms);

cplx inner_product(const StateVector& a, const StateVector& b);
double fidelity(const StateVector& a, const StateVector& b);

/// Haar-random pure state (normalized complex Gaussian vector).
StateVector random_state(int n, Rng& rng);

}  // namespace nsqst::quantum
