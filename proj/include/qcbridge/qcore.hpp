// Copyright 2026 The qcbridge Authors
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

/**
 * @file
 * Small dense complex linear algebra and the two-qubit state toolbox:
 * tensor products, partial trace / transpose, a Hermitian Jacobi
 * eigensolver, the PPT entanglement test and the Horodecki CHSH value.
 *
 * Everything here is a value type or a pure function. Dimensions stay
 * tiny (at most a 2x2x4 tripartite system, or 16 for two copies of a
 * qubit pair), so matrices are plain row-major vectors.
 */

#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

namespace qcb::qcore {

using Complex = std::complex<double>;

inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPositivityTol = 1e-10;
inline constexpr double kNormTol = 1e-12;
inline constexpr double kEntanglementTol = 1e-9;

/// Dense complex matrix, row-major.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols);
    Matrix(std::size_t rows, std::size_t cols, std::initializer_list<Complex> entries);

    static Matrix identity(std::size_t n);
    static Matrix diagonal(std::span<const double> diag);

    [[nodiscard]] std::size_t rows() const { return rows_; }
    [[nodiscard]] std::size_t cols() const { return cols_; }
    [[nodiscard]] bool is_square() const { return rows_ == cols_; }

    Complex &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const Complex &operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    [[nodiscard]] std::span<const Complex> data() const { return data_; }

    [[nodiscard]] Matrix adjoint() const;
    [[nodiscard]] Matrix transpose() const;
    [[nodiscard]] Complex trace() const;

    /// max |M - M^dagger| over entries.
    [[nodiscard]] double hermiticity_defect() const;
    [[nodiscard]] bool is_hermitian(double tol = kHermitianTol) const {
        return is_square() && hermiticity_defect() <= tol;
    }

    Matrix &operator+=(const Matrix &other);
    Matrix &operator-=(const Matrix &other);
    Matrix &operator*=(Complex scale);

    friend Matrix operator+(Matrix a, const Matrix &b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix &b) { return a -= b; }
    friend Matrix operator*(Matrix a, Complex s) { return a *= s; }
    friend Matrix operator*(Complex s, Matrix a) { return a *= s; }
    friend Matrix operator*(const Matrix &a, const Matrix &b);

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Complex> data_;
};

[[nodiscard]] double max_abs_diff(const Matrix &a, const Matrix &b);

/// Pure state amplitudes in the computational basis.
class StateVector {
  public:
    StateVector() = default;
    explicit StateVector(std::vector<Complex> amplitudes) : amps_(std::move(amplitudes)) {}
    StateVector(std::initializer_list<Complex> amplitudes) : amps_(amplitudes) {}

    static StateVector basis(std::size_t dim, std::size_t index);

    [[nodiscard]] std::size_t dim() const { return amps_.size(); }
    [[nodiscard]] double norm() const;
    [[nodiscard]] StateVector normalized() const;
    [[nodiscard]] bool is_normalized(double tol = kNormTol) const;

    Complex &operator[](std::size_t i) { return amps_[i]; }
    const Complex &operator[](std::size_t i) const { return amps_[i]; }
    [[nodiscard]] std::span<const Complex> amplitudes() const { return amps_; }

  private:
    std::vector<Complex> amps_;
};

[[nodiscard]] Complex inner(const StateVector &bra, const StateVector &ket);
[[nodiscard]] StateVector apply(const Matrix &op, const StateVector &psi);
[[nodiscard]] Matrix outer(const StateVector &ket, const StateVector &bra);
[[nodiscard]] Matrix projector(const StateVector &psi);

/// Kronecker products. Dimensions multiply.
[[nodiscard]] Matrix tensor(const Matrix &a, const Matrix &b);
[[nodiscard]] StateVector tensor(const StateVector &a, const StateVector &b);

/**
 * Trace out every subsystem whose `keep` flag is false.
 * `dims` lists the local dimensions, most significant factor first, and
 * must multiply to the matrix size.
 */
[[nodiscard]] Matrix trace_out(const Matrix &m, std::span<const std::size_t> dims,
                               std::span<const bool> keep);

// Single-qubit operators and states.
[[nodiscard]] Matrix pauli_x();
[[nodiscard]] Matrix pauli_y();
[[nodiscard]] Matrix pauli_z();
[[nodiscard]] StateVector ket0();
[[nodiscard]] StateVector ket1();
[[nodiscard]] StateVector ket_plus();
[[nodiscard]] StateVector ket_minus();

/// Bell basis, in the order used for BellWeights.
enum class Bell { PhiPlus = 0, PhiMinus = 1, PsiPlus = 2, PsiMinus = 3 };
[[nodiscard]] StateVector bell_state(Bell which);

struct Eigensystem {
    std::vector<double> values; ///< ascending
    Matrix vectors;             ///< column k is the eigenvector of values[k]
};

/**
 * Cyclic Jacobi diagonalisation of a Hermitian matrix.
 *
 * Each sweep first rotates the phase of the pivot element onto the real
 * axis, then applies an ordinary real Jacobi rotation, so every update is
 * unitary. Sweeps stop once the off-diagonal Frobenius norm is below
 * 1e-12 relative to the matrix norm.
 */
[[nodiscard]] Eigensystem eig_hermitian(const Matrix &m);

/// f(M) = V f(Lambda) V^dagger for Hermitian M.
[[nodiscard]] Matrix spectral_apply(const Matrix &m, const std::function<double(double)> &f);

/// Trace-one, Hermitian, positive semidefinite operator on a 2- or 4-dim space.
class DensityMatrix {
  public:
    /// Validates trace, Hermiticity and positivity; throws std::invalid_argument.
    explicit DensityMatrix(Matrix m);

    static DensityMatrix pure(const StateVector &psi);
    static DensityMatrix maximally_mixed(std::size_t dim);

    [[nodiscard]] std::size_t dim() const { return m_.rows(); }
    [[nodiscard]] const Matrix &matrix() const { return m_; }

    /// Re Tr(rho * op).
    [[nodiscard]] double expectation(const Matrix &op) const;

  private:
    Matrix m_;
};

[[nodiscard]] DensityMatrix tensor(const DensityMatrix &a, const DensityMatrix &b);

enum class Subsystem { A, B };

/// Reduced state of a two-qubit density matrix.
[[nodiscard]] DensityMatrix partial_trace(const DensityMatrix &rho, Subsystem keep);

/// Transpose on qubit B.
[[nodiscard]] Matrix partial_transpose(const DensityMatrix &rho);

struct EntanglementVerdict {
    bool entangled;
    double min_eigenvalue; ///< smallest eigenvalue of the partial transpose
};

/// Peres-Horodecki test; exact for two qubits.
[[nodiscard]] EntanglementVerdict is_entangled(const DensityMatrix &rho);

/// T_ij = Tr(rho sigma_i (x) sigma_j), i, j in {x, y, z}.
[[nodiscard]] std::array<std::array<double, 3>, 3> correlation_tensor(const DensityMatrix &rho);

/// Maximal CHSH value over all measurement settings (Horodecki formula).
[[nodiscard]] double chsh_max(const DensityMatrix &rho);

/// Probabilities over (Phi+, Phi-, Psi+, Psi-).
class BellWeights {
  public:
    explicit BellWeights(std::array<double, 4> weights);
    [[nodiscard]] double operator[](std::size_t i) const { return w_[i]; }
    [[nodiscard]] const std::array<double, 4> &values() const { return w_; }

  private:
    std::array<double, 4> w_;
};

[[nodiscard]] DensityMatrix bell_diagonal(const BellWeights &w);

/// p |Phi+><Phi+| + (1 - p) I/4.
[[nodiscard]] DensityMatrix werner(double p);

/// <Phi+|rho|Phi+>.
[[nodiscard]] double singlet_fidelity(const DensityMatrix &rho);

} // namespace qcb::qcore
