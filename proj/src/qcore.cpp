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

#include "qcbridge/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace qcb::qcore {

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, Complex{0.0, 0.0}) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::initializer_list<Complex> entries)
    : rows_(rows), cols_(cols), data_(entries) {
    if (data_.size() != rows * cols) {
        throw std::invalid_argument("Matrix: entry count does not match shape");
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
    Matrix m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) {
        m(i, i) = diag[i];
    }
    return m;
}

Matrix Matrix::adjoint() const {
    Matrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) {
            out(c, r) = std::conj((*this)(r, c));
        }
    }
    return out;
}

Matrix Matrix::transpose() const {
    Matrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) {
            out(c, r) = (*this)(r, c);
        }
    }
    return out;
}

Complex Matrix::trace() const {
    Complex t{0.0, 0.0};
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) {
        t += (*this)(i, i);
    }
    return t;
}

double Matrix::hermiticity_defect() const {
    if (!is_square()) {
        return INFINITY;
    }
    double worst = 0.0;
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = r; c < cols_; ++c) {
            worst = std::max(worst, std::abs((*this)(r, c) - std::conj((*this)(c, r))));
        }
    }
    return worst;
}

Matrix &Matrix::operator+=(const Matrix &other) {
    if (rows_ != other.rows_ || cols_ != other.cols_) {
        throw std::invalid_argument("Matrix +: shape mismatch");
    }
    for (std::size_t i = 0; i < data_.size(); ++i) {
        data_[i] += other.data_[i];
    }
    return *this;
}

Matrix &Matrix::operator-=(const Matrix &other) {
    if (rows_ != other.rows_ || cols_ != other.cols_) {
        throw std::invalid_argument("Matrix -: shape mismatch");
    }
    for (std::size_t i = 0; i < data_.size(); ++i) {
        data_[i] -= other.data_[i];
    }
    return *this;
}

Matrix &Matrix::operator*=(Complex scale) {
    for (auto &x : data_) {
        x *= scale;
    }
    return *this;
}

Matrix operator*(const Matrix &a, const Matrix &b) {
    if (a.cols() != b.rows()) {
        throw std::invalid_argument("Matrix *: inner dimensions differ");
    }
    Matrix out(a.rows(), b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const Complex ark = a(r, k);
            if (ark == Complex{0.0, 0.0}) {
                continue;
            }
            for (std::size_t c = 0; c < b.cols(); ++c) {
                out(r, c) += ark * b(k, c);
            }
        }
    }
    return out;
}

double max_abs_diff(const Matrix &a, const Matrix &b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument("max_abs_diff: shape mismatch");
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) {
        worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
    }
    return worst;
}

StateVector StateVector::basis(std::size_t dim, std::size_t index) {
    std::vector<Complex> amps(dim, Complex{0.0, 0.0});
    amps.at(index) = 1.0;
    return StateVector(std::move(amps));
}

double StateVector::norm() const {
    double s = 0.0;
    for (const auto &a : amps_) {
        s += std::norm(a);
    }
    return std::sqrt(s);
}

StateVector StateVector::normalized() const {
    const double n = norm();
    if (n == 0.0) {
        throw std::invalid_argument("StateVector: cannot normalise the zero vector");
    }
    std::vector<Complex> out(amps_);
    for (auto &a : out) {
        a /= n;
    }
    return StateVector(std::move(out));
}

bool StateVector::is_normalized(double tol) const { return std::abs(norm() - 1.0) <= tol; }

Complex inner(const StateVector &bra, const StateVector &ket) {
    if (bra.dim() != ket.dim()) {
        throw std::invalid_argument("inner: dimension mismatch");
    }
    Complex s{0.0, 0.0};
    for (std::size_t i = 0; i < bra.dim(); ++i) {
        s += std::conj(bra[i]) * ket[i];
    }
    return s;
}

StateVector apply(const Matrix &op, const StateVector &psi) {
    if (op.cols() != psi.dim()) {
        throw std::invalid_argument("apply: dimension mismatch");
    }
    std::vector<Complex> out(op.rows(), Complex{0.0, 0.0});
    for (std::size_t r = 0; r < op.rows(); ++r) {
        for (std::size_t c = 0; c < op.cols(); ++c) {
            out[r] += op(r, c) * psi[c];
        }
    }
    return StateVector(std::move(out));
}

Matrix outer(const StateVector &ket, const StateVector &bra) {
    Matrix m(ket.dim(), bra.dim());
    for (std::size_t r = 0; r < ket.dim(); ++r) {
        for (std::size_t c = 0; c < bra.dim(); ++c) {
            m(r, c) = ket[r] * std::conj(bra[c]);
        }
    }
    return m;
}

Matrix projector(const StateVector &psi) { return outer(psi, psi); }

Matrix tensor(const Matrix &a, const Matrix &b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t ar = 0; ar < a.rows(); ++ar) {
        for (std::size_t ac = 0; ac < a.cols(); ++ac) {
            const Complex x = a(ar, ac);
            for (std::size_t br = 0; br < b.rows(); ++br) {
                for (std::size_t bc = 0; bc < b.cols(); ++bc) {
                    out(ar * b.rows() + br, ac * b.cols() + bc) = x * b(br, bc);
                }
            }
        }
    }
    return out;
}

StateVector tensor(const StateVector &a, const StateVector &b) {
    std::vector<Complex> out(a.dim() * b.dim());
    for (std::size_t i = 0; i < a.dim(); ++i) {
        for (std::size_t j = 0; j < b.dim(); ++j) {
            out[i * b.dim() + j] = a[i] * b[j];
        }
    }
    return StateVector(std::move(out));
}

namespace {

// Mixed-radix digits of `index`, most significant subsystem first.
void unravel(std::size_t index, std::span<const std::size_t> dims, std::span<std::size_t> digits) {
    for (std::size_t k = dims.size(); k-- > 0;) {
        digits[k] = index % dims[k];
        index /= dims[k];
    }
}

} // namespace

Matrix trace_out(const Matrix &m, std::span<const std::size_t> dims, std::span<const bool> keep) {
    if (dims.size() != keep.size()) {
        throw std::invalid_argument("trace_out: dims and keep differ in length");
    }
    const std::size_t total =
        std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
    if (!m.is_square() || m.rows() != total) {
        throw std::invalid_argument("trace_out: matrix size " + std::to_string(m.rows()) +
                                    " does not match subsystem dimensions");
    }
    std::size_t kept = 1;
    for (std::size_t k = 0; k < dims.size(); ++k) {
        if (keep[k]) {
            kept *= dims[k];
        }
    }
    auto reduced_index = [&](std::span<const std::size_t> digits) {
        std::size_t idx = 0;
        for (std::size_t k = 0; k < dims.size(); ++k) {
            if (keep[k]) {
                idx = idx * dims[k] + digits[k];
            }
        }
        return idx;
    };

    Matrix out(kept, kept);
    std::vector<std::size_t> rd(dims.size()), cd(dims.size());
    for (std::size_t r = 0; r < total; ++r) {
        unravel(r, dims, rd);
        for (std::size_t c = 0; c < total; ++c) {
            unravel(c, dims, cd);
            bool traced_match = true;
            for (std::size_t k = 0; k < dims.size() && traced_match; ++k) {
                traced_match = keep[k] || rd[k] == cd[k];
            }
            if (traced_match) {
                out(reduced_index(rd), reduced_index(cd)) += m(r, c);
            }
        }
    }
    return out;
}

Matrix pauli_x() { return Matrix(2, 2, {0.0, 1.0, 1.0, 0.0}); }
Matrix pauli_y() { return Matrix(2, 2, {0.0, Complex{0.0, -1.0}, Complex{0.0, 1.0}, 0.0}); }
Matrix pauli_z() { return Matrix(2, 2, {1.0, 0.0, 0.0, -1.0}); }

StateVector ket0() { return {1.0, 0.0}; }
StateVector ket1() { return {0.0, 1.0}; }
StateVector ket_plus() { return {M_SQRT1_2, M_SQRT1_2}; }
StateVector ket_minus() { return {M_SQRT1_2, -M_SQRT1_2}; }

StateVector bell_state(Bell which) {
    const double s = M_SQRT1_2;
    switch (which) {
    case Bell::PhiPlus:
        return {s, 0.0, 0.0, s};
    case Bell::PhiMinus:
        return {s, 0.0, 0.0, -s};
    case Bell::PsiPlus:
        return {0.0, s, s, 0.0};
    case Bell::PsiMinus:
        return {0.0, s, -s, 0.0};
    }
    throw std::invalid_argument("bell_state: unknown label");
}

Eigensystem eig_hermitian(const Matrix &m) {
    if (!m.is_square()) {
        throw std::invalid_argument("eig_hermitian: matrix is not square");
    }
    if (!m.is_hermitian(kHermitianTol)) {
        throw std::invalid_argument("eig_hermitian: matrix is not Hermitian");
    }
    const std::size_t n = m.rows();
    Matrix a = m;
    // Symmetrise exactly so the rotations see a Hermitian matrix.
    for (std::size_t r = 0; r < n; ++r) {
        a(r, r) = a(r, r).real();
        for (std::size_t c = r + 1; c < n; ++c) {
            const Complex avg = 0.5 * (a(r, c) + std::conj(a(c, r)));
            a(r, c) = avg;
            a(c, r) = std::conj(avg);
        }
    }
    Matrix v = Matrix::identity(n);

    double scale = 0.0;
    for (const auto &x : a.data()) {
        scale += std::norm(x);
    }
    scale = std::sqrt(scale);
    const double target = 1e-12 * std::max(scale, 1e-300);

    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < n; ++c) {
                if (r != c) {
                    s += std::norm(a(r, c));
                }
            }
        }
        return std::sqrt(s);
    };

    constexpr int kMaxSweeps = 100;
    for (int sweep = 0; sweep < kMaxSweeps && off_norm() > target; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double mag = std::abs(a(p, q));
                if (mag <= 1e-300) {
                    continue;
                }
                // Phase step: scale basis vector q by e^{-i phi} so a(p,q) becomes real.
                const Complex phase = std::conj(a(p, q)) / mag;
                for (std::size_t k = 0; k < n; ++k) {
                    a(k, q) *= phase;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    a(q, k) *= std::conj(phase);
                }
                for (std::size_t k = 0; k < n; ++k) {
                    v(k, q) *= phase;
                }
                a(p, q) = mag;
                a(q, p) = mag;

                // Real Jacobi rotation zeroing a(p,q).
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double theta = (aqq - app) / (2.0 * mag);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const Complex akp = a(k, p);
                    const Complex akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const Complex apk = a(p, k);
                    const Complex aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const Complex vkp = v(k, p);
                    const Complex vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });

    Eigensystem out{std::vector<double>(n), Matrix(n, n)};
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = a(order[k], order[k]).real();
        for (std::size_t r = 0; r < n; ++r) {
            out.vectors(r, k) = v(r, order[k]);
        }
    }
    return out;
}

Matrix spectral_apply(const Matrix &m, const std::function<double(double)> &f) {
    const Eigensystem es = eig_hermitian(m);
    const std::size_t n = m.rows();
    Matrix out(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        const double fk = f(es.values[k]);
        if (fk == 0.0) {
            continue;
        }
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < n; ++c) {
                out(r, c) += fk * es.vectors(r, k) * std::conj(es.vectors(c, k));
            }
        }
    }
    return out;
}

DensityMatrix::DensityMatrix(Matrix m) : m_(std::move(m)) {
    if (!m_.is_square() || (m_.rows() != 2 && m_.rows() != 4)) {
        throw std::invalid_argument("DensityMatrix: dimension must be 2 or 4");
    }
    if (!m_.is_hermitian(kHermitianTol)) {
        throw std::invalid_argument("DensityMatrix: not Hermitian");
    }
    if (std::abs(m_.trace() - 1.0) > kTraceTol) {
        throw std::invalid_argument("DensityMatrix: trace is not one");
    }
    if (eig_hermitian(m_).values.front() < -kPositivityTol) {
        throw std::invalid_argument("DensityMatrix: negative eigenvalue");
    }
}

DensityMatrix DensityMatrix::pure(const StateVector &psi) {
    if (!psi.is_normalized()) {
        throw std::invalid_argument("DensityMatrix::pure: state is not normalised");
    }
    return DensityMatrix(projector(psi));
}

DensityMatrix DensityMatrix::maximally_mixed(std::size_t dim) {
    return DensityMatrix(Matrix::identity(dim) * Complex{1.0 / static_cast<double>(dim), 0.0});
}

double DensityMatrix::expectation(const Matrix &op) const { return (m_ * op).trace().real(); }

DensityMatrix tensor(const DensityMatrix &a, const DensityMatrix &b) {
    return DensityMatrix(tensor(a.matrix(), b.matrix()));
}

namespace {

void require_two_qubit(const DensityMatrix &rho, const char *what) {
    if (rho.dim() != 4) {
        throw std::invalid_argument(std::string(what) + ": expected a two-qubit state");
    }
}

} // namespace

DensityMatrix partial_trace(const DensityMatrix &rho, Subsystem keep) {
    require_two_qubit(rho, "partial_trace");
    constexpr std::array<std::size_t, 2> dims{2, 2};
    const std::array<bool, 2> mask{keep == Subsystem::A, keep == Subsystem::B};
    return DensityMatrix(trace_out(rho.matrix(), dims, mask));
}

Matrix partial_transpose(const DensityMatrix &rho) {
    require_two_qubit(rho, "partial_transpose");
    Matrix out(4, 4);
    for (std::size_t a = 0; a < 2; ++a) {
        for (std::size_t b = 0; b < 2; ++b) {
            for (std::size_t a2 = 0; a2 < 2; ++a2) {
                for (std::size_t b2 = 0; b2 < 2; ++b2) {
                    out(2 * a + b, 2 * a2 + b2) = rho.matrix()(2 * a + b2, 2 * a2 + b);
                }
            }
        }
    }
    return out;
}

EntanglementVerdict is_entangled(const DensityMatrix &rho) {
    const double lo = eig_hermitian(partial_transpose(rho)).values.front();
    return {lo < -kEntanglementTol, lo};
}

std::array<std::array<double, 3>, 3> correlation_tensor(const DensityMatrix &rho) {
    require_two_qubit(rho, "correlation_tensor");
    const std::array<Matrix, 3> sigma{pauli_x(), pauli_y(), pauli_z()};
    std::array<std::array<double, 3>, 3> t{};
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            t[i][j] = rho.expectation(tensor(sigma[i], sigma[j]));
        }
    }
    return t;
}

double chsh_max(const DensityMatrix &rho) {
    const auto t = correlation_tensor(rho);
    Matrix ttt(3, 3);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < 3; ++k) {
                s += t[k][i] * t[k][j];
            }
            ttt(i, j) = s;
        }
    }
    const auto values = eig_hermitian(ttt).values;
    const double top_two = std::max(0.0, values[1] + values[2]);
    return std::min(2.0 * std::sqrt(top_two), 2.0 * M_SQRT2);
}

BellWeights::BellWeights(std::array<double, 4> weights) : w_(weights) {
    double total = 0.0;
    for (double x : w_) {
        if (!(x >= 0.0)) {
            throw std::invalid_argument("BellWeights: negative weight");
        }
        total += x;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw std::invalid_argument("BellWeights: weights do not sum to one");
    }
}

DensityMatrix bell_diagonal(const BellWeights &w) {
    Matrix m(4, 4);
    for (std::size_t i = 0; i < 4; ++i) {
        m += projector(bell_state(static_cast<Bell>(i))) * Complex{w[i], 0.0};
    }
    return DensityMatrix(std::move(m));
}

DensityMatrix werner(double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("werner: p must lie in [0, 1]");
    }
    const double rest = (1.0 - p) / 4.0;
    return bell_diagonal(BellWeights({p + rest, rest, rest, rest}));
}

double singlet_fidelity(const DensityMatrix &rho) {
    require_two_qubit(rho, "singlet_fidelity");
    const StateVector phi = bell_state(Bell::PhiPlus);
    return inner(phi, apply(rho.matrix(), phi)).real();
}

} // namespace qcb::qcore
