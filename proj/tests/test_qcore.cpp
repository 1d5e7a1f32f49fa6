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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "qcbridge/qcore.hpp"

namespace {

using namespace qcb::qcore;

Matrix random_hermitian(std::size_t n, std::mt19937_64 &rng) {
    std::normal_distribution<double> g;
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = g(rng);
        for (std::size_t j = i + 1; j < n; ++j) {
            m(i, j) = Complex(g(rng), g(rng));
            m(j, i) = std::conj(m(i, j));
        }
    }
    return m;
}

// exp(i(a X + b Y + c Z)) in closed form.
Matrix random_unitary_2(std::mt19937_64 &rng) {
    std::normal_distribution<double> g;
    const double a = g(rng), b = g(rng), c = g(rng);
    const double r = std::sqrt(a * a + b * b + c * c);
    const Complex i(0.0, 1.0);
    Matrix n = pauli_x() * (a / r) + pauli_y() * (b / r) + pauli_z() * (c / r);
    return Matrix::identity(2) * std::cos(r) + n * (i * std::sin(r));
}

DensityMatrix random_two_qubit_state(std::mt19937_64 &rng) {
    std::normal_distribution<double> g;
    Matrix a(4, 4);
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            a(i, j) = Complex(g(rng), g(rng));
        }
    }
    Matrix m = a * a.adjoint();
    return DensityMatrix(m * (1.0 / m.trace().real()));
}

TEST(Tensor, BasisProductsAndIdentity) {
    const auto k00 = tensor(ket0(), ket0());
    ASSERT_EQ(k00.dim(), 4u);
    EXPECT_EQ(k00[0], Complex(1.0));
    for (std::size_t i = 1; i < 4; ++i) {
        EXPECT_EQ(k00[i], Complex(0.0));
    }
    EXPECT_EQ(max_abs_diff(tensor(Matrix::identity(2), Matrix::identity(2)), Matrix::identity(4)),
              0.0);
}

TEST(Tensor, PhiPlusAmplitudes) {
    const auto phi = bell_state(Bell::PhiPlus);
    const double s = 1.0 / std::sqrt(2.0);
    EXPECT_NEAR(phi[0].real(), s, 1e-15);
    EXPECT_NEAR(std::abs(phi[1]), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(phi[2]), 0.0, 1e-15);
    EXPECT_NEAR(phi[3].real(), s, 1e-15);
}

TEST(PartialTrace, Examples) {
    const auto half = DensityMatrix::maximally_mixed(2);
    const auto phi = DensityMatrix::pure(bell_state(Bell::PhiPlus));
    EXPECT_LT(max_abs_diff(partial_trace(phi, Subsystem::A).matrix(), half.matrix()), 1e-15);
    EXPECT_LT(max_abs_diff(partial_trace(werner(0.7), Subsystem::A).matrix(), half.matrix()), 1e-15);
}

TEST(PartialTrace, RecoversProductFactors) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g;
    for (int rep = 0; rep < 50; ++rep) {
        auto qubit = [&] {
            StateVector v{Complex(g(rng), g(rng)), Complex(g(rng), g(rng))};
            const double w = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
            Matrix m = projector(v.normalized()) * w + Matrix::identity(2) * ((1.0 - w) / 2.0);
            return DensityMatrix(m);
        };
        const auto rho = qubit();
        const auto sigma = qubit();
        const auto joint = tensor(rho, sigma);
        EXPECT_LT(max_abs_diff(partial_trace(joint, Subsystem::A).matrix(), rho.matrix()), 1e-12);
        EXPECT_LT(max_abs_diff(partial_trace(joint, Subsystem::B).matrix(), sigma.matrix()), 1e-12);
        EXPECT_FALSE(is_entangled(joint).entangled);
        EXPECT_GE(is_entangled(joint).min_eigenvalue, -1e-9);
    }
}

TEST(Entanglement, PhiPlusHasNegativePartialTranspose) {
    const auto v = is_entangled(DensityMatrix::pure(bell_state(Bell::PhiPlus)));
    EXPECT_TRUE(v.entangled);
    EXPECT_NEAR(v.min_eigenvalue, -0.5, 1e-12);
}

TEST(Entanglement, WernerBoundary) {
    EXPECT_NEAR(is_entangled(werner(1.0 / 3.0)).min_eigenvalue, 0.0, 1e-9);
    EXPECT_FALSE(is_entangled(werner(1.0 / 3.0 - 1e-3)).entangled);
    EXPECT_TRUE(is_entangled(werner(1.0 / 3.0 + 1e-3)).entangled);
    for (int k = 0; k <= 100; ++k) {
        const double p = k / 100.0;
        EXPECT_EQ(is_entangled(werner(p)).entangled, p > 1.0 / 3.0) << "p=" << p;
    }
}

TEST(Chsh, Examples) {
    EXPECT_NEAR(chsh_max(DensityMatrix::pure(bell_state(Bell::PhiPlus))), 2.0 * std::sqrt(2.0),
                1e-12);
    EXPECT_NEAR(chsh_max(DensityMatrix::maximally_mixed(4)), 0.0, 1e-12);
    for (double p : {0.1, 0.5, 0.7071, 0.9}) {
        EXPECT_NEAR(chsh_max(werner(p)), 2.0 * std::sqrt(2.0) * p, 1e-12);
    }
}

TEST(Chsh, InvariantUnderLocalUnitaries) {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 40; ++rep) {
        const auto rho = random_two_qubit_state(rng);
        const Matrix u = tensor(random_unitary_2(rng), random_unitary_2(rng));
        const DensityMatrix rotated(u * rho.matrix() * u.adjoint());
        EXPECT_NEAR(chsh_max(rotated), chsh_max(rho), 1e-8);
        const double c = chsh_max(rho);
        EXPECT_GE(c, 0.0);
        EXPECT_LE(c, 2.0 * std::sqrt(2.0) + 1e-12);
    }
}

TEST(BellDiagonal, Constructors) {
    const auto phi = DensityMatrix::pure(bell_state(Bell::PhiPlus));
    EXPECT_LT(max_abs_diff(bell_diagonal(BellWeights({1, 0, 0, 0})).matrix(), phi.matrix()), 1e-15);
    EXPECT_LT(max_abs_diff(werner(0.0).matrix(), DensityMatrix::maximally_mixed(4).matrix()), 1e-15);
    EXPECT_NEAR(singlet_fidelity(werner(0.0)), 0.25, 1e-15);
    EXPECT_NEAR(singlet_fidelity(werner(0.6)), 0.7, 1e-15);
    EXPECT_THROW(BellWeights({0.5, 0.5, 0.1, 0.0}), std::invalid_argument);
    EXPECT_THROW(BellWeights({1.1, -0.1, 0.0, 0.0}), std::invalid_argument);
}

TEST(DensityMatrixType, RejectsInvalidOperators) {
    Matrix m = Matrix::identity(4) * 0.3;
    EXPECT_THROW(DensityMatrix{m}, std::invalid_argument);
    Matrix nh = Matrix::identity(2) * 0.5;
    nh(0, 1) = 0.1;
    EXPECT_THROW(DensityMatrix{nh}, std::invalid_argument);
    Matrix neg = Matrix::diagonal(std::vector<double>{1.5, -0.5});
    EXPECT_THROW(DensityMatrix{neg}, std::invalid_argument);
}

TEST(Eigen, Examples) {
    const auto id = eig_hermitian(Matrix::identity(4));
    for (double v : id.values) {
        EXPECT_NEAR(v, 1.0, 1e-15);
    }
    const auto sx = eig_hermitian(pauli_x());
    EXPECT_NEAR(sx.values[0], -1.0, 1e-14);
    EXPECT_NEAR(sx.values[1], 1.0, 1e-14);
    EXPECT_THROW((void)eig_hermitian(pauli_x() * Complex(0.0, 1.0)), std::invalid_argument);
}

TEST(Eigen, RandomHermitianReconstruction) {
    std::mt19937_64 rng(2026);
    for (std::size_t n = 1; n <= 8; ++n) {
        for (int rep = 0; rep < 25; ++rep) {
            const Matrix m = random_hermitian(n, rng);
            const auto es = eig_hermitian(m);
            const Matrix lam = Matrix::diagonal(es.values);
            EXPECT_LE(max_abs_diff(es.vectors * lam * es.vectors.adjoint(), m), 1e-9);
            EXPECT_LE(max_abs_diff(es.vectors.adjoint() * es.vectors, Matrix::identity(n)), 1e-9);
            for (std::size_t k = 1; k < n; ++k) {
                EXPECT_LE(es.values[k - 1], es.values[k]);
            }
        }
    }
}

TEST(Protocol, PhiPlusGivesEqualBitsInBothBases) {
    const auto rho = DensityMatrix::pure(bell_state(Bell::PhiPlus));
    for (const auto &basis : {std::array{ket0(), ket1()}, std::array{ket_plus(), ket_minus()}}) {
        double equal = 0.0;
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
                const double p = rho.expectation(projector(tensor(basis[a], basis[b])));
                if (a == b) {
                    EXPECT_NEAR(p, 0.5, 1e-15);
                    equal += p;
                }
            }
        }
        EXPECT_NEAR(equal, 1.0, 1e-15);
    }
}

TEST(Invariants, GeneratedStatesAreValid) {
    std::mt19937_64 rng(9);
    for (int rep = 0; rep < 50; ++rep) {
        const auto rho = random_two_qubit_state(rng);
        EXPECT_NEAR(rho.matrix().trace().real(), 1.0, 1e-10);
        EXPECT_LE(rho.matrix().hermiticity_defect(), 1e-10);
        EXPECT_GE(eig_hermitian(rho.matrix()).values.front(), -1e-10);
        const auto pt = partial_trace(rho, Subsystem::A);
        EXPECT_NEAR(pt.matrix().trace().real(), 1.0, 1e-10);
    }
}

} // namespace
