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

#include "qcbridge/qkd.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "qcbridge/errors.hpp"

namespace qcb::qkd {

using qcore::Complex;
using qcore::DensityMatrix;
using qcore::Matrix;
using qcore::StateVector;

std::string_view to_string(EveMeasurement m) {
    switch (m) {
    case EveMeasurement::HelstromBinary:
        return "helstrom_binary";
    case EveMeasurement::SquareRoot4:
        return "square_root_4";
    }
    return "?";
}

EveMeasurement parse_eve_measurement(std::string_view name) {
    if (name == "helstrom_binary") {
        return EveMeasurement::HelstromBinary;
    }
    if (name == "square_root_4") {
        return EveMeasurement::SquareRoot4;
    }
    throw std::invalid_argument("unknown Eve measurement '" + std::string(name) + "'");
}

void AttackParams::validate() const {
    if (!(disturbance >= 0.0 && disturbance <= 0.5)) {
        throw std::invalid_argument("disturbance must lie in [0, 1/2], got " +
                                    std::to_string(disturbance));
    }
}

qcore::BellWeights attack_weights(double d) {
    AttackParams{d, EveMeasurement::HelstromBinary}.validate();
    const double keep = 1.0 - d;
    return qcore::BellWeights({keep * keep, d * keep, d * keep, d * d});
}

TripartiteState::TripartiteState(StateVector psi) : psi_(std::move(psi)) {
    if (psi_.dim() != 16) {
        throw std::invalid_argument("TripartiteState: expected 16 amplitudes");
    }
    if (!psi_.is_normalized()) {
        throw std::invalid_argument("TripartiteState: state is not normalised");
    }
}

DensityMatrix TripartiteState::reduced_ab() const {
    constexpr std::array<bool, 3> keep{true, true, false};
    return DensityMatrix(qcore::trace_out(qcore::projector(psi_), kDims, keep));
}

StateVector TripartiteState::eve_probe(const StateVector &alice, const StateVector &bob) const {
    std::vector<Complex> probe(4, Complex{0.0, 0.0});
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            const Complex w = std::conj(alice[i]) * std::conj(bob[j]);
            for (std::size_t e = 0; e < 4; ++e) {
                probe[e] += w * psi_[(2 * i + j) * 4 + e];
            }
        }
    }
    return StateVector(std::move(probe));
}

TripartiteState attack_state(const AttackParams &params) {
    params.validate();
    const auto lambda = attack_weights(params.disturbance);
    std::vector<Complex> amps(16, Complex{0.0, 0.0});
    for (std::size_t k = 0; k < 4; ++k) {
        const StateVector bell = qcore::bell_state(static_cast<qcore::Bell>(k));
        const double w = std::sqrt(lambda[k]);
        for (std::size_t ab = 0; ab < 4; ++ab) {
            amps[ab * 4 + k] += w * bell[ab];
        }
    }
    return TripartiteState(StateVector(std::move(amps)));
}

DensityMatrix attacked_pair(double disturbance) {
    return qcore::bell_diagonal(attack_weights(disturbance));
}

std::array<StateVector, 2> basis_vectors(Basis basis) {
    if (basis == Basis::Z) {
        return {qcore::ket0(), qcore::ket1()};
    }
    return {qcore::ket_plus(), qcore::ket_minus()};
}

SymbolDistribution::SymbolDistribution(std::size_t eve_alphabet, std::vector<double> table)
    : eve_(eve_alphabet), p_(std::move(table)) {
    if (eve_ == 0 || p_.size() != 4 * eve_) {
        throw std::invalid_argument("SymbolDistribution: table size does not match alphabet");
    }
    double total = 0.0;
    for (double x : p_) {
        if (!(x >= 0.0)) {
            throw std::invalid_argument("SymbolDistribution: negative probability");
        }
        total += x;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw std::invalid_argument("SymbolDistribution: probabilities do not sum to one");
    }
}

double SymbolDistribution::p_ab(std::size_t a, std::size_t b) const {
    double s = 0.0;
    for (std::size_t e = 0; e < eve_; ++e) {
        s += (*this)(a, b, e);
    }
    return s;
}

double SymbolDistribution::p_ae(std::size_t a, std::size_t e) const {
    return (*this)(a, 0, e) + (*this)(a, 1, e);
}

double SymbolDistribution::p_a(std::size_t a) const { return p_ab(a, 0) + p_ab(a, 1); }

double SymbolDistribution::error_rate() const { return p_ab(0, 1) + p_ab(1, 0); }

namespace {

// Positive part goes to outcome 0; the null space is split evenly, which
// keeps the measurement optimal and symmetric between the two hypotheses.
double helstrom_weight(double x) {
    constexpr double kNull = 1e-14;
    if (x > kNull) {
        return 1.0;
    }
    return x < -kNull ? 0.0 : 0.5;
}

} // namespace

HelstromResult helstrom(const DensityMatrix &rho0, const DensityMatrix &rho1, double prior0) {
    if (!(prior0 >= 0.0 && prior0 <= 1.0)) {
        throw std::invalid_argument("helstrom: prior must lie in [0, 1]");
    }
    if (rho0.dim() != rho1.dim()) {
        throw std::invalid_argument("helstrom: states differ in dimension");
    }
    const double prior1 = 1.0 - prior0;
    const Matrix gamma = rho0.matrix() * Complex{prior0, 0.0} - rho1.matrix() * Complex{prior1, 0.0};
    Matrix pi0 = qcore::spectral_apply(gamma, helstrom_weight);
    Matrix pi1 = Matrix::identity(gamma.rows()) - pi0;
    const double success =
        prior0 * rho0.expectation(pi0) + prior1 * rho1.expectation(pi1);
    return {success, std::move(pi0), std::move(pi1)};
}

namespace {

// POVM on Eve's probe for the requested strategy. `probes[2a+b]` is the
// unnormalised conditional probe; its squared norm is P(a, b).
std::vector<Matrix> eve_povm(const std::array<StateVector, 4> &probes, EveMeasurement eve) {
    if (eve == EveMeasurement::HelstromBinary) {
        std::array<Matrix, 2> weighted{Matrix(4, 4), Matrix(4, 4)};
        for (std::size_t a = 0; a < 2; ++a) {
            for (std::size_t b = 0; b < 2; ++b) {
                weighted[a] += qcore::projector(probes[2 * a + b]);
            }
        }
        // weighted[a] is P(a) rho_a, so its difference is the Helstrom operator.
        const Matrix gamma = weighted[0] - weighted[1];
        Matrix pi0 = qcore::spectral_apply(gamma, helstrom_weight);
        Matrix pi1 = Matrix::identity(4) - pi0;
        return {std::move(pi0), std::move(pi1)};
    }

    Matrix s(4, 4);
    for (const auto &p : probes) {
        s += qcore::projector(p);
    }
    const auto es = qcore::eig_hermitian(s);
    const double cutoff = 1e-14 * std::max(1.0, es.values.back());
    const Matrix inv_sqrt =
        qcore::spectral_apply(s, [cutoff](double x) { return x > cutoff ? 1.0 / std::sqrt(x) : 0.0; });
    const Matrix kernel =
        qcore::spectral_apply(s, [cutoff](double x) { return x > cutoff ? 0.0 : 1.0; });
    std::vector<Matrix> povm;
    for (const auto &p : probes) {
        povm.push_back(qcore::projector(qcore::apply(inv_sqrt, p)));
    }
    povm[0] += kernel;
    return povm;
}

} // namespace

SymbolDistribution symbol_distribution(const AttackParams &params, Basis basis) {
    const TripartiteState psi = attack_state(params);
    const auto vecs = basis_vectors(basis);
    std::array<StateVector, 4> probes;
    for (std::size_t a = 0; a < 2; ++a) {
        for (std::size_t b = 0; b < 2; ++b) {
            probes[2 * a + b] = psi.eve_probe(vecs[a], vecs[b]);
        }
    }
    const auto povm = eve_povm(probes, params.eve);
    const std::size_t eve_size = povm.size();
    std::vector<double> table(4 * eve_size, 0.0);
    for (std::size_t ab = 0; ab < 4; ++ab) {
        const StateVector &phi = probes[ab];
        for (std::size_t e = 0; e < eve_size; ++e) {
            const double p = qcore::inner(phi, qcore::apply(povm[e], phi)).real();
            table[ab * eve_size + e] = std::max(0.0, p);
        }
    }
    // Renormalise away rounding so the table validates at 1e-12.
    double total = 0.0;
    for (double x : table) {
        total += x;
    }
    for (double &x : table) {
        x /= total;
    }
    return SymbolDistribution(eve_size, std::move(table));
}

double binary_entropy(double p) {
    if (p <= 0.0 || p >= 1.0) {
        return 0.0;
    }
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

namespace {

double entropy_term(double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; }

} // namespace

double mutual_information(const SymbolDistribution &joint, Pair pair) {
    const std::size_t other = pair == Pair::AB ? 2 : joint.eve_alphabet();
    auto pxy = [&](std::size_t a, std::size_t y) {
        return pair == Pair::AB ? joint.p_ab(a, y) : joint.p_ae(a, y);
    };
    double hx = 0.0;
    double hy = 0.0;
    double hxy = 0.0;
    for (std::size_t a = 0; a < 2; ++a) {
        hx += entropy_term(joint.p_a(a));
    }
    for (std::size_t y = 0; y < other; ++y) {
        double py = 0.0;
        for (std::size_t a = 0; a < 2; ++a) {
            const double p = pxy(a, y);
            py += p;
            hxy += entropy_term(p);
        }
        hy += entropy_term(py);
    }
    return std::max(0.0, hx + hy - hxy);
}

double one_way_margin(double disturbance, EveMeasurement eve) {
    const auto table = symbol_distribution({disturbance, eve}, Basis::Z);
    return mutual_information(table, Pair::AB) - mutual_information(table, Pair::AE);
}

std::string_view to_string(ThresholdKind k) {
    switch (k) {
    case ThresholdKind::OneWay:
        return "one_way";
    case ThresholdKind::Chsh:
        return "chsh";
    case ThresholdKind::Entanglement:
        return "entanglement";
    }
    return "?";
}

double threshold(ThresholdKind kind, double tol, EveMeasurement eve) {
    if (!(tol >= 1e-6)) {
        throw std::invalid_argument("threshold: tolerance must be at least 1e-6");
    }
    std::function<double(double)> f;
    switch (kind) {
    case ThresholdKind::OneWay:
        f = [eve](double d) { return one_way_margin(d, eve); };
        break;
    case ThresholdKind::Chsh:
        f = [](double d) { return qcore::chsh_max(attacked_pair(d)) - 2.0; };
        break;
    case ThresholdKind::Entanglement:
        // Positive while entangled, matching the sign of the other two.
        f = [](double d) {
            return -qcore::eig_hermitian(qcore::partial_transpose(attacked_pair(d))).values.front();
        };
        break;
    }
    double lo = 0.0;
    double hi = 0.5;
    const double flo = f(lo);
    const double fhi = f(hi);
    if (!(flo > 0.0 && fhi < 0.0)) {
        throw NumericalError("threshold(" + std::string(to_string(kind)) +
                             "): no sign change on [0, 1/2]");
    }
    // Midpoint of a bracket of width <= 2 tol is within tol of the root.
    while (hi - lo > 2.0 * tol) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace qcb::qkd
