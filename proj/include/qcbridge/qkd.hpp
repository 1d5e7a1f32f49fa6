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
 * Entanglement-based key distribution under a one-parameter individual
 * attack.
 *
 * Eve's attack is parameterised by the disturbance D (the QBER). The
 * joint Alice-Bob-Eve state is
 *
 *     Psi = sum_i sqrt(lambda_i) |Bell_i>_AB |e_i>_E,
 *     lambda(D) = ((1-D)^2, D(1-D), D(1-D), D^2),
 *
 * with orthonormal probe states |e_i>. The reduced Alice-Bob state is Bell
 * diagonal and the error rate is D in both the z and the x basis. Eve
 * measures her probe after the basis announcement, one pair at a time.
 */

#pragma once

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

#include "qcbridge/qcore.hpp"

namespace qcb::qkd {

enum class EveMeasurement {
    HelstromBinary, ///< optimal guess of Alice's bit
    SquareRoot4,    ///< square-root measurement on the four conditional probes
};

[[nodiscard]] std::string_view to_string(EveMeasurement m);
/// Accepts "helstrom_binary" or "square_root_4".
[[nodiscard]] EveMeasurement parse_eve_measurement(std::string_view name);

enum class Basis { Z, X };

struct AttackParams {
    double disturbance = 0.0;
    EveMeasurement eve = EveMeasurement::HelstromBinary;

    /// Throws std::invalid_argument unless 0 <= D <= 1/2.
    void validate() const;
};

/// Bell weights lambda(D).
[[nodiscard]] qcore::BellWeights attack_weights(double disturbance);

/// Pure state on A (x) B (x) E with dimensions 2 x 2 x 4.
class TripartiteState {
  public:
    static constexpr std::array<std::size_t, 3> kDims{2, 2, 4};

    /// Throws std::invalid_argument on wrong size or norm.
    explicit TripartiteState(qcore::StateVector psi);

    [[nodiscard]] const qcore::StateVector &vector() const { return psi_; }

    [[nodiscard]] qcore::DensityMatrix reduced_ab() const;

    /// Unnormalised Eve probe (<alice| (x) <bob| (x) 1) Psi.
    [[nodiscard]] qcore::StateVector eve_probe(const qcore::StateVector &alice,
                                               const qcore::StateVector &bob) const;

  private:
    qcore::StateVector psi_;
};

[[nodiscard]] TripartiteState attack_state(const AttackParams &params);

/// rho_AB for disturbance D.
[[nodiscard]] qcore::DensityMatrix attacked_pair(double disturbance);

/// Measurement basis vectors {|0>, |1>} or {|+>, |->}; bit 0 maps to the first.
[[nodiscard]] std::array<qcore::StateVector, 2> basis_vectors(Basis basis);

/// Joint table P(a, b, e) with |A| = |B| = 2.
class SymbolDistribution {
  public:
    /// Throws std::invalid_argument for negative entries or bad total.
    SymbolDistribution(std::size_t eve_alphabet, std::vector<double> table);

    [[nodiscard]] std::size_t eve_alphabet() const { return eve_; }
    [[nodiscard]] double operator()(std::size_t a, std::size_t b, std::size_t e) const {
        return p_[(a * 2 + b) * eve_ + e];
    }
    [[nodiscard]] const std::vector<double> &table() const { return p_; }

    [[nodiscard]] double p_ab(std::size_t a, std::size_t b) const;
    [[nodiscard]] double p_ae(std::size_t a, std::size_t e) const;
    [[nodiscard]] double p_a(std::size_t a) const;
    /// P(a != b).
    [[nodiscard]] double error_rate() const;

    /// Eve's label after flipping both Alice's and Bob's bit.
    [[nodiscard]] std::size_t flip_eve(std::size_t e) const { return eve_ - 1 - e; }

  private:
    std::size_t eve_;
    std::vector<double> p_;
};

/// Born-rule table after sifting to a common basis.
[[nodiscard]] SymbolDistribution symbol_distribution(const AttackParams &params, Basis basis);

struct HelstromResult {
    double success_probability;
    qcore::Matrix pi0; ///< guess "state 0"
    qcore::Matrix pi1;
};

/**
 * Optimal two-outcome discrimination of rho0 (prior prior0) against rho1.
 * Pi0 projects onto the positive part of prior0*rho0 - (1-prior0)*rho1.
 */
[[nodiscard]] HelstromResult helstrom(const qcore::DensityMatrix &rho0,
                                      const qcore::DensityMatrix &rho1, double prior0);

enum class Pair { AB, AE };

/// Base-2 binary entropy with 0 log 0 = 0.
[[nodiscard]] double binary_entropy(double p);

/// I = H(X) + H(Y) - H(X,Y) in bits.
[[nodiscard]] double mutual_information(const SymbolDistribution &joint, Pair pair);

/// I(A;B) - I(A;E) for the z-basis table at disturbance D.
[[nodiscard]] double one_way_margin(double disturbance, EveMeasurement eve);

enum class ThresholdKind { OneWay, Chsh, Entanglement };

[[nodiscard]] std::string_view to_string(ThresholdKind k);

/**
 * Critical disturbance by bisection on [0, 1/2]: the zero of
 * I(A;B) - I(A;E), of chsh_max - 2, or of the smallest eigenvalue of the
 * partial transpose. The returned midpoint lies within `tol` of the root.
 * Throws NumericalError when the bracket shows no sign change.
 */
[[nodiscard]] double threshold(ThresholdKind kind, double tol,
                               EveMeasurement eve = EveMeasurement::HelstromBinary);

} // namespace qcb::qkd
