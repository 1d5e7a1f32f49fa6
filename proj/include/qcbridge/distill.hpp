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
 * The two purification routes: classical advantage distillation on the
 * measured table P(A,B,E), and recurrence distillation on the pair state.
 *
 * Advantage distillation uses the repetition-code announcement: Alice
 * draws a uniform secret bit c and publishes x_i XOR c for a block of N
 * positions; Bob keeps the block iff y_i XOR (x_i XOR c) is constant and
 * takes that constant as his guess of c.
 */

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qcbridge/parallel.hpp"
#include "qcbridge/qcore.hpp"
#include "qcbridge/qkd.hpp"

namespace qcb::distill {

inline constexpr int kMaxExactBlock = 64;
/// Advantage counts only above this fraction of H(C|E) + H(C|B).
inline constexpr double kRelativeAdvantageFloor = 1e-9;

struct AdOutcome {
    int block_size = 0;
    double p_accept = 0.0;
    double eps_post = 0.0; ///< Bob's error on accepted blocks
    double i_ab = 0.0;     ///< I(C; Bob's guess | accept)
    double i_ae = 0.0;     ///< I(C; announcement, Eve's symbols | accept)
    double advantage = 0.0;
    double h_bob = 0.0; ///< H(C | Bob's guess, accept)
    double h_eve = 0.0; ///< H(C | Eve's view, accept)
};

/**
 * advantage > kRelativeAdvantageFloor * (h_eve + h_bob). Near the critical
 * disturbance the advantage decays exponentially with N; both equivocations
 * are evaluated directly rather than as 1 - I, so the comparison stays
 * meaningful far below any fixed absolute cutoff.
 */
[[nodiscard]] bool advantage_significant(const AdOutcome &o);

/**
 * Exact block statistics. Eve's side sums over symbol counts, so the cost
 * is the number of compositions of N into |E| parts. The table must be
 * invariant under flipping Alice's and Bob's bits together with Eve's
 * relabeling; that symmetry lets the announcement be fixed to all zeros.
 */
[[nodiscard]] AdOutcome ad_exact(const qkd::SymbolDistribution &table, int block_size);

struct AdEstimate {
    AdOutcome value;
    double se_p_accept = 0.0;
    double se_eps_post = 0.0;
    double se_i_ab = 0.0;
    double se_i_ae = 0.0;
    double se_advantage = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t accepted = 0;
};

/**
 * Simulated blocks. Eve's information is the mean binary entropy of her
 * exact posterior on c given what she saw. Throws NumericalError when no
 * block is accepted and std::invalid_argument below 1e4 trials.
 */
[[nodiscard]] AdEstimate ad_monte_carlo(const qkd::SymbolDistribution &table, int block_size,
                                        const McOptions &options);

/// Smallest N <= n_max whose advantage is significant.
[[nodiscard]] std::optional<int> ad_min_block(const qkd::SymbolDistribution &table, int n_max);

struct RecurrenceStep {
    double fidelity;
    double success_probability;
};

using RecurrenceTrace = std::vector<RecurrenceStep>;

/// One round of the two-copy recurrence on Werner-twirled pairs.
[[nodiscard]] RecurrenceStep recurrence_step(double fidelity);

/// Entry k is the state after round k + 1.
[[nodiscard]] RecurrenceTrace recurrence_iterate(double initial_fidelity, int rounds);

struct StateRecurrence {
    qcore::DensityMatrix state; ///< surviving pair, before twirling
    double success_probability;
};

/**
 * The same round carried out on two explicit copies: bilateral CNOT from
 * the first pair onto the second, z measurement of the second pair, keep
 * on equal outcomes.
 */
[[nodiscard]] StateRecurrence recurrence_step_state(const qcore::DensityMatrix &pair);

struct EquivalenceRow {
    double disturbance;
    bool entangled;
    double pt_min_eigenvalue;
    double chsh;
    double i_ab;
    double i_ae;
    std::optional<int> ad_min_block;
};

[[nodiscard]] std::vector<EquivalenceRow>
equivalence_sweep(std::span<const double> grid, int n_max,
                  qkd::EveMeasurement eve = qkd::EveMeasurement::HelstromBinary,
                  Exec exec = Exec::Parallel);

/**
 * Midpoint between the largest grid point where advantage distillation
 * works and the next point where it does not. Empty when the sweep never
 * changes from present to absent.
 */
[[nodiscard]] std::optional<double> ad_threshold(std::span<const EquivalenceRow> rows);

} // namespace qcb::distill
