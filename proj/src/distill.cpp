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

#include "qcbridge/distill.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "qcbridge/errors.hpp"

namespace qcb::distill {

using qcore::Complex;
using qcore::DensityMatrix;
using qcore::Matrix;
using qkd::SymbolDistribution;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
    if (a == kNegInf) {
        return b;
    }
    if (b == kNegInf) {
        return a;
    }
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(-std::abs(a - b)));
}

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

// Binary entropy of the posterior 1 / (1 + e^{gap}), stable for large |gap|.
double posterior_entropy(double log_w0, double log_w1) {
    if (log_w0 == kNegInf || log_w1 == kNegInf) {
        return 0.0;
    }
    const double gap = std::abs(log_w0 - log_w1);
    const double minority = 1.0 / (1.0 + std::exp(gap));
    return qkd::binary_entropy(minority);
}

void require_flip_symmetric(const SymbolDistribution &t) {
    for (std::size_t a = 0; a < 2; ++a) {
        for (std::size_t b = 0; b < 2; ++b) {
            for (std::size_t e = 0; e < t.eve_alphabet(); ++e) {
                if (std::abs(t(a, b, e) - t(1 - a, 1 - b, t.flip_eve(e))) > 1e-9) {
                    throw std::invalid_argument(
                        "advantage distillation: table is not bit-flip symmetric");
                }
            }
        }
    }
}

void require_block(int n, int n_max) {
    if (n < 1 || n > n_max) {
        throw std::invalid_argument("block size must lie in [1, " + std::to_string(n_max) +
                                    "], got " + std::to_string(n));
    }
}

// Calls fn(counts) for every composition of n into counts.size() parts.
template <class Fn>
void for_each_composition(int n, std::vector<int> &counts, std::size_t slot, Fn &fn) {
    if (slot + 1 == counts.size()) {
        counts[slot] = n;
        fn(counts);
        return;
    }
    for (int k = 0; k <= n; ++k) {
        counts[slot] = k;
        for_each_composition(n - k, counts, slot + 1, fn);
    }
}

} // namespace

AdOutcome ad_exact(const SymbolDistribution &table, int block_size) {
    require_block(block_size, kMaxExactBlock);
    require_flip_symmetric(table);
    const int n = block_size;
    const std::size_t eve = table.eve_alphabet();

    const double eps = table.error_rate();
    AdOutcome out;
    out.block_size = n;
    out.p_accept = std::pow(eps, n) + std::pow(1.0 - eps, n);
    // eps_post = 1 / (1 + ((1 - eps)/eps)^N), written to survive tiny eps.
    out.eps_post = eps <= 0.0 ? 0.0 : 1.0 / (1.0 + std::exp(n * (std::log1p(-eps) - std::log(eps))));
    const double h_bob = qkd::binary_entropy(out.eps_post);

    // With the announcement fixed to zero, x_i = c for every position and an
    // accepted block has y_i all equal to c or all equal to 1 - c.
    // log_p[c][k][e] = log P(a = c, b = c XOR k, e).
    double log_p[2][2][4];
    for (std::size_t c = 0; c < 2; ++c) {
        for (std::size_t k = 0; k < 2; ++k) {
            for (std::size_t e = 0; e < eve; ++e) {
                log_p[c][k][e] = safe_log(table(c, c ^ k, e));
            }
        }
    }

    const double log_n_fact = std::lgamma(n + 1.0);
    std::vector<double> log_w0;
    std::vector<double> log_w1;
    double log_total = kNegInf;
    std::vector<int> counts(eve, 0);
    auto visit = [&](const std::vector<int> &cnt) {
        double log_mult = log_n_fact;
        for (int m : cnt) {
            log_mult -= std::lgamma(m + 1.0);
        }
        double w[2];
        for (std::size_t c = 0; c < 2; ++c) {
            double branch[2] = {0.0, 0.0};
            for (std::size_t k = 0; k < 2; ++k) {
                for (std::size_t e = 0; e < eve; ++e) {
                    if (cnt[e] > 0) {
                        branch[k] += cnt[e] * log_p[c][k][e];
                    }
                }
            }
            w[c] = log_mult + log_add(branch[0], branch[1]);
        }
        log_w0.push_back(w[0]);
        log_w1.push_back(w[1]);
        log_total = log_add(log_total, log_add(w[0], w[1]));
    };
    for_each_composition(n, counts, 0, visit);

    double h_eve = 0.0;
    for (std::size_t i = 0; i < log_w0.size(); ++i) {
        const double weight = std::exp(log_add(log_w0[i], log_w1[i]) - log_total);
        if (weight > 0.0) {
            h_eve += weight * posterior_entropy(log_w0[i], log_w1[i]);
        }
    }
    // Acceptance does not depend on c, so H(C | accept) = 1.
    out.i_ab = 1.0 - h_bob;
    out.i_ae = 1.0 - h_eve;
    out.advantage = h_eve - h_bob;
    out.h_bob = h_bob;
    out.h_eve = h_eve;
    return out;
}

bool advantage_significant(const AdOutcome &o) {
    return o.advantage > kRelativeAdvantageFloor * (o.h_eve + o.h_bob);
}

namespace {

struct McPartial {
    std::uint64_t trials = 0;
    std::uint64_t accepted = 0;
    std::uint64_t bob_wrong = 0;
    double sum_h = 0.0;
    double sum_h2 = 0.0;
};

} // namespace

AdEstimate ad_monte_carlo(const SymbolDistribution &table, int block_size, const McOptions &opt) {
    require_block(block_size, 1 << 16);
    if (opt.trials < 10'000) {
        throw std::invalid_argument("ad_monte_carlo: at least 1e4 trials are required");
    }
    if (opt.partitions == 0) {
        throw std::invalid_argument("ad_monte_carlo: partition count must be positive");
    }
    const std::size_t eve = table.eve_alphabet();
    const std::vector<double> &cells = table.table();
    std::vector<double> cumulative(cells.size());
    double run = 0.0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        run += cells[i];
        cumulative[i] = run;
    }
    std::vector<double> log_cell(cells.size());
    std::transform(cells.begin(), cells.end(), log_cell.begin(), safe_log);
    auto log_p = [&](std::size_t a, std::size_t b, std::size_t e) {
        return log_cell[(a * 2 + b) * eve + e];
    };

    const int n = block_size;
    auto run_partition = [&](std::size_t k) {
        McPartial part;
        part.trials = partition_size(opt.trials, opt.partitions, k);
        Rng rng(substream_seed(opt.seed, k));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::vector<unsigned> msg(static_cast<std::size_t>(n));
        std::vector<unsigned> eve_sym(static_cast<std::size_t>(n));
        for (std::uint64_t t = 0; t < part.trials; ++t) {
            const unsigned c = unit(rng) < 0.5 ? 0U : 1U;
            bool accept = true;
            unsigned bob_const = 0;
            for (int i = 0; i < n; ++i) {
                const double u = unit(rng) * run;
                const auto cell = static_cast<std::size_t>(
                    std::upper_bound(cumulative.begin(), cumulative.end() - 1, u) - cumulative.begin());
                const unsigned x = static_cast<unsigned>(cell / (2 * eve));
                const unsigned y = static_cast<unsigned>((cell / eve) % 2);
                msg[i] = x ^ c;
                eve_sym[i] = static_cast<unsigned>(cell % eve);
                const unsigned seen = y ^ msg[i];
                if (i == 0) {
                    bob_const = seen;
                } else if (seen != bob_const) {
                    accept = false;
                }
            }
            if (!accept) {
                continue;
            }
            ++part.accepted;
            part.bob_wrong += bob_const != c ? 1 : 0;
            double log_w[2];
            for (unsigned guess = 0; guess < 2; ++guess) {
                double branch[2] = {0.0, 0.0};
                for (unsigned kflip = 0; kflip < 2; ++kflip) {
                    for (int i = 0; i < n; ++i) {
                        branch[kflip] += log_p(msg[i] ^ guess, msg[i] ^ kflip, eve_sym[i]);
                    }
                }
                log_w[guess] = log_add(branch[0], branch[1]);
            }
            const double h = posterior_entropy(log_w[0], log_w[1]);
            part.sum_h += h;
            part.sum_h2 += h * h;
        }
        return part;
    };

    const auto parts = map_indexed<McPartial>(opt.partitions, opt.exec, run_partition);
    McPartial total;
    for (const auto &p : parts) {
        total.trials += p.trials;
        total.accepted += p.accepted;
        total.bob_wrong += p.bob_wrong;
        total.sum_h += p.sum_h;
        total.sum_h2 += p.sum_h2;
    }
    if (total.accepted == 0) {
        throw NumericalError("ad_monte_carlo: no block accepted; N = " + std::to_string(n) +
                             " is too large for " + std::to_string(opt.trials) + " trials");
    }

    AdEstimate est;
    est.trials = total.trials;
    est.accepted = total.accepted;
    const auto trials = static_cast<double>(total.trials);
    const auto acc = static_cast<double>(total.accepted);
    AdOutcome &v = est.value;
    v.block_size = n;
    v.p_accept = acc / trials;
    v.eps_post = static_cast<double>(total.bob_wrong) / acc;
    const double mean_h = total.sum_h / acc;
    const double var_h = std::max(0.0, total.sum_h2 / acc - mean_h * mean_h);
    v.i_ab = 1.0 - qkd::binary_entropy(v.eps_post);
    v.i_ae = 1.0 - mean_h;
    v.advantage = v.i_ab - v.i_ae;
    v.h_bob = qkd::binary_entropy(v.eps_post);
    v.h_eve = mean_h;

    est.se_p_accept = std::sqrt(v.p_accept * (1.0 - v.p_accept) / trials);
    est.se_eps_post = std::sqrt(v.eps_post * (1.0 - v.eps_post) / acc);
    const double slope = (v.eps_post > 0.0 && v.eps_post < 1.0)
                             ? std::abs(std::log2((1.0 - v.eps_post) / v.eps_post))
                             : 0.0;
    est.se_i_ab = slope * est.se_eps_post;
    est.se_i_ae = std::sqrt(var_h / acc);
    est.se_advantage = std::hypot(est.se_i_ab, est.se_i_ae);
    return est;
}

std::optional<int> ad_min_block(const SymbolDistribution &table, int n_max) {
    require_block(n_max, kMaxExactBlock);
    for (int n = 1; n <= n_max; ++n) {
        if (advantage_significant(ad_exact(table, n))) {
            return n;
        }
    }
    return std::nullopt;
}

RecurrenceStep recurrence_step(double f) {
    // Fidelities computed from states may overshoot [0, 1] by rounding.
    constexpr double kSlack = 1e-12;
    if (!(f >= -kSlack && f <= 1.0 + kSlack)) {
        throw std::invalid_argument("recurrence_step: fidelity must lie in [0, 1]");
    }
    f = std::clamp(f, 0.0, 1.0);
    const double g = (1.0 - f) / 3.0;
    const double num = f * f + g * g;
    const double den = f * f + 2.0 * f * g + 5.0 * g * g;
    return {std::clamp(num / den, 0.0, 1.0), den};
}

RecurrenceTrace recurrence_iterate(double initial_fidelity, int rounds) {
    if (rounds < 0) {
        throw std::invalid_argument("recurrence_iterate: rounds must be non-negative");
    }
    RecurrenceTrace trace;
    trace.reserve(static_cast<std::size_t>(rounds));
    double f = initial_fidelity;
    for (int r = 0; r < rounds; ++r) {
        const RecurrenceStep step = recurrence_step(f);
        trace.push_back(step);
        f = step.fidelity;
    }
    return trace;
}

StateRecurrence recurrence_step_state(const DensityMatrix &pair) {
    if (pair.dim() != 4) {
        throw std::invalid_argument("recurrence_step_state: expected a two-qubit state");
    }
    // Qubit order A1 B1 A2 B2; index = 8 a1 + 4 b1 + 2 a2 + b2.
    const Matrix two = qcore::tensor(pair.matrix(), pair.matrix());
    auto cnot = [](std::size_t idx) {
        const std::size_t a1 = (idx >> 3) & 1U;
        const std::size_t b1 = (idx >> 2) & 1U;
        const std::size_t a2 = ((idx >> 1) & 1U) ^ a1;
        const std::size_t b2 = (idx & 1U) ^ b1;
        return (a1 << 3) | (b1 << 2) | (a2 << 1) | b2;
    };
    Matrix after(16, 16);
    for (std::size_t r = 0; r < 16; ++r) {
        for (std::size_t c = 0; c < 16; ++c) {
            after(cnot(r), cnot(c)) = two(r, c);
        }
    }
    Matrix kept(4, 4);
    for (std::size_t outcome : {0U, 3U}) {
        for (std::size_t r = 0; r < 4; ++r) {
            for (std::size_t c = 0; c < 4; ++c) {
                kept(r, c) += after(4 * r + outcome, 4 * c + outcome);
            }
        }
    }
    const double p = kept.trace().real();
    if (!(p > 0.0)) {
        throw NumericalError("recurrence_step_state: round never succeeds");
    }
    return {DensityMatrix(kept * Complex{1.0 / p, 0.0}), p};
}

std::vector<EquivalenceRow> equivalence_sweep(std::span<const double> grid, int n_max,
                                              qkd::EveMeasurement eve, Exec exec) {
    require_block(n_max, kMaxExactBlock);
    for (double d : grid) {
        qkd::AttackParams{d, eve}.validate();
    }
    return map_indexed<EquivalenceRow>(grid.size(), exec, [&](std::size_t i) {
        const double d = grid[i];
        const DensityMatrix rho = qkd::attacked_pair(d);
        const auto verdict = qcore::is_entangled(rho);
        const auto table = qkd::symbol_distribution({d, eve}, qkd::Basis::Z);
        return EquivalenceRow{d,
                              verdict.entangled,
                              verdict.min_eigenvalue,
                              qcore::chsh_max(rho),
                              qkd::mutual_information(table, qkd::Pair::AB),
                              qkd::mutual_information(table, qkd::Pair::AE),
                              ad_min_block(table, n_max)};
    });
}

std::optional<double> ad_threshold(std::span<const EquivalenceRow> rows) {
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        if (rows[i].ad_min_block && !rows[i + 1].ad_min_block) {
            return 0.5 * (rows[i].disturbance + rows[i + 1].disturbance);
        }
    }
    return std::nullopt;
}

} // namespace qcb::distill
