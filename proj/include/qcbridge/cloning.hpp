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
 * Cloning fidelity of an ideal N -> M cloner and of a phase-insensitive
 * optical amplifier, a stimulated/spontaneous emission Monte Carlo, and
 * the least-squares recovery of the amplifier quality Q from fidelity data.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "qcbridge/parallel.hpp"

namespace qcb::cloning {

struct CopyCounts {
    int n = 1; ///< input copies
    int m = 1; ///< output copies

    /// Throws std::invalid_argument unless 1 <= n <= m.
    void validate() const;
};

struct AmplifierSetting {
    double mu_in = 1.0;
    double mu_out = 1.0;
    double q = 1.0; ///< amplifier quality in [0, 1]

    /// Throws std::invalid_argument unless 0 < mu_in <= mu_out and 0 <= q <= 1.
    void validate() const;
};

/// (MN + M + N) / (M (N + 2)).
[[nodiscard]] double fidelity_opt(CopyCounts c);

/// (Q mu_out mu_in + mu_out + mu_in) / (Q mu_out mu_in + 2 mu_out).
[[nodiscard]] double fidelity_classical(AmplifierSetting a);

struct McMean {
    double mean;
    double std_error;
    std::uint64_t trials;
};

/**
 * Start with n photons in the signal mode and none in the orthogonal mode;
 * add photons one at a time, choosing mode k with weight n_k + 1, until m
 * photons are present. Returns the mean signal fraction n_signal / m.
 */
[[nodiscard]] McMean birth_process_mc(CopyCounts c, const McOptions &options);

struct MixtureReport {
    double mixture;   ///< Poisson-averaged optimal fidelity
    double amplifier; ///< fidelity_classical at Q = 1, mu_out = gain * mu_in
    double deviation; ///< mixture - amplifier
    int terms;        ///< photon numbers summed
};

/**
 * Average of fidelity_opt(N, max(N, round(gain N))) over N ~ Poisson(mu_in),
 * conditioned on N >= 1 and truncated once the Poisson mass reaches
 * 1 - 1e-12. Requires 0 < mu_in <= 50 and gain >= 1.
 */
[[nodiscard]] MixtureReport poisson_mixture_fidelity(double mu_in, double gain);

struct FidelityRecord {
    double mu_in;
    double mu_out;
    double fidelity;
};

using FidelityDataset = std::vector<FidelityRecord>;

/// Throws std::invalid_argument on non-positive intensities or fidelity outside (0, 1].
void validate(std::span<const FidelityRecord> data);

struct FitResult {
    double q;
    double rss;
    bool degenerate; ///< every record has the same mu_in
};

/**
 * Least-squares Q over [0, 1]: a 101-point scan, then golden-section
 * refinement inside the neighbouring grid cells. Needs at least 3 records.
 */
[[nodiscard]] FitResult fit_q(std::span<const FidelityRecord> data);

/// Sum of squared residuals of the amplifier model at quality q.
[[nodiscard]] double fit_objective(std::span<const FidelityRecord> data, double q);

struct SyntheticSpec {
    double mu_min = 0.5;
    double mu_max = 50.0;
    int points = 25; ///< log-spaced mu_in values
    double gain = 10.0;
    double q = 0.8;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
};

/// Amplifier-model data with optional additive Gaussian noise.
[[nodiscard]] FidelityDataset synthetic_dataset(const SyntheticSpec &spec);

/// CSV with header `mu_in,mu_out,fidelity`.
[[nodiscard]] FidelityDataset read_dataset_csv(const std::filesystem::path &path);
void write_dataset_csv(const std::filesystem::path &path, std::span<const FidelityRecord> data);

} // namespace qcb::cloning
