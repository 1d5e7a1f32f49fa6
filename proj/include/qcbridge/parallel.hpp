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
 * Deterministic partitioned execution shared by the Monte Carlo and sweep
 * kernels.
 *
 * Work is cut into a fixed number of partitions that does not depend on the
 * thread count. Partition k draws from its own generator seeded with
 * substream_seed(seed, k), writes into slot k, and the slots are reduced in
 * index order afterwards. (seed, work size, partition count) therefore fixes
 * the result bit for bit, and the serial path is the reference the OpenMP
 * path is tested against.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <random>
#include <vector>

namespace qcb {

enum class Exec { Serial, Parallel };

/// SplitMix64 finaliser.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

using Rng = std::mt19937_64;

/// Seeded Monte Carlo budget shared by every sampling kernel.
struct McOptions {
    std::uint64_t trials = 100'000;
    std::uint64_t seed = 0;
    std::uint64_t partitions = 64;
    Exec exec = Exec::Parallel;
};

/// Number of items partition k of `parts` receives out of `total`.
constexpr std::uint64_t partition_size(std::uint64_t total, std::uint64_t parts, std::uint64_t k) {
    return total / parts + (k < total % parts ? 1 : 0);
}

/// Offset of partition k's first item.
constexpr std::uint64_t partition_begin(std::uint64_t total, std::uint64_t parts, std::uint64_t k) {
    return k * (total / parts) + (k < total % parts ? k : total % parts);
}

/**
 * Evaluate fn(k) for k in [0, n) into slot k. Under Exec::Parallel the
 * loop is an OpenMP dynamic schedule; fn must only touch its own slot.
 * An exception thrown by fn is rethrown on the calling thread (lowest
 * index first).
 */
template <class Result, class Fn>
std::vector<Result> map_indexed(std::size_t n, Exec exec, Fn &&fn) {
    std::vector<Result> out(n);
    if (exec == Exec::Parallel) {
        std::vector<std::exception_ptr> errors(n);
        const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 1)
        for (std::ptrdiff_t k = 0; k < count; ++k) {
            const auto slot = static_cast<std::size_t>(k);
            try {
                out[slot] = fn(slot);
            } catch (...) {
                errors[slot] = std::current_exception();
            }
        }
        for (const auto &e : errors) {
            if (e) {
                std::rethrow_exception(e);
            }
        }
    } else {
        for (std::size_t k = 0; k < n; ++k) {
            out[k] = fn(k);
        }
    }
    return out;
}

} // namespace qcb
