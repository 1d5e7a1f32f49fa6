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
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "qcbridge/cloning.hpp"

namespace {

using namespace qcb;
using namespace qcb::cloning;

// Distribution of signal photons after growing from n to m, by dynamic
// programming over the urn; returns E[signal / m].
double birth_process_exact(int n, int m) {
    std::vector<double> p(static_cast<std::size_t>(m + 1), 0.0);
    p[static_cast<std::size_t>(n)] = 1.0;
    for (int total = n; total < m; ++total) {
        std::vector<double> next(p.size(), 0.0);
        for (int s = n; s <= total; ++s) {
            const double w = p[static_cast<std::size_t>(s)];
            const double up = (s + 1.0) / (total + 2.0);
            next[static_cast<std::size_t>(s + 1)] += w * up;
            next[static_cast<std::size_t>(s)] += w * (1.0 - up);
        }
        p = std::move(next);
    }
    double mean = 0.0;
    for (int s = n; s <= m; ++s) {
        mean += p[static_cast<std::size_t>(s)] * s / m;
    }
    return mean;
}

std::filesystem::path temp_file(const std::string &name) {
    return std::filesystem::temp_directory_path() /
           ("qcb_cloning_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
            "_" + name);
}

TEST(FidelityOpt, Examples) {
    EXPECT_NEAR(fidelity_opt({1, 2}), 5.0 / 6.0, 1e-15);
    EXPECT_NEAR(fidelity_opt({1, 3}), 7.0 / 9.0, 1e-15);
    for (int n = 1; n <= 20; ++n) {
        EXPECT_EQ(fidelity_opt({n, n}), 1.0);
    }
    EXPECT_NEAR(fidelity_opt({1, 1'000'000}), 2.0 / 3.0, 1e-6);
    EXPECT_THROW((void)fidelity_opt({3, 2}), std::invalid_argument);
    EXPECT_THROW((void)fidelity_opt({0, 2}), std::invalid_argument);
}

TEST(FidelityOpt, BoundsAndMonotonicity) {
    for (int n = 1; n <= 40; ++n) {
        for (int m = n; m <= 60; ++m) {
            const double f = fidelity_opt({n, m});
            EXPECT_GT(f, 0.5);
            EXPECT_LE(f, 1.0);
            if (m > n) {
                EXPECT_LE(f, fidelity_opt({n, m - 1}));
            }
            if (n < m) {
                EXPECT_GE(fidelity_opt({n + 1, m}), f);
            }
        }
    }
}

TEST(FidelityClassical, ReducesToOptimalAtUnitQuality) {
    double worst = 0.0;
    for (int n = 1; n <= 50; ++n) {
        for (int m = n; m <= 50; ++m) {
            worst = std::max(worst, std::abs(fidelity_classical({double(n), double(m), 1.0}) -
                                             fidelity_opt({n, m})));
        }
    }
    EXPECT_LE(worst, 1e-12);
}

TEST(FidelityClassical, LimitsAndRandomBounds) {
    EXPECT_NEAR(fidelity_classical({1e-9, 5.0, 0.0}), 0.5, 1e-9);
    EXPECT_NEAR(fidelity_classical({1e7, 1e8, 0.5}), 1.0, 1e-6);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        const double mu_in = std::exp(8 * u(rng) - 4);
        const double mu_out = mu_in * (1 + 100 * u(rng));
        const double f = fidelity_classical({mu_in, mu_out, u(rng)});
        EXPECT_GT(f, 0.5);
        EXPECT_LE(f, 1.0);
    }
    EXPECT_THROW((void)fidelity_classical({2.0, 1.0, 0.5}), std::invalid_argument);
    EXPECT_THROW((void)fidelity_classical({1.0, 2.0, 1.5}), std::invalid_argument);
}

TEST(BirthProcess, ExactEnumerationEqualsOptimalFidelity) {
    EXPECT_NEAR(birth_process_exact(1, 2), 5.0 / 6.0, 1e-12);
    EXPECT_NEAR(birth_process_exact(1, 3), 7.0 / 9.0, 1e-12);
    for (int n = 1; n <= 12; ++n) {
        for (int m = n; m <= 40; ++m) {
            EXPECT_NEAR(birth_process_exact(n, m), fidelity_opt({n, m}), 1e-12);
        }
    }
}

TEST(BirthProcess, MonteCarloWithinThreeSigma) {
    for (int n = 1; n <= 4; ++n) {
        for (int m = n; m <= 8; ++m) {
            McOptions opt;
            opt.trials = 100'000;
            opt.seed = static_cast<std::uint64_t>(10 * n + m);
            const auto r = birth_process_mc({n, m}, opt);
            const double target = birth_process_exact(n, m);
            if (n == m) {
                EXPECT_EQ(r.mean, 1.0);
                continue;
            }
            EXPECT_LE(std::abs(r.mean - target), 3 * r.std_error) << n << "->" << m;
            EXPECT_GT(r.std_error, 0.0);
        }
    }
}

TEST(BirthProcess, DeterministicAcrossExecution) {
    McOptions opt;
    opt.trials = 30'000;
    opt.seed = 4;
    opt.partitions = 5;
    opt.exec = Exec::Serial;
    const auto a = birth_process_mc({2, 7}, opt);
    opt.exec = Exec::Parallel;
    const auto b = birth_process_mc({2, 7}, opt);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.std_error, b.std_error);
    EXPECT_EQ(a.trials, 30'000u);
    opt.trials = 100;
    EXPECT_THROW((void)birth_process_mc({1, 2}, opt), std::invalid_argument);
}

TEST(Mixture, Examples) {
    EXPECT_NEAR(poisson_mixture_fidelity(3.0, 1.0).mixture, 1.0, 1e-12);
    const auto r = poisson_mixture_fidelity(5.0, 10.0);
    EXPECT_GT(r.mixture, 0.5);
    EXPECT_LE(r.mixture, 1.0);
    EXPECT_NEAR(r.deviation, r.mixture - fidelity_classical({5.0, 50.0, 1.0}), 1e-15);
    EXPECT_GT(r.terms, 10);
    double prev = 0.0;
    for (double mu : {0.5, 2.0, 10.0, 50.0}) {
        const double f = poisson_mixture_fidelity(mu, 4.0).mixture;
        EXPECT_GT(f, prev);
        prev = f;
    }
    EXPECT_GT(prev, 0.97);
    EXPECT_THROW((void)poisson_mixture_fidelity(51.0, 2.0), std::invalid_argument);
    EXPECT_THROW((void)poisson_mixture_fidelity(1.0, 0.5), std::invalid_argument);
}

TEST(FitQ, NoiselessRecovery) {
    for (double q : {0.8, 1.0, 0.0, 0.37}) {
        SyntheticSpec spec;
        spec.q = q;
        const auto data = synthetic_dataset(spec);
        ASSERT_EQ(data.size(), 25u);
        const auto fit = fit_q(data);
        EXPECT_NEAR(fit.q, q, 1e-5) << q;
        EXPECT_FALSE(fit.degenerate);
        EXPECT_LE(fit.rss, 1e-12);
    }
}

TEST(FitQ, ResultIsGlobalMinimumOfGrid) {
    SyntheticSpec spec;
    spec.noise_sigma = 0.01;
    spec.seed = 12;
    const auto data = synthetic_dataset(spec);
    const auto fit = fit_q(data);
    for (int k = 0; k <= 1000; ++k) {
        EXPECT_LE(fit.rss, fit_objective(data, k / 1000.0) + 1e-15);
    }
}

TEST(FitQ, NoisyRecoveryOverRepetitions) {
    int hits = 0;
    for (std::uint64_t rep = 0; rep < 100; ++rep) {
        SyntheticSpec spec;
        spec.noise_sigma = 0.005;
        spec.seed = rep;
        hits += std::abs(fit_q(synthetic_dataset(spec)).q - 0.8) <= 0.02 ? 1 : 0;
    }
    EXPECT_GE(hits, 95);
}

TEST(FitQ, ErrorsAndDegenerateFlag) {
    FidelityDataset two{{1, 2, 0.8}, {2, 4, 0.8}};
    EXPECT_THROW((void)fit_q(two), std::invalid_argument);
    FidelityDataset same{{2, 4, 0.8}, {2, 8, 0.75}, {2, 20, 0.7}};
    EXPECT_TRUE(fit_q(same).degenerate);
    FidelityDataset bad{{1, 2, 0.8}, {2, 4, 1.2}, {3, 5, 0.9}};
    EXPECT_THROW((void)fit_q(bad), std::invalid_argument);
}

TEST(DatasetCsv, RoundTripIsExact) {
    SyntheticSpec spec;
    spec.noise_sigma = 0.003;
    spec.seed = 5;
    const auto data = synthetic_dataset(spec);
    const auto path = temp_file("roundtrip.csv");
    write_dataset_csv(path, data);
    const auto back = read_dataset_csv(path);
    std::filesystem::remove(path);
    ASSERT_EQ(back.size(), data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        EXPECT_EQ(back[i].mu_in, data[i].mu_in);
        EXPECT_EQ(back[i].mu_out, data[i].mu_out);
        EXPECT_EQ(back[i].fidelity, data[i].fidelity);
    }
}

TEST(DatasetCsv, ErrorsNameThePath) {
    const auto missing = temp_file("missing.csv");
    try {
        (void)read_dataset_csv(missing);
        FAIL() << "expected an exception";
    } catch (const std::invalid_argument &e) {
        EXPECT_NE(std::string(e.what()).find(missing.string()), std::string::npos);
    }
    const auto path = temp_file("bad.csv");
    for (const std::string body : {"mu,out,f\n1,2,0.9\n", "mu_in,mu_out,fidelity\n1,2,abc\n",
                                   "mu_in,mu_out,fidelity\n1,2\n", "mu_in,mu_out,fidelity\n1,2,3\n"}) {
        std::ofstream(path) << body;
        EXPECT_THROW((void)read_dataset_csv(path), std::invalid_argument) << body;
    }
    std::ofstream(path) << "mu_in,mu_out,fidelity\r\n1,2,0.9\r\n\r\n";
    EXPECT_EQ(read_dataset_csv(path).size(), 1u);
    std::filesystem::remove(path);
}

} // namespace
