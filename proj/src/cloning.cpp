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

#include "qcbridge/cloning.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

namespace qcb::cloning {

void CopyCounts::validate() const {
    if (n < 1 || m < n) {
        throw std::invalid_argument(fmt::format("copy counts need 1 <= N <= M, got N={} M={}", n, m));
    }
}

void AmplifierSetting::validate() const {
    if (!(mu_in > 0.0)) {
        throw std::invalid_argument("mu_in must be positive");
    }
    if (!(mu_out >= mu_in)) {
        throw std::invalid_argument("mu_out must be at least mu_in");
    }
    if (!(q >= 0.0 && q <= 1.0)) {
        throw std::invalid_argument("Q must lie in [0, 1]");
    }
}

double fidelity_opt(CopyCounts c) {
    c.validate();
    const double n = c.n;
    const double m = c.m;
    return (m * n + m + n) / (m * (n + 2.0));
}

double fidelity_classical(AmplifierSetting a) {
    a.validate();
    const double cross = a.q * a.mu_out * a.mu_in;
    return (cross + a.mu_out + a.mu_in) / (cross + 2.0 * a.mu_out);
}

namespace {

struct Moments {
    double sum = 0.0;
    double sum2 = 0.0;
    std::uint64_t count = 0;
};

} // namespace

McMean birth_process_mc(CopyCounts c, const McOptions &opt) {
    c.validate();
    if (opt.trials < 10'000) {
        throw std::invalid_argument("birth_process_mc: at least 1e4 trials are required");
    }
    if (opt.partitions == 0) {
        throw std::invalid_argument("birth_process_mc: partition count must be positive");
    }
    if (c.n == c.m) {
        return {1.0, 0.0, opt.trials};
    }
    const double m = c.m;
    auto run_partition = [&](std::size_t k) {
        Moments mom;
        mom.count = partition_size(opt.trials, opt.partitions, k);
        Rng rng(substream_seed(opt.seed, k));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (std::uint64_t t = 0; t < mom.count; ++t) {
            int signal = c.n;
            for (int total = c.n; total < c.m; ++total) {
                // Signal weight n_s + 1 against orthogonal weight (total - n_s) + 1.
                if (unit(rng) * (total + 2) < signal + 1) {
                    ++signal;
                }
            }
            const double f = signal / m;
            mom.sum += f;
            mom.sum2 += f * f;
        }
        return mom;
    };
    const auto parts = map_indexed<Moments>(opt.partitions, opt.exec, run_partition);
    Moments total;
    for (const auto &p : parts) {
        total.sum += p.sum;
        total.sum2 += p.sum2;
        total.count += p.count;
    }
    const auto count = static_cast<double>(total.count);
    const double mean = total.sum / count;
    const double var = std::max(0.0, total.sum2 / count - mean * mean);
    return {mean, std::sqrt(var / (count - 1.0)), total.count};
}

MixtureReport poisson_mixture_fidelity(double mu_in, double gain) {
    if (!(mu_in > 0.0 && mu_in <= 50.0)) {
        throw std::invalid_argument("poisson_mixture_fidelity: mu_in must lie in (0, 50]");
    }
    if (!(gain >= 1.0)) {
        throw std::invalid_argument("poisson_mixture_fidelity: gain must be at least 1");
    }
    const double p0 = std::exp(-mu_in);
    double mass = p0;
    double weighted = 0.0;
    int terms = 0;
    for (int n = 1; mass < 1.0 - 1e-12 && n < 10'000; ++n) {
        const double pn = std::exp(n * std::log(mu_in) - mu_in - std::lgamma(n + 1.0));
        const int m = std::max(n, static_cast<int>(std::lround(gain * n)));
        weighted += pn * fidelity_opt({n, m});
        mass += pn;
        ++terms;
    }
    MixtureReport r{};
    r.mixture = weighted / (mass - p0);
    r.amplifier = fidelity_classical({mu_in, gain * mu_in, 1.0});
    r.deviation = r.mixture - r.amplifier;
    r.terms = terms;
    return r;
}

void validate(std::span<const FidelityRecord> data) {
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto &r = data[i];
        if (!(r.mu_in > 0.0 && r.mu_out > 0.0)) {
            throw std::invalid_argument(fmt::format("record {}: intensities must be positive", i));
        }
        if (!(r.fidelity > 0.0 && r.fidelity <= 1.0)) {
            throw std::invalid_argument(fmt::format("record {}: fidelity must lie in (0, 1]", i));
        }
    }
}

double fit_objective(std::span<const FidelityRecord> data, double q) {
    double rss = 0.0;
    for (const auto &r : data) {
        const double cross = q * r.mu_out * r.mu_in;
        const double model = (cross + r.mu_out + r.mu_in) / (cross + 2.0 * r.mu_out);
        rss += (model - r.fidelity) * (model - r.fidelity);
    }
    return rss;
}

FitResult fit_q(std::span<const FidelityRecord> data) {
    if (data.size() < 3) {
        throw std::invalid_argument("fit_q: at least 3 records are required");
    }
    validate(data);

    constexpr int kGrid = 101;
    int best = 0;
    double best_val = fit_objective(data, 0.0);
    for (int k = 1; k < kGrid; ++k) {
        const double v = fit_objective(data, k / 100.0);
        if (v < best_val) {
            best_val = v;
            best = k;
        }
    }

    double lo = std::max(0, best - 1) / 100.0;
    double hi = std::min(kGrid - 1, best + 1) / 100.0;
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = fit_objective(data, x1);
    double f2 = fit_objective(data, x2);
    while (hi - lo > 1e-9) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = fit_objective(data, x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = fit_objective(data, x2);
        }
    }
    double q = 0.5 * (lo + hi);
    double rss = fit_objective(data, q);
    // A minimum sitting on the grid (including the ends of [0, 1]) wins ties.
    if (best_val <= rss) {
        q = best / 100.0;
        rss = best_val;
    }

    const bool degenerate = std::all_of(data.begin(), data.end(), [&](const FidelityRecord &r) {
        return std::abs(r.mu_in - data.front().mu_in) <= 1e-12 * std::abs(data.front().mu_in);
    });
    return {q, rss, degenerate};
}

FidelityDataset synthetic_dataset(const SyntheticSpec &spec) {
    if (spec.points < 1 || !(spec.mu_min > 0.0) || !(spec.mu_max >= spec.mu_min)) {
        throw std::invalid_argument("synthetic_dataset: bad intensity grid");
    }
    if (!(spec.noise_sigma >= 0.0)) {
        throw std::invalid_argument("synthetic_dataset: noise sigma must be non-negative");
    }
    Rng rng(substream_seed(spec.seed, 0));
    std::normal_distribution<double> noise(0.0, 1.0);
    FidelityDataset out;
    out.reserve(static_cast<std::size_t>(spec.points));
    const double step =
        spec.points > 1 ? std::log(spec.mu_max / spec.mu_min) / (spec.points - 1) : 0.0;
    for (int i = 0; i < spec.points; ++i) {
        const double mu_in = spec.mu_min * std::exp(step * i);
        const double mu_out = spec.gain * mu_in;
        double f = fidelity_classical({mu_in, mu_out, spec.q});
        if (spec.noise_sigma > 0.0) {
            f += spec.noise_sigma * noise(rng);
        }
        out.push_back({mu_in, mu_out, std::min(f, 1.0)});
    }
    return out;
}

namespace {

double parse_field(const std::string &text, const std::filesystem::path &path, int line) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception &) {
        used = 0;
    }
    if (used == 0 || used != text.size()) {
        throw std::invalid_argument(
            fmt::format("{}:{}: '{}' is not a number", path.string(), line, text));
    }
    return v;
}

} // namespace

FidelityDataset read_dataset_csv(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument(fmt::format("cannot open dataset '{}'", path.string()));
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw std::invalid_argument(fmt::format("{}: empty file", path.string()));
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != "mu_in,mu_out,fidelity") {
        throw std::invalid_argument(
            fmt::format("{}: expected header 'mu_in,mu_out,fidelity'", path.string()));
    }
    FidelityDataset out;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::stringstream ss(line);
        std::string a, b, c, extra;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c, ',') ||
            std::getline(ss, extra, ',')) {
            throw std::invalid_argument(
                fmt::format("{}:{}: expected three comma-separated fields", path.string(), lineno));
        }
        out.push_back({parse_field(a, path, lineno), parse_field(b, path, lineno),
                       parse_field(c, path, lineno)});
    }
    validate(out);
    return out;
}

void write_dataset_csv(const std::filesystem::path &path, std::span<const FidelityRecord> data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
    }
    out << "mu_in,mu_out,fidelity\n";
    for (const auto &r : data) {
        out << fmt::format("{:.17g},{:.17g},{:.17g}\n", r.mu_in, r.mu_out, r.fidelity);
    }
}

} // namespace qcb::cloning
