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

#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <fmt/chrono.h>
#include <fmt/format.h>
#include <json.hpp>

#include "qcbridge/cloning.hpp"
#include "qcbridge/distill.hpp"
#include "qcbridge/errors.hpp"
#include "qcbridge/qkd.hpp"
#include "qcbridge/version.hpp"
#include "qcbridge/weakmeas.hpp"

namespace qcb::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

/// An empty cell is an absent optional value.
using Cell = std::variant<std::monostate, double, std::int64_t, bool, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

struct Outcome {
    Table table;
    json summary = json::object();
};

std::string csv_cell(const Cell &c) {
    return std::visit(
        [](const auto &v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) {
                return "";
            } else if constexpr (std::is_same_v<T, double>) {
                return fmt::format("{:.17g}", v);
            } else if constexpr (std::is_same_v<T, bool>) {
                return v ? "true" : "false";
            } else {
                return fmt::format("{}", v);
            }
        },
        c);
}

json json_number(double v) {
    // JSON has no literal for non-finite values.
    return std::isfinite(v) ? json(v) : json(fmt::format("{}", v));
}

json json_cell(const Cell &c) {
    return std::visit(
        [](const auto &v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) {
                return nullptr;
            } else if constexpr (std::is_same_v<T, double>) {
                return json_number(v);
            } else {
                return v;
            }
        },
        c);
}

Cell optional_cell(const std::optional<int> &v) {
    return v ? Cell{static_cast<std::int64_t>(*v)} : Cell{};
}

json optional_json(const std::optional<double> &v) { return v ? json_number(*v) : json(nullptr); }

std::string table_csv(const Table &t) {
    std::string out;
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
        out += (i ? "," : "") + t.columns[i];
    }
    out += '\n';
    for (const auto &row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out += (i ? "," : "") + csv_cell(row[i]);
        }
        out += '\n';
    }
    return out;
}

json table_json(const Table &t) {
    json rows = json::array();
    for (const auto &row : t.rows) {
        json obj = json::object();
        for (std::size_t i = 0; i < row.size(); ++i) {
            obj[t.columns[i]] = json_cell(row[i]);
        }
        rows.push_back(std::move(obj));
    }
    return rows;
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}",
                       fmt::gmtime(std::chrono::system_clock::to_time_t(now)));
}

/// Parameter text as it would be typed on the command line.
json echo_value(const std::string &text) {
    if (!text.empty() && text.find_first_not_of("0123456789") == std::string::npos) {
        try {
            return std::stoull(text);
        } catch (const std::out_of_range &) {
            return text;
        }
    }
    char *end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (!text.empty() && end == text.c_str() + text.size() && std::isfinite(v)) {
        return v;
    }
    return text;
}

std::vector<double> linear_grid(double lo, double hi, int steps) {
    std::vector<double> g;
    for (int k = 0; k < steps; ++k) {
        g.push_back(steps == 1 ? lo : lo + (hi - lo) * k / (steps - 1));
    }
    return g;
}

std::vector<double> log_grid(double lo, double hi, int steps) {
    std::vector<double> g;
    for (int k = 0; k < steps; ++k) {
        g.push_back(steps == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(k) / (steps - 1)));
    }
    return g;
}

void require_ordered(double lo, double hi, const char *lo_name, const char *hi_name) {
    if (hi < lo) {
        throw std::invalid_argument(fmt::format("{} must not exceed {}", lo_name, hi_name));
    }
}

/// Least-squares slope of log y on log x, skipping non-positive points.
std::optional<double> loglog_slope(const std::vector<double> &x, const std::vector<double> &y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] > 0.0 && y[i] > 0.0) {
            const double lx = std::log(x[i]);
            const double ly = std::log(y[i]);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
            n += 1;
        }
    }
    const double den = n * sxx - sx * sx;
    if (n < 2 || !(std::abs(den) > 0.0)) {
        return std::nullopt;
    }
    return (n * sxy - sx * sy) / den;
}

// ---------------------------------------------------------------------------
// Options shared by every command.

struct Common {
    std::uint64_t seed = 0;
    std::string outdir;
    std::string config;
    std::string format = "both";
    std::string exec = "parallel";
    std::size_t partitions = 64;

    [[nodiscard]] Exec exec_mode() const { return exec == "serial" ? Exec::Serial : Exec::Parallel; }
    [[nodiscard]] McOptions mc(std::uint64_t trials) const {
        return {trials, seed, partitions, exec_mode()};
    }
};

struct Command {
    std::string title; ///< "qkd sweep"
    std::string stem;  ///< "qkd-sweep"
    CLI::App *app = nullptr;
    std::function<Outcome()> run;
};

void add_common(CLI::App *sub, Common &c) {
    sub->add_option("--seed", c.seed, "random seed (default 0: runs are reproducible)");
    sub->add_option("--outdir", c.outdir,
                    fmt::format("output directory (default ${} or .)", kOutdirEnv));
    sub->add_option("--config", c.config,
                    "flat JSON object of flag values; command-line flags take precedence");
    sub->add_option("--format", c.format, "which reports to write")
        ->check(CLI::IsMember({"csv", "json", "both"}));
    sub->add_option("--exec", c.exec, "serial reference path or OpenMP kernels")
        ->check(CLI::IsMember({"serial", "parallel"}));
    sub->add_option("--partitions", c.partitions, "Monte Carlo partitions (part of the seed contract)")
        ->check(CLI::Range(std::size_t{1}, std::size_t{1} << 20));
}

// ---------------------------------------------------------------------------
// Command parameters and bodies.

struct QkdSweep {
    double d_min = 0.0, d_max = 0.5;
    int steps = 51, n_max = 30;
    std::string eve = "helstrom_binary";
};

struct QkdThresholds {
    double tol = 1e-6;
    std::string eve = "helstrom_binary";
};

struct DistillClassical {
    double d = 0.2;
    int n_max = 12;
    std::uint64_t trials = 0;
    std::string eve = "helstrom_binary";
};

struct DistillQuantum {
    double fidelity = 0.75;
    int rounds = 10;
};

struct CloneCounts {
    int n = 1, m = 2;
    std::uint64_t trials = 100'000;
};

struct CloneAmplifier {
    double mu_in = 1.0, mu_out = 2.0, q = 1.0;
};

struct CloneMixture {
    double mu_in = 5.0, gain = 10.0;
};

struct CloneFit {
    std::string input;
    double q_true = 0.8, noise = 0.005, mu_min = 0.5, mu_max = 50.0, gain = 10.0;
    int points = 25;
};

struct WeakSetup {
    double tc = 1.0, dtau = 0.01;
    double theta_pre = std::numbers::pi / 4, phi_pre = 0.0;
    double pmd_axis = 0.0, pdl_db = 0.0, pdl_axis = 0.0;
    double dtau_min = 1e-3, dtau_max = 10.0;
    int steps = 41;
    double step = 0.0;
};

void add_eve(CLI::App *sub, std::string &eve) {
    sub->add_option("--eve", eve, "Eve's measurement")
        ->check(CLI::IsMember({"helstrom_binary", "square_root_4"}));
}

void add_d_grid(CLI::App *sub, double &lo, double &hi, int &steps) {
    sub->add_option("--d-min", lo, "smallest disturbance")->check(CLI::Range(0.0, 0.5));
    sub->add_option("--d-max", hi, "largest disturbance")->check(CLI::Range(0.0, 0.5));
    sub->add_option("--steps", steps, "grid points")->check(CLI::Range(1, 100'000));
}

void add_n_max(CLI::App *sub, int &n_max) {
    sub->add_option("--n-max", n_max, "largest advantage-distillation block")
        ->check(CLI::Range(1, distill::kMaxExactBlock));
}

/// Non-negative decibels, where "inf" stands for an ideal polarizer.
const CLI::Validator kAttenuation(
    [](const std::string &text) -> std::string {
        char *end = nullptr;
        const double v = std::strtod(text.c_str(), &end);
        if (end != text.c_str() + text.size() || !(v >= 0.0)) {
            return "Value " + text + " is not a non-negative number or inf";
        }
        return {};
    },
    "NONNEGATIVE|inf");

void add_weak_pulse(CLI::App *sub, WeakSetup &w) {
    sub->add_option("--tc", w.tc, "pulse width")->check(CLI::PositiveNumber);
    sub->add_option("--theta-pre", w.theta_pre, "input polarization angle (rad)");
    sub->add_option("--phi-pre", w.phi_pre, "input polarization phase (rad)");
    sub->add_option("--pmd-axis", w.pmd_axis, "slow PMD eigenmode angle (rad)");
    sub->add_option("--pdl-db", w.pdl_db, "PDL attenuation in dB; inf for a polarizer")
        ->check(kAttenuation);
    sub->add_option("--pdl-axis", w.pdl_axis, "PDL pass axis (rad)");
}

Outcome run_qkd_sweep(const QkdSweep &p, const Common &c) {
    require_ordered(p.d_min, p.d_max, "--d-min", "--d-max");
    const auto eve = qkd::parse_eve_measurement(p.eve);
    const auto grid = linear_grid(p.d_min, p.d_max, p.steps);
    const auto rows = distill::equivalence_sweep(grid, p.n_max, eve, c.exec_mode());
    Outcome o;
    o.table.columns = {"D",    "qber_z", "qber_x", "entangled",      "pt_min_eigenvalue",
                       "chsh", "singlet_fidelity", "i_ab", "i_ae", "one_way_margin",
                       "ad_min_block"};
    for (const auto &r : rows) {
        const auto tz = qkd::symbol_distribution({r.disturbance, eve}, qkd::Basis::Z);
        const auto tx = qkd::symbol_distribution({r.disturbance, eve}, qkd::Basis::X);
        o.table.rows.push_back({r.disturbance, tz.error_rate(), tx.error_rate(), r.entangled,
                                r.pt_min_eigenvalue, r.chsh,
                                qcore::singlet_fidelity(qkd::attacked_pair(r.disturbance)), r.i_ab,
                                r.i_ae, r.i_ab - r.i_ae, optional_cell(r.ad_min_block)});
    }
    o.summary["ad_threshold"] = optional_json(distill::ad_threshold(rows));
    return o;
}

Outcome run_qkd_thresholds(const QkdThresholds &p, const Common &) {
    const auto eve = qkd::parse_eve_measurement(p.eve);
    Outcome o;
    o.table.columns = {"kind", "threshold"};
    for (auto kind : {qkd::ThresholdKind::OneWay, qkd::ThresholdKind::Chsh,
                      qkd::ThresholdKind::Entanglement}) {
        const double v = qkd::threshold(kind, p.tol, eve);
        o.table.rows.push_back({std::string(qkd::to_string(kind)), v});
        o.summary[std::string(qkd::to_string(kind))] = v;
    }
    o.summary["one_way_minus_chsh"] =
        o.summary["one_way"].get<double>() - o.summary["chsh"].get<double>();
    return o;
}

Outcome run_distill_classical(const DistillClassical &p, const Common &c) {
    if (p.trials != 0 && p.trials < 10'000) {
        throw std::invalid_argument("--trials must be 0 (exact only) or at least 10000");
    }
    const auto eve = qkd::parse_eve_measurement(p.eve);
    const auto table = qkd::symbol_distribution({p.d, eve}, qkd::Basis::Z);
    Outcome o;
    o.table.columns = {"N", "p_accept", "eps_post", "i_ab", "i_ae", "advantage"};
    if (p.trials > 0) {
        for (const char *col : {"mc_p_accept", "mc_eps_post", "mc_i_ab", "mc_i_ae", "mc_advantage",
                                "mc_se_advantage", "mc_accepted"}) {
            o.table.columns.emplace_back(col);
        }
    }
    std::optional<int> min_block;
    for (int n = 1; n <= p.n_max; ++n) {
        const auto ex = distill::ad_exact(table, n);
        if (!min_block && distill::advantage_significant(ex)) {
            min_block = n;
        }
        std::vector<Cell> row{static_cast<std::int64_t>(n), ex.p_accept, ex.eps_post, ex.i_ab,
                              ex.i_ae, ex.advantage};
        if (p.trials > 0) {
            const auto mc = distill::ad_monte_carlo(table, n, c.mc(p.trials));
            row.insert(row.end(), {mc.value.p_accept, mc.value.eps_post, mc.value.i_ab,
                                   mc.value.i_ae, mc.value.advantage, mc.se_advantage,
                                   static_cast<std::int64_t>(mc.accepted)});
        }
        o.table.rows.push_back(std::move(row));
    }
    o.summary["qber"] = table.error_rate();
    o.summary["ad_min_block"] = min_block ? json(*min_block) : json(nullptr);
    return o;
}

Outcome run_distill_quantum(const DistillQuantum &p, const Common &) {
    const auto trace = distill::recurrence_iterate(p.fidelity, p.rounds);
    Outcome o;
    o.table.columns = {"round", "fidelity", "success_probability"};
    o.table.rows.push_back({std::int64_t{0}, p.fidelity, Cell{}});
    for (std::size_t k = 0; k < trace.size(); ++k) {
        o.table.rows.push_back(
            {static_cast<std::int64_t>(k + 1), trace[k].fidelity, trace[k].success_probability});
    }
    const double last = trace.empty() ? p.fidelity : trace.back().fidelity;
    o.summary["final_fidelity"] = last;
    o.summary["improves"] = distill::recurrence_step(p.fidelity).fidelity > p.fidelity;
    return o;
}

Outcome run_distill_equivalence(const QkdSweep &p, const Common &c) {
    require_ordered(p.d_min, p.d_max, "--d-min", "--d-max");
    const auto eve = qkd::parse_eve_measurement(p.eve);
    const auto grid = linear_grid(p.d_min, p.d_max, p.steps);
    const auto rows = distill::equivalence_sweep(grid, p.n_max, eve, c.exec_mode());
    Outcome o;
    o.table.columns = {"D", "entangled", "chsh", "i_ab", "i_ae", "ad_min_block"};
    for (const auto &r : rows) {
        o.table.rows.push_back(
            {r.disturbance, r.entangled, r.chsh, r.i_ab, r.i_ae, optional_cell(r.ad_min_block)});
    }
    const auto ad = distill::ad_threshold(rows);
    const double ent = qkd::threshold(qkd::ThresholdKind::Entanglement, 1e-6, eve);
    o.summary["ad_threshold"] = optional_json(ad);
    o.summary["entanglement_threshold"] = ent;
    o.summary["ad_minus_entanglement"] = ad ? json(*ad - ent) : json(nullptr);
    return o;
}

Outcome run_clone_fidelity(const CloneCounts &p, const Common &) {
    const double f = cloning::fidelity_opt({p.n, p.m});
    Outcome o;
    o.table.columns = {"N", "M", "fidelity"};
    o.table.rows.push_back({std::int64_t{p.n}, std::int64_t{p.m}, f});
    o.summary["fidelity"] = f;
    return o;
}

Outcome run_clone_amplifier(const CloneAmplifier &p, const Common &) {
    const double f = cloning::fidelity_classical({p.mu_in, p.mu_out, p.q});
    Outcome o;
    o.table.columns = {"mu_in", "mu_out", "q", "fidelity"};
    o.table.rows.push_back({p.mu_in, p.mu_out, p.q, f});
    o.summary["fidelity"] = f;
    return o;
}

Outcome run_clone_mc(const CloneCounts &p, const Common &c) {
    const auto r = cloning::birth_process_mc({p.n, p.m}, c.mc(p.trials));
    const double exact = cloning::fidelity_opt({p.n, p.m});
    Outcome o;
    o.table.columns = {"N", "M", "mean", "std_error", "exact", "trials"};
    o.table.rows.push_back({std::int64_t{p.n}, std::int64_t{p.m}, r.mean, r.std_error, exact,
                            static_cast<std::int64_t>(r.trials)});
    o.summary["mean"] = r.mean;
    o.summary["z_score"] = r.std_error > 0.0 ? json((r.mean - exact) / r.std_error) : json(nullptr);
    return o;
}

Outcome run_clone_mixture(const CloneMixture &p, const Common &) {
    const auto r = cloning::poisson_mixture_fidelity(p.mu_in, p.gain);
    Outcome o;
    o.table.columns = {"mu_in", "gain", "mixture", "amplifier", "deviation", "terms"};
    o.table.rows.push_back(
        {p.mu_in, p.gain, r.mixture, r.amplifier, r.deviation, std::int64_t{r.terms}});
    o.summary["deviation"] = r.deviation;
    return o;
}

Outcome run_clone_fit(const CloneFit &p, const Common &c) {
    cloning::FidelityDataset data;
    if (!p.input.empty()) {
        data = cloning::read_dataset_csv(p.input);
    } else {
        cloning::SyntheticSpec spec;
        spec.q = p.q_true;
        spec.noise_sigma = p.noise;
        spec.points = p.points;
        spec.mu_min = p.mu_min;
        spec.mu_max = p.mu_max;
        spec.gain = p.gain;
        spec.seed = c.seed;
        data = cloning::synthetic_dataset(spec);
    }
    const auto fit = cloning::fit_q(data);
    Outcome o;
    o.table.columns = {"mu_in", "mu_out", "fidelity", "model"};
    for (const auto &r : data) {
        o.table.rows.push_back(
            {r.mu_in, r.mu_out, r.fidelity, cloning::fidelity_classical({r.mu_in, r.mu_out, fit.q})});
    }
    o.summary["q_hat"] = fit.q;
    o.summary["rss"] = fit.rss;
    o.summary["degenerate"] = fit.degenerate;
    o.summary["records"] = data.size();
    o.summary["source"] = p.input.empty() ? "synthetic" : p.input;
    return o;
}

weak::PolarizedPulse weak_pulse(const WeakSetup &w) {
    return {weak::Envelope::gaussian(w.tc), weak::polarization(w.theta_pre, w.phi_pre)};
}

weak::PostSelection weak_post(const WeakSetup &w) { return weak::PdlElement{w.pdl_db, w.pdl_axis}; }

Outcome run_weak_toa(const WeakSetup &w, const Common &) {
    const auto pulse = weak_pulse(w);
    const weak::PmdElement pmd{w.dtau, w.pmd_axis};
    const auto post = weak_post(w);
    const std::array<weak::Element, 2> chain{pmd, weak::PdlElement{w.pdl_db, w.pdl_axis}};
    const auto field = weak::propagate(pulse, chain);
    const double numeric =
        weak::mean_toa_numeric(weak::sample(field, weak::default_grid(w.tc, w.dtau)));
    const double exact = weak::mean_toa_closed(pulse, pmd, post);
    const double wv = weak::weak_value(pulse.jones, w.pmd_axis, post);
    Outcome o;
    o.table.columns = {"dtau",     "tc",          "theta_pre", "phi_pre",  "pdl_db",
                       "pdl_axis", "toa_numeric", "toa_exact", "toa_weak", "weak_value"};
    o.table.rows.push_back({w.dtau, w.tc, w.theta_pre, w.phi_pre, w.pdl_db, w.pdl_axis, numeric,
                            exact, 0.5 * w.dtau * wv, wv});
    o.summary["toa_exact"] = exact;
    o.summary["numeric_relative_error"] =
        exact != 0.0 ? json(std::abs(numeric - exact) / std::abs(exact)) : json(nullptr);
    o.summary["amplified"] = std::abs(exact) > 0.5 * w.dtau;
    return o;
}

Outcome run_weak_sweep(const WeakSetup &w, const Common &c) {
    if (!(w.dtau_min > 0.0)) {
        throw std::invalid_argument("--dtau-min must be positive");
    }
    require_ordered(w.dtau_min, w.dtau_max, "--dtau-min", "--dtau-max");
    const auto grid = log_grid(w.dtau_min, w.dtau_max, w.steps);
    const auto pulse = weak_pulse(w);
    const auto rows =
        weak::toa_transition_sweep(pulse.jones, w.pmd_axis, weak_post(w), grid, w.tc, c.exec_mode());
    Outcome o;
    o.table.columns = {"dtau",     "tc",        "theta_pre", "phi_pre",  "pdl_db",
                       "pdl_axis", "toa_exact", "toa_weak",  "abs_error"};
    std::vector<double> ratio, shift;
    for (const auto &r : rows) {
        o.table.rows.push_back({r.delta_tau, r.t_c, w.theta_pre, w.phi_pre, w.pdl_db, w.pdl_axis,
                                r.toa_exact, r.toa_weak, r.abs_error});
        const double x = r.delta_tau / r.t_c;
        if (x >= 1e-3 * (1 - 1e-12) && x <= 1e-1 * (1 + 1e-12)) {
            ratio.push_back(x);
            shift.push_back(r.shift_error);
        }
    }
    o.summary["weak_regime_slope"] = optional_json(loglog_slope(ratio, shift));
    o.summary["strong_end_discrimination_error"] = rows.back().discrimination_error;
    return o;
}

Outcome run_weak_profile(const WeakSetup &w, const Common &) {
    const auto pulse = weak_pulse(w);
    const std::array<weak::Element, 2> chain{weak::PmdElement{w.dtau, w.pmd_axis},
                                             weak::PdlElement{w.pdl_db, w.pdl_axis}};
    const auto field = weak::propagate(pulse, chain);
    auto grid = weak::default_grid(w.tc, w.dtau);
    if (w.step > 0.0) {
        const double span = -grid.start;
        auto half = static_cast<std::size_t>(std::ceil(span / w.step));
        half += half % 2;
        grid = {-w.step * static_cast<double>(half), w.step, 2 * half + 1};
    }
    const auto s = weak::sample(field, grid);
    Outcome o;
    o.table.columns = {"t", "intensity_x", "intensity_y", "intensity_total"};
    for (std::size_t i = 0; i < grid.points; ++i) {
        o.table.rows.push_back({grid.at(i), s.intensity_x(i), s.intensity_y(i), s.intensity(i)});
    }
    o.summary["toa_numeric"] = weak::mean_toa_numeric(s);
    o.summary["energy"] = field.energy();
    return o;
}

// ---------------------------------------------------------------------------
// Config files: each key becomes "--key value" unless the flag was given.

bool flag_given(const std::vector<std::string> &args, const std::string &flag) {
    for (const auto &a : args) {
        if (a == flag || a.rfind(flag + "=", 0) == 0) {
            return true;
        }
    }
    return false;
}

std::optional<std::string> flag_value(const std::vector<std::string> &args,
                                      const std::string &flag) {
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == flag && i + 1 < args.size()) {
            return args[i + 1];
        }
        if (args[i].rfind(flag + "=", 0) == 0) {
            return args[i].substr(flag.size() + 1);
        }
    }
    return std::nullopt;
}

std::vector<std::string> merge_config(std::vector<std::string> args) {
    const auto path = flag_value(args, "--config");
    if (!path) {
        return args;
    }
    std::ifstream in(*path);
    if (!in) {
        throw std::invalid_argument(fmt::format("cannot open config file '{}'", *path));
    }
    json cfg;
    try {
        cfg = json::parse(in);
    } catch (const json::parse_error &e) {
        throw std::invalid_argument(fmt::format("config file '{}': {}", *path, e.what()));
    }
    if (!cfg.is_object()) {
        throw std::invalid_argument(fmt::format("config file '{}' must hold one JSON object", *path));
    }
    for (const auto &[key, value] : cfg.items()) {
        const std::string flag = "--" + key;
        if (key == "config") {
            throw std::invalid_argument(fmt::format("config file '{}': nested 'config' key", *path));
        }
        if (flag_given(args, flag)) {
            continue;
        }
        std::string text;
        if (value.is_string()) {
            text = value.get<std::string>();
        } else if (value.is_number() || value.is_boolean()) {
            text = value.dump();
        } else {
            throw std::invalid_argument(
                fmt::format("config file '{}': key '{}' must be a number or a string", *path, key));
        }
        args.push_back(flag);
        args.push_back(text);
    }
    return args;
}

json config_echo(const Command &cmd) {
    json cfg = json::object();
    cfg["command"] = cmd.title;
    for (const CLI::Option *opt : cmd.app->get_options()) {
        const std::string name = opt->get_single_name();
        if (name == "help" || name == "h") {
            continue;
        }
        const std::string text = opt->count() > 0 ? opt->results().front() : opt->get_default_str();
        if (name == "outdir" || name == "config" || name == "input") {
            cfg[name] = text;
        } else {
            cfg[name] = echo_value(text);
        }
    }
    return cfg;
}

void write_text(const fs::path &path, const std::string &body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << body;
    out.close();
    if (!out) {
        throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
    }
}

json report_header(const Command &cmd, const Common &common) {
    json j = json::object();
    j["tool"] = "qcbridge";
    j["version"] = std::string(kVersion);
    j["timestamp"] = utc_timestamp();
    j["config"] = config_echo(cmd);
    j["config"]["outdir"] = common.outdir;
    return j;
}

} // namespace

int run(const std::vector<std::string> &raw_args, std::ostream &out, std::ostream &err) {
    CLI::App app{"qcbridge: key distribution, distillation, cloning and weak-measurement "
                 "experiments",
                 "qcbridge"};
    app.set_version_flag("--version", std::string(kVersion));
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);

    Common common;
    std::vector<Command> commands;
    auto group = [&](const char *name, const char *desc) {
        auto *g = app.add_subcommand(name, desc);
        g->require_subcommand(1);
        return g;
    };
    auto command = [&](CLI::App *g, const char *name, const char *desc) {
        auto *sub = g->add_subcommand(name, desc);
        add_common(sub, common);
        commands.push_back({g->get_name() + " " + name, g->get_name() + "-" + name, sub, {}});
        return sub;
    };

    auto *qkd_g = group("qkd", "attacked key distribution");
    auto *distill_g = group("distill", "classical and quantum distillation");
    auto *clone_g = group("clone", "cloning and amplifier fidelity");
    auto *weak_g = group("weak", "PMD/PDL time of arrival and weak values");

    QkdSweep qsweep;
    auto *sub = command(qkd_g, "sweep", "entanglement, CHSH and information versus disturbance");
    add_d_grid(sub, qsweep.d_min, qsweep.d_max, qsweep.steps);
    add_n_max(sub, qsweep.n_max);
    add_eve(sub, qsweep.eve);
    commands.back().run = [&] { return run_qkd_sweep(qsweep, common); };

    QkdThresholds qthr;
    sub = command(qkd_g, "thresholds", "one-way, CHSH and entanglement critical disturbances");
    sub->add_option("--tol", qthr.tol, "bisection tolerance")->check(CLI::Range(1e-6, 0.1));
    add_eve(sub, qthr.eve);
    commands.back().run = [&] { return run_qkd_thresholds(qthr, common); };

    DistillClassical dclass;
    sub = command(distill_g, "classical", "repetition-code advantage distillation per block size");
    sub->add_option("--d", dclass.d, "disturbance")->check(CLI::Range(0.0, 0.5));
    add_n_max(sub, dclass.n_max);
    sub->add_option("--trials", dclass.trials, "Monte Carlo blocks per N (0: exact only)");
    add_eve(sub, dclass.eve);
    commands.back().run = [&] { return run_distill_classical(dclass, common); };

    DistillQuantum dquant;
    sub = command(distill_g, "quantum", "recurrence protocol on Werner-twirled pairs");
    sub->add_option("--fidelity", dquant.fidelity, "initial singlet fidelity")
        ->check(CLI::Range(0.0, 1.0));
    sub->add_option("--rounds", dquant.rounds, "recurrence rounds")->check(CLI::Range(0, 100'000));
    commands.back().run = [&] { return run_distill_quantum(dquant, common); };

    QkdSweep dequiv{0.2, 0.36, 33, 30, "helstrom_binary"};
    sub = command(distill_g, "equivalence", "advantage distillation against entanglement");
    add_d_grid(sub, dequiv.d_min, dequiv.d_max, dequiv.steps);
    add_n_max(sub, dequiv.n_max);
    add_eve(sub, dequiv.eve);
    commands.back().run = [&] { return run_distill_equivalence(dequiv, common); };

    CloneCounts cfid;
    sub = command(clone_g, "fidelity", "optimal N -> M cloning fidelity");
    sub->add_option("--n", cfid.n, "input copies")->check(CLI::PositiveNumber);
    sub->add_option("--m", cfid.m, "output copies")->check(CLI::PositiveNumber);
    commands.back().run = [&] { return run_clone_fidelity(cfid, common); };

    CloneAmplifier camp;
    sub = command(clone_g, "amplifier", "amplifier fidelity at given intensities and quality");
    sub->add_option("--mu-in", camp.mu_in, "mean input intensity")->check(CLI::PositiveNumber);
    sub->add_option("--mu-out", camp.mu_out, "mean output intensity")->check(CLI::PositiveNumber);
    sub->add_option("--q", camp.q, "amplifier quality")->check(CLI::Range(0.0, 1.0));
    commands.back().run = [&] { return run_clone_amplifier(camp, common); };

    CloneCounts cmc;
    sub = command(clone_g, "mc", "stimulated/spontaneous emission Monte Carlo");
    sub->add_option("--n", cmc.n, "input photons")->check(CLI::PositiveNumber);
    sub->add_option("--m", cmc.m, "output photons")->check(CLI::PositiveNumber);
    sub->add_option("--trials", cmc.trials, "trials")
        ->check(CLI::Range(std::uint64_t{10'000}, std::uint64_t{1'000'000'000'000}));
    commands.back().run = [&] { return run_clone_mc(cmc, common); };

    CloneMixture cmix;
    sub = command(clone_g, "mixture", "Poisson-averaged optimal fidelity against the amplifier");
    sub->add_option("--mu-in", cmix.mu_in, "mean photon number")->check(CLI::Range(1e-12, 50.0));
    sub->add_option("--gain", cmix.gain, "amplifier gain")->check(CLI::Range(1.0, 1e6));
    commands.back().run = [&] { return run_clone_mixture(cmix, common); };

    CloneFit cfit;
    sub = command(clone_g, "fit", "least-squares amplifier quality from fidelity data");
    sub->add_option("--input", cfit.input, "CSV with mu_in,mu_out,fidelity (default: synthetic)");
    sub->add_option("--q-true", cfit.q_true, "synthetic quality")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--noise", cfit.noise, "synthetic noise sigma")->check(CLI::NonNegativeNumber);
    sub->add_option("--points", cfit.points, "synthetic points")->check(CLI::Range(3, 100'000));
    sub->add_option("--mu-min", cfit.mu_min, "synthetic smallest mu_in")->check(CLI::PositiveNumber);
    sub->add_option("--mu-max", cfit.mu_max, "synthetic largest mu_in")->check(CLI::PositiveNumber);
    sub->add_option("--gain", cfit.gain, "synthetic mu_out / mu_in")->check(CLI::Range(1.0, 1e6));
    commands.back().run = [&] { return run_clone_fit(cfit, common); };

    WeakSetup wtoa;
    sub = command(weak_g, "toa", "mean time of arrival: numeric, closed form and weak value");
    add_weak_pulse(sub, wtoa);
    sub->add_option("--dtau", wtoa.dtau, "PMD differential delay")->check(CLI::NonNegativeNumber);
    commands.back().run = [&] { return run_weak_toa(wtoa, common); };

    WeakSetup wsweep;
    sub = command(weak_g, "sweep", "weak-to-strong transition over log-spaced delays");
    add_weak_pulse(sub, wsweep);
    sub->add_option("--dtau-min", wsweep.dtau_min, "smallest delay")->check(CLI::PositiveNumber);
    sub->add_option("--dtau-max", wsweep.dtau_max, "largest delay")->check(CLI::PositiveNumber);
    sub->add_option("--steps", wsweep.steps, "grid points")->check(CLI::Range(1, 100'000));
    commands.back().run = [&] { return run_weak_sweep(wsweep, common); };

    WeakSetup wprof;
    sub = command(weak_g, "profile", "sampled output intensity");
    add_weak_pulse(sub, wprof);
    sub->add_option("--dtau", wprof.dtau, "PMD differential delay")->check(CLI::NonNegativeNumber);
    sub->add_option("--step", wprof.step, "grid step (default t_c/100)")
        ->check(CLI::NonNegativeNumber);
    commands.back().run = [&] { return run_weak_profile(wprof, common); };

    std::vector<std::string> args;
    try {
        args = merge_config(raw_args);
    } catch (const std::invalid_argument &e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp &) {
        // Help for the deepest subcommand that was named.
        const CLI::App *target = &app;
        for (auto *s = &app; s != nullptr;) {
            auto subs = s->get_subcommands();
            s = subs.empty() ? nullptr : subs.front();
            if (s) {
                target = s;
            }
        }
        out << target->help();
        return kExitOk;
    } catch (const CLI::CallForVersion &) {
        out << kVersion << '\n';
        return kExitOk;
    } catch (const CLI::ParseError &e) {
        err << "error: " << e.what() << '\n' << app.help();
        return kExitUsage;
    }

    const Command *chosen = nullptr;
    for (const auto &cmd : commands) {
        if (cmd.app->parsed()) {
            chosen = &cmd;
        }
    }
    if (chosen == nullptr) {
        err << "error: no command given\n" << app.help();
        return kExitUsage;
    }

    if (common.outdir.empty()) {
        const char *env = std::getenv(kOutdirEnv);
        common.outdir = env != nullptr && *env != '\0' ? env : ".";
    }
    const fs::path outdir(common.outdir);
    const std::string base = fmt::format("{}-{}", chosen->stem, common.seed);
    const fs::path csv_path = outdir / (base + ".csv");
    const fs::path json_path = outdir / (base + ".json");
    const bool want_csv = common.format != "json";
    const bool want_json = common.format != "csv";
    auto remove_outputs = [&] {
        std::error_code ec;
        fs::remove(csv_path, ec);
        fs::remove(json_path, ec);
    };

    try {
        fs::create_directories(outdir);
    } catch (const fs::filesystem_error &e) {
        err << fmt::format("error: --outdir: cannot create '{}': {}\n", outdir.string(),
                           e.code().message());
        return kExitUsage;
    }

    try {
        const Outcome outcome = chosen->run();
        json report = report_header(*chosen, common);
        report["status"] = "ok";
        report["columns"] = outcome.table.columns;
        report["results"] = table_json(outcome.table);
        report["summary"] = outcome.summary;
        if (want_csv) {
            write_text(csv_path, table_csv(outcome.table));
        }
        if (want_json) {
            write_text(json_path, report.dump(2) + "\n");
        }
        out << chosen->title << ": " << outcome.summary.dump() << '\n';
        if (want_csv) {
            out << "wrote " << csv_path.string() << '\n';
        }
        if (want_json) {
            out << "wrote " << json_path.string() << '\n';
        }
        return kExitOk;
    } catch (const NumericalError &e) {
        remove_outputs();
        json report = report_header(*chosen, common);
        report["status"] = "numerical_failure";
        report["diagnostic"] = e.what();
        try {
            write_text(json_path, report.dump(2) + "\n");
        } catch (const std::exception &) {
            remove_outputs();
        }
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::invalid_argument &e) {
        remove_outputs();
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception &e) {
        remove_outputs();
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}

} // namespace qcb::cli
