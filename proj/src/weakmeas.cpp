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

#include "qcbridge/weakmeas.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "qcbridge/errors.hpp"

namespace qcb::weak {

namespace {

template <class... Ts> struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts> Overloaded(Ts...) -> Overloaded<Ts...>;

Jones scale(const Jones &v, Complex s) { return {v[0] * s, v[1] * s}; }

JonesMatrix identity() { return {1.0, 0.0, 0.0, 1.0}; }

JonesMatrix adjoint(const JonesMatrix &m) {
    return {std::conj(m[0]), std::conj(m[2]), std::conj(m[1]), std::conj(m[3])};
}

JonesMatrix multiply(const JonesMatrix &a, const JonesMatrix &b) {
    return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

JonesMatrix post_operator(const std::optional<PostSelection> &post) {
    return post ? jones_matrix(*post) : identity();
}

// Slow eigenmode along `axis`, fast eigenmode orthogonal to it.
Jones slow_mode(double axis) { return polarization(axis); }
Jones fast_mode(double axis) { return {-std::sin(axis), std::cos(axis)}; }

} // namespace

Jones polarization(double theta, double phi) {
    return {std::cos(theta), std::polar(1.0, phi) * std::sin(theta)};
}

Jones rotate(const Jones &v, double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {c * v[0] - s * v[1], s * v[0] + c * v[1]};
}

Complex inner(const Jones &bra, const Jones &ket) {
    return std::conj(bra[0]) * ket[0] + std::conj(bra[1]) * ket[1];
}

double norm2(const Jones &v) { return std::norm(v[0]) + std::norm(v[1]); }

Jones act(const JonesMatrix &m, const Jones &v) {
    return {m[0] * v[0] + m[1] * v[1], m[2] * v[0] + m[3] * v[1]};
}

JonesMatrix jones_matrix(const PdlElement &pdl) {
    if (!(pdl.gamma_db >= 0.0)) {
        throw std::invalid_argument("PDL attenuation must be non-negative");
    }
    const double weak = std::isinf(pdl.gamma_db) ? 0.0 : std::pow(10.0, -pdl.gamma_db / 20.0);
    const Jones pass = slow_mode(pdl.axis);
    const Jones lossy = fast_mode(pdl.axis);
    JonesMatrix m{};
    for (std::size_t r = 0; r < 2; ++r) {
        for (std::size_t c = 0; c < 2; ++c) {
            m[2 * r + c] = pass[r] * std::conj(pass[c]) + weak * lossy[r] * std::conj(lossy[c]);
        }
    }
    return m;
}

JonesMatrix jones_matrix(const Analyzer &an) {
    const double n2 = norm2(an.state);
    if (std::abs(n2 - 1.0) > 1e-12) {
        throw std::invalid_argument("analyzer state must be normalised");
    }
    const Jones &f = an.state;
    return {f[0] * std::conj(f[0]), f[0] * std::conj(f[1]), f[1] * std::conj(f[0]),
            f[1] * std::conj(f[1])};
}

JonesMatrix jones_matrix(const PostSelection &post) {
    return std::visit([](const auto &e) { return jones_matrix(e); }, post);
}

Envelope::Envelope(double t_c, std::function<double(double)> shape)
    : t_c_(t_c), shape_(std::move(shape)) {
    if (!(t_c_ > 0.0)) {
        throw std::invalid_argument("pulse width t_c must be positive");
    }
}

Envelope Envelope::gaussian(double t_c) { return Envelope(t_c, {}); }

Envelope Envelope::custom(double t_c, std::function<double(double)> shape) {
    if (!shape) {
        throw std::invalid_argument("custom envelope needs a shape function");
    }
    return Envelope(t_c, std::move(shape));
}

double Envelope::operator()(double t) const {
    if (shape_) {
        return shape_(t);
    }
    const double u = t / t_c_;
    return std::exp(-0.5 * u * u);
}

void PolarizedPulse::validate() const {
    if (std::abs(norm2(jones) - 1.0) > 1e-12) {
        throw std::invalid_argument("pulse Jones vector must be normalised");
    }
}

OpticalField::OpticalField(Envelope envelope, std::vector<DelayedCopy> copies)
    : envelope_(std::move(envelope)), copies_(std::move(copies)) {}

Jones OpticalField::at(double t) const {
    Jones out{0.0, 0.0};
    for (const auto &c : copies_) {
        const double g = envelope_(t - c.delay);
        out[0] += c.amplitude[0] * g;
        out[1] += c.amplitude[1] * g;
    }
    return out;
}

double OpticalField::max_delay() const {
    double m = 0.0;
    for (const auto &c : copies_) {
        m = std::max(m, std::abs(c.delay));
    }
    return m;
}

double OpticalField::energy() const {
    const double tc = envelope_.t_c();
    if (envelope_.is_gaussian()) {
        // int g(t - a) g(t - b) dt = t_c sqrt(pi) exp(-(a - b)^2 / (4 t_c^2)).
        const double base = tc * std::sqrt(M_PI);
        double e = 0.0;
        for (const auto &j : copies_) {
            for (const auto &k : copies_) {
                const double d = (j.delay - k.delay) / tc;
                e += inner(j.amplitude, k.amplitude).real() * base * std::exp(-0.25 * d * d);
            }
        }
        return e;
    }
    const SampledField s = sample(*this, default_grid(tc, max_delay()));
    std::vector<double> intensity(s.grid.points);
    for (std::size_t i = 0; i < intensity.size(); ++i) {
        intensity[i] = s.intensity(i);
    }
    return simpson(intensity, s.grid.step);
}

OpticalField propagate(const PolarizedPulse &pulse, std::span<const Element> chain) {
    pulse.validate();
    std::vector<DelayedCopy> copies{{0.0, pulse.jones}};
    for (const Element &el : chain) {
        std::visit(Overloaded{
                       [&](const PmdElement &pmd) {
                           if (!(pmd.delta_tau >= 0.0)) {
                               throw std::invalid_argument("PMD delay must be non-negative");
                           }
                           const Jones slow = slow_mode(pmd.axis);
                           const Jones fast = fast_mode(pmd.axis);
                           std::vector<DelayedCopy> next;
                           next.reserve(2 * copies.size());
                           for (const auto &c : copies) {
                               next.push_back({c.delay + 0.5 * pmd.delta_tau,
                                               scale(slow, inner(slow, c.amplitude))});
                               next.push_back({c.delay - 0.5 * pmd.delta_tau,
                                               scale(fast, inner(fast, c.amplitude))});
                           }
                           copies = std::move(next);
                       },
                       [&](const auto &post) {
                           const JonesMatrix m = jones_matrix(post);
                           for (auto &c : copies) {
                               c.amplitude = act(m, c.amplitude);
                           }
                       },
                   },
                   el);
    }
    return OpticalField(pulse.envelope, std::move(copies));
}

TimeGrid default_grid(double t_c, double delay_span) {
    if (!(t_c > 0.0) || !(delay_span >= 0.0)) {
        throw std::invalid_argument("default_grid: need t_c > 0 and a non-negative delay span");
    }
    const double step = t_c / 100.0;
    const double half_span = 6.0 * t_c + delay_span;
    // An even number of steps on each side keeps t = 0 on a Simpson panel edge.
    auto half = static_cast<std::size_t>(std::ceil(half_span / step));
    half += half % 2;
    return {-step * static_cast<double>(half), step, 2 * half + 1};
}

SampledField sample(const OpticalField &field, const TimeGrid &grid) {
    const double tc = field.envelope().t_c();
    if (!(grid.step > 0.0) || grid.step > tc / 20.0) {
        throw std::invalid_argument("time grid under-resolved: step must be at most t_c/20");
    }
    if (grid.points < 3 || grid.points % 2 == 0) {
        throw std::invalid_argument("time grid needs an odd number of points (at least 3)");
    }
    const double reach = 5.0 * tc + field.max_delay();
    const double end = grid.at(grid.points - 1);
    if (grid.start > -reach || end < reach) {
        throw std::invalid_argument("time grid does not span +-(5 t_c + delay)");
    }
    SampledField out{grid, std::vector<Complex>(grid.points), std::vector<Complex>(grid.points)};
    for (std::size_t i = 0; i < grid.points; ++i) {
        const Jones e = field.at(grid.at(i));
        out.x[i] = e[0];
        out.y[i] = e[1];
    }
    return out;
}

double simpson(std::span<const double> values, double step) {
    const std::size_t n = values.size();
    if (n < 3 || n % 2 == 0) {
        throw std::invalid_argument("simpson: need an odd number of samples (at least 3)");
    }
    double odd = 0.0;
    double even = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        (i % 2 == 1 ? odd : even) += values[i];
    }
    return step / 3.0 * (values.front() + values.back() + 4.0 * odd + 2.0 * even);
}

double mean_toa_numeric(const SampledField &field) {
    const std::size_t n = field.grid.points;
    std::vector<double> intensity(n);
    std::vector<double> moment(n);
    for (std::size_t i = 0; i < n; ++i) {
        intensity[i] = field.intensity(i);
        moment[i] = field.grid.at(i) * intensity[i];
    }
    const double energy = simpson(intensity, field.grid.step);
    if (!(energy > 0.0)) {
        throw NumericalError("mean_toa_numeric: no transmitted energy");
    }
    return simpson(moment, field.grid.step) / energy;
}

double mean_toa_closed(const PolarizedPulse &pulse, const PmdElement &pmd,
                       const std::optional<PostSelection> &post) {
    pulse.validate();
    if (!pulse.envelope.is_gaussian()) {
        throw std::invalid_argument("mean_toa_closed: closed form needs a Gaussian envelope");
    }
    const JonesMatrix k = post_operator(post);
    const Jones slow = slow_mode(pmd.axis);
    const Jones fast = fast_mode(pmd.axis);
    const Jones a = scale(act(k, slow), inner(slow, pulse.jones));
    const Jones b = scale(act(k, fast), inner(fast, pulse.jones));
    const double tc = pulse.envelope.t_c();
    const double overlap = std::exp(-pmd.delta_tau * pmd.delta_tau / (4.0 * tc * tc));
    const double na = norm2(a);
    const double nb = norm2(b);
    const double denom = na + nb + 2.0 * overlap * inner(a, b).real();
    // The pulse is normalised, so denom is the transmitted energy fraction.
    if (!(denom > 1e-12)) {
        throw NumericalError("mean_toa_closed: post-selection blocks the pulse");
    }
    return 0.5 * pmd.delta_tau * (na - nb) / denom;
}

double weak_value(const Jones &pre, double pmd_axis, const std::optional<PostSelection> &post) {
    const JonesMatrix k = post_operator(post);
    const JonesMatrix pi = multiply(adjoint(k), k);
    const Jones slow = slow_mode(pmd_axis);
    const Jones fast = fast_mode(pmd_axis);
    // sigma |pre> = <slow|pre> |slow> - <fast|pre> |fast>.
    const Jones sigma_pre = {inner(slow, pre) * slow[0] - inner(fast, pre) * fast[0],
                             inner(slow, pre) * slow[1] - inner(fast, pre) * fast[1]};
    const double norm = inner(pre, act(pi, pre)).real();
    if (!(norm > 1e-12)) {
        throw NumericalError(
            "weak_value: post-selection is (nearly) orthogonal to the input; the weak value "
            "diverges");
    }
    return inner(pre, act(pi, sigma_pre)).real() / norm;
}

double weak_toa(const Jones &pre, const PmdElement &pmd, const std::optional<PostSelection> &post) {
    return 0.5 * pmd.delta_tau * weak_value(pre, pmd.axis, post);
}

double eigenmode_misclassification(double delta_tau, double t_c) {
    return 0.5 * std::erfc(delta_tau / (2.0 * t_c));
}

double eigenmode_misclassification_numeric(double delta_tau, double t_c) {
    const PolarizedPulse pulse{Envelope::gaussian(t_c), polarization(0.0)};
    const std::array<Element, 1> chain{PmdElement{delta_tau, 0.0}};
    const SampledField s = sample(propagate(pulse, chain), default_grid(t_c, delta_tau));
    std::vector<double> intensity(s.grid.points);
    for (std::size_t i = 0; i < intensity.size(); ++i) {
        intensity[i] = s.intensity(i);
    }
    const std::size_t mid = (s.grid.points - 1) / 2;
    const double early = simpson(std::span(intensity).first(mid + 1), s.grid.step);
    return early / simpson(intensity, s.grid.step);
}

std::vector<TransitionRow> toa_transition_sweep(const Jones &pre, double pmd_axis,
                                                const std::optional<PostSelection> &post,
                                                std::span<const double> delta_tau_grid,
                                                double t_c, Exec exec) {
    for (double d : delta_tau_grid) {
        if (!(d >= 0.0)) {
            throw std::invalid_argument("toa_transition_sweep: delays must be non-negative");
        }
    }
    const PolarizedPulse pulse{Envelope::gaussian(t_c), pre};
    pulse.validate();
    return map_indexed<TransitionRow>(delta_tau_grid.size(), exec, [&](std::size_t i) {
        const PmdElement pmd{delta_tau_grid[i], pmd_axis};
        TransitionRow row{};
        row.delta_tau = pmd.delta_tau;
        row.t_c = t_c;
        row.toa_exact = mean_toa_closed(pulse, pmd, post);
        row.toa_weak = weak_toa(pre, pmd, post);
        row.abs_error = std::abs(row.toa_exact - row.toa_weak);
        row.shift_error = pmd.delta_tau > 0.0 ? row.abs_error / (0.5 * pmd.delta_tau) : 0.0;
        row.discrimination_error = eigenmode_misclassification(pmd.delta_tau, t_c);
        return row;
    });
}

} // namespace qcb::weak
