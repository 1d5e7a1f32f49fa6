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
 * Polarized classical pulses through birefringent delay (PMD) and
 * polarization-dependent loss (PDL) elements, and the mean time of arrival
 * of the output pulse.
 *
 * A propagated field is kept as a finite sum of delayed copies of the input
 * envelope, each carrying its own Jones vector:
 *
 *     E(t) = sum_k v_k g(t - tau_k).
 *
 * A PMD element splits every copy along its two eigenmodes; the mode along
 * the element's axis is delayed by +dtau/2 and the orthogonal mode by
 * -dtau/2. A PDL element multiplies every Jones vector by its matrix. The
 * representation is exact for any envelope; sampling onto a time grid is a
 * separate step.
 *
 * Angles are in radians. A polarization (theta, phi) is the Jones vector
 * (cos theta, e^{i phi} sin theta) in the lab H/V basis.
 */

#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "qcbridge/parallel.hpp"

namespace qcb::weak {

using Complex = std::complex<double>;
using Jones = std::array<Complex, 2>;
/// Row-major 2x2.
using JonesMatrix = std::array<Complex, 4>;

[[nodiscard]] Jones polarization(double theta, double phi = 0.0);
[[nodiscard]] Jones rotate(const Jones &v, double angle);
[[nodiscard]] Complex inner(const Jones &bra, const Jones &ket);
[[nodiscard]] double norm2(const Jones &v);
[[nodiscard]] Jones act(const JonesMatrix &m, const Jones &v);

struct PmdElement {
    double delta_tau = 0.0; ///< differential group delay, >= 0
    double axis = 0.0;      ///< angle of the slow (late) eigenmode
};

/// Loss on the axis orthogonal to `axis`; infinite gamma_db is a polarizer.
struct PdlElement {
    double gamma_db = 0.0;
    double axis = 0.0; ///< angle of the transmitted (unattenuated) axis
};

/// Projection onto an arbitrary pure polarization.
struct Analyzer {
    Jones state{1.0, 0.0};
};

using Element = std::variant<PmdElement, PdlElement, Analyzer>;
using PostSelection = std::variant<PdlElement, Analyzer>;

[[nodiscard]] JonesMatrix jones_matrix(const PdlElement &pdl);
[[nodiscard]] JonesMatrix jones_matrix(const Analyzer &an);
[[nodiscard]] JonesMatrix jones_matrix(const PostSelection &post);

/// Pulse envelope g(t). Gaussian envelopes admit closed forms.
class Envelope {
  public:
    /// exp(-t^2 / (2 t_c^2)).
    static Envelope gaussian(double t_c);
    /// Arbitrary real envelope; `t_c` sets the default grid scale.
    static Envelope custom(double t_c, std::function<double(double)> shape);

    [[nodiscard]] double operator()(double t) const;
    [[nodiscard]] double t_c() const { return t_c_; }
    [[nodiscard]] bool is_gaussian() const { return !shape_; }

  private:
    Envelope(double t_c, std::function<double(double)> shape);
    double t_c_;
    std::function<double(double)> shape_;
};

struct PolarizedPulse {
    Envelope envelope = Envelope::gaussian(1.0);
    Jones jones{1.0, 0.0};

    /// Throws std::invalid_argument unless t_c > 0 and |jones| = 1.
    void validate() const;
};

struct DelayedCopy {
    double delay;
    Jones amplitude;
};

class OpticalField {
  public:
    OpticalField(Envelope envelope, std::vector<DelayedCopy> copies);

    [[nodiscard]] const Envelope &envelope() const { return envelope_; }
    [[nodiscard]] std::span<const DelayedCopy> copies() const { return copies_; }
    [[nodiscard]] Jones at(double t) const;
    /// Largest |delay| among the copies.
    [[nodiscard]] double max_delay() const;
    /// Integral of |E(t)|^2; closed form for Gaussian envelopes.
    [[nodiscard]] double energy() const;

  private:
    Envelope envelope_;
    std::vector<DelayedCopy> copies_;
};

/// Empty chains return the input field unchanged.
[[nodiscard]] OpticalField propagate(const PolarizedPulse &pulse, std::span<const Element> chain);

struct TimeGrid {
    double start;
    double step;
    std::size_t points; ///< odd, for composite Simpson

    [[nodiscard]] double at(std::size_t i) const { return start + step * static_cast<double>(i); }
};

/// Step t_c/100 spanning +-(6 t_c + delay_span).
[[nodiscard]] TimeGrid default_grid(double t_c, double delay_span);

struct SampledField {
    TimeGrid grid;
    std::vector<Complex> x;
    std::vector<Complex> y;

    [[nodiscard]] double intensity_x(std::size_t i) const { return std::norm(x[i]); }
    [[nodiscard]] double intensity_y(std::size_t i) const { return std::norm(y[i]); }
    [[nodiscard]] double intensity(std::size_t i) const { return intensity_x(i) + intensity_y(i); }
};

/**
 * Sample the field on `grid`. Throws std::invalid_argument when the step is
 * coarser than t_c/20 or the grid does not cover +-(5 t_c + max delay).
 */
[[nodiscard]] SampledField sample(const OpticalField &field, const TimeGrid &grid);

/// Composite Simpson integral of samples on a uniform grid (odd count).
[[nodiscard]] double simpson(std::span<const double> values, double step);

/// sum t I(t) / sum I(t) with Simpson weights, I the total intensity.
[[nodiscard]] double mean_toa_numeric(const SampledField &field);

/**
 * Exact mean arrival time of a Gaussian pulse after one PMD element and an
 * optional post-selection element, detected on total intensity. Throws
 * NumericalError when the transmitted energy fraction is at most 1e-12.
 */
[[nodiscard]] double mean_toa_closed(const PolarizedPulse &pulse, const PmdElement &pmd,
                                     const std::optional<PostSelection> &post);

/**
 * Re <psi| Pi sigma |psi> / <psi| Pi |psi>, with sigma the PMD-axis Pauli
 * operator and Pi = K^dagger K for the post-selection K. Reduces to
 * Re[<f|sigma|psi> / <f|psi>] for a pure analyzer. Throws NumericalError
 * when <psi|Pi|psi> <= 1e-12.
 */
[[nodiscard]] double weak_value(const Jones &pre, double pmd_axis,
                                const std::optional<PostSelection> &post);

/// (dtau / 2) times the weak value: the small-delay limit of mean_toa_closed.
[[nodiscard]] double weak_toa(const Jones &pre, const PmdElement &pmd,
                              const std::optional<PostSelection> &post);

struct TransitionRow {
    double delta_tau;
    double t_c;
    double toa_exact;
    double toa_weak;
    double abs_error;   ///< |exact - weak| in time units
    double shift_error; ///< abs_error / (dtau / 2): error of the inferred weak value
    double discrimination_error; ///< chance an eigenmode lands on the wrong side of t = 0
};

[[nodiscard]] std::vector<TransitionRow>
toa_transition_sweep(const Jones &pre, double pmd_axis, const std::optional<PostSelection> &post,
                     std::span<const double> delta_tau_grid, double t_c, Exec exec = Exec::Parallel);

/// 1/2 erfc(dtau / (2 t_c)): P(t < 0) for the late eigenmode's intensity profile.
[[nodiscard]] double eigenmode_misclassification(double delta_tau, double t_c);

/// The same probability by integrating the sampled intensity of |H> after PMD.
[[nodiscard]] double eigenmode_misclassification_numeric(double delta_tau, double t_c);

} // namespace qcb::weak
