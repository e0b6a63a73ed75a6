#pragma once

// Closed-form physics of bracket states: the balanced mixture of coherent
// states |+b e^{i psi}> and |-b e^{i psi}> with psi uniform on
// [-gamma/2, gamma/2]. gamma = 0 is the two-state PSK mixture, gamma = pi the
// phase-averaged coherent state. The bracket is centered on the real axis;
// every rotation is carried by the displacement phase.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "bracket/error.hpp"
#include "bracket/quadrature.hpp"

namespace bracket::states {

struct BracketSpec {
    double b = 0.0;      // amplitude
    double gamma = 0.0;  // phase spread [rad]
};

// Local-oscillator field alpha = mag * e^{i phase}.
struct Displacement {
    double mag = 0.0;
    double phase = 0.0;

    std::complex<double> field() const { return std::polar(mag, phase); }
};

struct PhasePoint {
    double re = 0.0;
    double im = 0.0;
};

inline BracketSpec validate(const BracketSpec& spec) {
    detail::require(std::isfinite(spec.b), "b must be finite");
    detail::require(std::isfinite(spec.gamma), "gamma must be finite");
    detail::require(spec.b >= 0.0, "b must be >= 0 (got " + std::to_string(spec.b) + ")");
    detail::require(spec.gamma >= 0.0 && spec.gamma <= std::numbers::pi,
                    "gamma must lie in [0, pi] (got " + std::to_string(spec.gamma) + ")");
    return spec;
}

inline Displacement validate(const Displacement& disp) {
    detail::require(std::isfinite(disp.mag) && std::isfinite(disp.phase),
                    "displacement must be finite");
    detail::require(disp.mag >= 0.0, "|alpha| must be >= 0 (got " + std::to_string(disp.mag) + ")");
    return disp;
}

inline PhasePoint validate(const PhasePoint& z) {
    detail::require(std::isfinite(z.re) && std::isfinite(z.im), "phase-space point must be finite");
    return z;
}

// sin(gamma)/gamma, exactly 1 at gamma = 0.
inline double sinc_gamma(double gamma) {
    detail::require(gamma >= 0.0 && gamma <= std::numbers::pi, "gamma must lie in [0, pi]");
    if (gamma == 0.0) return 1.0;
    if (gamma == std::numbers::pi) return 0.0;
    return std::sin(gamma) / gamma;
}

// <x_phi> vanishes for every phi by the +/- symmetry of the mixture.
inline double quadrature_mean(const BracketSpec& spec, double /*phi*/) {
    validate(spec);
    return 0.0;
}

// Var[x_phi] = 1/2 + b^2 [1 + cos(2 phi) sin(gamma)/gamma]
inline double quadrature_variance(const BracketSpec& spec, double phi) {
    validate(spec);
    return 0.5 + spec.b * spec.b * (1.0 + std::cos(2.0 * phi) * sinc_gamma(spec.gamma));
}

// Undisplaced bracket states are Poissonian: Var_rho[N] = <N>_rho = b^2.
inline double photon_variance(const BracketSpec& spec) {
    validate(spec);
    return spec.b * spec.b;
}

inline double displaced_mean(const BracketSpec& spec, const Displacement& disp) {
    validate(spec);
    validate(disp);
    return spec.b * spec.b + disp.mag * disp.mag;
}

inline double displaced_variance(const BracketSpec& spec, const Displacement& disp) {
    validate(disp);
    return photon_variance(spec) + 2.0 * disp.mag * disp.mag * quadrature_variance(spec, disp.phase);
}

// Fano factor of the displaced state; >= 1 always. Undefined (0/0) for the
// vacuum with no displacement, which is reported as an error.
inline double fano(const BracketSpec& spec, const Displacement& disp) {
    const double mean = displaced_mean(spec, disp);
    if (mean == 0.0) throw degenerate_error("Fano factor undefined for b = |alpha| = 0");
    const double b2 = spec.b * spec.b;
    return (b2 + 2.0 * disp.mag * disp.mag * quadrature_variance(spec, disp.phase)) / mean;
}

// W(z) = (1/pi) sum_k mean_psi exp(-2 |z - (-1)^k b e^{i psi}|^2).
// gamma = 0 is evaluated as the exact two-point mixture.
inline double wigner(const BracketSpec& spec, const PhasePoint& z) {
    validate(spec);
    validate(z);
    const std::complex<double> zc{z.re, z.im};
    const double b = spec.b;
    auto kernel = [&](double psi) {
        const std::complex<double> c = std::polar(b, psi);
        return std::exp(-2.0 * std::norm(zc - c)) + std::exp(-2.0 * std::norm(zc + c));
    };
    if (spec.gamma == 0.0 || b == 0.0) return kernel(0.0) / std::numbers::pi;
    const double scale = std::max(b, std::abs(zc));
    auto result = quadrature::adaptive_arc(spec.gamma, scale, [&](const quadrature::GaussLegendreRule& rule) {
        return quadrature::arc_mean(rule, spec.gamma, kernel);
    });
    return result.value / std::numbers::pi;
}

struct WignerSample {
    PhasePoint z;
    double w = 0.0;
};

// n x n evaluations on [-extent, extent]^2. Row-major: the row index walks y
// upward from -extent, and x varies fastest within a row.
inline std::vector<WignerSample> wigner_grid(const BracketSpec& spec, double extent, std::size_t n) {
    validate(spec);
    detail::require(n >= 2, "grid size n must be >= 2 (got " + std::to_string(n) + ")");
    detail::require(std::isfinite(extent) && extent > 0.0, "extent must be > 0");
    std::vector<WignerSample> out;
    out.reserve(n * n);
    const double step = 2.0 * extent / static_cast<double>(n - 1);
    auto coord = [&](std::size_t i) {
        // Mirror-exact coordinates so (x, y) and (-x, -y) are both on the grid.
        const double c = -extent + step * static_cast<double>(i);
        const double m = extent - step * static_cast<double>(n - 1 - i);
        return 2 * i + 1 == n ? 0.0 : (2 * i < n ? c : m);
    };
    for (std::size_t iy = 0; iy < n; ++iy) {
        for (std::size_t ix = 0; ix < n; ++ix) {
            PhasePoint z{coord(ix), coord(iy)};
            out.push_back({z, wigner(spec, z)});
        }
    }
    return out;
}

}  // namespace bracket::states
