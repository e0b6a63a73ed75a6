#pragma once

// Intensity correlations at the two outputs of a beam splitter fed with a
// displaced bracket state, and the Bernoulli-thinning map from input Fano
// factor to the Fano factor seen by a detector of efficiency eta.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "bracket/error.hpp"
#include "bracket/states.hpp"

namespace bracket::splitter {

struct SplitterSpec {
    double tau = 0.5;   // transmissivity, arm 1 gets tau
    double eta1 = 1.0;  // detection efficiency, arm 1
    double eta2 = 1.0;  // detection efficiency, arm 2
};

inline SplitterSpec validate(const SplitterSpec& s) {
    detail::require(std::isfinite(s.tau) && s.tau > 0.0 && s.tau < 1.0,
                    "tau must lie in (0, 1) (got " + std::to_string(s.tau) + ")");
    detail::require(std::isfinite(s.eta1) && s.eta1 >= 0.0 && s.eta1 <= 1.0, "eta1 must lie in [0, 1]");
    detail::require(std::isfinite(s.eta2) && s.eta2 >= 0.0 && s.eta2 <= 1.0, "eta2 must lie in [0, 1]");
    return s;
}

namespace impl {

inline void require_fano(double fano) {
    detail::require(std::isfinite(fano) && fano >= 1.0,
                    "Fano factor must be >= 1 (got " + std::to_string(fano) + ")");
}

}  // namespace impl

// Gamma = (F-1) sqrt(tau(1-tau)) / sqrt([F tau + 1 - tau][F (1-tau) + tau])
inline double gamma_coeff(double fano, double tau) {
    impl::require_fano(fano);
    detail::require(std::isfinite(tau) && tau > 0.0 && tau < 1.0,
                    "tau must lie in (0, 1) (got " + std::to_string(tau) + ")");
    const double t = tau;
    const double r = 1.0 - tau;
    return (fano - 1.0) * std::sqrt(t * r) / std::sqrt((fano * t + r) * (fano * r + t));
}

inline double gamma_balanced(double fano) {
    impl::require_fano(fano);
    return (fano - 1.0) / (fano + 1.0);
}

// Binomial thinning keeps the Poisson-mixture form: F -> 1 + eta (F - 1).
inline double detected_fano(double fano, double eta) {
    impl::require_fano(fano);
    detail::require(std::isfinite(eta) && eta >= 0.0 && eta <= 1.0, "eta must lie in [0, 1]");
    return 1.0 + eta * (fano - 1.0);
}

// Pearson correlation of two counters that independently thin the same input
// (Fano factor F) with overall survival probabilities t1 and t2:
//   sqrt(t1 t2) (F-1) / sqrt([1 + t1 (F-1)][1 + t2 (F-1)]).
// With t1 = eta tau and t2 = eta (1-tau) this equals
// gamma_coeff(detected_fano(F, eta), tau).
inline double thinned_correlation(double fano, double t1, double t2) {
    impl::require_fano(fano);
    detail::require(t1 >= 0.0 && t1 <= 1.0 && t2 >= 0.0 && t2 <= 1.0, "thinning factors must lie in [0, 1]");
    if (t1 == 0.0 || t2 == 0.0) return 0.0;
    const double e = fano - 1.0;
    return std::sqrt(t1 * t2) * e / std::sqrt((1.0 + t1 * e) * (1.0 + t2 * e));
}

struct CurvePoint {
    double phi = 0.0;
    double fano_detected = 0.0;  // Fano factor of arm-1 counts
    double gamma = 0.0;          // intensity correlation of the two arms' counts
};

inline std::vector<CurvePoint> phase_curves(const states::BracketSpec& spec, double mag, const SplitterSpec& split,
                                            std::span<const double> phis) {
    states::validate(spec);
    validate(split);
    const double t1 = split.tau * split.eta1;
    const double t2 = (1.0 - split.tau) * split.eta2;
    std::vector<CurvePoint> rows;
    rows.reserve(phis.size());
    for (double phi : phis) {
        detail::require(std::isfinite(phi), "phi must be finite");
        const double f = states::fano(spec, states::Displacement{mag, phi});
        rows.push_back({phi, detected_fano(f, t1), thinned_correlation(f, t1, t2)});
    }
    return rows;
}

}  // namespace bracket::splitter
