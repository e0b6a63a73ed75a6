#pragma once

// Detected-photon statistics of displaced bracket states.
//
// Every distribution here is a Poisson mixture: each coherent component with
// field A contributes Poisson(eta |A|^2), averaged over the arc parameter psi
// with Gauss-Legendre quadrature. Because Bernoulli thinning maps
// Poisson(lambda) to Poisson(eta lambda), detection efficiency only rescales
// component means.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "bracket/error.hpp"
#include "bracket/quadrature.hpp"
#include "bracket/states.hpp"

namespace bracket::photostat {

using states::BracketSpec;
using states::Displacement;

struct DetectorModel {
    double eta = 1.0;  // quantum efficiency
};

inline DetectorModel validate(const DetectorModel& det) {
    detail::require(std::isfinite(det.eta) && det.eta >= 0.0 && det.eta <= 1.0,
                    "eta must lie in [0, 1] (got " + std::to_string(det.eta) + ")");
    return det;
}

// probs[m] for m = 0..cutoff. `mean` and `variance` are the full moments: the
// stored sequence plus the tail beyond the cutoff (for analytic distributions
// the tail is summed explicitly; histograms have no tail). tail_mass is the
// probability not stored in probs.
struct PhotonDistribution {
    std::vector<double> probs;
    double mean = 0.0;
    double variance = 0.0;
    double tail_mass = 0.0;

    std::size_t cutoff() const { return probs.empty() ? 0 : probs.size() - 1; }
    double total() const {
        double s = 0.0;
        for (double p : probs) s += p;
        return s;
    }
};

inline constexpr double kTermThreshold = 1e-7;
inline constexpr double kTailThreshold = 1e-6;
// Terms below this are dropped from the tail-moment accounting.
inline constexpr double kNegligibleTerm = 1e-22;

inline std::vector<double> log_factorials(std::size_t max_m) {
    std::vector<double> table(max_m + 1);
    table[0] = 0.0;
    for (std::size_t m = 1; m <= max_m; ++m) table[m] = table[m - 1] + std::log(static_cast<double>(m));
    return table;
}

inline double poisson_log_pmf(std::size_t m, double lambda, double log_m_factorial) {
    return static_cast<double>(m) * std::log(lambda) - lambda - log_m_factorial;
}

inline double poisson_pmf(std::size_t m, double lambda) {
    if (lambda <= 0.0) return m == 0 ? 1.0 : 0.0;
    return std::exp(poisson_log_pmf(m, lambda, std::lgamma(static_cast<double>(m) + 1.0)));
}

// Smallest cutoff m >= max(ceil(lambda_max), min_cutoff) whose next term is below
// kTermThreshold and whose geometric tail bound is below kTailThreshold. For
// m >= lambda_max every Poisson term with mean <= lambda_max is dominated by
// the lambda_max term, so the bound holds for the whole mixture.
inline std::size_t cutoff_for(double lambda_max, std::size_t min_cutoff = 0) {
    std::size_t m = std::max<std::size_t>(static_cast<std::size_t>(std::ceil(std::max(lambda_max, 0.0))), min_cutoff);
    if (lambda_max <= 0.0) return m;
    for (;; ++m) {
        const double next = poisson_pmf(m + 1, lambda_max);
        const double ratio = lambda_max / static_cast<double>(m + 2);
        const double tail = ratio < 1.0 ? next / (1.0 - ratio) : INFINITY;
        if (next < kTermThreshold && tail < kTailThreshold) return m;
    }
}

inline std::size_t extended_cutoff(double lambda_max, std::size_t cutoff) {
    std::size_t m = cutoff;
    if (lambda_max <= 0.0) return m;
    while (poisson_pmf(m + 1, lambda_max) >= kNegligibleTerm) ++m;
    return m;
}

// One coherent arc: field = displacement + radius * e^{i (center + psi)},
// psi uniform on [-gamma/2, gamma/2].
struct Arc {
    double radius = 0.0;
    double center = 0.0;
    double weight = 1.0;
};

namespace impl {

inline void accumulate_poisson(std::vector<double>& acc, double weight, double lambda,
                               const std::vector<double>& lf) {
    if (lambda <= 0.0) {
        acc[0] += weight;
        return;
    }
    const double log_lambda = std::log(lambda);
    for (std::size_t m = 0; m < acc.size(); ++m) {
        acc[m] += weight * std::exp(static_cast<double>(m) * log_lambda - lambda - lf[m]);
    }
}

inline PhotonDistribution finish(std::vector<double> full, std::size_t cutoff) {
    PhotonDistribution out;
    double s1 = 0.0;
    double s2 = 0.0;
    double total = 0.0;
    for (std::size_t m = 0; m < full.size(); ++m) {
        const double p = full[m];
        const double dm = static_cast<double>(m);
        total += p;
        s1 += dm * p;
        s2 += dm * dm * p;
        if (m > cutoff) out.tail_mass += p;
    }
    out.mean = s1 / total;
    out.variance = s2 / total - out.mean * out.mean;
    full.resize(cutoff + 1);
    out.probs = std::move(full);
    return out;
}

}  // namespace impl

// Mixture of arcs sharing the spread gamma, detected with efficiency eta.
inline PhotonDistribution arc_mixture(const std::vector<Arc>& arcs, double gamma, const Displacement& disp,
                                      const DetectorModel& det, std::size_t min_cutoff = 0) {
    states::validate(disp);
    validate(det);
    detail::require(gamma >= 0.0 && gamma <= std::numbers::pi, "gamma must lie in [0, pi]");
    detail::require(!arcs.empty(), "arc mixture needs at least one component");
    double wsum = 0.0;
    double rmax = 0.0;
    for (const Arc& a : arcs) {
        detail::require(a.radius >= 0.0 && a.weight >= 0.0, "arc radius and weight must be >= 0");
        wsum += a.weight;
        rmax = std::max(rmax, a.radius);
    }
    detail::require(wsum > 0.0, "arc weights must not all vanish");

    const double lambda_max = det.eta * (rmax + disp.mag) * (rmax + disp.mag);
    const std::size_t cutoff = cutoff_for(lambda_max, min_cutoff);
    const std::size_t full = extended_cutoff(lambda_max, cutoff);
    const auto lf = log_factorials(full);
    const std::complex<double> alpha = disp.field();

    auto at_psi = [&](std::vector<double>& acc, double weight, double psi) {
        for (const Arc& a : arcs) {
            const std::complex<double> field = alpha + std::polar(a.radius, a.center + psi);
            impl::accumulate_poisson(acc, weight * a.weight / wsum, det.eta * std::norm(field), lf);
        }
    };

    std::vector<double> probs(full + 1, 0.0);
    if (gamma == 0.0 || rmax == 0.0) {
        at_psi(probs, 1.0, 0.0);
    } else {
        auto result = quadrature::adaptive_arc(gamma, std::max(rmax, disp.mag), [&](const quadrature::GaussLegendreRule& rule) {
            std::vector<double> acc(full + 1, 0.0);
            const double h = 0.5 * gamma;
            for (std::size_t i = 0; i < rule.order(); ++i) at_psi(acc, 0.5 * rule.weights[i], h * rule.nodes[i]);
            return acc;
        });
        probs = std::move(result.value);
    }
    return impl::finish(std::move(probs), cutoff);
}

// P(m) = 1/2 sum_k mean_psi Poisson(m; eta |alpha + (-1)^k b e^{i psi}|^2)
inline PhotonDistribution distribution(const BracketSpec& spec, const Displacement& disp, const DetectorModel& det) {
    states::validate(spec);
    return arc_mixture({Arc{spec.b, 0.0, 0.5}, Arc{spec.b, std::numbers::pi, 0.5}}, spec.gamma, disp, det);
}

// Same distribution computed by moving the efficiency into the amplitudes.
inline PhotonDistribution thin_equivalence(const BracketSpec& spec, const Displacement& disp, const DetectorModel& det) {
    states::validate(spec);
    states::validate(disp);
    validate(det);
    const double s = std::sqrt(det.eta);
    return distribution(BracketSpec{s * spec.b, spec.gamma}, Displacement{s * disp.mag, disp.phase}, DetectorModel{1.0});
}

struct Moments {
    double mean = 0.0;
    double variance = 0.0;
    double fano = 0.0;
    double tail_bound = 0.0;  // probability mass not represented in the sequence
};

// Moments of the stored (truncated) sequence, normalized by its total mass.
inline Moments moments(const PhotonDistribution& p) {
    double total = 0.0;
    double s1 = 0.0;
    double s2 = 0.0;
    for (std::size_t m = 0; m < p.probs.size(); ++m) {
        const double dm = static_cast<double>(m);
        total += p.probs[m];
        s1 += dm * p.probs[m];
        s2 += dm * dm * p.probs[m];
    }
    if (!(total > 0.0)) throw degenerate_error("empty photon distribution");
    Moments out;
    out.mean = s1 / total;
    out.variance = s2 / total - out.mean * out.mean;
    out.tail_bound = p.tail_mass;
    if (out.mean == 0.0) throw degenerate_error("Fano factor undefined for a zero-mean distribution");
    out.fano = out.variance / out.mean;
    return out;
}

// Bhattacharyya overlap sum_m sqrt(P(m) Q(m)) over the zero-padded union of
// supports, divided by sqrt(sum P * sum Q) so identical sequences score 1.
inline double fidelity(const PhotonDistribution& p, const PhotonDistribution& q) {
    const double tp = p.total();
    const double tq = q.total();
    if (!(tp > 0.0) || !(tq > 0.0)) throw degenerate_error("fidelity of an empty distribution");
    const std::size_t n = std::min(p.probs.size(), q.probs.size());
    double overlap = 0.0;
    for (std::size_t m = 0; m < n; ++m) overlap += std::sqrt(p.probs[m] * q.probs[m]);
    return std::clamp(overlap / std::sqrt(tp * tq), 0.0, 1.0);
}

// Normalized histogram of observed counts; the cutoff is the larger of
// min_cutoff and the largest observed count.
inline PhotonDistribution from_counts(std::span<const std::uint32_t> counts, std::size_t min_cutoff = 0) {
    if (counts.empty()) throw degenerate_error("histogram of an empty sample");
    std::uint32_t top = 0;
    for (auto c : counts) top = std::max(top, c);
    std::vector<double> tally(std::max<std::size_t>(top, min_cutoff) + 1, 0.0);
    for (auto c : counts) tally[c] += 1.0;
    const double n = static_cast<double>(counts.size());
    for (double& t : tally) t /= n;
    return impl::finish(std::move(tally), std::max<std::size_t>(top, min_cutoff));
}

inline PhotonDistribution poisson(double lambda) {
    detail::require(std::isfinite(lambda) && lambda >= 0.0, "Poisson mean must be >= 0");
    return arc_mixture({Arc{0.0, 0.0, 1.0}}, 0.0, Displacement{std::sqrt(lambda), 0.0}, DetectorModel{1.0});
}

}  // namespace bracket::photostat
