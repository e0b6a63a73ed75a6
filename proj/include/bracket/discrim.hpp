#pragma once

// Kennedy-type receiver for binary PSK (+b vs -b) with bracket phase noise and
// a preparation dephasing. The receiver adds the field beta, which nulls the
// "-" hypothesis when beta = b, then counts photons: "+" is declared when the
// count reaches the threshold. Equal priors.

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
#include "bracket/photostat.hpp"
#include "bracket/rng.hpp"
#include "bracket/simshot.hpp"
#include "bracket/states.hpp"

namespace bracket::discrim {

using photostat::DetectorModel;
using photostat::PhotonDistribution;
using states::Displacement;

struct ReceiverSpec {
    Displacement displacement{1.0, 0.0};  // beta
    std::size_t threshold = 1;            // declare "+" when count >= threshold
    DetectorModel det{1.0};
};

inline ReceiverSpec validate(const ReceiverSpec& rx) {
    states::validate(rx.displacement);
    photostat::validate(rx.det);
    detail::require(rx.threshold >= 1, "threshold must be >= 1");
    return rx;
}

namespace impl {

inline void validate_hypothesis(double b, double gamma, double dephase) {
    states::validate(states::BracketSpec{b, gamma});
    detail::require(std::isfinite(dephase), "dephase must be finite");
}

}  // namespace impl

// Counts for the amplitude sign * b e^{i (dephase + psi)} + beta,
// psi uniform on [-gamma/2, gamma/2]. The cutoff always covers the threshold.
inline PhotonDistribution hypothesis_count_dist(int sign, double b, double gamma, double dephase,
                                                const ReceiverSpec& rx) {
    detail::require(sign == 1 || sign == -1, "sign must be +1 or -1");
    impl::validate_hypothesis(b, gamma, dephase);
    validate(rx);
    const double center = dephase + (sign < 0 ? std::numbers::pi : 0.0);
    return photostat::arc_mixture({photostat::Arc{b, center, 1.0}}, gamma, rx.displacement, rx.det, rx.threshold);
}

// Probability that the count falls below the threshold.
inline double below_threshold(const PhotonDistribution& p, std::size_t threshold) {
    double s = 0.0;
    for (std::size_t m = 0; m < threshold && m < p.probs.size(); ++m) s += p.probs[m];
    return s;
}

// P_e = 1/2 [P(count >= th | -) + P(count < th | +)]
inline double error_probability(double b, double gamma, double dephase, const ReceiverSpec& rx) {
    const auto minus = hypothesis_count_dist(-1, b, gamma, dephase, rx);
    const auto plus = hypothesis_count_dist(+1, b, gamma, dephase, rx);
    const double miss_minus = 1.0 - below_threshold(minus, rx.threshold);
    const double miss_plus = below_threshold(plus, rx.threshold);
    return std::clamp(0.5 * (miss_minus + miss_plus), 0.0, 1.0);
}

struct ErrorRow {
    double b = 0.0;
    double gamma = 0.0;
    double dephase = 0.0;
    double p_error = 0.0;
};

struct SweepOptions {
    bool nulling = true;               // beta = b at phase 0 for every row; otherwise rx.displacement
    std::vector<double> dephases{0.0};
    unsigned workers = 0;
};

// Cross product, b outermost, then gamma, then dephase.
inline std::vector<ErrorRow> sweep_error(std::span<const double> bs, std::span<const double> gammas,
                                         const ReceiverSpec& rx, const SweepOptions& opt = {}) {
    detail::require(!bs.empty(), "b grid must not be empty");
    detail::require(!gammas.empty(), "gamma grid must not be empty");
    detail::require(!opt.dephases.empty(), "dephase grid must not be empty");
    validate(rx);
    for (double b : bs) impl::validate_hypothesis(b, 0.0, 0.0);
    for (double g : gammas) impl::validate_hypothesis(0.0, g, 0.0);
    for (double d : opt.dephases) impl::validate_hypothesis(0.0, 0.0, d);

    const std::size_t ng = gammas.size();
    const std::size_t nd = opt.dephases.size();
    std::vector<ErrorRow> rows(bs.size() * ng * nd);
    simshot::impl::parallel_for(rows.size(), opt.workers, [&](std::size_t i) {
        const double b = bs[i / (ng * nd)];
        const double g = gammas[(i / nd) % ng];
        const double d = opt.dephases[i % nd];
        ReceiverSpec cell = rx;
        if (opt.nulling) cell.displacement = Displacement{b, 0.0};
        rows[i] = {b, g, d, error_probability(b, g, d, cell)};
    });
    return rows;
}

struct ErrorEstimate {
    double p_error = 0.0;
    double standard_error = 0.0;
};

// Shot-by-shot simulation with `trials` shots per hypothesis.
inline ErrorEstimate simulate_error(double b, double gamma, double dephase, const ReceiverSpec& rx,
                                    std::size_t trials, std::uint64_t seed, unsigned workers = 0) {
    impl::validate_hypothesis(b, gamma, dephase);
    validate(rx);
    detail::require(trials >= 2, "trials must be >= 2");
    const std::complex<double> beta = rx.displacement.field();
    constexpr std::size_t kBlock = 4096;
    const std::size_t blocks = (trials + kBlock - 1) / kBlock;
    std::vector<std::size_t> wrong[2] = {std::vector<std::size_t>(blocks, 0), std::vector<std::size_t>(blocks, 0)};
    for (int h = 0; h < 2; ++h) {
        const double sign = h == 0 ? 1.0 : -1.0;
        simshot::impl::parallel_for(blocks, workers, [&](std::size_t blk) {
            const std::size_t hi = std::min(trials, (blk + 1) * kBlock);
            std::size_t count = 0;
            for (std::size_t i = blk * kBlock; i < hi; ++i) {
                auto eng = rng::engine(seed, rng::Stream::receiver_trial, static_cast<std::uint64_t>(h), i);
                const double psi = (rng::uniform01(eng) - 0.5) * gamma;
                const std::complex<double> field = sign * std::polar(b, dephase + psi) + beta;
                const std::uint32_t n = rng::poisson(eng, rx.det.eta * std::norm(field));
                const bool says_plus = n >= rx.threshold;
                if (says_plus != (h == 0)) ++count;
            }
            wrong[h][blk] = count;
        });
    }
    double p[2];
    for (int h = 0; h < 2; ++h) {
        std::size_t total = 0;
        for (auto c : wrong[h]) total += c;
        p[h] = static_cast<double>(total) / static_cast<double>(trials);
    }
    const double n = static_cast<double>(trials);
    ErrorEstimate est;
    est.p_error = 0.5 * (p[0] + p[1]);
    est.standard_error = 0.5 * std::sqrt(p[0] * (1.0 - p[0]) / n + p[1] * (1.0 - p[1]) / n);
    return est;
}

}  // namespace bracket::discrim
