#pragma once

// Shot-by-shot Monte Carlo of the optical chain: signal, local-oscillator
// displacement, beam-splitter split and per-arm detection.
//
// Direct bracket sampling draws the mixture label (sign k, arc angle psi) per
// shot. The piezo sweep instead emits plain coherent states, one relative phase
// per step; bracket ensembles only appear after post-selection (see fringe.hpp).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "bracket/error.hpp"
#include "bracket/rng.hpp"
#include "bracket/splitter.hpp"
#include "bracket/states.hpp"

namespace bracket::simshot {

using splitter::SplitterSpec;
using states::BracketSpec;
using states::Displacement;

struct ShotCounts {
    std::uint32_t n1 = 0;
    std::uint32_t n2 = 0;

    friend bool operator==(const ShotCounts&, const ShotCounts&) = default;
};

struct ShotRecord {
    std::uint32_t step = 0;
    double phi_true = 0.0;
    std::uint32_t n1 = 0;
    std::uint32_t n2 = 0;

    friend bool operator==(const ShotRecord&, const ShotRecord&) = default;
};

// Step index -> relative phase.
//  distorted: start + 2 pi fringes * g(x), g(x) = x + d x (1-x)(1-2x), a smooth
//             monotone cubic, with x built from jittered unit increments
//  linear:    evenly spaced from start to stop
//  table:     explicit phases, one per step
struct PhaseProfile {
    enum class Kind { distorted, linear, table };

    Kind kind = Kind::distorted;
    double start = 0.25;
    double stop = 0.0;  // linear only
    double fringes = 2.5;
    double distortion = 0.5;
    double jitter = 0.02;
    std::vector<double> table;

    static PhaseProfile linear(double start, double stop) {
        PhaseProfile p;
        p.kind = Kind::linear;
        p.start = start;
        p.stop = stop;
        p.jitter = 0.0;
        return p;
    }

    static PhaseProfile from_table(std::vector<double> phases) {
        PhaseProfile p;
        p.kind = Kind::table;
        p.table = std::move(phases);
        return p;
    }

    void validate(std::size_t steps) const {
        detail::require(std::isfinite(start), "profile start must be finite");
        switch (kind) {
        case Kind::distorted:
            detail::require(std::isfinite(fringes) && fringes > 0.0, "profile fringes must be > 0");
            detail::require(distortion > -1.0 && distortion < 2.0,
                            "profile distortion must lie in (-1, 2) to stay monotone");
            detail::require(jitter >= 0.0 && jitter < 0.5, "profile jitter must lie in [0, 0.5)");
            break;
        case Kind::linear:
            detail::require(std::isfinite(stop), "profile stop must be finite");
            break;
        case Kind::table:
            detail::require(table.size() == steps, "phase table length must equal steps");
            for (double v : table) detail::require(std::isfinite(v), "phase table entries must be finite");
            break;
        }
    }

    std::vector<double> phases(std::size_t steps, std::uint64_t seed) const {
        validate(steps);
        std::vector<double> out(steps);
        switch (kind) {
        case Kind::table:
            out = table;
            break;
        case Kind::linear:
            for (std::size_t j = 0; j < steps; ++j) {
                out[j] = start + (stop - start) * static_cast<double>(j) / static_cast<double>(steps - 1);
            }
            break;
        case Kind::distorted: {
            std::vector<double> x(steps, 0.0);
            for (std::size_t j = 1; j < steps; ++j) {
                double inc = 1.0;
                if (jitter > 0.0) {
                    auto eng = rng::engine(seed, rng::Stream::profile_jitter, 0, j);
                    inc = std::max(0.05, 1.0 + jitter * rng::normal(eng));
                }
                x[j] = x[j - 1] + inc;
            }
            const double total = 2.0 * std::numbers::pi * fringes;
            for (std::size_t j = 0; j < steps; ++j) {
                const double u = x[j] / x[steps - 1];
                out[j] = start + total * (u + distortion * u * (1.0 - u) * (1.0 - 2.0 * u));
            }
            break;
        }
        }
        return out;
    }
};

struct SweepConfig {
    std::size_t steps = 320;
    std::size_t shots_per_step = 30000;
    double b = 2.0;
    double mag = 2.0;
    double tau = 0.5;
    double eta1 = 0.5;
    double eta2 = 0.5;
    PhaseProfile profile;
    double noise = 0.0;  // relative jitter of pulse energy |A|^2
    std::uint64_t seed = 1;
};

inline const SweepConfig& validate(const SweepConfig& c) {
    detail::require(c.steps >= 2, "steps must be >= 2");
    detail::require(c.shots_per_step >= 1, "shots_per_step must be >= 1");
    states::validate(BracketSpec{c.b, 0.0});
    states::validate(Displacement{c.mag, 0.0});
    splitter::validate(SplitterSpec{c.tau, c.eta1, c.eta2});
    detail::require(std::isfinite(c.noise) && c.noise >= 0.0, "noise must be >= 0");
    c.profile.validate(c.steps);
    return c;
}

// Shots are stored step-major: shot s of step j is counts[j * shots_per_step + s].
struct SweepDataset {
    SweepConfig config;
    std::vector<double> step_phase;
    std::vector<ShotCounts> counts;

    std::size_t steps() const { return step_phase.size(); }
    std::size_t shots_per_step() const { return steps() == 0 ? 0 : counts.size() / steps(); }
    std::size_t size() const { return counts.size(); }

    ShotRecord record(std::size_t i) const {
        const std::size_t step = i / shots_per_step();
        return {static_cast<std::uint32_t>(step), step_phase[step], counts[i].n1, counts[i].n2};
    }

    std::span<const ShotCounts> step_counts(std::size_t step) const {
        const std::size_t n = shots_per_step();
        return std::span<const ShotCounts>(counts).subspan(step * n, n);
    }
};

namespace impl {

inline ShotCounts detect(rng::KeyedEngine& eng, double intensity, const SplitterSpec& split, double noise) {
    if (noise > 0.0) intensity *= std::max(0.0, 1.0 + noise * rng::normal(eng));
    return {rng::poisson(eng, split.eta1 * split.tau * intensity),
            rng::poisson(eng, split.eta2 * (1.0 - split.tau) * intensity)};
}

inline unsigned resolve_workers(unsigned workers) {
    if (workers != 0) return workers;
    return std::max(1u, std::thread::hardware_concurrency());
}

// Runs body(i) for i in [0, n) on `workers` threads with a static partition.
template <class Body>
void parallel_for(std::size_t n, unsigned workers, Body&& body) {
    workers = static_cast<unsigned>(std::min<std::size_t>(resolve_workers(workers), std::max<std::size_t>(n, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            const std::size_t lo = n * w / workers;
            const std::size_t hi = n * (w + 1) / workers;
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
}

}  // namespace impl

// One shot of the displaced bracket state: k in {0, 1} equiprobable,
// psi ~ U(-gamma/2, gamma/2), A = alpha + (-1)^k b e^{i psi}; the arms are
// independent Poisson given (k, psi).
inline ShotCounts sample_bracket_shot(const BracketSpec& spec, const Displacement& disp, const SplitterSpec& split,
                                      rng::KeyedEngine& eng, double noise = 0.0) {
    const double sign = (eng() >> 63) ? -1.0 : 1.0;
    const double psi = (rng::uniform01(eng) - 0.5) * spec.gamma;
    const std::complex<double> field = disp.field() + sign * std::polar(spec.b, psi);
    return impl::detect(eng, std::norm(field), split, noise);
}

// n keyed shots; shot i uses the stream (seed, tag, i).
inline std::vector<ShotCounts> sample_bracket_shots(const BracketSpec& spec, const Displacement& disp,
                                                    const SplitterSpec& split, std::size_t n, std::uint64_t seed,
                                                    std::uint64_t tag = 0, unsigned workers = 0) {
    states::validate(spec);
    states::validate(disp);
    splitter::validate(split);
    std::vector<ShotCounts> out(n);
    constexpr std::size_t kBlock = 4096;
    const std::size_t blocks = (n + kBlock - 1) / kBlock;
    impl::parallel_for(blocks, workers, [&](std::size_t blk) {
        const std::size_t hi = std::min(n, (blk + 1) * kBlock);
        for (std::size_t i = blk * kBlock; i < hi; ++i) {
            auto eng = rng::engine(seed, rng::Stream::bracket_shot, tag, i);
            out[i] = sample_bracket_shot(spec, disp, split, eng);
        }
    });
    return out;
}

// Each step sends the coherent state b (sign +, gamma = 0) against the local
// oscillator at phase profile(j).
inline SweepDataset run_sweep(const SweepConfig& config, unsigned workers = 0) {
    validate(config);
    SweepDataset ds;
    ds.config = config;
    ds.step_phase = config.profile.phases(config.steps, config.seed);
    ds.counts.resize(config.steps * config.shots_per_step);
    const SplitterSpec split{config.tau, config.eta1, config.eta2};
    impl::parallel_for(config.steps, workers, [&](std::size_t j) {
        const std::complex<double> field = std::polar(config.mag, ds.step_phase[j]) + config.b;
        const double intensity = std::norm(field);
        ShotCounts* dst = ds.counts.data() + j * config.shots_per_step;
        for (std::size_t s = 0; s < config.shots_per_step; ++s) {
            auto eng = rng::engine(config.seed, rng::Stream::sweep_shot, j, s);
            dst[s] = impl::detect(eng, intensity, split, config.noise);
        }
    });
    return ds;
}

// Unbiased sample variance over the sample mean.
template <class T>
double sample_fano(std::span<const T> counts) {
    if (counts.size() < 2) throw degenerate_error("sample Fano factor needs at least 2 counts");
    double mean = 0.0;
    for (auto c : counts) mean += static_cast<double>(c);
    mean /= static_cast<double>(counts.size());
    if (mean == 0.0) throw degenerate_error("sample Fano factor undefined for zero mean");
    double ss = 0.0;
    for (auto c : counts) {
        const double d = static_cast<double>(c) - mean;
        ss += d * d;
    }
    return ss / static_cast<double>(counts.size() - 1) / mean;
}

inline double sample_fano(const std::vector<std::uint32_t>& counts) {
    return sample_fano(std::span<const std::uint32_t>(counts));
}

// Pearson coefficient of (n1, n2).
inline double sample_correlation(std::span<const ShotCounts> pairs) {
    if (pairs.size() < 2) throw degenerate_error("correlation needs at least 2 pairs");
    double m1 = 0.0;
    double m2 = 0.0;
    for (const auto& p : pairs) {
        m1 += p.n1;
        m2 += p.n2;
    }
    const double n = static_cast<double>(pairs.size());
    m1 /= n;
    m2 /= n;
    double s11 = 0.0;
    double s22 = 0.0;
    double s12 = 0.0;
    for (const auto& p : pairs) {
        const double d1 = p.n1 - m1;
        const double d2 = p.n2 - m2;
        s11 += d1 * d1;
        s22 += d2 * d2;
        s12 += d1 * d2;
    }
    if (s11 == 0.0 || s22 == 0.0) throw degenerate_error("correlation undefined: a marginal has zero variance");
    return s12 / std::sqrt(s11 * s22);
}

inline std::vector<std::uint32_t> arm(std::span<const ShotCounts> pairs, int which) {
    detail::require(which == 1 || which == 2, "arm must be 1 or 2");
    std::vector<std::uint32_t> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back(which == 1 ? p.n1 : p.n2);
    return out;
}

// Standard error of a statistic by non-overlapping batch means.
template <class T, class Stat>
double batch_standard_error(std::span<const T> data, std::size_t batches, Stat&& stat) {
    detail::require(batches >= 2 && data.size() >= 2 * batches, "too few samples for batch standard error");
    const std::size_t len = data.size() / batches;
    double mean = 0.0;
    double ss = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
        const double v = stat(data.subspan(b * len, len));
        const double d = v - mean;
        mean += d / static_cast<double>(b + 1);
        ss += d * (v - mean);
    }
    return std::sqrt(ss / static_cast<double>(batches - 1) / static_cast<double>(batches));
}

}  // namespace bracket::simshot
