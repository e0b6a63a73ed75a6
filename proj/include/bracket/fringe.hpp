#pragma once

// Phase determination from the interference fringe of a piezo sweep, and
// post-selection of bracket ensembles from the swept coherent data.
//
// The retrieval only assumes that the relative phase grows monotonically with
// the step index; step sizes may be irregular.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bracket/error.hpp"
#include "bracket/photostat.hpp"
#include "bracket/rng.hpp"
#include "bracket/simshot.hpp"
#include "bracket/splitter.hpp"
#include "bracket/states.hpp"

namespace bracket::fringe {

using simshot::ShotCounts;
using simshot::SweepDataset;

struct FringeOptions {
    std::size_t smoothing = 5;           // moving-average width used for extremum detection
    double hysteresis = 0.5;             // normalized drop that confirms an extremum
    std::size_t extremum_search = 3;     // raw-data search radius around a smoothed extremum
    std::size_t min_extremum_spacing = 4;
    std::size_t fit_half_width = 4;      // local cosine fit window around each extremum
    int max_iterations = 10;
    double tolerance = 1e-9;
    double flat_factor = 10.0;           // envelope spread must exceed this many noise SEs
};

struct FringeFit {
    double offset = 0.0;     // A
    double amplitude = 0.0;  // B > 0
    std::vector<double> per_step_phase;  // in [0, 2 pi)
    std::vector<double> unwrapped;       // continuous, nondecreasing along the sweep
    std::vector<double> normalized;      // clamped (m - A) / B
    std::vector<std::size_t> extrema;    // step index of each fringe extremum
    std::size_t clamped = 0;
    int iterations = 0;
};

// ---------------------------------------------------------------------------
// Per-step statistics

inline std::vector<double> fringe_means(const SweepDataset& ds, int arm) {
    detail::require(arm == 1 || arm == 2, "arm must be 1 or 2");
    if (ds.steps() == 0 || ds.shots_per_step() == 0) throw degenerate_error("empty sweep dataset");
    std::vector<double> means(ds.steps());
    for (std::size_t j = 0; j < ds.steps(); ++j) {
        const auto shots = ds.step_counts(j);
        if (shots.empty()) throw degenerate_error("step " + std::to_string(j) + " has no shots");
        double s = 0.0;
        for (const auto& c : shots) s += arm == 1 ? c.n1 : c.n2;
        means[j] = s / static_cast<double>(shots.size());
    }
    return means;
}

// Median over steps of the standard error of each step mean.
inline double fringe_noise(const SweepDataset& ds, int arm) {
    const auto means = fringe_means(ds, arm);
    std::vector<double> se(ds.steps());
    for (std::size_t j = 0; j < ds.steps(); ++j) {
        const auto shots = ds.step_counts(j);
        double ss = 0.0;
        for (const auto& c : shots) {
            const double d = (arm == 1 ? c.n1 : c.n2) - means[j];
            ss += d * d;
        }
        const double n = static_cast<double>(shots.size());
        se[j] = n > 1 ? std::sqrt(ss / (n - 1) / n) : 0.0;
    }
    std::nth_element(se.begin(), se.begin() + se.size() / 2, se.end());
    return se[se.size() / 2];
}

namespace impl {

inline double percentile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// Robust noise level of a smooth sequence from its second differences.
inline double second_difference_noise(std::span<const double> m) {
    if (m.size() < 3) return 0.0;
    std::vector<double> d;
    d.reserve(m.size() - 2);
    for (std::size_t j = 1; j + 1 < m.size(); ++j) d.push_back(std::abs(m[j + 1] - 2.0 * m[j] + m[j - 1]));
    std::nth_element(d.begin(), d.begin() + d.size() / 2, d.end());
    return 1.4826 * d[d.size() / 2] / std::sqrt(6.0);
}

inline std::vector<double> moving_average(std::span<const double> v, std::size_t width) {
    const std::size_t half = width / 2;
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::size_t lo = i >= half ? i - half : 0;
        const std::size_t hi = std::min(v.size(), i + half + 1);
        double s = 0.0;
        for (std::size_t k = lo; k < hi; ++k) s += v[k];
        out[i] = s / static_cast<double>(hi - lo);
    }
    return out;
}

struct Extremum {
    std::size_t index = 0;  // step with the extreme raw value
    bool is_max = false;
};

struct ExtremaScan {
    std::vector<Extremum> extrema;
    bool falling_at_start = false;  // v decreasing before the first extremum
};

// Extrema of the smoothed normalized fringe, confirmed by a hysteresis drop so
// that noise wiggles near a turning point count once. The raw extremum is then
// searched within `extremum_search` steps of the smoothed one.
inline ExtremaScan scan_extrema(std::span<const double> v, const FringeOptions& opt) {
    const auto s = moving_average(v, std::max<std::size_t>(opt.smoothing, 1));
    const std::size_t n = s.size();
    std::vector<Extremum> found;
    enum class Look { any, max, min } look = Look::any;
    std::size_t hi = 0;
    std::size_t lo = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (s[i] > s[hi]) hi = i;
        if (s[i] < s[lo]) lo = i;
        if (look != Look::min && s[hi] - s[i] > opt.hysteresis) {
            found.push_back({hi, true});
            look = Look::min;
            lo = i;
        } else if (look != Look::max && s[i] - s[lo] > opt.hysteresis) {
            found.push_back({lo, false});
            look = Look::max;
            hi = i;
        }
    }
    // A turning point too close to the end to be confirmed by the hysteresis.
    if (look == Look::min && lo + 2 < n && s[n - 1] > s[lo]) found.push_back({lo, false});
    if (look == Look::max && hi + 2 < n && s[n - 1] < s[hi]) found.push_back({hi, true});

    ExtremaScan scan;
    if (!found.empty() && found.front().index == 0) {
        scan.falling_at_start = found.front().is_max;
        found.erase(found.begin());
    } else if (!found.empty()) {
        scan.falling_at_start = !found.front().is_max;
    } else {
        scan.falling_at_start = s[n - 1] < s[0];
    }
    for (auto& e : found) {
        const std::size_t a = e.index >= opt.extremum_search ? e.index - opt.extremum_search : 0;
        const std::size_t b = std::min(n - 1, e.index + opt.extremum_search);
        std::size_t best = a;
        for (std::size_t k = a; k <= b; ++k) {
            if (e.is_max ? v[k] > v[best] : v[k] < v[best]) best = k;
        }
        e.index = best;
    }
    scan.extrema = std::move(found);
    return scan;
}

// First step of the branch that follows extremum e: the extremum step itself
// joins the later branch when the true turning point lies before it.
inline std::size_t branch_start(std::span<const double> v, const Extremum& e) {
    const std::size_t j = e.index;
    if (j == 0 || j + 1 >= v.size()) return j;
    const bool turning_point_after = e.is_max ? v[j + 1] > v[j - 1] : v[j + 1] < v[j - 1];
    return turning_point_after ? j + 1 : j;
}

// Model near an extremum: m = P - s B (1 - cos(w (x - x0))), s = +1 at a maximum.
struct LocalPeak {
    double level = 0.0;
    double omega = 0.0;
    double x0 = 0.0;
};

inline std::optional<LocalPeak> fit_local_peak(std::span<const double> m, std::size_t lo, std::size_t hi, double B,
                                               bool is_max, LocalPeak start) {
    const double sgn = is_max ? 1.0 : -1.0;
    LocalPeak p = start;
    auto sse = [&](const LocalPeak& q) {
        double acc = 0.0;
        for (std::size_t j = lo; j <= hi; ++j) {
            const double u = q.omega * (static_cast<double>(j) - q.x0);
            const double r = m[j] - (q.level - sgn * B * (1.0 - std::cos(u)));
            acc += r * r;
        }
        return acc;
    };
    double lambda = 1e-6;
    double cost = sse(p);
    for (int iter = 0; iter < 100; ++iter) {
        double jtj[3][3] = {};
        double jtr[3] = {};
        for (std::size_t j = lo; j <= hi; ++j) {
            const double dx = static_cast<double>(j) - p.x0;
            const double u = p.omega * dx;
            const double r = m[j] - (p.level - sgn * B * (1.0 - std::cos(u)));
            const double g[3] = {1.0, -sgn * B * std::sin(u) * dx, sgn * B * std::sin(u) * p.omega};
            for (int a = 0; a < 3; ++a) {
                jtr[a] += g[a] * r;
                for (int c = 0; c < 3; ++c) jtj[a][c] += g[a] * g[c];
            }
        }
        bool stepped = false;
        for (int attempt = 0; attempt < 20 && !stepped; ++attempt) {
            double a[3][4];
            for (int r = 0; r < 3; ++r) {
                for (int c = 0; c < 3; ++c) a[r][c] = jtj[r][c] + (r == c ? lambda * (jtj[r][r] + 1e-300) : 0.0);
                a[r][3] = jtr[r];
            }
            // Gaussian elimination with partial pivoting.
            bool singular = false;
            for (int col = 0; col < 3; ++col) {
                int piv = col;
                for (int r = col + 1; r < 3; ++r)
                    if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
                if (a[piv][col] == 0.0) {
                    singular = true;
                    break;
                }
                for (int c = 0; c < 4; ++c) std::swap(a[col][c], a[piv][c]);
                for (int r = col + 1; r < 3; ++r) {
                    const double f = a[r][col] / a[col][col];
                    for (int c = col; c < 4; ++c) a[r][c] -= f * a[col][c];
                }
            }
            if (singular) {
                lambda *= 10.0;
                continue;
            }
            double d[3];
            for (int r = 2; r >= 0; --r) {
                double acc = a[r][3];
                for (int c = r + 1; c < 3; ++c) acc -= a[r][c] * d[c];
                d[r] = acc / a[r][r];
            }
            const LocalPeak trial{p.level + d[0], p.omega + d[1], p.x0 + d[2]};
            const double trial_cost = sse(trial);
            if (std::isfinite(trial_cost) && trial_cost <= cost) {
                const double change = std::abs(d[0]) + std::abs(d[1]) + std::abs(d[2]);
                p = trial;
                cost = trial_cost;
                lambda = std::max(lambda * 0.1, 1e-12);
                stepped = true;
                if (change < 1e-14 * (1.0 + std::abs(p.level) + std::abs(p.x0))) return p;
            } else {
                lambda *= 10.0;
            }
        }
        if (!stepped) break;
    }
    if (!std::isfinite(p.level) || !std::isfinite(p.omega)) return std::nullopt;
    return p;
}

inline double wrap_2pi(double x) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double r = std::fmod(x, two_pi);
    if (r < 0.0) r += two_pi;
    if (r >= two_pi) r = 0.0;
    return r;
}

// Signed distance of x from c on the circle, in (-pi, pi].
inline double circular_offset(double x, double c) {
    double d = wrap_2pi(x - c);
    if (d > std::numbers::pi) d -= 2.0 * std::numbers::pi;
    return d;
}

}  // namespace impl

// Arccos retrieval with extremum-based branch assignment. Fills the phase
// fields of a copy of `fit`.
inline FringeFit retrieve(std::span<const double> means, const FringeFit& fit, const FringeOptions& opt = {}) {
    if (!(fit.amplitude > 0.0) || !std::isfinite(fit.offset)) {
        throw flat_fringe_error("fringe fit has no amplitude; phase cannot be retrieved");
    }
    detail::require(means.size() >= 2, "phase retrieval needs at least 2 steps");
    FringeFit out = fit;
    const std::size_t n = means.size();
    out.normalized.resize(n);
    out.clamped = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const double v = (means[j] - fit.offset) / fit.amplitude;
        if (v > 1.0 || v < -1.0) ++out.clamped;
        out.normalized[j] = std::clamp(v, -1.0, 1.0);
    }
    const auto scan = impl::scan_extrema(out.normalized, opt);
    // Fringes faster than the smoothing window vanish from the smoothed scan,
    // so spacing is also checked on the unsmoothed sequence.
    FringeOptions unsmoothed = opt;
    unsmoothed.smoothing = 1;
    const auto raw = impl::scan_extrema(out.normalized, unsmoothed);
    for (const auto* s : {&scan.extrema, &raw.extrema}) {
        for (std::size_t k = 1; k < s->size(); ++k) {
            const std::size_t a = (*s)[k - 1].index;
            const std::size_t b = (*s)[k].index;
            if (b - a < opt.min_extremum_spacing) {
                throw branch_ambiguity_error("fringe extrema at steps " + std::to_string(a) + " and " +
                                             std::to_string(b) + " are closer than " +
                                             std::to_string(opt.min_extremum_spacing) + " steps");
            }
        }
    }
    out.extrema.clear();
    for (const auto& e : scan.extrema) out.extrema.push_back(e.index);
    // Branch p covers phases [p pi, (p+1) pi]: arccos on even branches, its
    // mirror on odd ones.
    int p = scan.falling_at_start ? 0 : 1;
    out.unwrapped.resize(n);
    out.per_step_phase.resize(n);
    std::size_t next = 0;
    for (std::size_t j = 0; j < n; ++j) {
        while (next < scan.extrema.size() && j >= impl::branch_start(out.normalized, scan.extrema[next])) {
            ++p;
            ++next;
        }
        const double r = std::acos(out.normalized[j]);
        const double base = static_cast<double>(p) * std::numbers::pi;
        out.unwrapped[j] = p % 2 == 0 ? base + r : base + std::numbers::pi - r;
        out.per_step_phase[j] = impl::wrap_2pi(out.unwrapped[j]);
    }
    return out;
}

inline std::vector<double> retrieve_phases(std::span<const double> means, const FringeFit& fit,
                                           const FringeOptions& opt = {}) {
    return retrieve(means, fit, opt).per_step_phase;
}

// Offset and amplitude of the fringe. Starts from the 5th/95th percentile
// envelope, then refines (A, B) by least squares around every extremum found
// by the retrieval: each turning point is fitted with a local cosine
// P -/+ B (1 - cos(w (x - x0))) sharing the global B, and A, B are re-derived
// from the fitted peak and trough levels. The phase fields are left empty.
inline FringeFit fit_cosine(std::span<const double> means, const FringeOptions& opt = {},
                            std::optional<double> noise_se = std::nullopt) {
    detail::require(means.size() >= 8, "cosine fit needs at least 8 steps (got " + std::to_string(means.size()) + ")");
    for (double m : means) detail::require(std::isfinite(m), "fringe means must be finite");
    std::vector<double> v(means.begin(), means.end());
    const double lo = impl::percentile(v, 0.05);
    const double hi = impl::percentile(v, 0.95);
    const double spread = hi - lo;
    const double se = noise_se.value_or(impl::second_difference_noise(means));
    if (!(spread > opt.flat_factor * se) || spread <= 0.0) {
        throw flat_fringe_error("flat fringe: envelope spread " + std::to_string(spread) + " is not above " +
                                std::to_string(opt.flat_factor) + " x noise " + std::to_string(se));
    }
    FringeFit fit;
    fit.offset = 0.5 * (lo + hi);
    fit.amplitude = 0.5 * spread;

    const FringeFit first = retrieve(means, fit, opt);
    const auto scan = impl::scan_extrema(first.normalized, opt);
    if (scan.extrema.empty()) return fit;

    const std::size_t n = means.size();
    const std::size_t K = std::max<std::size_t>(opt.fit_half_width, 2);
    struct Site {
        std::size_t lo, hi;
        bool is_max;
        impl::LocalPeak peak;
        double omega0;
    };
    std::vector<Site> sites;
    for (const auto& e : scan.extrema) {
        const std::size_t j = e.index;
        const std::size_t a = j >= K ? j - K : 0;
        const std::size_t b = std::min(n - 1, j + K);
        if (b - a < 4) continue;
        // Local phase rate from the retrieved phases just outside the turning point.
        const std::size_t ra = j >= 2 * K ? j - 2 * K : 0;
        const std::size_t rb = std::min(n - 1, j + 2 * K);
        double omega0 = (first.unwrapped[rb] - first.unwrapped[ra]) / static_cast<double>(rb - ra);
        if (!(omega0 > 0.0)) omega0 = std::numbers::pi / static_cast<double>(std::max<std::size_t>(rb - ra, 1));
        sites.push_back({a, b, e.is_max, {means[j], omega0, static_cast<double>(j)}, omega0});
    }
    if (sites.empty()) return fit;

    for (int iter = 1; iter <= opt.max_iterations; ++iter) {
        double top = 0.0, bottom = 0.0;
        int ntop = 0, nbottom = 0;
        for (auto& site : sites) {
            const double envelope = site.is_max ? fit.offset + fit.amplitude : fit.offset - fit.amplitude;
            auto local = impl::fit_local_peak(means, site.lo, site.hi, fit.amplitude, site.is_max, site.peak);
            const bool ok = local && local->omega > 0.25 * site.omega0 && local->omega < 4.0 * site.omega0 &&
                            std::abs(local->x0 - static_cast<double>((site.lo + site.hi) / 2)) <= static_cast<double>(K);
            const double level = ok ? local->level : envelope;
            if (ok) site.peak = *local;
            if (site.is_max) {
                top += level;
                ++ntop;
            } else {
                bottom += level;
                ++nbottom;
            }
        }
        const double t = ntop ? top / ntop : fit.offset + fit.amplitude;
        const double bt = nbottom ? bottom / nbottom : fit.offset - fit.amplitude;
        const double A = 0.5 * (t + bt);
        const double B = 0.5 * (t - bt);
        if (!(B > 0.0)) break;
        const double change = std::max(std::abs(A - fit.offset), std::abs(B - fit.amplitude)) / B;
        fit.offset = A;
        fit.amplitude = B;
        fit.iterations = iter;
        if (change < opt.tolerance) break;
    }
    return fit;
}

// fit_cosine followed by retrieve.
inline FringeFit fit_fringe(std::span<const double> means, const FringeOptions& opt = {},
                            std::optional<double> noise_se = std::nullopt) {
    return retrieve(means, fit_cosine(means, opt, noise_se), opt);
}

// ---------------------------------------------------------------------------
// Post-selection

struct StepWeight {
    std::size_t step = 0;
    int window = 0;       // 0: around center, 1: around center + pi
    double offset = 0.0;  // retrieved phase minus the window center
    double weight = 0.0;  // share of the ensemble assigned to this step
    std::size_t draws = 0;
};

struct BracketEnsemble {
    double center = 0.0;
    double gamma = 0.0;
    std::vector<ShotCounts> pooled;
    std::vector<StepWeight> weights;
};

struct PostSelectOptions {
    std::size_t pool_size = 0;  // 0: as many draws as shots available in the windows
    std::uint64_t seed = 1;
};

// Pools shots whose step phase lies within gamma/2 of `center` or of
// `center + pi`. Inside each window steps are weighted by the phase interval
// they cover (inverse local step density) and shots are resampled with
// replacement, so the pooled ensemble sees a uniform phase measure even when the
// piezo steps are irregular. Each window carries half of the draws.
inline BracketEnsemble post_select(const SweepDataset& ds, std::span<const double> phases, double center, double gamma,
                                   const PostSelectOptions& opt = {}) {
    detail::require(std::isfinite(center), "center must be finite");
    detail::require(std::isfinite(gamma) && gamma > 0.0 && gamma <= std::numbers::pi, "gamma must lie in (0, pi]");
    detail::require(phases.size() == ds.steps(), "phase sequence length must equal the number of steps");
    const double half = 0.5 * gamma;

    std::vector<StepWeight> members[2];
    for (std::size_t j = 0; j < phases.size(); ++j) {
        const double d0 = impl::circular_offset(phases[j], center);
        if (std::abs(d0) <= half) {
            members[0].push_back({j, 0, d0, 0.0, 0});
            continue;
        }
        const double d1 = impl::circular_offset(phases[j], center + std::numbers::pi);
        if (std::abs(d1) <= half) members[1].push_back({j, 1, d1, 0.0, 0});
    }
    std::string missing;
    for (int w = 0; w < 2; ++w) {
        if (!members[w].empty()) continue;
        const double c = center + (w == 1 ? std::numbers::pi : 0.0);
        if (!missing.empty()) missing += " and ";
        missing += "[" + std::to_string(c - half) + ", " + std::to_string(c + half) + "]";
    }
    if (!missing.empty()) throw empty_window_error("no sweep steps in phase window " + missing);

    std::vector<double> cumulative[2];
    for (int w = 0; w < 2; ++w) {
        auto& m = members[w];
        std::stable_sort(m.begin(), m.end(), [](const StepWeight& a, const StepWeight& b) { return a.offset < b.offset; });
        double total = 0.0;
        for (std::size_t i = 0; i < m.size(); ++i) {
            const double left = i == 0 ? -half : 0.5 * (m[i - 1].offset + m[i].offset);
            const double right = i + 1 == m.size() ? half : 0.5 * (m[i].offset + m[i + 1].offset);
            m[i].weight = right - left;
            total += m[i].weight;
        }
        double acc = 0.0;
        for (auto& s : m) {
            s.weight = total > 0.0 ? 0.5 * s.weight / total : 0.5 / static_cast<double>(m.size());
            acc += s.weight;
            cumulative[w].push_back(acc);
        }
    }

    const std::size_t per_step = ds.shots_per_step();
    std::size_t pool = opt.pool_size;
    if (pool == 0) pool = (members[0].size() + members[1].size()) * per_step;

    BracketEnsemble e;
    e.center = center;
    e.gamma = gamma;
    e.pooled.resize(pool);
    const std::uint64_t key = rng::mix64(std::bit_cast<std::uint64_t>(center)) ^ std::bit_cast<std::uint64_t>(gamma);
    for (std::size_t i = 0; i < pool; ++i) {
        const int w = static_cast<int>(i % 2);
        auto eng = rng::engine(opt.seed, rng::Stream::post_select, key, i);
        const auto& cum = cumulative[w];
        const double u = rng::uniform01(eng) * cum.back();
        std::size_t k = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
        k = std::min(k, cum.size() - 1);
        auto& member = members[w][k];
        const std::size_t shot = rng::below(eng, per_step);
        e.pooled[i] = ds.counts[member.step * per_step + shot];
        ++member.draws;
    }
    for (int w = 0; w < 2; ++w) e.weights.insert(e.weights.end(), members[w].begin(), members[w].end());
    return e;
}

struct EnsembleStats {
    double fano1 = 0.0;
    double fano2 = 0.0;
    double gamma_corr = 0.0;
    photostat::PhotonDistribution hist1;
    photostat::PhotonDistribution hist2;
    std::size_t shots = 0;
};

inline EnsembleStats ensemble_stats(const BracketEnsemble& e, std::size_t min_cutoff = 0) {
    if (e.pooled.size() < 2) throw degenerate_error("ensemble needs at least 2 pooled shots");
    const auto n1 = simshot::arm(e.pooled, 1);
    const auto n2 = simshot::arm(e.pooled, 2);
    EnsembleStats s;
    s.shots = e.pooled.size();
    s.fano1 = simshot::sample_fano(n1);
    s.fano2 = simshot::sample_fano(n2);
    s.gamma_corr = simshot::sample_correlation(e.pooled);
    s.hist1 = photostat::from_counts(n1, min_cutoff);
    s.hist2 = photostat::from_counts(n2, min_cutoff);
    return s;
}

// Theory for a post-selected ensemble of a sweep with parameters `c`: the
// displaced bracket state (b, gamma) with local-oscillator phase `center`.
struct EnsembleTheory {
    double fano1 = 0.0;
    double fano2 = 0.0;
    double gamma_corr = 0.0;
    photostat::PhotonDistribution hist1;
    photostat::PhotonDistribution hist2;
};

inline EnsembleTheory ensemble_theory(const simshot::SweepConfig& c, double center, double gamma) {
    const states::BracketSpec spec{c.b, gamma};
    const states::Displacement disp{c.mag, center};
    const double t1 = c.tau * c.eta1;
    const double t2 = (1.0 - c.tau) * c.eta2;
    const double f = states::fano(spec, disp);
    EnsembleTheory th;
    th.fano1 = splitter::detected_fano(f, t1);
    th.fano2 = splitter::detected_fano(f, t2);
    th.gamma_corr = splitter::thinned_correlation(f, t1, t2);
    th.hist1 = photostat::distribution(spec, disp, photostat::DetectorModel{t1});
    th.hist2 = photostat::distribution(spec, disp, photostat::DetectorModel{t2});
    return th;
}

}  // namespace bracket::fringe
