#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "bracket.hpp"
#include "bracket/cli.hpp"

using namespace bracket;
namespace fs = std::filesystem;
using simshot::ShotCounts;
using splitter::SplitterSpec;
using states::BracketSpec;
using states::Displacement;
constexpr double pi = std::numbers::pi;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

struct Criterion {
    std::string name;
    double limit_s;  // 0: no runtime bound
    std::function<Outcome()> run;
};

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

double fano_se(std::span<const std::uint32_t> v) {
    return simshot::batch_standard_error(v, 50, [](auto s) { return simshot::sample_fano(s); });
}

double corr_se(std::span<const ShotCounts> v) {
    return simshot::batch_standard_error(v, 50, [](auto s) { return simshot::sample_correlation(s); });
}

// Steps within `margin` of any retrieved extremum.
std::vector<bool> near_extrema(std::size_t steps, const std::vector<std::size_t>& extrema, std::size_t margin) {
    std::vector<bool> near(steps, false);
    for (auto e : extrema) {
        const std::size_t lo = e > margin ? e - margin : 0;
        for (std::size_t j = lo; j <= std::min(steps - 1, e + margin); ++j) near[j] = true;
    }
    return near;
}

double phase_diff(double a, double b) { return std::abs(std::remainder(a - b, 2 * pi)); }

Outcome fano_inequality() {
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = INFINITY;
    bool exact_one = true;
    for (int i = 0; i < 10000; ++i) {
        const BracketSpec s{0.01 + 5 * u(gen), pi * u(gen)};
        const double mag = 5 * u(gen) + 1e-3;
        const double phi = 2 * pi * u(gen);
        worst = std::min(worst, states::fano(s, Displacement{mag, phi}));
        exact_one = exact_one && states::fano(s, Displacement{0.0, phi}) == 1.0;
    }
    return {worst >= 1.0 && exact_one,
            "min fano over 1e4 tuples " + fmt("%.15g", worst) + (exact_one ? ", fano(|a|=0) == 1 exactly" : ", fano(|a|=0) != 1")};
}

Outcome curve_shapes() {
    const std::vector<double> gammas{0.05, pi / 2, 3 * pi / 4, pi};
    const SplitterSpec split{0.5, 0.5, 0.5};
    std::vector<double> phis(64);
    for (std::size_t k = 0; k < phis.size(); ++k) phis[k] = 2 * pi * double(k) / 64.0;
    double worst_z = 0, flat_dev = 0;
    for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
        const BracketSpec spec{2, gammas[gi]};
        const auto curve = splitter::phase_curves(spec, 2, split, phis);
        for (std::size_t k = 0; k < phis.size(); ++k) {
            const auto shots = simshot::sample_bracket_shots(spec, Displacement{2, phis[k]}, split, 100000, 7, gi * 64 + k);
            const auto n1 = simshot::arm(shots, 1);
            const double zf = std::abs(simshot::sample_fano(n1) - curve[k].fano_detected) / fano_se(n1);
            const double zg = std::abs(simshot::sample_correlation(shots) - curve[k].gamma) / corr_se(shots);
            worst_z = std::max({worst_z, zf, zg});
            if (gammas[gi] == pi) {
                flat_dev = std::max({flat_dev, std::abs(curve[k].fano_detected - curve[0].fano_detected),
                                     std::abs(curve[k].gamma - curve[0].gamma)});
            }
        }
    }
    return {worst_z <= 5.0 && flat_dev <= 1e-12,
            "max |z| " + fmt("%.2f", worst_z) + " over 512 comparisons, gamma=pi spread " + fmt("%.2g", flat_dev)};
}

Outcome balanced_closed_form() {
    double worst = 0;
    for (int i = 0; i <= 9900; ++i) {
        const double f = 1.0 + i * 0.01;
        worst = std::max(worst, std::abs(splitter::gamma_coeff(f, 0.5) - (f - 1) / (f + 1)));
    }
    return {worst <= 1e-15, "max deviation " + fmt("%.3g", worst) + " over F in [1, 100]"};
}

Outcome photon_fidelity() {
    // arm 1 of a lossless balanced splitter thins by one half, which is the eta = 0.5 detector
    double worst = 1;
    std::string d;
    const double phis[] = {0.0, pi / 4, pi / 2};
    for (int k = 0; k < 3; ++k) {
        const BracketSpec spec{2, pi / 2};
        const Displacement disp{2, phis[k]};
        const auto theory = photostat::distribution(spec, disp, photostat::DetectorModel{0.5});
        const auto shots = simshot::sample_bracket_shots(spec, disp, SplitterSpec{0.5, 1, 1}, 1000000, 31, k);
        const auto hist = photostat::from_counts(simshot::arm(shots, 1), theory.cutoff());
        const double f = photostat::fidelity(hist, theory);
        worst = std::min(worst, f);
        d += (k ? ", " : "") + fmt("%.6f", f);
    }
    return {worst >= 0.999, "fidelities " + d};
}

Outcome bernoulli_invariance() {
    double worst = 0;
    const double etas[] = {0.1, 0.5, 0.83};
    const BracketSpec specs[] = {{2, pi / 2}, {1, 0.3}, {3, pi}};
    for (double eta : etas) {
        for (const auto& s : specs) {
            const double r = std::sqrt(eta);
            const auto a = photostat::distribution(s, Displacement{2, 0.4}, photostat::DetectorModel{eta});
            const auto b = photostat::distribution(BracketSpec{r * s.b, s.gamma}, Displacement{r * 2, 0.4},
                                                   photostat::DetectorModel{1});
            const std::size_t n = std::max(a.probs.size(), b.probs.size());
            for (std::size_t m = 0; m < n; ++m) {
                const double pa = m < a.probs.size() ? a.probs[m] : 0.0;
                const double pb = m < b.probs.size() ? b.probs[m] : 0.0;
                worst = std::max(worst, std::abs(pa - pb));
            }
        }
    }
    // binomial subsampling of 1e7 undetected counts
    const BracketSpec spec{2, pi / 2};
    const Displacement disp{2, 0};
    const double eta = 0.3;
    const auto shots = simshot::sample_bracket_shots(spec, disp, SplitterSpec{0.5, 1, 1}, 10'000'000, 41);
    std::mt19937_64 gen(43);
    std::vector<std::uint32_t> thinned;
    thinned.reserve(shots.size());
    for (const auto& s : shots) {
        const std::uint32_t n = s.n1 + s.n2;
        thinned.push_back(std::binomial_distribution<std::uint32_t>(n, eta)(gen));
    }
    const double predicted = splitter::detected_fano(states::fano(spec, disp), eta);
    const double z = std::abs(simshot::sample_fano(thinned) - predicted) / fano_se(thinned);
    return {worst <= 1e-12 && z <= 5.0,
            "max pointwise gap " + fmt("%.3g", worst) + ", thinned fano |z| " + fmt("%.2f", z)};
}

Outcome wigner_checks() {
    const double b = 2;
    const BracketSpec spec{b, pi / 2};
    // disk of radius b + 6: Gauss-Legendre panels in r, periodic trapezoid in theta
    const double radius = b + 6;
    const std::size_t panels = 16, nth = 256;
    const auto rule = quadrature::gauss_legendre(24);
    std::vector<double> ring(panels * rule->order());
    simshot::impl::parallel_for(ring.size(), 0, [&](std::size_t idx) {
        const std::size_t p = idx / rule->order(), q = idx % rule->order();
        const double h = radius / panels;
        const double r = h * (p + 0.5 * (rule->nodes[q] + 1));
        double s = 0;
        for (std::size_t t = 0; t < nth; ++t) {
            const double th = 2 * pi * double(t) / double(nth);
            s += states::wigner(spec, states::PhasePoint{r * std::cos(th), r * std::sin(th)});
        }
        ring[idx] = 0.5 * h * rule->weights[q] * r * s * 2 * pi / double(nth);
    });
    double norm = 0;
    for (double v : ring) norm += v;

    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(-5, 5);
    double sym = 0;
    for (int i = 0; i < 2000; ++i) {
        const double x = u(gen), y = u(gen);
        sym = std::max(sym, std::abs(states::wigner(spec, {x, y}) - states::wigner(spec, {-x, -y})));
    }
    double origin = 0;
    for (double bb : {0.5, 1.0, 2.0, 3.0}) {
        origin = std::max(origin, std::abs(states::wigner(BracketSpec{bb, pi / 2}, {0, 0}) -
                                           2 / pi * std::exp(-2 * bb * bb)));
    }
    const auto grid = states::wigner_grid(spec, 4.0, 161);
    const auto best = std::max_element(grid.begin(), grid.end(), [](auto& a, auto& c) { return a.w < c.w; });
    const double r_max = std::hypot(best->z.re, best->z.im);
    const bool pass = std::abs(norm - 1) <= 1e-6 && sym <= 1e-12 && origin <= 1e-10 && r_max > 1.0;
    return {pass, "norm-1 " + fmt("%.2e", norm - 1) + ", symmetry " + fmt("%.2e", sym) + ", origin " +
                      fmt("%.2e", origin) + ", max at |z| " + fmt("%.3f", r_max)};
}

Outcome retrieval_round_trip() {
    simshot::SweepConfig c;
    c.noise = 0.05;
    const auto ds = simshot::run_sweep(c);
    const auto means = fringe::fringe_means(ds, 1);
    const auto fit = fringe::fit_fringe(means, {}, fringe::fringe_noise(ds, 1));
    const auto skip = near_extrema(c.steps, fit.extrema, 3);
    double ss = 0;
    std::size_t n = 0;
    for (std::size_t j = 0; j < c.steps; ++j) {
        if (skip[j]) continue;
        ss += std::pow(phase_diff(fit.per_step_phase[j], ds.step_phase[j]), 2);
        ++n;
    }
    const double rms = std::sqrt(ss / double(n));
    const double clamped = double(fit.clamped) / double(c.steps);

    // noiseless: exact per-step means and the exact fringe envelope
    simshot::SweepConfig q;
    const auto phases = q.profile.phases(q.steps, q.seed);
    std::vector<double> exact(q.steps);
    for (std::size_t j = 0; j < q.steps; ++j) {
        exact[j] = q.tau * q.eta1 * std::norm(std::polar(q.mag, phases[j]) + q.b);
    }
    const auto clean = fringe::retrieve(exact, cli::analytic_fit(q, 1));
    const auto skip_clean = near_extrema(q.steps, clean.extrema, 3);
    double worst = 0;
    for (std::size_t j = 0; j < q.steps; ++j) {
        if (!skip_clean[j]) worst = std::max(worst, phase_diff(clean.per_step_phase[j], phases[j]));
    }
    return {rms <= 0.05 && clamped < 0.05 && worst <= 1e-6,
            "noisy RMS " + fmt("%.4f", rms) + " rad (" + std::to_string(fit.clamped) + " clamped, " +
                std::to_string(fit.extrema.size()) + " extrema), noiseless max " + fmt("%.2e", worst) + " rad"};
}

Outcome post_selection_equivalence() {
    simshot::SweepConfig c;
    const auto ds = simshot::run_sweep(c);
    const auto fit = fringe::fit_fringe(fringe::fringe_means(ds, 1), {}, fringe::fringe_noise(ds, 1));
    const auto e = fringe::post_select(ds, fit.per_step_phase, 0.0, pi / 2, {1'000'000, 3});
    const auto pooled = fringe::ensemble_stats(e);
    const auto direct_shots = simshot::sample_bracket_shots(BracketSpec{c.b, pi / 2}, Displacement{c.mag, 0.0},
                                                            SplitterSpec{c.tau, c.eta1, c.eta2}, 1'000'000, 17);
    const fringe::BracketEnsemble direct_e{0.0, pi / 2, direct_shots, {}};
    const auto direct = fringe::ensemble_stats(direct_e);

    const std::span<const ShotCounts> ps(e.pooled), ds_(direct_shots);
    const auto p1 = simshot::arm(ps, 1), p2 = simshot::arm(ps, 2);
    const auto d1 = simshot::arm(ds_, 1), d2 = simshot::arm(ds_, 2);
    auto z = [](double a, double b, double sa, double sb) { return std::abs(a - b) / std::hypot(sa, sb); };
    const double z1 = z(pooled.fano1, direct.fano1, fano_se(p1), fano_se(d1));
    const double z2 = z(pooled.fano2, direct.fano2, fano_se(p2), fano_se(d2));
    const double zg = z(pooled.gamma_corr, direct.gamma_corr, corr_se(ps), corr_se(ds_));
    const std::size_t cut = std::max(pooled.hist1.cutoff(), direct.hist1.cutoff());
    const double f1 = photostat::fidelity(photostat::from_counts(p1, cut), photostat::from_counts(d1, cut));
    const std::size_t cut2 = std::max(pooled.hist2.cutoff(), direct.hist2.cutoff());
    const double f2 = photostat::fidelity(photostat::from_counts(p2, cut2), photostat::from_counts(d2, cut2));
    const double zmax = std::max({z1, z2, zg});
    return {zmax <= 5.0 && std::min(f1, f2) >= 0.999,
            "fano1 " + fmt("%.4f", pooled.fano1) + " vs " + fmt("%.4f", direct.fano1) + ", gamma " +
                fmt("%.4f", pooled.gamma_corr) + " vs " + fmt("%.4f", direct.gamma_corr) + ", max |z| " +
                fmt("%.2f", zmax) + ", fidelities " + fmt("%.6f", f1) + ", " + fmt("%.6f", f2)};
}

discrim::ReceiverSpec nulled(double b) {
    discrim::ReceiverSpec rx;
    rx.displacement = Displacement{b, 0.0};
    return rx;
}

Outcome kennedy() {
    double closed = 0;
    for (double b : {0.5, 1.0, 1.5}) {
        closed = std::max(closed, std::abs(discrim::error_probability(b, 0, 0, nulled(b)) - 0.5 * std::exp(-4 * b * b)));
    }
    bool monotone = true;
    for (double b : {0.25, 0.5, 1.0, 1.5, 2.0}) {
        double prev = 0;
        for (int k = 0; k <= 64; ++k) {
            const double pe = discrim::error_probability(b, pi * k / 64, 0, nulled(b));
            monotone = monotone && pe >= prev;
            prev = pe;
        }
    }
    double zmax = 0;
    for (double g : {0.0, pi / 2, pi}) {
        const auto est = discrim::simulate_error(1.0, g, 0, nulled(1.0), 1'000'000, 77);
        zmax = std::max(zmax, std::abs(est.p_error - discrim::error_probability(1.0, g, 0, nulled(1.0))) /
                                  est.standard_error);
    }
    return {closed <= 1e-10 && monotone && zmax <= 5.0,
            "closed-form gap " + fmt("%.2e", closed) + (monotone ? ", monotone in gamma" : ", NOT monotone") +
                ", MC max |z| " + fmt("%.2f", zmax)};
}

bool same_file(const fs::path& a, const fs::path& b) {
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    return std::equal(std::istreambuf_iterator<char>(fa), {}, std::istreambuf_iterator<char>(fb), {});
}

Outcome determinism() {
    const fs::path dir = fs::temp_directory_path() / "bracket_acceptance_determinism";
    fs::remove_all(dir);
    auto run = [&](const std::string& name, unsigned workers) {
        cli::SweepArgs a;
        a.seed = 12345;
        a.workers = workers;
        a.out = (dir / name).string();
        return cli::cmd_sweep(a).front();
    };
    const auto first = run("a", 0);
    const auto second = run("b", 0);
    const auto serial = run("c", 1);
    const auto three = run("d", 3);
    const bool pass = same_file(first, second) && same_file(first, serial) && same_file(first, three) &&
                      same_file(io::sidecar_path(first), io::sidecar_path(serial));
    const auto bytes = fs::file_size(first);
    fs::remove_all(dir);
    return {pass, "4 runs (workers all, all, 1, 3), " + std::to_string(bytes) + " bytes each" +
                      (pass ? ", identical" : ", DIFFER")};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {"fano inequality and limits", 5, fano_inequality},
        {"detected fano and correlation curves vs Monte Carlo", 120, curve_shapes},
        {"balanced splitter closed form", 0, balanced_closed_form},
        {"photon statistics fidelity", 60, photon_fidelity},
        {"Bernoulli invariance", 0, bernoulli_invariance},
        {"Wigner checks", 0, wigner_checks},
        {"phase retrieval round trip", 120, retrieval_round_trip},
        {"post-selection equivalence", 0, post_selection_equivalence},
        {"Kennedy receiver closed form", 0, kennedy},
        {"sweep determinism", 0, determinism},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o{false, ""};
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::string timing = fmt("%.2f s", secs);
        if (c.limit_s > 0) {
            timing += fmt(" (limit %.0f s)", c.limit_s);
            if (secs >= c.limit_s) o.pass = false;
        }
        if (!o.pass) ++failed;
        std::printf("%s %s: %s [%s]\n", o.pass ? "PASS" : "FAIL", c.name.c_str(), o.detail.c_str(), timing.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
