#pragma once

// bracketsim subcommands. Each cmd_* writes CSV files with a JSON sidecar next
// to every one and returns the paths written; run() parses argv and maps
// errors to exit codes (0 ok, 2 invalid input or failed analysis, 3 I/O).

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bracket/discrim.hpp"
#include "bracket/error.hpp"
#include "bracket/fringe.hpp"
#include "bracket/io.hpp"
#include "bracket/photostat.hpp"
#include "bracket/simshot.hpp"
#include "bracket/splitter.hpp"
#include "bracket/states.hpp"

namespace bracket::cli {

namespace fs = std::filesystem;
using io::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitIo = 3;
inline constexpr const char* kOutDirEnv = "BRACKETSIM_OUT_DIR";

// Output prefix: the explicit one if given, else <$BRACKETSIM_OUT_DIR or .>/<name>.
inline fs::path output_prefix(const std::string& explicit_prefix, const std::string& name) {
    if (!explicit_prefix.empty()) return fs::path(explicit_prefix);
    const char* dir = std::getenv(kOutDirEnv);
    return (dir && *dir ? fs::path(dir) : fs::path(".")) / name;
}

inline fs::path with_suffix(const fs::path& prefix, const std::string& suffix) {
    return fs::path(prefix.string() + suffix);
}

// File-name friendly number: 1.5707963 -> 1p5707963, -0.5 -> m0p5.
inline std::string label(double x) {
    std::string s = io::format_number(x);
    for (char& c : s) {
        if (c == '.') c = 'p';
        if (c == '-') c = 'm';
        if (c == '+') c = 'P';
    }
    return s;
}

namespace impl {

inline json numbers(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(x);
    return a;
}

inline void write_sidecar(const fs::path& csv, const std::string& command, std::uint64_t seed, const json& config) {
    io::write_json(io::sidecar_path(csv), io::sidecar(command, seed, config));
}

}  // namespace impl

// ---------------------------------------------------------------------------
// wigner

struct WignerArgs {
    double b = 2.0;
    double gamma = std::numbers::pi / 2;
    double extent = 4.0;
    std::size_t n = 201;
    std::string out;
};

inline std::vector<fs::path> cmd_wigner(const WignerArgs& a) {
    const auto grid = states::wigner_grid(states::BracketSpec{a.b, a.gamma}, a.extent, a.n);
    const fs::path csv = with_suffix(output_prefix(a.out, "wigner"), ".csv");
    io::CsvWriter w(csv, {"x", "y", "w"});
    for (const auto& s : grid) {
        w.cell(s.z.re).cell(s.z.im).cell(s.w);
        w.end_row();
    }
    w.close();
    json config{{"b", a.b}, {"gamma", a.gamma}, {"extent", a.extent}, {"n", a.n},
                {"order", "row-major, y ascending by row, x ascending within a row"}};
    impl::write_sidecar(csv, "wigner", 0, config);
    return {csv};
}

// ---------------------------------------------------------------------------
// curves

struct CurvesArgs {
    double b = 2.0;
    double mag = 2.0;
    std::vector<double> gammas{0.05, std::numbers::pi / 2, 3 * std::numbers::pi / 4, std::numbers::pi};
    double tau = 0.5;
    double eta1 = 1.0;
    double eta2 = 1.0;
    std::size_t nphi = 64;
    std::string out;
};

// phi runs over [0, 2 pi] inclusive; `fano` is the arm-1 detected Fano factor.
inline std::vector<fs::path> cmd_curves(const CurvesArgs& a) {
    detail::require(!a.gammas.empty(), "gammas must list at least one value");
    detail::require(a.nphi >= 2, "nphi must be >= 2");
    std::vector<double> phis(a.nphi);
    for (std::size_t k = 0; k < a.nphi; ++k) {
        phis[k] = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(a.nphi - 1);
    }
    const splitter::SplitterSpec split{a.tau, a.eta1, a.eta2};
    // Validate every gamma before writing anything.
    std::vector<std::vector<splitter::CurvePoint>> curves;
    for (double g : a.gammas) curves.push_back(splitter::phase_curves(states::BracketSpec{a.b, g}, a.mag, split, phis));

    const fs::path prefix = output_prefix(a.out, "curves");
    std::vector<fs::path> written;
    for (std::size_t i = 0; i < a.gammas.size(); ++i) {
        const fs::path csv = with_suffix(prefix, "_gamma" + label(a.gammas[i]) + ".csv");
        io::CsvWriter w(csv, {"phi", "fano", "gamma_corr"});
        for (const auto& p : curves[i]) {
            w.cell(p.phi).cell(p.fano_detected).cell(p.gamma);
            w.end_row();
        }
        w.close();
        json config{{"b", a.b}, {"mag", a.mag}, {"gamma", a.gammas[i]}, {"tau", a.tau},
                    {"eta1", a.eta1}, {"eta2", a.eta2}, {"nphi", a.nphi}};
        impl::write_sidecar(csv, "curves", 0, config);
        written.push_back(csv);
    }
    return written;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepArgs {
    std::string config_path;  // optional JSON sweep config
    std::optional<std::uint64_t> seed;
    unsigned workers = 0;
    std::string out;
};

inline simshot::SweepConfig load_sweep_config(const SweepArgs& a) {
    simshot::SweepConfig c;
    if (!a.config_path.empty()) c = io::sweep_config_from_json(io::read_json(a.config_path));
    if (a.seed) c.seed = *a.seed;
    simshot::validate(c);
    return c;
}

inline std::vector<fs::path> cmd_sweep(const SweepArgs& a) {
    const auto config = load_sweep_config(a);
    const auto ds = simshot::run_sweep(config, a.workers);
    const fs::path csv = with_suffix(output_prefix(a.out, "sweep"), ".csv");
    io::write_sweep_csv(csv, ds);
    impl::write_sidecar(csv, "sweep", config.seed, io::to_json(config));
    return {csv};
}

// ---------------------------------------------------------------------------
// retrieve

struct RetrieveArgs {
    std::string dataset;
    std::vector<double> centers{0.0};
    std::vector<double> gammas{std::numbers::pi / 2};
    std::size_t pool = 0;
    std::uint64_t seed = 1;
    int arm = 1;
    bool analytic_fit = false;  // use the sidecar's physical parameters for (A, B)
    fringe::FringeOptions options;
    std::string out;
};

// Fringe offset and amplitude implied by the sweep parameters for one arm.
inline fringe::FringeFit analytic_fit(const simshot::SweepConfig& c, int arm) {
    const double t = arm == 1 ? c.tau * c.eta1 : (1.0 - c.tau) * c.eta2;
    fringe::FringeFit f;
    f.offset = t * (c.b * c.b + c.mag * c.mag);
    f.amplitude = 2.0 * t * c.b * c.mag;
    return f;
}

inline std::vector<fs::path> cmd_retrieve(const RetrieveArgs& a) {
    detail::require(!a.dataset.empty(), "dataset path is required");
    detail::require(!a.centers.empty(), "centers must list at least one value");
    detail::require(!a.gammas.empty(), "gammas must list at least one value");
    detail::require(a.arm == 1 || a.arm == 2, "arm must be 1 or 2");
    if (!fs::exists(a.dataset)) throw io_error("dataset '" + a.dataset + "' not found");
    const auto ds = io::read_sweep_csv(a.dataset);
    const auto means = fringe::fringe_means(ds, a.arm);
    const fringe::FringeFit fit = a.analytic_fit ? fringe::retrieve(means, analytic_fit(ds.config, a.arm), a.options)
                                                 : fringe::fit_fringe(means, a.options, fringe::fringe_noise(ds, a.arm));

    struct Ensemble {
        double center, gamma;
        fringe::EnsembleStats stats;
        fringe::EnsembleTheory theory;
    };
    std::vector<Ensemble> ensembles;
    for (double c : a.centers) {
        for (double g : a.gammas) {
            const auto e = fringe::post_select(ds, fit.per_step_phase, c, g, {a.pool, a.seed});
            auto theory = fringe::ensemble_theory(ds.config, c, g);
            auto stats = fringe::ensemble_stats(e, std::max(theory.hist1.cutoff(), theory.hist2.cutoff()));
            ensembles.push_back({c, g, std::move(stats), std::move(theory)});
        }
    }

    const fs::path prefix = output_prefix(a.out, "retrieve");
    json base{{"dataset", a.dataset}, {"arm", a.arm}, {"analytic_fit", a.analytic_fit},
              {"centers", impl::numbers(a.centers)}, {"gammas", impl::numbers(a.gammas)}, {"pool", a.pool},
              {"smoothing", a.options.smoothing}, {"sweep", io::to_json(ds.config)}};
    std::vector<fs::path> written;

    const fs::path phases_csv = with_suffix(prefix, "_phases.csv");
    {
        io::CsvWriter w(phases_csv, {"step", "mean", "normalized", "phase"});
        for (std::size_t j = 0; j < means.size(); ++j) {
            w.cell(static_cast<std::uint64_t>(j)).cell(means[j]).cell(fit.normalized[j]).cell(fit.per_step_phase[j]);
            w.end_row();
        }
        w.close();
        json config = base;
        config["fit"] = {{"offset", fit.offset}, {"amplitude", fit.amplitude}, {"clamped", fit.clamped},
                         {"extrema", fit.extrema}, {"iterations", fit.iterations}};
        impl::write_sidecar(phases_csv, "retrieve", a.seed, config);
        written.push_back(phases_csv);
    }

    const fs::path ens_csv = with_suffix(prefix, "_ensembles.csv");
    {
        io::CsvWriter w(ens_csv, {"center", "gamma", "shots", "fano1", "fano2", "gamma_corr", "fano1_analytic",
                                  "fano2_analytic", "gamma_corr_analytic", "fidelity1", "fidelity2"});
        for (const auto& e : ensembles) {
            w.cell(e.center).cell(e.gamma).cell(static_cast<std::uint64_t>(e.stats.shots));
            w.cell(e.stats.fano1).cell(e.stats.fano2).cell(e.stats.gamma_corr);
            w.cell(e.theory.fano1).cell(e.theory.fano2).cell(e.theory.gamma_corr);
            w.cell(photostat::fidelity(e.stats.hist1, e.theory.hist1));
            w.cell(photostat::fidelity(e.stats.hist2, e.theory.hist2));
            w.end_row();
        }
        w.close();
        impl::write_sidecar(ens_csv, "retrieve", a.seed, base);
        written.push_back(ens_csv);
    }

    for (const auto& e : ensembles) {
        const std::string tag = "_c" + label(e.center) + "_g" + label(e.gamma);
        const std::pair<const char*, const photostat::PhotonDistribution*> hists[] = {
            {"_arm1_measured", &e.stats.hist1},
            {"_arm1_analytic", &e.theory.hist1},
            {"_arm2_measured", &e.stats.hist2},
            {"_arm2_analytic", &e.theory.hist2},
        };
        for (const auto& [suffix, dist] : hists) {
            const fs::path csv = with_suffix(prefix, tag + suffix + ".csv");
            io::CsvWriter w(csv, {"m", "probability"});
            for (std::size_t m = 0; m < dist->probs.size(); ++m) {
                w.cell(static_cast<std::uint64_t>(m)).cell(dist->probs[m]);
                w.end_row();
            }
            w.close();
            json config = base;
            config["center"] = e.center;
            config["gamma"] = e.gamma;
            config["tail_mass"] = dist->tail_mass;
            impl::write_sidecar(csv, "retrieve", a.seed, config);
            written.push_back(csv);
        }
    }
    return written;
}

// ---------------------------------------------------------------------------
// discriminate

struct DiscriminateArgs {
    std::vector<double> bs{0.0, 0.5, 1.0, 1.5};
    std::vector<double> gammas{0.0, std::numbers::pi / 4, std::numbers::pi / 2, 3 * std::numbers::pi / 4,
                               std::numbers::pi};
    std::vector<double> dephases{0.0};
    std::optional<double> beta;  // fixed |beta|; default nulls with beta = b
    double beta_phase = 0.0;
    std::size_t threshold = 1;
    double eta = 1.0;
    unsigned workers = 0;
    std::string out;
};

inline std::vector<fs::path> cmd_discriminate(const DiscriminateArgs& a) {
    discrim::ReceiverSpec rx;
    rx.displacement = states::Displacement{a.beta.value_or(1.0), a.beta_phase};
    rx.threshold = a.threshold;
    rx.det = photostat::DetectorModel{a.eta};
    discrim::SweepOptions opt;
    opt.nulling = !a.beta.has_value();
    opt.dephases = a.dephases;
    opt.workers = a.workers;
    const auto rows = discrim::sweep_error(a.bs, a.gammas, rx, opt);

    const fs::path csv = with_suffix(output_prefix(a.out, "discrim"), ".csv");
    io::CsvWriter w(csv, {"b", "gamma", "dephase", "p_error"});
    for (const auto& r : rows) {
        w.cell(r.b).cell(r.gamma).cell(r.dephase).cell(r.p_error);
        w.end_row();
    }
    w.close();
    json config{{"bs", impl::numbers(a.bs)},
                {"gammas", impl::numbers(a.gammas)},
                {"dephases", impl::numbers(a.dephases)},
                {"beta", a.beta ? json(*a.beta) : json("nulling")},
                {"beta_phase", a.beta_phase},
                {"threshold", a.threshold},
                {"eta", a.eta}};
    impl::write_sidecar(csv, "discriminate", 0, config);
    return {csv};
}

// ---------------------------------------------------------------------------
// argv

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Bracket-state photon statistics: phase-space, correlation, sweep and receiver data"};
    app.name("bracketsim");
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(io::kVersion));

    WignerArgs wa;
    std::string wa_gamma = "pi/2";
    auto* wigner = app.add_subcommand("wigner", "Wigner function on a square grid (x,y,w)");
    wigner->add_option("--b", wa.b, "bracket amplitude b")->capture_default_str();
    wigner->add_option("--gamma", wa_gamma, "phase spread in radians, pi shorthand allowed")->capture_default_str();
    wigner->add_option("--extent", wa.extent, "grid covers [-extent, extent]^2")->capture_default_str();
    wigner->add_option("--n", wa.n, "points per axis")->capture_default_str();
    wigner->add_option("--out", wa.out, "output prefix (default $BRACKETSIM_OUT_DIR/wigner)");

    CurvesArgs ca;
    std::string ca_gammas = "0.05,pi/2,3pi/4,pi";
    std::optional<double> ca_eta;
    auto* curves = app.add_subcommand("curves", "Detected Fano factor and correlation versus phase (phi,fano,gamma_corr)");
    curves->add_option("--b", ca.b, "bracket amplitude b")->capture_default_str();
    curves->add_option("--mag", ca.mag, "local-oscillator amplitude |alpha|")->capture_default_str();
    curves->add_option("--gammas", ca_gammas, "comma-separated phase spreads")->capture_default_str();
    curves->add_option("--tau", ca.tau, "beam-splitter transmissivity")->capture_default_str();
    curves->add_option("--eta", ca_eta, "detection efficiency of both arms");
    curves->add_option("--eta1", ca.eta1, "detection efficiency, arm 1")->capture_default_str();
    curves->add_option("--eta2", ca.eta2, "detection efficiency, arm 2")->capture_default_str();
    curves->add_option("--nphi", ca.nphi, "phase points over [0, 2 pi]")->capture_default_str();
    curves->add_option("--out", ca.out, "output prefix (default $BRACKETSIM_OUT_DIR/curves)");

    SweepArgs sa;
    std::uint64_t sa_seed = 0;
    auto* sweep = app.add_subcommand("sweep", "Simulated piezo sweep (step,phi_true,n1,n2)");
    sweep->add_option("--config", sa.config_path, "JSON sweep configuration");
    auto* sa_seed_opt = sweep->add_option("--seed", sa_seed, "overrides the config seed");
    sweep->add_option("--workers", sa.workers, "threads, 0 = all cores")->capture_default_str();
    sweep->add_option("--out", sa.out, "output prefix (default $BRACKETSIM_OUT_DIR/sweep)");

    RetrieveArgs ra;
    std::string ra_centers = "0";
    std::string ra_gammas = "pi/2";
    auto* retrieve = app.add_subcommand("retrieve", "Fringe phase retrieval and post-selected bracket ensembles");
    retrieve->add_option("--dataset", ra.dataset, "sweep CSV; its JSON sidecar supplies the physical parameters")
        ->required();
    retrieve->add_option("--centers", ra_centers, "comma-separated window centers")->capture_default_str();
    retrieve->add_option("--gammas", ra_gammas, "comma-separated window widths")->capture_default_str();
    retrieve->add_option("--pool", ra.pool, "draws per ensemble, 0 = shots in the windows")->capture_default_str();
    retrieve->add_option("--seed", ra.seed, "resampling seed")->capture_default_str();
    retrieve->add_option("--arm", ra.arm, "arm whose fringe sets the phase")->capture_default_str();
    retrieve->add_option("--smoothing", ra.options.smoothing, "moving-average width for extremum detection")
        ->capture_default_str();
    retrieve->add_flag("--analytic-fit", ra.analytic_fit, "take offset and amplitude from the sidecar parameters");
    retrieve->add_option("--out", ra.out, "output prefix (default $BRACKETSIM_OUT_DIR/retrieve)");

    DiscriminateArgs da;
    std::string da_bs = "0,0.5,1,1.5";
    std::string da_gammas = "0,pi/4,pi/2,3pi/4,pi";
    std::string da_dephases = "0";
    std::string da_beta_phase = "0";
    auto* discriminate = app.add_subcommand("discriminate", "Receiver error probability grid (b,gamma,dephase,p_error)");
    discriminate->add_option("--bs", da_bs, "comma-separated amplitudes b")->capture_default_str();
    discriminate->add_option("--gammas", da_gammas, "comma-separated phase spreads")->capture_default_str();
    discriminate->add_option("--dephases", da_dephases, "comma-separated preparation dephasings")->capture_default_str();
    discriminate->add_option("--beta", da.beta, "fixed displacement |beta| (default: beta = b)");
    discriminate->add_option("--beta-phase", da_beta_phase, "phase of a fixed beta")->capture_default_str();
    discriminate->add_option("--threshold", da.threshold, "declare + when count >= threshold")->capture_default_str();
    discriminate->add_option("--eta", da.eta, "detection efficiency")->capture_default_str();
    discriminate->add_option("--workers", da.workers, "threads, 0 = all cores")->capture_default_str();
    discriminate->add_option("--out", da.out, "output prefix (default $BRACKETSIM_OUT_DIR/discrim)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInvalid;
    }

    try {
        std::vector<fs::path> written;
        if (*wigner) {
            wa.gamma = io::parse_angle(wa_gamma, "gamma");
            written = cmd_wigner(wa);
        } else if (*curves) {
            ca.gammas = io::parse_angle_list(ca_gammas, "gammas");
            if (ca_eta) ca.eta1 = ca.eta2 = *ca_eta;
            written = cmd_curves(ca);
        } else if (*sweep) {
            if (sa_seed_opt->count() > 0) sa.seed = sa_seed;
            written = cmd_sweep(sa);
        } else if (*retrieve) {
            ra.centers = io::parse_angle_list(ra_centers, "centers");
            ra.gammas = io::parse_angle_list(ra_gammas, "gammas");
            written = cmd_retrieve(ra);
        } else if (*discriminate) {
            da.bs = io::parse_angle_list(da_bs, "bs");
            da.gammas = io::parse_angle_list(da_gammas, "gammas");
            da.dephases = io::parse_angle_list(da_dephases, "dephases");
            da.beta_phase = io::parse_angle(da_beta_phase, "beta-phase");
            written = cmd_discriminate(da);
        }
        for (const auto& p : written) out << p.string() << '\n';
        return kExitOk;
    } catch (const io_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const domain_error& e) {
        err << "invalid input: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const degenerate_error& e) {
        err << "invalid input: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const analysis_error& e) {
        err << "analysis failed: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const nlohmann::json::exception& e) {
        err << "invalid config: " << e.what() << '\n';
        return kExitInvalid;
    }
}

}  // namespace bracket::cli
