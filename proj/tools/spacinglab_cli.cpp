// spacinglab: reproducible experiment harness for the spacing-statistics
// library. Subcommands wrap the library modules; every run writes
// out/<command>/<timestamp>-<confighash>/{config.json, results.csv, plot.svg,
// record.json} and CSV output is byte-deterministic for a fixed config.
#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <spacinglab/asymptotics.hpp>
#include <spacinglab/ensembles.hpp>
#include <spacinglab/fredholm.hpp>
#include <spacinglab/kernels.hpp>
#include <spacinglab/moments.hpp>
#include <spacinglab/runio.hpp>

using json = nlohmann::json;
using namespace spacinglab;

namespace {

constexpr const char* artifact_version = "spacinglab 0.1.0";

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::optional<int> n;
    std::optional<std::string> ensemble;
    std::optional<std::string> window;
    std::optional<double> gamma;
    std::vector<double> betas;
    std::optional<int> workers;
    std::optional<std::string> out;
    std::optional<double> tolerance;
    std::optional<int> k;
};

void add_common_flags(CLI::App* cmd, Options& opt) {
    cmd->add_option("--config", opt.config_path, "JSON config file; flags override its values");
    cmd->add_option("--seed", opt.seed, "RNG master seed (mandatory, no wall-clock default)");
    cmd->add_option("--trials", opt.trials, "Monte Carlo trial count");
    cmd->add_option("--n", opt.n, "matrix dimension");
    cmd->add_option("--ensemble", opt.ensemble, "cue or gue")
        ->check(CLI::IsMember({"cue", "gue"}));
    cmd->add_option("--window", opt.window, "observation window LO:HI");
    cmd->add_option("--gamma", opt.gamma, "close-pair threshold");
    cmd->add_option("--betas", opt.betas, "rescaled thresholds")->delimiter(',');
    cmd->add_option("--workers", opt.workers, "worker threads (default 1; env SPACINGLAB_WORKERS)");
    cmd->add_option("--out", opt.out, "output directory root");
    cmd->add_option("--tolerance", opt.tolerance, "acceptance tolerance");
    cmd->add_option("--k", opt.k, "moment order / collapse order");
}

// Effective config: file values first, then flag overrides (flags win).
json build_config(const Options& opt) {
    json cfg = json::object();
    if (!opt.config_path.empty()) {
        std::ifstream in(opt.config_path);
        if (!in) throw std::runtime_error("cannot open config file " + opt.config_path);
        in >> cfg;
    }
    if (opt.seed) cfg["seed"] = *opt.seed;
    if (opt.trials) cfg["trials"] = *opt.trials;
    if (opt.n) cfg["n"] = *opt.n;
    if (opt.ensemble) cfg["ensemble"] = *opt.ensemble;
    if (opt.window) cfg["window"] = *opt.window;
    if (opt.gamma) cfg["gamma"] = *opt.gamma;
    if (!opt.betas.empty()) cfg["betas"] = opt.betas;
    if (opt.workers) cfg["workers"] = *opt.workers;
    if (opt.out) cfg["output_dir"] = *opt.out;
    if (opt.tolerance) cfg["tolerance"] = *opt.tolerance;
    if (opt.k) cfg["k"] = *opt.k;
    return cfg;
}

std::uint64_t require_seed(const json& cfg) {
    if (!cfg.contains("seed")) throw std::runtime_error("seed is mandatory (--seed or config)");
    return cfg["seed"].get<std::uint64_t>();
}

int effective_workers(const json& cfg) {
    if (cfg.contains("workers")) return cfg["workers"].get<int>();
    if (const char* env = std::getenv("SPACINGLAB_WORKERS")) return std::atoi(env);
    return 1;
}

Ensemble parse_ensemble(const json& cfg) {
    std::string name = cfg.value("ensemble", "cue");
    if (name == "cue") return Ensemble::CUE;
    if (name == "gue") return Ensemble::GUE;
    throw std::runtime_error("ensemble must be cue or gue");
}

Interval parse_window(const json& cfg, Ensemble ensemble, int n) {
    if (!cfg.contains("window")) {
        if (ensemble == Ensemble::CUE) return Interval::full_circle();
        double half = 0.5 * std::sqrt(static_cast<double>(n));
        return Interval::real(-half, half);
    }
    std::string text = cfg["window"].get<std::string>();
    std::size_t colon = text.find(':');
    if (colon == std::string::npos) throw std::runtime_error("window must be LO:HI");
    double lo = std::stod(text.substr(0, colon));
    double hi = std::stod(text.substr(colon + 1));
    return ensemble == Ensemble::CUE ? Interval::arc(lo, hi) : Interval::real(lo, hi);
}

struct RunWriter {
    json cfg;
    std::string checksum;
    RunPaths paths;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    RunWriter(const std::string& command, json config) : cfg(std::move(config)) {
        cfg["command"] = command;
        // Execution details (worker count, output root) do not change the
        // numbers, so they stay out of the checksum: the same experiment run
        // with a different worker count yields byte-identical CSVs.
        json canonical = cfg;
        canonical.erase("workers");
        canonical.erase("output_dir");
        checksum = hex64(fnv1a64(canonical.dump()));
        paths = make_run_dir(cfg.value("output_dir", std::string("runs")), command, checksum);
        write_text(paths.config_json(), cfg.dump(2) + "\n");
    }

    void finish(const CsvWriter& csv, const std::string& svg) {
        csv.write(paths.results_csv());
        write_text(paths.plot_svg(), svg);
        double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        json record;
        record["version"] = artifact_version;
        record["config"] = cfg;
        record["checksums"] = {
            {"config.json", hex64(fnv1a64(cfg.dump(2) + "\n"))},
            {"results.csv", hex64(fnv1a64(csv.str()))},
            {"plot.svg", hex64(fnv1a64(svg))},
        };
        record["wall_time_seconds"] = wall;
        write_text(paths.record_json(), record.dump(2) + "\n");
        std::cout << paths.dir.string() << "\n";
    }
};

int cmd_verify_main_theorem(const Options& opt) {
    json cfg = build_config(opt);
    std::uint64_t seed = require_seed(cfg);
    int n = cfg.value("n", 64);
    int trials = cfg.value("trials", 20000);
    double tolerance = cfg.value("tolerance", 0.03);
    Ensemble ensemble = parse_ensemble(cfg);
    Interval window = parse_window(cfg, ensemble, n);
    std::vector<double> betas = cfg.value("betas", std::vector<double>{0.5, 1.0, 1.5});

    TailResult result =
        tail_experiment(ensemble, n, window, betas, trials, seed, effective_workers(cfg));

    RunWriter run("verify-main-theorem", cfg);
    CsvWriter csv(run.checksum, {"beta", "empirical_tail", "se", "theory_tail", "abs_diff"});
    std::vector<double> theory;
    bool ok = true;
    for (std::size_t i = 0; i < betas.size(); ++i) {
        double t = std::exp(-betas[i] * betas[i] * betas[i]);
        theory.push_back(t);
        double diff = std::fabs(result.tail[i] - t);
        csv.add_row({format_g17(betas[i]), format_g17(result.tail[i]), format_g17(result.se[i]),
                     format_g17(t), format_g17(diff)});
        if (diff > tolerance) {
            ok = false;
            std::cout << "FAIL,beta=" << format_g17(betas[i]) << ",abs_diff=" << format_g17(diff)
                      << ",tolerance=" << format_g17(tolerance) << "\n";
        }
    }
    run.finish(csv, svg_xy_plot(betas, result.tail, theory, "tail vs exp(-beta^3)"));
    return ok ? 0 : 1;
}

int cmd_moments(const Options& opt) {
    json cfg = build_config(opt);
    std::uint64_t seed = require_seed(cfg);
    int n = cfg.value("n", 64);
    int trials = cfg.value("trials", 20000);
    int k_max = cfg.value("k", 3);
    if (trials < 1000) throw std::runtime_error("moments: trials must be at least 1000");
    if (!cfg.contains("gamma")) throw std::runtime_error("moments: gamma is required");
    double gamma = cfg["gamma"].get<double>();
    Ensemble ensemble = parse_ensemble(cfg);
    Interval window = parse_window(cfg, ensemble, n);

    MomentReport report = moment_report(ensemble, n, window, gamma, k_max, trials, seed,
                                        effective_workers(cfg));

    RunWriter run("moments", cfg);
    CsvWriter csv(run.checksum, {"k", "empirical", "se", "poisson", "ratio"});
    std::vector<double> ks, emp, poi;
    for (int k = 1; k <= k_max; ++k) {
        double e = report.empirical[k - 1], p = report.poisson[k - 1];
        csv.add_row({std::to_string(k), format_g17(e), format_g17(report.se[k - 1]),
                     format_g17(p), format_g17(e / p)});
        ks.push_back(k);
        emp.push_back(e);
        poi.push_back(p);
    }
    run.finish(csv, svg_xy_plot(ks, emp, poi, "empirical vs Poisson moments"));
    return 0;
}

int cmd_first_moment(const Options& opt) {
    json cfg = build_config(opt);
    std::uint64_t seed = cfg.contains("seed") ? cfg["seed"].get<std::uint64_t>() : 0;
    int n = cfg.value("n", 64);
    int trials = cfg.value("trials", 0);
    if (trials > 0) require_seed(cfg);
    if (!cfg.contains("gamma")) throw std::runtime_error("first-moment: gamma is required");
    double gamma = cfg["gamma"].get<double>();
    Ensemble ensemble = parse_ensemble(cfg);
    Interval window = parse_window(cfg, ensemble, n);
    KernelSpec spec{ensemble, n};

    double quad = gaudin_first_moment(spec, window, gamma);
    double local = first_moment_local_expansion(spec, window, gamma);
    double heur = heuristic_mu(ensemble, n, window, gamma);
    std::string mc = "", mc_se = "";
    if (trials > 0) {
        double sum = 0.0, sumsq = 0.0;
        for (int t = 0; t < trials; ++t) {
            Spectrum s = (ensemble == Ensemble::CUE) ? sample_cue_spectrum(n, split_seed(seed, t))
                                                     : sample_gue_spectrum(n, split_seed(seed, t));
            double c = count_close_pairs(s, window, gamma);
            sum += c;
            sumsq += c * c;
        }
        double mean = sum / trials;
        mc = format_g17(mean);
        mc_se = format_g17(std::sqrt((sumsq / trials - mean * mean) / trials));
    }

    RunWriter run("first-moment", cfg);
    CsvWriter csv(run.checksum,
                  {"gamma", "quadrature", "local_expansion", "heuristic", "monte_carlo", "mc_se"});
    csv.add_row({format_g17(gamma), format_g17(quad), format_g17(local), format_g17(heur), mc,
                 mc_se});
    run.finish(csv, svg_xy_plot({gamma}, {quad}, {heur}, "first moment"));
    return 0;
}

int cmd_collapses(const Options& opt) {
    json cfg = build_config(opt);
    int k = cfg.value("k", 3);
    CollapseSummary s = enumerate_collapses(k);

    RunWriter run("collapses", cfg);
    CsvWriter csv(run.checksum,
                  {"k", "total", "clean", "mixed", "l", "clean_enumerated", "clean_formula"});
    std::vector<double> ls, enumerated, formula;
    std::cout << "k=" << k << " total=" << s.total << " clean=" << s.clean
              << " mixed=" << s.mixed << "\n";
    for (int l = 1; l <= k; ++l) {
        auto it = s.clean_by_cluster.find(l);
        long long e = (it == s.clean_by_cluster.end()) ? 0 : it->second;
        long long f = clean_collapse_count_formula(k, l);
        std::cout << "  l=" << l << " clean_enumerated=" << e << " clean_formula=" << f << "\n";
        csv.add_row({std::to_string(k), std::to_string(s.total), std::to_string(s.clean),
                     std::to_string(s.mixed), std::to_string(l), std::to_string(e),
                     std::to_string(f)});
        ls.push_back(l);
        enumerated.push_back(static_cast<double>(e));
        formula.push_back(static_cast<double>(f));
    }
    run.finish(csv, svg_xy_plot(ls, enumerated, formula, "clean collapses by cluster count"));
    return 0;
}

int cmd_fredholm(const Options& opt) {
    json cfg = build_config(opt);
    int m = cfg.value("m", 40);
    std::vector<double> grid = cfg.value("s_grid", std::vector<double>{});
    if (grid.empty())
        for (double s = 0.0; s <= 3.0 + 1e-12; s += 0.25) grid.push_back(s);

    RunWriter run("fredholm", cfg);
    CsvWriter csv(run.checksum, {"s_mean_spacings", "e2", "p2"});
    std::vector<double> e2s, p2s;
    for (double s : grid) {
        double e2 = (s <= 0.0) ? 1.0 : gap_probability(s, m).value;
        double p2 = (s <= 0.0) ? 0.0 : p2_density(s);
        csv.add_row({format_g17(s), format_g17(e2), format_g17(p2)});
        e2s.push_back(e2);
        p2s.push_back(p2);
    }
    run.finish(csv, svg_xy_plot(grid, e2s, p2s, "gap probability and spacing density"));
    return 0;
}

int cmd_asymptotics(const Options& opt) {
    json cfg = build_config(opt);
    std::vector<int> grid = cfg.value("n_grid", std::vector<int>{50, 100, 200, 400});

    // Median relative error of the bulk Hermite approximation over
    // x = r sqrt(n), away from oscillation zeros.
    auto median_error = [](int n) {
        std::vector<double> errors;
        for (double r = -1.2; r <= 1.2; r += 0.03) {
            double x = r * std::sqrt(static_cast<double>(n));
            HermitePrApprox approx = hermite_pr_approx(n, x);
            if (std::fabs(approx.oscillation) < 0.05) continue;
            ScaledHermitePair exact = hermite_scaled(n, x);
            double log_exact = std::log(std::fabs(exact.h_n)) + exact.log_scale;
            double ratio = std::exp(approx.log_envelope - log_exact) * approx.oscillation /
                           std::copysign(1.0, exact.h_n);
            errors.push_back(std::fabs(ratio - 1.0));
        }
        std::sort(errors.begin(), errors.end());
        return errors[errors.size() / 2];
    };

    RunWriter run("asymptotics", cfg);
    CsvWriter csv(run.checksum, {"n", "median_rel_error", "error_ratio_to_prev"});
    std::vector<double> ns, errs;
    double prev = 0.0;
    for (int n : grid) {
        double err = median_error(n);
        csv.add_row({std::to_string(n), format_g17(err),
                     prev > 0.0 ? format_g17(prev / err) : std::string("")});
        ns.push_back(n);
        errs.push_back(err);
        prev = err;
    }
    run.finish(csv, svg_xy_plot(ns, errs, {}, "bulk approximation error vs n"));
    return 0;
}

int cmd_sample(const Options& opt) {
    json cfg = build_config(opt);
    std::uint64_t seed = require_seed(cfg);
    int n = cfg.value("n", 8);
    int trials = cfg.value("trials", 10);
    Ensemble ensemble = parse_ensemble(cfg);

    RunWriter run("sample", cfg);
    std::string unit = (ensemble == Ensemble::CUE) ? "value_radians" : "value_real";
    CsvWriter csv(run.checksum, {"trial", "index", unit});
    std::vector<double> xs, ys;
    for (int t = 0; t < trials; ++t) {
        Spectrum s = (ensemble == Ensemble::CUE) ? sample_cue_spectrum(n, split_seed(seed, t))
                                                 : sample_gue_spectrum(n, split_seed(seed, t));
        for (int i = 0; i < n; ++i) {
            csv.add_row({std::to_string(t), std::to_string(i), format_g17(s.values[i])});
            xs.push_back(i);
            ys.push_back(s.values[i]);
        }
    }
    run.finish(csv, svg_xy_plot(xs, ys, {}, "sampled spectra"));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"spacing-statistics experiment harness"};
    app.require_subcommand(1);
    Options opt;

    auto* verify = app.add_subcommand("verify-main-theorem",
                                      "Monte Carlo tail of the rescaled closest spacing");
    auto* moments = app.add_subcommand("moments", "close-pair moments vs Poisson");
    auto* first = app.add_subcommand("first-moment", "quadrature vs heuristic first moment");
    auto* collapses = app.add_subcommand("collapses", "collapse enumeration table");
    auto* fredholm = app.add_subcommand("fredholm", "sine-kernel gap probabilities");
    auto* asympt = app.add_subcommand("asymptotics", "bulk approximation error decay");
    auto* sample = app.add_subcommand("sample", "raw spectrum samples");
    for (CLI::App* cmd : {verify, moments, first, collapses, fredholm, asympt, sample})
        add_common_flags(cmd, opt);

    CLI11_PARSE(app, argc, argv);

    try {
        if (verify->parsed()) return cmd_verify_main_theorem(opt);
        if (moments->parsed()) return cmd_moments(opt);
        if (first->parsed()) return cmd_first_moment(opt);
        if (collapses->parsed()) return cmd_collapses(opt);
        if (fredholm->parsed()) return cmd_fredholm(opt);
        if (asympt->parsed()) return cmd_asymptotics(opt);
        if (sample->parsed()) return cmd_sample(opt);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
    return 2;
}
