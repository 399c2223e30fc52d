// Command-line front end: data generation, selection, bounds, score-model
// simulation and the synthetic experiments.

#include <sfs/sfs.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <thread>

using namespace sfs;

namespace {

/// Opens `path` for writing, or stdout for "" and "-".
struct Output {
    std::unique_ptr<std::ofstream> file;
    std::ostream* stream = &std::cout;

    explicit Output(const std::string& path) {
        if (path.empty() || path == "-")
            return;
        file = std::make_unique<std::ofstream>(path);
        if (!*file)
            throw std::runtime_error("cannot write " + path);
        stream = file.get();
    }
    std::ostream& operator*() { return *stream; }
};

ColumnRef response_ref(const std::string& s) {
    if (!s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); }))
        return static_cast<Index>(std::stoull(s));
    return s;
}

Index default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

// Design flags shared by `gen` and `experiment`.
struct DesignFlags {
    std::string kind = "toeplitz";
    std::string noise = "gaussian";
    double df = 3.0;
    synth::DesignSpec spec;

    void add(CLI::App* app) {
        app->add_option("--design", kind, "four-blocks|toeplitz|toeplitz-grouped|ten-factors|correlated-informative")
            ->capture_default_str();
        app->add_option("-n,--observations", spec.n, "observations N")->capture_default_str();
        app->add_option("-d,--covariates", spec.d, "covariates D")->capture_default_str();
        app->add_option("--informative", spec.n_informative, "nonzero coefficients")->capture_default_str();
        app->add_option("--snr", spec.snr, "signal-to-noise ratio")->capture_default_str();
        app->add_option("--noise", noise, "gaussian|student-t")->capture_default_str();
        app->add_option("--df", df, "Student-t degrees of freedom")->capture_default_str();
        app->add_option("--correlation", spec.informative_correlation,
                        "pairwise correlation of informative covariates (correlated-informative)")
            ->capture_default_str();
        app->add_option("--data-seed", spec.seed, "seed for the data")->capture_default_str();
    }

    synth::DesignSpec resolve() {
        synth::DesignSpec s = spec;
        s.kind = synth::parse_design(kind);
        if (noise == "gaussian")
            s.noise.family = synth::NoiseSpec::Family::Gaussian;
        else if (noise == "student-t" || noise == "t")
            s.noise = {synth::NoiseSpec::Family::StudentT, df};
        else
            throw std::invalid_argument("unknown noise '" + noise + "'");
        s.validate();
        return s;
    }
};

// Base-selector flags shared by `select` and `experiment`.
struct BaseFlags {
    std::string kind = "lasso";
    Index horizon = 0; // 0: unbounded
    int bins = 2;

    void add(CLI::App* app) {
        app->add_option("--base", kind, "lasso|cmim")->capture_default_str();
        app->add_option("-k,--horizon", horizon, "CMIM update horizon (0 = unbounded)")->capture_default_str();
        app->add_option("-B,--bins", bins, "CMIM bins per covariate")->capture_default_str();
    }

    harness::BaseParams params() const {
        harness::BaseParams p;
        if (kind == "lasso")
            p.kind = harness::BaseKind::Lasso;
        else if (kind == "cmim")
            p.kind = harness::BaseKind::Cmim;
        else
            throw std::invalid_argument("unknown base selector '" + kind + "'");
        p.horizon = horizon == 0 ? cmim::unbounded : horizon;
        p.bins = bins;
        return p;
    }
};

std::vector<Index> parse_range_list(const std::vector<std::string>& items) {
    std::vector<Index> out;
    for (const auto& s : items) {
        const auto dash = s.find('-');
        if (dash == std::string::npos) {
            out.push_back(std::stoull(s));
            continue;
        }
        const Index lo = std::stoull(s.substr(0, dash)), hi = std::stoull(s.substr(dash + 1));
        for (Index v = lo; v <= hi; ++v)
            out.push_back(v);
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Extended stability selection: selection frequencies, error bounds and synthetic experiments"};
    app.require_subcommand(1);

    // ------------------------------------------------------------ gen
    auto* gen = app.add_subcommand("gen", "draw a synthetic dataset");
    DesignFlags gen_design;
    gen_design.add(gen);
    std::string gen_out, gen_truth;
    gen->add_option("-o,--out", gen_out, "dataset CSV (response column 'y')")->required();
    gen->add_option("--truth", gen_truth, "ground-truth CSV (index,beta)");
    gen->callback([&] {
        const auto [ds, gt] = synth::draw_design(gen_design.resolve());
        save_csv(gen_out, ds);
        if (!gen_truth.empty()) {
            Output o(gen_truth);
            write_ground_truth_csv(*o, gt);
        }
    });

    // ------------------------------------------------------------ select
    auto* sel = app.add_subcommand("select", "selection frequencies on a CSV dataset");
    std::string sel_in, sel_resp = "y", sel_out, sel_summary;
    EngineConfig sel_cfg;
    sel_cfg.parallelism = default_threads();
    Index sel_q = 10;
    BaseFlags sel_base;
    sel->add_option("-i,--input", sel_in, "input CSV")->required();
    sel->add_option("-r,--response", sel_resp, "response column name or 0-based position")->capture_default_str();
    sel->add_option("-T,--iterations", sel_cfg.T, "iterations")->capture_default_str();
    sel->add_option("-L,--subsamples", sel_cfg.L, "disjoint subsamples per iteration")->capture_default_str();
    sel->add_option("-V,--subsets", sel_cfg.V, "disjoint covariate subsets per iteration")->capture_default_str();
    sel->add_option("--tau", sel_cfg.tau, "frequency threshold")->capture_default_str();
    sel->add_option("-q,--count", sel_q, "covariates selected per base call")->capture_default_str();
    sel_base.add(sel);
    sel->add_option("--seed", sel_cfg.seed, "seed")->capture_default_str();
    sel->add_option("-j,--threads", sel_cfg.parallelism, "worker threads");
    sel->add_option("-o,--out", sel_out, "frequency CSV (default stdout)");
    sel->add_option("--summary", sel_summary, "JSON run summary (default stderr)");
    sel->callback([&] {
        const Dataset ds = load_csv(sel_in, response_ref(sel_resp));
        const BaseSelector base = sel_base.params().with_count(sel_q);
        sel_cfg.selector = make_selector(base);
        sel_cfg.selector_label = describe(base);
        sel_cfg.audit = false;
        const auto res = run(ds, sel_cfg);

        Output o(sel_out);
        *o << "index,name,frequency,selected\n";
        for (Index d = 0; d < ds.d(); ++d)
            *o << d << ',' << ds.names()[d] << ',' << detail::format_double(res.table.pi[d]) << ','
               << (res.table.pi[d] >= res.tau ? 1 : 0) << '\n';

        nlohmann::json j;
        j["config"] = {{"T", res.T},       {"L", res.L},         {"V", res.V},
                       {"tau", res.tau},   {"seed", res.seed},   {"selector", res.selector_label},
                       {"threads", sel_cfg.parallelism}, {"input", sel_in}};
        j["runs"] = res.table.runs;
        j["failures"] = res.table.failures;
        j["selected"] = res.selected;
        j["wall_seconds"] = res.wall_seconds;
        if (sel_summary.empty()) {
            std::cerr << j.dump(2) << '\n';
        } else {
            Output s(sel_summary);
            *s << j.dump(2) << '\n';
        }
    });

    // ------------------------------------------------------------ bounds
    auto* bnd = app.add_subcommand("bounds", "false-positive and false-negative bounds for one query");
    long b_L = 2;
    double b_tau = 0.9, b_theta = -1.0, b_q = -1.0;
    long b_D = 1000, b_noise = -1;
    bnd->add_option("-L,--subsamples", b_L, "subsamples per iteration")->capture_default_str();
    bnd->add_option("--tau", b_tau, "frequency threshold")->capture_default_str();
    bnd->add_option("--theta", b_theta, "base selection-probability cutoff (default q/D)");
    bnd->add_option("-q,--count", b_q, "expected base selection size");
    bnd->add_option("-d,--covariates", b_D, "covariates D")->capture_default_str();
    bnd->add_option("--noise-covariates", b_noise, "number of noise covariates (default D - 20)");
    bnd->callback([&] {
        if (b_theta < 0.0 && b_q < 0.0)
            throw std::invalid_argument("give --theta or --count");
        const double theta = b_theta >= 0.0 ? b_theta : b_q / static_cast<double>(b_D);
        const long n_noise = b_noise >= 0 ? b_noise : b_D - 20;
        std::cout << "quantity,value,l0,vacuous\n";
        auto line = [](const char* name, auto fn) {
            try {
                const bounds::BoundResult r = fn();
                std::cout << name << ',' << detail::format_double(r.value) << ',' << r.l0 << ','
                          << (r.vacuous ? "true" : "false") << '\n';
            } catch (const std::exception& e) {
                std::cout << name << ",NA,,\n";
                std::cerr << name << ": " << e.what() << '\n';
            }
        };
        line("fp_rate", [&] { return bounds::fp_rate_bound(b_L, b_tau, theta); });
        line("fp_vs_base", [&] { return bounds::fp_vs_base_bound(b_L, b_tau, theta); });
        line("fn_rate", [&] { return bounds::fn_rate_bound(b_L, b_tau, theta); });
        line("fn_vs_base", [&] { return bounds::fn_vs_base_bound(b_L, b_tau, theta); });
        if (b_q > 0.0) {
            line("expected_fp", [&] { return bounds::expected_fp_bound(b_L, b_tau, b_q, b_D, n_noise); });
            line("expected_fp_l0_tauL", [&] {
                const double v = bounds::expected_fp_at_integer_threshold(b_L, b_tau, b_q, b_D, n_noise);
                return bounds::BoundResult{v, bounds::detail::ceil_snap(b_tau * static_cast<double>(b_L)), v > 1.0};
            });
        }
    });

    // ------------------------------------------------------------ tau-min
    auto* tmin = app.add_subcommand("tau-min", "smallest threshold certifying an expected false-positive target");
    std::vector<long> t_L{2, 4, 8};
    long t_qmax = 100, t_D = 1000, t_noise = -1;
    double t_target = 1.0;
    std::string t_out;
    tmin->add_option("-L,--subsamples", t_L, "subsample counts")->capture_default_str();
    tmin->add_option("--q-max", t_qmax, "sweep q = 1..q_max")->capture_default_str();
    tmin->add_option("-d,--covariates", t_D, "covariates D")->capture_default_str();
    tmin->add_option("--noise-covariates", t_noise, "number of noise covariates (default D - 20)");
    tmin->add_option("--target", t_target, "expected false positives")->capture_default_str();
    tmin->add_option("-o,--out", t_out, "CSV (default stdout)");
    tmin->callback([&] {
        const long n_noise = t_noise >= 0 ? t_noise : t_D - 20;
        Output o(t_out);
        *o << "L,q,tau_min\n";
        for (long L : t_L)
            for (long q = 1; q <= t_qmax && q < t_D; ++q) {
                const auto t = bounds::tau_min(L, static_cast<double>(q), t_D, n_noise, t_target);
                *o << L << ',' << q << ',' << (t ? detail::format_double(*t) : std::string("infeasible")) << '\n';
            }
    });

    // ------------------------------------------------------------ simulate-scores
    auto* sim = app.add_subcommand("simulate-scores", "argmax error frequency under additive score noise");
    std::vector<std::string> s_noise{"gaussian", "cauchy", "t3", "t5", "t10"};
    scores::ScoreModelConfig s_cfg;
    s_cfg.threads = default_threads();
    std::string s_out;
    sim->add_option("--noise", s_noise, "gaussian|cauchy|t<df>")->capture_default_str();
    sim->add_option("--dims", s_cfg.dims, "dimensions to sweep");
    sim->add_option("--trials", s_cfg.trials, "trials per dimension")->capture_default_str();
    sim->add_option("--scale", s_cfg.noise.scale, "noise scale")->capture_default_str();
    sim->add_option("--seed", s_cfg.seed, "seed")->capture_default_str();
    sim->add_option("-j,--threads", s_cfg.threads, "worker threads");
    sim->add_option("-o,--out", s_out, "CSV (default stdout)");
    sim->callback([&] {
        Output o(s_out);
        *o << "noise,D,error_frequency\n";
        for (const auto& name : s_noise) {
            auto cfg = s_cfg;
            const double scale = cfg.noise.scale;
            cfg.noise = scores::parse_noise(name);
            cfg.noise.scale = scale;
            for (const auto& r : scores::error_frequency(cfg))
                *o << cfg.noise.name() << ',' << r.d << ',' << detail::format_double(r.frequency) << '\n';
        }
    });

    // ------------------------------------------------------------ experiment
    auto* exp = app.add_subcommand("experiment", "precision@k or FP/TP sweeps on synthetic designs");
    exp->require_subcommand(1);
    DesignFlags e_design;
    BaseFlags e_base;
    std::string e_method = "sfs", e_long, e_agg;
    harness::Sfs e_sfs;
    std::vector<std::string> e_q{"1-100"};
    harness::ExperimentSpec e_spec;
    e_spec.parallelism = default_threads();
    double e_tau = -1.0, e_target = 1.0;
    for (auto* sub : {exp->add_subcommand("precision", "informative covariates among the top k"),
                      exp->add_subcommand("fptp", "false and true positives at the certified threshold")}) {
        e_design.add(sub);
        e_base.add(sub);
        sub->add_option("--method", e_method, "sfs|lasso")->capture_default_str();
        sub->add_option("-T,--iterations", e_sfs.T, "iterations")->capture_default_str();
        sub->add_option("-L,--subsamples", e_sfs.L, "disjoint subsamples")->capture_default_str();
        sub->add_option("-V,--subsets", e_sfs.V, "disjoint covariate subsets")->capture_default_str();
        sub->add_option("-q,--q-sweep", e_q, "base counts, e.g. 1-100 or 10 20 30")->capture_default_str();
        sub->add_option("--top", e_spec.k, "precision cutoff k")->capture_default_str();
        sub->add_option("--repetitions", e_spec.repetitions, "repetitions")->capture_default_str();
        sub->add_option("--tau", e_tau, "fixed threshold (default: certified by the bound)");
        sub->add_option("--target", e_target, "expected false positives for the certified threshold")
            ->capture_default_str();
        sub->add_option("--seed", e_spec.seed, "seed")->capture_default_str();
        sub->add_option("-j,--threads", e_spec.parallelism, "worker threads");
        sub->add_option("--long", e_long, "long-format CSV (default stdout)");
        sub->add_option("--aggregate", e_agg, "aggregated CSV");
        sub->callback([&, sub] {
            e_spec.design = e_design.resolve();
            e_spec.base = e_base.params();
            e_spec.q_sweep = parse_range_list(e_q);
            if (e_method == "lasso")
                e_spec.method = harness::PlainLasso{};
            else if (e_method == "sfs")
                e_spec.method = e_sfs;
            else
                throw std::invalid_argument("unknown method '" + e_method + "'");
            if (e_tau > 0.0)
                e_spec.tau_policy = harness::FixedTau{e_tau};
            else
                e_spec.tau_policy = harness::FromBound{e_target};
            const auto res = sub->get_name() == "precision" ? harness::run_precision(e_spec) : harness::run_fp_tp(e_spec);
            Output lo(e_long);
            harness::write_long_csv_header(*lo);
            harness::write_long_csv(*lo, res);
            if (!e_agg.empty()) {
                Output ag(e_agg);
                harness::write_aggregate_csv_header(*ag);
                harness::write_aggregate_csv(*ag, res);
            }
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const CsvError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
