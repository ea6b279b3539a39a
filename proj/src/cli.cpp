#include "spikerace/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

namespace spikerace {

namespace {

std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw InputError("cannot create directory " + dir + ": " + ec.message());
}

SamplerConfig sampler_for(const RunConfig& cfg) {
    SamplerConfig s = cfg.sampler;
    s.workers = cfg.workers;
    return s;
}

}  // namespace

int cmd_simulate(const RunConfig& cfg, const std::string& out_dir) {
    const TripletSpec spec = spec_for(cfg);
    const BasisConfig basis = basis_for(cfg, spec.window_end);
    const auto [data, truth] = simulate_triplet(spec, basis, cfg.seed);

    ensure_dir(out_dir);
    const std::string hash = config_hash(cfg);
    save_triplet(join_path(out_dir, "triplet.json"), data, hash, cfg.seed);
    save_truth(join_path(out_dir, "truth.json"), truth, hash, cfg.seed);
    save_manifest(join_path(out_dir, "manifest.json"), "simulate", cfg,
                  {{"triplet", "triplet.json"}, {"truth", "truth.json"}},
                  {{"n_a", static_cast<double>(data.a_trials.size())},
                   {"n_b", static_cast<double>(data.b_trials.size())},
                   {"n_ab", static_cast<double>(data.ab_trials.size())}});
    std::printf("wrote %s (%d + %d + %d trials, preset %s)\n",
                join_path(out_dir, "triplet.json").c_str(), spec.n_a, spec.n_b, spec.n_ab,
                cfg.preset.c_str());
    return 0;
}

int cmd_fit(const RunConfig& cfg, const std::string& data_path, const std::string& out_dir) {
    const Triplet data = load_triplet(data_path);
    Model model;
    try {
        model = model_from_name(cfg.model);
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }
    const BasisConfig basis = basis_for(cfg, data.window_end);

    const PosteriorDraws draws = run_chain(data, model, basis, cfg.priors, sampler_for(cfg),
                                           cfg.seed);
    if (!draws.values.allFinite() || !draws.train_loglik.allFinite())
        throw NumericalError("posterior contains non-finite values");

    ensure_dir(out_dir);
    save_draws_csv(join_path(out_dir, "draws.csv"), draws);
    std::map<std::string, std::string> files{{"draws", "draws.csv"}};
    if (!draws.label_draws.empty()) {
        save_labels(join_path(out_dir, "labels.txt"), draws);
        files["labels"] = "labels.txt";
    }

    const int n_a = static_cast<int>(data.a_trials.size());
    const int n_b = static_cast<int>(data.b_trials.size());
    const int n_ab = static_cast<int>(data.ab_trials.size());
    const double lml_a = draws.train_loglik.leftCols(n_a).sum() / draws.n_draws();
    const double lml_b = draws.train_loglik.middleCols(n_a, n_b).sum() / draws.n_draws();
    const double lml_ab = draws.train_loglik.rightCols(n_ab).sum() / draws.n_draws();

    save_manifest(join_path(out_dir, "manifest.json"), "fit", cfg, files,
                  {{"accept_drift", draws.accept_drift},
                   {"accept_coef", draws.accept_coef},
                   {"divergences", static_cast<double>(draws.divergences)},
                   {"mean_lml", lml_a + lml_b + lml_ab}});
    std::printf("model %s: accept drift %.3f, coef %.3f, divergences %d\n",
                model_name(model).c_str(), draws.accept_drift, draws.accept_coef,
                draws.divergences);
    std::printf("mean marginal loglik %.3f (a %.3f, b %.3f, ab %.3f)\n",
                lml_a + lml_b + lml_ab, lml_a, lml_b, lml_ab);
    return 0;
}

int cmd_compare(const RunConfig& cfg, const std::string& data_path, const std::string& out_dir) {
    const Triplet data = load_triplet(data_path);
    const BasisConfig basis = basis_for(cfg, data.window_end);
    PredictiveConfig pred = cfg.predictive;
    pred.workers = cfg.workers;

    const CompareOutcome out =
        compare_models(data, basis, cfg.priors, sampler_for(cfg), pred, cfg.seed);

    ensure_dir(out_dir);
    const std::string hash = config_hash(cfg);
    save_waic_json(join_path(out_dir, "waic.json"), out.table, out.result,
                   out.predictive.mean_switches, out.rate_a, out.rate_b, hash, cfg.seed);
    save_manifest(join_path(out_dir, "manifest.json"), "compare", cfg,
                  {{"waic", "waic.json"}},
                  {{"mean_switches", out.predictive.mean_switches},
                   {"rate_a", out.rate_a},
                   {"rate_b", out.rate_b}});

    const char* names[4] = {"iigpp", "wta_a", "wta_b", "competition"};
    const WaicResult* slots[4] = {&out.table.iigpp, &out.table.wta_a, &out.table.wta_b,
                                  &out.table.competition};
    std::printf("%-12s %12s %10s %12s\n", "model", "lppd", "p_eff", "waic");
    for (int m = 0; m < 4; ++m)
        std::printf("%-12s %12.3f %10.3f %12.3f\n", names[m], slots[m]->lppd, slots[m]->p_eff,
                    slots[m]->waic);
    std::printf("category: %s%s\n", category_name(out.result.category).c_str(),
                out.result.tie ? " (tie)" : "");
    return 0;
}

int cmd_screen(const RunConfig& cfg, const std::string& data_path, const std::string& out_dir) {
    const Triplet data = load_triplet(data_path);
    const BasisConfig basis = basis_for(cfg, data.window_end);
    ScreenConfig scfg = cfg.screen;
    scfg.pvalue.workers = cfg.workers;

    const ScreenReport report =
        screen_triplet(data, basis, cfg.priors, sampler_for(cfg), scfg, cfg.seed);

    ensure_dir(out_dir);
    save_screen_json(join_path(out_dir, "screen.json"), report, config_hash(cfg), cfg.seed);
    save_manifest(join_path(out_dir, "manifest.json"), "screen", cfg,
                  {{"screen", "screen.json"}}, {{"pass", report.pass ? 1.0 : 0.0}});

    if (!report.enough_trials) {
        std::printf("fail: trial counts %d/%d/%d below the minimum %d\n", report.n_a, report.n_b,
                    report.n_ab, scfg.min_trials);
    } else if (!report.a_adequate || !report.b_adequate) {
        std::printf("fail: single-condition fit inadequate (A p=%.3f/%.3f/%.3f, "
                    "B p=%.3f/%.3f/%.3f)\n",
                    report.a_pvalues.p_avg_ll, report.a_pvalues.p_mean_count,
                    report.a_pvalues.p_var_count, report.b_pvalues.p_avg_ll,
                    report.b_pvalues.p_mean_count, report.b_pvalues.p_var_count);
    } else if (!report.distinct.pass) {
        std::printf("fail: conditions not distinguishable (lppd separate %.3f vs joint %.3f)\n",
                    report.distinct.lppd_separate, report.distinct.lppd_joint);
    } else {
        std::printf("pass: all screening criteria satisfied\n");
    }
    return 0;
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Racing-accumulator and renewal point-process toolkit for spike train triplets"};
    app.require_subcommand(1);

    std::string config_path, data_path, out_dir = ".", model, preset;
    std::uint64_t seed = 0;
    int workers = 0, n_a = 0, n_b = 0, n_ab = 0;
    double window_end = 0.0;

    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON configuration file");
        cmd->add_option("--seed", seed, "random seed");
        cmd->add_option("--out-dir", out_dir, "output directory");
        cmd->add_option("--workers", workers, "worker threads (0 = all cores)");
    };

    CLI::App* sim = app.add_subcommand("simulate", "Draw a synthetic triplet from a preset");
    add_common(sim);
    sim->add_option("--preset", preset,
                    "generator preset: competition, competition-wide, iigpp, hmm, wta");
    sim->add_option("--n-a", n_a, "trials under stimulus A");
    sim->add_option("--n-b", n_b, "trials under stimulus B");
    sim->add_option("--n-ab", n_ab, "trials under both stimuli");
    sim->add_option("--window-end", window_end, "recording window length in seconds");

    CLI::App* fit = app.add_subcommand("fit", "Sample one model's posterior on a triplet");
    add_common(fit);
    fit->add_option("--data", data_path, "triplet JSON file")->required();
    fit->add_option("--model", model, "competition, iigpp, wta_a, or wta_b");

    CLI::App* compare = app.add_subcommand("compare", "Fit all four models and classify");
    add_common(compare);
    compare->add_option("--data", data_path, "triplet JSON file")->required();

    CLI::App* screen = app.add_subcommand("screen", "Run the triplet inclusion screen");
    add_common(screen);
    screen->add_option("--data", data_path, "triplet JSON file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
        if (sub->count("--seed")) cfg.seed = seed;
        if (sub->count("--workers")) cfg.workers = workers;
        if (sub == sim) {
            if (sim->count("--preset")) cfg.preset = preset;
            if (sim->count("--n-a")) cfg.n_a = n_a;
            if (sim->count("--n-b")) cfg.n_b = n_b;
            if (sim->count("--n-ab")) cfg.n_ab = n_ab;
            if (sim->count("--window-end")) cfg.window_end = window_end;
        }
        if (sub == fit && fit->count("--model")) cfg.model = model;
        if (cfg.workers <= 0)
            cfg.workers = std::max(1u, std::thread::hardware_concurrency());

        if (sub == sim) return cmd_simulate(cfg, out_dir);
        if (sub == fit) return cmd_fit(cfg, data_path, out_dir);
        if (sub == compare) return cmd_compare(cfg, data_path, out_dir);
        return cmd_screen(cfg, data_path, out_dir);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    }
}

}  // namespace spikerace
