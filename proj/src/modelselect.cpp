#include "spikerace/modelselect.hpp"

#include <cmath>
#include <span>
#include <stdexcept>

#include "spikerace/errors.hpp"
#include "spikerace/filter.hpp"
#include "spikerace/math.hpp"
#include "spikerace/parallel.hpp"
#include "spikerace/simulate.hpp"

namespace spikerace {

WaicResult waic(const Eigen::MatrixXd& train_loglik) {
    const int s = static_cast<int>(train_loglik.rows());
    const int n = static_cast<int>(train_loglik.cols());
    if (s < 2) throw std::invalid_argument("waic needs at least two posterior draws");

    WaicResult out;
    out.train_lppd.resize(n);
    out.train_var.resize(n);
    for (int i = 0; i < n; ++i) {
        const std::span<const double> col(train_loglik.col(i).data(), s);
        out.train_lppd[i] = log_sum_exp(col) - std::log(static_cast<double>(s));
        const double mean = train_loglik.col(i).mean();
        out.train_var[i] =
            (train_loglik.col(i).array() - mean).square().sum() / static_cast<double>(s - 1);
    }
    out.lppd = out.train_lppd.sum();
    out.p_eff = out.train_var.sum();
    out.waic = -2.0 * (out.lppd - out.p_eff);
    return out;
}

std::string category_name(Category c) {
    switch (c) {
        case Category::Iigpp: return "IIGPP";
        case Category::WtaPreferred: return "Winner-Take-All (Preferred)";
        case Category::WtaNonPreferred: return "Winner-Take-All (Non-Preferred)";
        case Category::SlowJuggling: return "Slow Juggling";
        case Category::FastJuggling: return "Fast Juggling";
    }
    return "IIGPP";
}

Classification classify(const WaicTable& table, double mean_switches, double rate_a,
                        double rate_b) {
    const Model order[4] = {Model::Iigpp, Model::WtaA, Model::WtaB, Model::Competition};
    const double w[4] = {table.iigpp.waic, table.wta_a.waic, table.wta_b.waic,
                         table.competition.waic};
    Classification out;
    int best = 0;
    for (int i = 1; i < 4; ++i)
        if (w[i] < w[best]) best = i;
    for (int i = 0; i < 4; ++i)
        if (i != best && w[i] == w[best]) out.tie = true;
    out.best = order[best];

    switch (out.best) {
        case Model::Iigpp:
            out.category = Category::Iigpp;
            break;
        case Model::WtaA:
            out.category = rate_a >= rate_b ? Category::WtaPreferred : Category::WtaNonPreferred;
            break;
        case Model::WtaB:
            out.category = rate_b >= rate_a ? Category::WtaPreferred : Category::WtaNonPreferred;
            break;
        case Model::Competition:
            out.category =
                mean_switches < 0.5 ? Category::SlowJuggling : Category::FastJuggling;
            break;
    }
    return out;
}

PValueReport posterior_p_values(const PosteriorDraws& draws, const std::string& tag,
                                const std::vector<SpikeTrain>& trains, const BasisConfig& basis,
                                const PValueConfig& cfg, std::uint64_t seed) {
    const int s = draws.n_draws();
    const int n = static_cast<int>(trains.size());
    if (s < 1) throw std::invalid_argument("posterior_p_values needs at least one draw");
    if (n < 1) throw std::invalid_argument("posterior_p_values needs at least one train");
    const int use = std::min(s, cfg.max_draws);
    const double window = trains.front().window_end;

    std::vector<TrainCache> obs_caches;
    obs_caches.reserve(n);
    double obs_count_mean = 0.0;
    for (const auto& t : trains) {
        obs_caches.push_back(make_cache(t, basis));
        obs_count_mean += t.n();
    }
    obs_count_mean /= n;
    double obs_count_var = 0.0;
    for (const auto& t : trains) {
        const double d = t.n() - obs_count_mean;
        obs_count_var += d * d;
    }
    obs_count_var = n > 1 ? obs_count_var / (n - 1) : 0.0;

    // per thinned draw: 1 if the replicate discrepancy was at least as extreme
    std::vector<int> hit_ll(use), hit_mean(use), hit_var(use);
    parallel_for(use, cfg.workers, [&](int k) {
        const int row = static_cast<int>(static_cast<long>(k) * s / use);
        const StimulusParams theta = stimulus_draw(draws, row, tag);
        Rng rng(seed, {21, static_cast<std::uint64_t>(k)});

        double obs_ll = 0.0;
        for (const auto& c : obs_caches) obs_ll += renewal_loglik(theta, c);
        obs_ll /= n;

        double rep_ll = 0.0, rep_mean = 0.0, rep_var = 0.0;
        std::vector<int> rep_counts(n);
        for (int i = 0; i < n; ++i) {
            const SpikeTrain rep = simulate_iigpp(theta, basis, window, rng);
            rep_ll += renewal_loglik(theta, basis, rep);
            rep_counts[i] = rep.n();
            rep_mean += rep.n();
        }
        rep_ll /= n;
        rep_mean /= n;
        for (int i = 0; i < n; ++i) {
            const double d = rep_counts[i] - rep_mean;
            rep_var += d * d;
        }
        rep_var = n > 1 ? rep_var / (n - 1) : 0.0;

        // count moments under theta, estimated by simulation
        double m1 = 0.0, m2 = 0.0;
        for (int r = 0; r < cfg.moment_reps; ++r) {
            const double c = simulate_iigpp(theta, basis, window, rng).n();
            m1 += c;
            m2 += c * c;
        }
        m1 /= cfg.moment_reps;
        m2 /= cfg.moment_reps;
        const double pred_var = std::max(m2 - m1 * m1, 0.0);

        hit_ll[k] = rep_ll <= obs_ll ? 1 : 0;
        hit_mean[k] = std::abs(rep_mean - m1) >= std::abs(obs_count_mean - m1) ? 1 : 0;
        hit_var[k] = std::abs(rep_var - pred_var) >= std::abs(obs_count_var - pred_var) ? 1 : 0;
    });

    PValueReport out;
    out.draws_used = use;
    int c_ll = 0, c_mean = 0, c_var = 0;
    for (int k = 0; k < use; ++k) {
        c_ll += hit_ll[k];
        c_mean += hit_mean[k];
        c_var += hit_var[k];
    }
    out.p_avg_ll = static_cast<double>(c_ll) / use;
    out.p_mean_count = static_cast<double>(c_mean) / use;
    out.p_var_count = static_cast<double>(c_var) / use;
    return out;
}

Distinguishability distinguishability_screen(const std::vector<SpikeTrain>& a_trains,
                                             const std::vector<SpikeTrain>& b_trains,
                                             const BasisConfig& basis, const PriorConfig& priors,
                                             const SamplerConfig& cfg, std::uint64_t seed) {
    if (a_trains.empty() || b_trains.empty())
        throw std::invalid_argument("distinguishability_screen needs trains in both conditions");

    const PosteriorDraws fit_a =
        fit_component(a_trains, basis, priors, cfg, mix_seed(seed, {31}), "A");
    const PosteriorDraws fit_b =
        fit_component(b_trains, basis, priors, cfg, mix_seed(seed, {32}), "B");

    std::vector<SpikeTrain> pooled = a_trains;
    pooled.insert(pooled.end(), b_trains.begin(), b_trains.end());
    const PosteriorDraws fit_joint =
        fit_component(pooled, basis, priors, cfg, mix_seed(seed, {33}), "J");

    Distinguishability out;
    out.lppd_separate = waic(fit_a.train_loglik).lppd + waic(fit_b.train_loglik).lppd;
    out.lppd_joint = waic(fit_joint.train_loglik).lppd;
    out.pass = out.lppd_separate - out.lppd_joint > std::log(3.0);
    return out;
}

ScreenReport screen_triplet(const Triplet& data, const BasisConfig& basis,
                            const PriorConfig& priors, const SamplerConfig& cfg,
                            const ScreenConfig& scfg, std::uint64_t seed) {
    ScreenReport out;
    out.n_a = static_cast<int>(data.a_trials.size());
    out.n_b = static_cast<int>(data.b_trials.size());
    out.n_ab = static_cast<int>(data.ab_trials.size());
    out.enough_trials =
        out.n_a >= scfg.min_trials && out.n_b >= scfg.min_trials && out.n_ab >= scfg.min_trials;
    if (!out.enough_trials) return out;

    const PosteriorDraws fit_a =
        fit_component(data.a_trials, basis, priors, cfg, mix_seed(seed, {41}), "A");
    const PosteriorDraws fit_b =
        fit_component(data.b_trials, basis, priors, cfg, mix_seed(seed, {42}), "B");
    out.a_pvalues =
        posterior_p_values(fit_a, "A", data.a_trials, basis, scfg.pvalue, mix_seed(seed, {43}));
    out.b_pvalues =
        posterior_p_values(fit_b, "B", data.b_trials, basis, scfg.pvalue, mix_seed(seed, {44}));
    out.pvalues_run = true;
    out.a_adequate = out.a_pvalues.adequate(scfg.alpha);
    out.b_adequate = out.b_pvalues.adequate(scfg.alpha);
    if (!out.a_adequate || !out.b_adequate) return out;

    out.distinct = distinguishability_screen(data.a_trials, data.b_trials, basis, priors, cfg,
                                             mix_seed(seed, {45}));
    out.distinguish_run = true;
    out.pass = out.distinct.pass;
    return out;
}

CompareOutcome compare_models(const Triplet& data, const BasisConfig& basis,
                              const PriorConfig& priors, const SamplerConfig& cfg,
                              const PredictiveConfig& pred, std::uint64_t seed) {
    CompareOutcome out;
    const Model models[4] = {Model::Iigpp, Model::WtaA, Model::WtaB, Model::Competition};
    PosteriorDraws* fits[4] = {&out.iigpp, &out.wta_a, &out.wta_b, &out.competition};
    WaicResult* scores[4] = {&out.table.iigpp, &out.table.wta_a, &out.table.wta_b,
                             &out.table.competition};
    for (int m = 0; m < 4; ++m) {
        *fits[m] = run_chain(data, models[m], basis, priors, cfg,
                             mix_seed(seed, {60, static_cast<std::uint64_t>(m)}));
        if (!fits[m]->train_loglik.allFinite())
            throw NumericalError(model_name(models[m]) + " posterior contains non-finite values");
        *scores[m] = waic(fits[m]->train_loglik);
    }

    out.predictive =
        predictive_draws(out.competition, basis, data.window_end, pred, mix_seed(seed, {70}));
    out.rate_a = predictive_mean_count(out.iigpp, "A", basis, data.window_end, pred.n_rep,
                                       mix_seed(seed, {71}));
    out.rate_b = predictive_mean_count(out.iigpp, "B", basis, data.window_end, pred.n_rep,
                                       mix_seed(seed, {72}));
    out.result = classify(out.table, out.predictive.mean_switches, out.rate_a, out.rate_b);
    return out;
}

}  // namespace spikerace
