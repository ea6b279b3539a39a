#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "spikerace/filter.hpp"
#include "spikerace/mcmc.hpp"
#include "spikerace/simulate.hpp"

using namespace spikerace;

namespace {

SamplerConfig tiny_sampler() {
    SamplerConfig cfg;
    cfg.warmup1 = 40;
    cfg.warmup2 = 60;
    cfg.samples = 50;
    cfg.adapt_interval = 20;
    return cfg;
}

Triplet small_triplet(int n, double window_end, std::uint64_t seed) {
    TripletSpec spec = preset_spec("competition");
    spec.n_a = spec.n_b = spec.n_ab = n;
    spec.window_end = window_end;
    return simulate_triplet(spec, default_basis(window_end), seed).first;
}

// label paths drawn from the exact conditional, as run_chain does before sweeping
void fill_labels(CompetitionState& s, const Triplet& data, const BasisConfig& basis, Rng& rng) {
    s.labels.assign(data.ab_trials.size(), {});
    for (std::size_t i = 0; i < data.ab_trials.size(); ++i) {
        const SpikeTrain& t = data.ab_trials[i];
        if (t.n() == 0) continue;
        const TrainCache cache = make_cache(t, basis);
        const RateTable rt = make_rates(s.params, cache);
        const FilterState fs = forward_filter(s.params, cache, rt);
        s.labels[i] = backward_sample(s.params, cache, rt, fs, rng);
    }
}

double max_grad_error(const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>& f,
                      const Eigen::VectorXd& z) {
    Eigen::VectorXd grad(z.size());
    f(z, &grad);
    double worst = 0.0;
    for (int i = 0; i < z.size(); ++i) {
        const double h = 1e-6 * std::max(1.0, std::abs(z[i]));
        Eigen::VectorXd zp = z, zm = z;
        zp[i] += h;
        zm[i] -= h;
        const double fd = (f(zp, nullptr) - f(zm, nullptr)) / (2.0 * h);
        worst = std::max(worst, std::abs(fd - grad[i]) / std::max(1.0, std::abs(grad[i])));
    }
    return worst;
}

}  // namespace

TEST_SUITE("mcmc") {

TEST_CASE("model names round trip and reject unknowns") {
    for (Model m : {Model::Competition, Model::Iigpp, Model::WtaA, Model::WtaB})
        CHECK(model_from_name(model_name(m)) == m);
    CHECK_THROWS_AS(model_from_name("glm"), std::invalid_argument);
}

TEST_CASE("both block gradients agree with central differences") {
    const double window = 0.5;
    const BasisConfig basis = default_basis(window);
    const Triplet data = small_triplet(3, window, 5);
    const PriorConfig priors;
    CompetitionSampler sampler(data, basis, priors, tiny_sampler());

    Rng rng(17);
    for (int rep = 0; rep < 5; ++rep) {
        CompetitionState s = sampler.init_state(rng);
        fill_labels(s, data, basis, rng);

        Eigen::VectorXd zd(4);
        zd << std::log(s.params.a.input), std::log(s.params.b.input),
            std::log(s.params.a.noise), std::log(s.params.b.noise);
        for (int i = 0; i < 4; ++i) zd[i] += rng.normal(0.0, 0.05);
        const double drift_err = max_grad_error(
            [&](const Eigen::VectorXd& z, Eigen::VectorXd* g) {
                return sampler.drift_noise_logpost(s, z, g);
            },
            zd);
        CHECK(drift_err < 1e-5);

        Eigen::VectorXd zc(2 * basis.dim());
        zc.head(basis.dim()) = s.params.a.coef;
        zc.tail(basis.dim()) = s.params.b.coef;
        for (int i = 0; i < zc.size(); ++i) zc[i] += rng.normal(0.0, 0.05);
        const double coef_err = max_grad_error(
            [&](const Eigen::VectorXd& z, Eigen::VectorXd* g) {
                return sampler.coef_logpost(s, z, g);
            },
            zc);
        CHECK(coef_err < 1e-5);
    }
}

TEST_CASE("hmc reproduces a correlated gaussian") {
    Eigen::MatrixXd cov(2, 2);
    cov << 1.0, 0.8, 0.8, 2.0;
    const Eigen::MatrixXd prec = cov.inverse();
    const auto target = [&](const Eigen::VectorXd& q, Eigen::VectorXd& g) {
        g = -prec * q;
        return -0.5 * q.dot(prec * q);
    };

    const BlockTuning tune = BlockTuning::identity(2, 0.25);
    Rng rng(31);
    Eigen::VectorXd q = Eigen::VectorXd::Zero(2);
    const int n = 30000;
    Eigen::Vector2d sum = Eigen::Vector2d::Zero();
    Eigen::Matrix2d sumsq = Eigen::Matrix2d::Zero();
    double accept = 0.0;
    for (int i = 0; i < n; ++i) {
        accept += hmc_update(q, target, tune, 5, 1000.0, rng).accept_prob;
        sum += q;
        sumsq += q * q.transpose();
    }
    const Eigen::Vector2d mean = sum / n;
    const Eigen::Matrix2d second = sumsq / n;
    CHECK(accept / n > 0.6);
    CHECK(std::abs(mean[0]) < 0.06);
    CHECK(std::abs(mean[1]) < 0.09);
    CHECK(second(0, 0) == doctest::Approx(1.0).epsilon(0.1));
    CHECK(second(1, 1) == doctest::Approx(2.0).epsilon(0.1));
    CHECK(second(0, 1) == doctest::Approx(0.8).epsilon(0.15));
}

TEST_CASE("absurd step sizes register as divergences, not silent acceptance") {
    const auto target = [](const Eigen::VectorXd& q, Eigen::VectorXd& g) {
        g = -q;
        return -0.5 * q.squaredNorm();
    };
    const BlockTuning tune = BlockTuning::identity(2, 50.0);
    Rng rng(32);
    Eigen::VectorXd q = Eigen::VectorXd::Constant(2, 0.3);
    int divergent = 0, accepted = 0;
    for (int i = 0; i < 200; ++i) {
        const HmcStats st = hmc_update(q, target, tune, 5, 1000.0, rng);
        divergent += st.divergent;
        accepted += st.accepted;
    }
    CHECK(divergent > 100);
    CHECK(accepted < 20);
}

TEST_CASE("step size adaptation moves toward the acceptance target") {
    BlockTuning tune = BlockTuning::identity(2, 0.1);
    const double before = tune.log_step;
    adapt_step_size(tune, 1.0, 0.65, 0.05);
    CHECK(tune.log_step > before);
    adapt_step_size(tune, 0.0, 0.65, 0.05);
    adapt_step_size(tune, 0.0, 0.65, 0.05);
    CHECK(tune.log_step < before);
}

TEST_CASE("mass adaptation installs the window covariance") {
    std::vector<Eigen::VectorXd> window;
    Rng rng(33);
    Eigen::MatrixXd chol(2, 2);
    chol << 2.0, 0.0, 1.2, 0.5;
    for (int i = 0; i < 4000; ++i) {
        Eigen::VectorXd z(2);
        z << rng.normal(0.0, 1.0), rng.normal(0.0, 1.0);
        window.push_back(chol * z);
    }
    BlockTuning tune = BlockTuning::identity(2, 0.1);
    adapt_mass(tune, window, 0.001);
    const Eigen::MatrixXd truth = chol * chol.transpose();
    CHECK(tune.cov(0, 0) == doctest::Approx(truth(0, 0)).epsilon(0.1));
    CHECK(tune.cov(1, 1) == doctest::Approx(truth(1, 1)).epsilon(0.1));
    CHECK(tune.cov(0, 1) == doctest::Approx(truth(0, 1)).epsilon(0.15));
    CHECK(tune.cov(0, 1) == tune.cov(1, 0));
}

TEST_CASE("an indefinite inverse mass is rejected outright") {
    BlockTuning tune;
    Eigen::MatrixXd bad(2, 2);
    bad << 1.0, 3.0, 3.0, 1.0;  // eigenvalues 4 and -2
    CHECK_THROWS_AS(tune.set_cov(bad), std::runtime_error);
}

TEST_CASE("coefficient scale updates stay positive and mix") {
    Eigen::VectorXd coef(6);
    coef << 0.4, -0.3, 0.2, 0.6, -0.5, 0.1;
    const PriorConfig priors;
    Rng rng(34);
    double tau = 1.0, aux = 1.0;
    double lo = tau, hi = tau;
    for (int i = 0; i < 500; ++i) {
        gibbs_coef_scale(coef, tau, aux, priors, rng);
        CHECK(tau > 0.0);
        CHECK(aux > 0.0);
        CHECK(std::isfinite(tau));
        lo = std::min(lo, tau);
        hi = std::max(hi, tau);
    }
    CHECK(hi > 2.0 * lo);
}

TEST_CASE("single process fit recovers generating parameters loosely") {
    const double window = 1.0;
    const BasisConfig basis = default_basis(window);
    StimulusParams truth{60.0, 5.0, Eigen::VectorXd::Zero(basis.dim())};
    std::vector<SpikeTrain> trains;
    Rng gen(41);
    for (int i = 0; i < 20; ++i) trains.push_back(simulate_iigpp(truth, basis, window, gen));

    SamplerConfig cfg;
    cfg.warmup1 = 100;
    cfg.warmup2 = 150;
    cfg.samples = 250;
    cfg.adapt_interval = 50;
    const PosteriorDraws draws = fit_component(trains, basis, PriorConfig{}, cfg, 42, "A");

    CHECK(draws.n_draws() == 250);
    const double mean_input = draws.column("I_A").mean();
    const double mean_noise = draws.column("sigma_A").mean();
    CHECK(mean_input > 48.0);
    CHECK(mean_input < 72.0);
    CHECK(mean_noise > 3.8);
    CHECK(mean_noise < 6.2);
    CHECK(draws.accept_drift > 0.2);
    CHECK(draws.accept_coef > 0.2);

    // stored per-train likelihoods must match recomputation from the draw
    for (int row : {0, 100, 249}) {
        const StimulusParams p = stimulus_draw(draws, row, "A");
        for (int i : {0, 7, 19})
            CHECK(draws.train_loglik(row, i) ==
                  doctest::Approx(renewal_loglik(p, basis, trains[i])).epsilon(1e-12));
    }
}

TEST_CASE("competition chain output is complete, finite, and reproducible") {
    const double window = 0.5;
    const BasisConfig basis = default_basis(window);
    const Triplet data = small_triplet(4, window, 6);
    const SamplerConfig cfg = tiny_sampler();
    const PriorConfig priors;

    const PosteriorDraws d1 = run_chain(data, Model::Competition, basis, priors, cfg, 101);
    const PosteriorDraws d2 = run_chain(data, Model::Competition, basis, priors, cfg, 101);
    const PosteriorDraws d3 = run_chain(data, Model::Competition, basis, priors, cfg, 102);

    const int dim = basis.dim();
    REQUIRE(d1.names.size() == static_cast<std::size_t>(5 + 2 * dim + 2));
    CHECK(d1.names[0] == "I_A");
    CHECK(d1.names[4] == "delta");
    CHECK(d1.names.back() == "tau_B");
    CHECK(d1.values.rows() == cfg.samples);
    CHECK(d1.train_loglik.cols() == 12);
    CHECK(d1.values.allFinite());
    CHECK(d1.train_loglik.allFinite());
    CHECK((d1.column("delta").array() >= 0.0).all());

    REQUIRE(d1.label_draws.size() == static_cast<std::size_t>(cfg.samples));
    for (std::size_t i = 0; i < data.ab_trials.size(); ++i)
        CHECK(d1.label_draws[10][i].size() == data.ab_trials[i].times.size());

    CHECK(d1.values == d2.values);
    CHECK(d1.train_loglik == d2.train_loglik);
    CHECK(d1.values != d3.values);

    // a stored row reassembles into the parameters that produced it
    const CompetitionParams p = competition_draw(d1, 20);
    CHECK(p.a.input == d1.column("I_A")[20]);
    CHECK(p.b.noise == d1.column("sigma_B")[20]);
    CHECK(p.delay == d1.column("delta")[20]);
    CHECK(p.a.coef.size() == dim);
    const SpikeTrain& t0 = data.ab_trials[0];
    CHECK(d1.train_loglik(20, 8) ==
          doctest::Approx(marginal_loglik(p, basis, t0)).epsilon(1e-10));

    SamplerConfig bad = cfg;
    bad.init_delay = 0.0;
    CHECK_THROWS_AS(run_chain(data, Model::Competition, basis, priors, bad, 101),
                    std::invalid_argument);
}

TEST_CASE("factored models lay out columns and likelihoods per condition") {
    const double window = 0.5;
    const BasisConfig basis = default_basis(window);
    const Triplet data = small_triplet(3, window, 7);
    const SamplerConfig cfg = tiny_sampler();
    const PriorConfig priors;
    const int dim = basis.dim();

    const PosteriorDraws ii = run_chain(data, Model::Iigpp, basis, priors, cfg, 55);
    REQUIRE(ii.names.size() == static_cast<std::size_t>(3 * (dim + 3)));
    CHECK(ii.names[0] == "I_A");
    CHECK(ii.has_column("I_AB"));
    CHECK(ii.has_column("sigma_B"));
    CHECK(ii.train_loglik.cols() == 9);
    CHECK(ii.train_loglik.allFinite());

    // the dual-stimulus block must come from the AB component, not A or B
    const StimulusParams pab = stimulus_draw(ii, 5, "AB");
    CHECK(ii.train_loglik(5, 6) ==
          doctest::Approx(renewal_loglik(pab, basis, data.ab_trials[0])).epsilon(1e-12));

    const PosteriorDraws wa = run_chain(data, Model::WtaA, basis, priors, cfg, 56);
    REQUIRE(wa.names.size() == static_cast<std::size_t>(2 * (dim + 3)));
    CHECK(wa.has_column("I_A"));
    CHECK(wa.has_column("I_B"));
    CHECK_FALSE(wa.has_column("I_AB"));
    const StimulusParams pa = stimulus_draw(wa, 5, "A");
    CHECK(wa.train_loglik(5, 6) ==
          doctest::Approx(renewal_loglik(pa, basis, data.ab_trials[0])).epsilon(1e-12));

    const PosteriorDraws wb = run_chain(data, Model::WtaB, basis, priors, cfg, 57);
    const StimulusParams pb = stimulus_draw(wb, 5, "B");
    CHECK(wb.train_loglik(5, 6) ==
          doctest::Approx(renewal_loglik(pb, basis, data.ab_trials[0])).epsilon(1e-12));
}

}  // TEST_SUITE
