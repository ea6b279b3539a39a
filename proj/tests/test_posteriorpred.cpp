#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "spikerace/posteriorpred.hpp"
#include "spikerace/rng.hpp"

using namespace spikerace;

namespace {

// hand-assembled draws with the column layout of a competition chain on a
// one-dimensional basis (linear ramp, no interior knots)
BasisConfig ramp_basis() {
    BasisConfig cfg;
    cfg.degree = 1;
    cfg.t_lo = 0.0;
    cfg.t_hi = 1.0;
    cfg.interior = {};
    return cfg;
}

PosteriorDraws competition_fit(int s, Rng& rng, double input_a, double input_b,
                               double noise_a, double noise_b, double delay_lo,
                               double delay_hi) {
    PosteriorDraws d;
    d.model = Model::Competition;
    d.names = {"I_A", "I_B", "sigma_A", "sigma_B", "delta",
               "phi_A_1", "phi_B_1", "tau_A", "tau_B"};
    d.values.resize(s, 9);
    for (int i = 0; i < s; ++i) {
        // relative jitter keeps tiny drives positive
        d.values(i, 0) = input_a * (1.0 + 0.025 * rng.normal(0.0, 1.0));
        d.values(i, 1) = input_b * (1.0 + 0.025 * rng.normal(0.0, 1.0));
        d.values(i, 2) = noise_a * (1.0 + 0.025 * rng.normal(0.0, 1.0));
        d.values(i, 3) = noise_b * (1.0 + 0.025 * rng.normal(0.0, 1.0));
        d.values(i, 4) = delay_lo + (delay_hi - delay_lo) * rng.uniform();
        d.values(i, 5) = rng.normal(0.0, 0.02);
        d.values(i, 6) = rng.normal(0.0, 0.02);
        d.values(i, 7) = 1.0;
        d.values(i, 8) = 1.0;
    }
    return d;
}

}  // namespace

TEST_SUITE("posteriorpred") {

TEST_CASE("switch counting") {
    CHECK(count_switches({}) == 0);
    CHECK(count_switches({Label::A}) == 0);
    CHECK(count_switches({Label::A, Label::A, Label::A}) == 0);
    CHECK(count_switches({Label::A, Label::B, Label::A, Label::B}) == 3);
    CHECK(count_switches({Label::B, Label::B, Label::A, Label::A, Label::B}) == 2);
}

TEST_CASE("attributed stimulus time, both conventions") {
    const std::vector<double> times = {0.2, 0.5, 0.7};
    const std::vector<Label> labels = {Label::A, Label::B, Label::A};

    // ending-spike convention: [0,.2] and (.5,.7] are A's, plus the tail
    CHECK(time_encoding_a(times, labels, 1.0, false) == doctest::Approx(0.7).epsilon(1e-15));
    // previous-spike convention: the first interval still goes to its ending spike
    CHECK(time_encoding_a(times, labels, 1.0, true) == doctest::Approx(0.8).epsilon(1e-15));

    CHECK(time_encoding_a(times, {Label::A, Label::A, Label::A}, 1.0, false) ==
          doctest::Approx(1.0));
    CHECK(time_encoding_a(times, {Label::B, Label::B, Label::B}, 1.0, false) ==
          doctest::Approx(0.0));

    CHECK_THROWS_AS(time_encoding_a({}, {}, 1.0, false), std::invalid_argument);
}

TEST_CASE("the two labels partition the window under either convention") {
    Rng rng(12);
    for (int rep = 0; rep < 50; ++rep) {
        const int n = 1 + static_cast<int>(rng.uniform() * 8);
        std::vector<double> times(n);
        double t = 0.0;
        for (int j = 0; j < n; ++j) times[j] = t += 0.01 + 0.1 * rng.uniform();
        const double window = t + 0.05;
        std::vector<Label> labels(n), flipped(n);
        for (int j = 0; j < n; ++j) {
            labels[j] = rng.bernoulli(0.5) ? Label::A : Label::B;
            flipped[j] = labels[j] == Label::A ? Label::B : Label::A;
        }
        for (bool prev : {false, true}) {
            const double a = time_encoding_a(times, labels, window, prev);
            const double b = time_encoding_a(times, flipped, window, prev);
            CHECK(a + b == doctest::Approx(window).epsilon(1e-12));
            CHECK(a >= 0.0);
            CHECK(a <= window);
        }
    }
}

TEST_CASE("label frequencies average the stored paths") {
    PosteriorDraws d;
    d.label_draws = {
        {{Label::A, Label::A, Label::B}},
        {{Label::A, Label::B, Label::B}},
        {{Label::A, Label::A, Label::B}},
        {{Label::A, Label::B, Label::B}},
    };
    const Eigen::VectorXd f = label_frequencies(d, 0);
    REQUIRE(f.size() == 3);
    CHECK(f[0] == doctest::Approx(1.0));
    CHECK(f[1] == doctest::Approx(0.5));
    CHECK(f[2] == doctest::Approx(0.0));
    CHECK_THROWS_AS(label_frequencies(d, 1), std::invalid_argument);
    CHECK_THROWS_AS(label_frequencies(PosteriorDraws{}, 0), std::invalid_argument);
}

TEST_CASE("relative squared error identities") {
    Eigen::VectorXd t(3);
    t << 1.0, -2.0, 2.0;
    CHECK(rse(t, t) == 0.0);
    CHECK(rse(2.0 * t, t) == doctest::Approx(1.0).epsilon(1e-14));
    Eigen::VectorXd e = t;
    e[0] += 3.0;
    CHECK(rse(e, t) == doctest::Approx(1.0).epsilon(1e-14));  // 9 over |t|^2 = 9

    CHECK(rse(3.0, 2.0) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(rse(2.0, 2.0) == 0.0);

    Eigen::VectorXd short_v(2);
    short_v << 1.0, 1.0;
    CHECK_THROWS_AS(rse(short_v, t), std::invalid_argument);
    CHECK_THROWS_AS(rse(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3)),
                    std::domain_error);
    CHECK_THROWS_AS(rse(1.0, 0.0), std::domain_error);
}

TEST_CASE("relative wasserstein distance identities") {
    const std::vector<double> x = {3.0, 1.0, 2.0};
    CHECK(rwd(x, x) == 0.0);
    CHECK(rwd({2.0, 1.0, 3.0}, x) == 0.0);  // order must not matter
    CHECK(rwd({1.0, 3.0}, {2.0, 4.0}) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK_THROWS_AS(rwd({1.0}, {1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(rwd({}, {}), std::invalid_argument);
    CHECK_THROWS_AS(rwd({1.0, 2.0}, {0.0, 0.0}), std::domain_error);
}

TEST_CASE("rate curves span the window and respect flat parameters") {
    const BasisConfig cfg = ramp_basis();
    StimulusParams flat{40.0, 5.0, {}};
    const Eigen::VectorXd c = rate_curve(flat, cfg, 11);
    REQUIRE(c.size() == 11);
    CHECK((c.array() == 40.0).all());

    StimulusParams ramped{40.0, 5.0, Eigen::VectorXd::Constant(1, 0.5)};
    const Eigen::VectorXd r = rate_curve(ramped, cfg, 11);
    CHECK(r[0] == doctest::Approx(40.0).epsilon(1e-14));  // basis vanishes at the start
    CHECK(r[10] == doctest::Approx(40.0 * std::exp(0.5)).epsilon(1e-12));
    CHECK(r[5] > r[0]);
    CHECK_THROWS_AS(rate_curve(flat, cfg, 1), std::invalid_argument);
}

TEST_CASE("coverage report scores matched and mismatched truths") {
    const BasisConfig basis = ramp_basis();
    Rng rng(55);
    std::vector<PosteriorDraws> fits;
    fits.push_back(competition_fit(400, rng, 40.0, 80.0, 6.0, 9.0, 0.010, 0.020));
    fits.push_back(competition_fit(400, rng, 40.0, 80.0, 6.0, 9.0, 0.010, 0.020));

    CompetitionParams good;
    good.a = {40.0, 6.0, Eigen::VectorXd::Zero(1)};
    good.b = {80.0, 9.0, Eigen::VectorXd::Zero(1)};
    good.delay = 0.015;
    CompetitionParams bad;
    bad.a = {400.0, 2.0, Eigen::VectorXd::Zero(1)};
    bad.b = {800.0, 3.0, Eigen::VectorXd::Zero(1)};
    bad.delay = 0.3;

    const CoverageReport rep = coverage_report({fits[0], fits[1]}, {good, bad}, basis, 100, 0.5);
    CHECK(rep.n_datasets == 2);
    REQUIRE(rep.rows.size() == 5);
    CHECK(rep.rows[0].name == "sigma_A");
    CHECK(rep.rows[2].name == "delta");
    CHECK(rep.rows[3].name == "curve_A");
    CHECK(rep.rows[4].name == "curve_B");
    for (const auto& row : rep.rows) {
        CHECK(row.covered == 1);  // the matched dataset only
        CHECK(row.pointwise >= 0.0);
        CHECK(row.pointwise <= 1.0);
        CHECK(row.mean_rel_width > 0.0);
    }

    CHECK_THROWS_AS(coverage_report({}, {}, basis, 100, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(coverage_report({fits[0]}, {good, bad}, basis, 100, 0.5),
                    std::invalid_argument);
}

TEST_CASE("predictive replicates are deterministic and windable") {
    const BasisConfig basis = ramp_basis();
    Rng rng(56);
    const PosteriorDraws d = competition_fit(5, rng, 40.0, 80.0, 6.0, 9.0, 0.008, 0.012);
    PredictiveConfig cfg;
    cfg.n_rep = 60;
    const double window = 0.6;

    const PredictiveSummary s1 = predictive_draws(d, basis, window, cfg, 77);
    const PredictiveSummary s2 = predictive_draws(d, basis, window, cfg, 77);
    CHECK(s1.switches == s2.switches);
    CHECK(s1.time_a == s2.time_a);
    CHECK(s1.counts == s2.counts);

    PredictiveConfig three = cfg;
    three.workers = 3;
    const PredictiveSummary s3 = predictive_draws(d, basis, window, three, 77);
    CHECK(s3.switches == s1.switches);
    CHECK(s3.time_a == s1.time_a);

    REQUIRE(s1.counts.size() == 60);
    double sw = 0.0, ta = 0.0, ct = 0.0;
    for (int k = 0; k < 60; ++k) {
        CHECK(s1.time_a[k] >= 0.0);
        CHECK(s1.time_a[k] <= window);
        CHECK(s1.counts[k] >= 0);
        sw += s1.switches[k];
        ta += s1.time_a[k];
        ct += s1.counts[k];
    }
    CHECK(s1.mean_switches == doctest::Approx(sw / 60).epsilon(1e-14));
    CHECK(s1.mean_time_a == doctest::Approx(ta / 60).epsilon(1e-14));
    CHECK(s1.mean_count == doctest::Approx(ct / 60).epsilon(1e-14));
    CHECK(s1.mean_count > 10.0);  // ~120 spikes per second of combined drive

    const PredictiveSummary other = predictive_draws(d, basis, window, cfg, 78);
    CHECK(other.counts != s1.counts);
}

TEST_CASE("a spikeless replicate hands the window to one racer") {
    const BasisConfig basis = ramp_basis();
    Rng rng(57);
    // weak drive alone is not enough (a small passage shape is heavy near zero),
    // so the noise must be small too for the window to stay empty
    const PosteriorDraws d = competition_fit(4, rng, 0.002, 0.001, 0.2, 0.2, 0.01, 0.02);
    PredictiveConfig cfg;
    cfg.n_rep = 40;
    const double window = 0.4;
    const PredictiveSummary s = predictive_draws(d, basis, window, cfg, 79);
    CHECK(s.empty_replicates > 30);
    for (int k = 0; k < 40; ++k) {
        if (s.counts[k] != 0) continue;
        CHECK(s.switches[k] == 0);
        const bool whole = s.time_a[k] == window;
        const bool none = s.time_a[k] == 0.0;
        CHECK((whole || none));
    }
}

TEST_CASE("predictive mean count of a lone component tracks its drive") {
    PosteriorDraws d;
    d.model = Model::Iigpp;
    d.names = {"I_A", "sigma_A", "phi_A_1", "tau_A"};
    d.values.resize(3, 4);
    for (int i = 0; i < 3; ++i) {
        d.values(i, 0) = 50.0;
        d.values(i, 1) = 5.0;
        d.values(i, 2) = 0.0;
        d.values(i, 3) = 1.0;
    }
    const BasisConfig basis = ramp_basis();
    const double m1 = predictive_mean_count(d, "A", basis, 1.0, 300, 80);
    CHECK(m1 == doctest::Approx(50.0).epsilon(0.06));
    CHECK(predictive_mean_count(d, "A", basis, 1.0, 300, 80) == m1);
    CHECK_THROWS_AS(predictive_mean_count(d, "A", basis, 1.0, 0, 80),
                    std::invalid_argument);
}

}  // TEST_SUITE
