#include <doctest.h>

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "spikerace/filter.hpp"
#include "spikerace/math.hpp"
#include "spikerace/simulate.hpp"

using namespace spikerace;

namespace {

// brute force marginal: sum the labeled density over all 2^n label paths
double enumerate_marginal(const CompetitionParams& p, const TrainCache& cache,
                          const RateTable& rates) {
    const int n = cache.n();
    double total = kNegInf;
    for (int mask = 0; mask < (1 << n); ++mask) {
        std::vector<Label> labels(n);
        for (int j = 0; j < n; ++j) labels[j] = (mask >> j) & 1 ? Label::B : Label::A;
        total = log_add(total, labeled_loglik(p, cache, rates, labels));
    }
    return total;
}

SpikeTrain train_of(std::vector<double> times, double window_end) {
    SpikeTrain t;
    t.times = std::move(times);
    t.window_end = window_end;
    return t;
}

}  // namespace

TEST_SUITE("filter") {

TEST_CASE("frozen two spike example, path by path") {
    // constant rates, values frozen from an mpmath enumeration
    CompetitionParams p;
    p.a = {30.0, 2.0, {}};
    p.b = {22.0, 2.5, {}};
    p.delay = 0.04;
    const BasisConfig cfg = default_basis(0.25);
    const SpikeTrain t = train_of({0.08, 0.19}, 0.25);
    const TrainCache cache = make_cache(t, cfg);
    const RateTable rates = make_rates(p, cache);

    const std::map<std::string, double> paths = {
        {"AA", -13.11509802747587},
        {"AB", -12.225223107025204},
        {"BA", -11.318764011284096},
        {"BB", -10.375166463696771},
    };
    for (const auto& [key, expected] : paths) {
        const std::vector<Label> labels = {key[0] == 'A' ? Label::A : Label::B,
                                           key[1] == 'A' ? Label::A : Label::B};
        CHECK(labeled_loglik(p, cache, rates, labels) ==
              doctest::Approx(expected).epsilon(1e-12));
    }
    CHECK(marginal_loglik(p, cfg, t) == doctest::Approx(-9.8982939269732937).epsilon(1e-12));

    const SpikeTrain empty = train_of({}, 0.25);
    CHECK(marginal_loglik(p, cfg, empty) ==
          doctest::Approx(-35.415478660574419).epsilon(1e-12));
}

TEST_CASE("filter marginal equals full enumeration on simulated trains") {
    const BasisConfig cfg = default_basis(0.3);
    CompetitionParams p;
    p.a = {32.0, 2.2, Eigen::VectorXd::Zero(6)};
    p.b = {26.0, 1.8, Eigen::VectorXd::Zero(6)};
    p.a.coef << 0.3, -0.2, 0.5, 0.1, -0.4, 0.25;
    p.b.coef << -0.1, 0.4, -0.3, 0.2, 0.1, -0.2;
    p.delay = 0.025;

    Rng rng(7);
    int used = 0;
    for (int rep = 0; rep < 40 && used < 12; ++rep) {
        auto [train, labels] = simulate_competition(p, cfg, 0.3, rng);
        if (train.n() < 1 || train.n() > 11) continue;
        ++used;
        const TrainCache cache = make_cache(train, cfg);
        const RateTable rates = make_rates(p, cache);
        const double direct = enumerate_marginal(p, cache, rates);
        const FilterState fs = forward_filter(p, cache, rates);
        CHECK(fs.loglik == doctest::Approx(direct).epsilon(1e-10));
        CHECK(marginal_loglik(p, cfg, train) == doctest::Approx(direct).epsilon(1e-10));
    }
    REQUIRE(used >= 8);
}

TEST_CASE("filtered rows are normalized distributions") {
    CompetitionParams p;
    p.a = {28.0, 2.0, {}};
    p.b = {35.0, 2.4, {}};
    p.delay = 0.01;
    const BasisConfig cfg = default_basis(0.5);
    Rng rng(8);
    const auto [train, labels] = simulate_competition(p, cfg, 0.5, rng);
    REQUIRE(train.n() >= 2);
    const TrainCache cache = make_cache(train, cfg);
    const RateTable rates = make_rates(p, cache);
    const FilterState fs = forward_filter(p, cache, rates);
    for (int j = 0; j < train.n(); ++j) {
        const double row = log_add(fs.log_filtered(j, 0), fs.log_filtered(j, 1));
        CHECK(row == doctest::Approx(0.0).epsilon(1e-14));
    }
}

TEST_CASE("backward draws follow the exact path posterior") {
    // 3 spikes, 8 paths: compare sampled path frequencies against the
    // enumerated posterior with a chi squared bound (99.9th pct of chi2_7)
    CompetitionParams p;
    p.a = {30.0, 2.0, {}};
    p.b = {24.0, 2.0, {}};
    p.delay = 0.03;
    const BasisConfig cfg = default_basis(0.22);
    const SpikeTrain t = train_of({0.05, 0.11, 0.2}, 0.22);
    const TrainCache cache = make_cache(t, cfg);
    const RateTable rates = make_rates(p, cache);
    const FilterState fs = forward_filter(p, cache, rates);

    const double marg = fs.loglik;
    std::map<int, double> post;
    for (int mask = 0; mask < 8; ++mask) {
        std::vector<Label> labels(3);
        for (int j = 0; j < 3; ++j) labels[j] = (mask >> j) & 1 ? Label::B : Label::A;
        post[mask] = std::exp(labeled_loglik(p, cache, rates, labels) - marg);
    }

    Rng rng(9);
    const int n = 40000;
    std::map<int, int> counts;
    for (int i = 0; i < n; ++i) {
        const std::vector<Label> path = backward_sample(p, cache, rates, fs, rng);
        int mask = 0;
        for (int j = 0; j < 3; ++j) mask |= (path[j] == Label::B) << j;
        ++counts[mask];
    }
    double chi2 = 0.0;
    for (const auto& [mask, prob] : post) {
        const double expected = n * prob;
        if (expected < 1e-9) {
            CHECK(counts[mask] == 0);
            continue;
        }
        const double diff = counts[mask] - expected;
        chi2 += diff * diff / expected;
    }
    CHECK(chi2 < 24.32);
}

TEST_CASE("switches faster than the head start zero out filter paths") {
    CompetitionParams p;
    p.a = {30.0, 2.0, {}};
    p.b = {24.0, 2.0, {}};
    p.delay = 0.06;
    const BasisConfig cfg = default_basis(0.3);
    // the second interval (0.04) is shorter than the delay, so the label
    // cannot switch there; the marginal must equal the repeat-only paths
    const SpikeTrain t = train_of({0.1, 0.14}, 0.3);
    const TrainCache cache = make_cache(t, cfg);
    const RateTable rates = make_rates(p, cache);
    CHECK(labeled_loglik(p, cache, rates, {Label::A, Label::B}) == kNegInf);
    CHECK(labeled_loglik(p, cache, rates, {Label::B, Label::A}) == kNegInf);
    const double repeats = log_add(labeled_loglik(p, cache, rates, {Label::A, Label::A}),
                                   labeled_loglik(p, cache, rates, {Label::B, Label::B}));
    CHECK(marginal_loglik(p, cfg, t) == doctest::Approx(repeats).epsilon(1e-12));
}

TEST_CASE("an impossible spike raises instead of propagating minus infinity") {
    // rates large enough to overflow the density exponent leave every label
    // path at zero probability; the filter must say so, not return -inf or NaN
    CompetitionParams p;
    p.a = {1e160, 2.0, {}};
    p.b = {1e160, 2.0, {}};
    const BasisConfig cfg = default_basis(0.3);
    const SpikeTrain t = train_of({0.1}, 0.3);
    CHECK_THROWS_AS(marginal_loglik(p, cfg, t), std::runtime_error);
}

TEST_CASE("lone renewal likelihood matches the frozen modulated example") {
    StimulusParams p{30.0, 3.0, Eigen::VectorXd::Zero(6)};
    p.coef << 0.3, -0.2, 0.5, 0.1, -0.4, 0.25;
    const BasisConfig cfg = default_basis(1.0);
    const SpikeTrain t = train_of({0.12, 0.31, 0.55, 0.83}, 1.0);
    CHECK(renewal_loglik(p, cfg, t) == doctest::Approx(-50.556695934689584).epsilon(1e-12));
}

}  // TEST_SUITE
