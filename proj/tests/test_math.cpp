#include <doctest.h>

#include <cmath>
#include <vector>

#include "spikerace/math.hpp"

using namespace spikerace;

TEST_SUITE("math") {

// reference values computed with mpmath at 60 digits
TEST_CASE("erfcx against high precision references") {
    const double table[][2] = {
        {0.0, 1.0},
        {0.3, 0.73459933456765515},
        {1.0, 0.42758357615580700},
        {5.0, 0.11070463773306863},
        {26.6, 0.021195178159166478},
        {100.0, 0.0056416137829894329},
        {1e4, 5.6418958072680841e-5},
    };
    for (const auto& row : table)
        CHECK(erfcx_pos(row[0]) == doctest::Approx(row[1]).epsilon(1e-13));
}

TEST_CASE("normal cdf, log cdf, log pdf against references") {
    // z, cdf, log cdf, log pdf
    const double table[][4] = {
        {-40.0, 3.6558935409150297e-350, -804.60844201375379, -800.91893853320467},
        {-10.0, 7.6198530241605261e-24, -53.231285150512471, -50.918938533204673},
        {-5.0, 2.8665157187919391e-7, -15.064998393988726, -13.418938533204673},
        {-1.3, 0.096800484585610326, -2.3351032786624425, -1.7639385332046728},
        {0.0, 0.5, -0.69314718055994531, -0.91893853320467274},
        {0.7, 0.75803634777692697, -0.27702394227713126, -1.1639385332046727},
        {4.0, 0.99996832875816688, -3.1671743377489264e-5, -8.9189385332046727},
        {9.0, 1.0, -1.1285884059538406e-19, -41.418938533204673},
    };
    for (const auto& row : table) {
        if (row[1] > 1e-300)
            CHECK(norm_cdf(row[0]) == doctest::Approx(row[1]).epsilon(1e-12));
        CHECK(norm_log_cdf(row[0]) == doctest::Approx(row[2]).epsilon(1e-12));
        CHECK(norm_log_pdf(row[0]) == doctest::Approx(row[3]).epsilon(1e-14));
    }
}

TEST_CASE("log_add handles magnitude gaps and infinities") {
    CHECK(log_add(-1.0, -3.0) == doctest::Approx(-0.87307198895702750).epsilon(1e-14));
    CHECK(log_add(-1000.0, -1000.5) == doctest::Approx(-999.52592301581989).epsilon(1e-14));
    CHECK(log_add(0.0, -745.0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(log_add(2.5, 2.5) == doctest::Approx(3.1931471805599453).epsilon(1e-14));
    CHECK(log_add(kNegInf, -2.0) == -2.0);
    CHECK(log_add(-2.0, kNegInf) == -2.0);
    CHECK(log_add(kNegInf, kNegInf) == kNegInf);
}

TEST_CASE("log1mexp across both branches") {
    const double table[][2] = {
        {-1e-18, -41.446531673892822},
        {-1e-8, -18.420680748952365},
        {-0.5, -0.93275212956718857},
        {-5.0, -0.0067607494494885578},
        {-40.0, -4.2483542552915890e-18},
    };
    for (const auto& row : table)
        CHECK(log1mexp(row[0]) == doctest::Approx(row[1]).epsilon(1e-12));
    CHECK(log1mexp(0.0) == kNegInf);
}

TEST_CASE("log_sum_exp matches pairwise accumulation") {
    const std::vector<double> x = {-3.0, -1.0, -800.0, 2.0, 2.0};
    double acc = kNegInf;
    for (double v : x) acc = log_add(acc, v);
    CHECK(log_sum_exp(x) == doctest::Approx(acc).epsilon(1e-14));

    const std::vector<double> all_inf = {kNegInf, kNegInf};
    CHECK(log_sum_exp(all_inf) == kNegInf);
    const std::vector<double> big = {1e300, 1e300};
    CHECK(log_sum_exp(big) == doctest::Approx(1e300));
    const std::vector<double> shifted = {700.0, 700.0};
    CHECK(log_sum_exp(shifted) == doctest::Approx(700.0 + std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("erfcx ties out with the normal cdf in the far tail") {
    // Phi(-z) = erfcx(z / sqrt 2) exp(-z^2 / 2) / 2 for z > 0
    for (double z : {5.0, 15.0, 33.0}) {
        const double log_tail = std::log(0.5 * erfcx_pos(z * M_SQRT1_2)) - 0.5 * z * z;
        CHECK(log_tail == doctest::Approx(norm_log_cdf(-z)).epsilon(1e-12));
    }
}

}  // TEST_SUITE
