#pragma once

#include <cmath>
#include <limits>
#include <span>

namespace spikerace {

inline constexpr double kLogSqrt2Pi = 0.9189385332046727417803297364;
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/** log(exp(a) + exp(b)) without overflow; handles -inf arguments. */
inline double log_add(double a, double b) {
    if (a < b) std::swap(a, b);
    if (b == kNegInf) return a;
    return a + std::log1p(std::exp(b - a));
}

double log_sum_exp(std::span<const double> x);

/** log(1 - exp(d)) for d <= 0. Returns -inf at d == 0. */
inline double log1mexp(double d) {
    constexpr double ln2 = 0.6931471805599453094172321215;
    if (d >= 0.0) return d == 0.0 ? kNegInf : std::numeric_limits<double>::quiet_NaN();
    return d > -ln2 ? std::log(-std::expm1(d)) : std::log1p(-std::exp(d));
}

/** Scaled complementary error function exp(w^2) erfc(w) for w >= 0. */
double erfcx_pos(double w);

inline double norm_cdf(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }

/** log Phi(z), accurate far into the lower tail. */
double norm_log_cdf(double z);

inline double norm_log_pdf(double z) { return -0.5 * z * z - kLogSqrt2Pi; }

}  // namespace spikerace
