#include "spikerace/math.hpp"

#include <algorithm>

namespace spikerace {

double log_sum_exp(std::span<const double> x) {
    double m = kNegInf;
    for (double v : x) m = std::max(m, v);
    if (m == kNegInf) return kNegInf;
    double s = 0.0;
    for (double v : x) s += std::exp(v - m);
    return m + std::log(s);
}

double erfcx_pos(double w) {
    if (w < 20.0) {
        // erfc does not underflow until w ~ 26.6, and exp(w^2) stays finite there
        return std::exp(w * w) * std::erfc(w);
    }
    // asymptotic series 1/(w sqrt(pi)) * sum (-1)^k (2k-1)!! / (2 w^2)^k
    const double q = 1.0 / (2.0 * w * w);
    double term = 1.0, sum = 1.0;
    for (int k = 1; k <= 8; ++k) {
        term *= -(2 * k - 1) * q;
        sum += term;
    }
    return sum / (w * 1.7724538509055160272981674833);  // sqrt(pi)
}

double norm_log_cdf(double z) {
    if (z > -1.0) return std::log(norm_cdf(z));
    const double w = -z * M_SQRT1_2;
    return std::log(0.5 * erfcx_pos(w)) - w * w;
}

}  // namespace spikerace
