#include "spikerace/rng.hpp"

#include <cmath>

#include "spikerace/math.hpp"

namespace spikerace {

double Rng::gamma(double shape, double rate) {
    if (shape < 1.0) {
        const double u = 1.0 - uniform();
        return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
}

int Rng::pick_log_weights(std::span<const double> logw) {
    const double norm = log_sum_exp(logw);
    const double u = uniform();
    double acc = 0.0;
    int last = 0;
    for (int i = 0; i < static_cast<int>(logw.size()); ++i) {
        if (logw[i] == kNegInf) continue;
        acc += std::exp(logw[i] - norm);
        last = i;
        if (u < acc) return i;
    }
    return last;  // guard against accumulated rounding
}

}  // namespace spikerace
