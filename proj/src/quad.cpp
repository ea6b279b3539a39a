#include "spikerace/quad.hpp"

#include <algorithm>
#include <cmath>

namespace spikerace {
namespace {

// 15-point Kronrod rule with embedded 7-point Gauss rule (QUADPACK gk15)
constexpr double kXgk[8] = {0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
                            0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
                            0.2077849550078985, 0.0};
constexpr double kWgk[8] = {0.0229353220105292, 0.0630920926299785, 0.1047900103222502,
                            0.1406532597155259, 0.1690047266392679, 0.1903505780647854,
                            0.2044329400752989, 0.2094821410847278};
constexpr double kWg[4] = {0.1294849661688697, 0.2797053914892767, 0.3818300505051189,
                           0.4179591836734694};

struct Segment {
    double a, b, value, error;
};

Segment eval_segment(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double resk = kWgk[7] * f(c);
    double resg = kWg[3] * f(c);
    for (int i = 0; i < 7; ++i) {
        const double dx = h * kXgk[i];
        const double fsum = f(c - dx) + f(c + dx);
        resk += kWgk[i] * fsum;
        if (i % 2 == 1) resg += kWg[i / 2] * fsum;
    }
    return {a, b, resk * h, std::abs((resk - resg) * h)};
}

}  // namespace

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double abs_tol, int max_segments) {
    if (a >= b) return {0.0, 0.0, true};
    std::vector<Segment> segs{eval_segment(f, a, b)};
    for (;;) {
        double total = 0.0, err = 0.0;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < segs.size(); ++i) {
            total += segs[i].value;
            err += segs[i].error;
            if (segs[i].error > segs[worst].error) worst = i;
        }
        if (err <= abs_tol) return {total, err, true};
        if (static_cast<int>(segs.size()) >= max_segments) return {total, err, false};
        const Segment s = segs[worst];
        const double mid = 0.5 * (s.a + s.b);
        segs[worst] = eval_segment(f, s.a, mid);
        segs.push_back(eval_segment(f, mid, s.b));
    }
}

QuadResult integrate_positive_axis(const std::function<double(double)>& f,
                                   std::vector<double> breakpoints, double tail_start,
                                   double abs_tol) {
    breakpoints.push_back(tail_start);
    std::sort(breakpoints.begin(), breakpoints.end());
    breakpoints.erase(std::remove_if(breakpoints.begin(), breakpoints.end(),
                                     [&](double x) { return x <= 0.0 || x > tail_start; }),
                      breakpoints.end());
    breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());

    QuadResult out{0.0, 0.0, true};
    double lo = 0.0;
    const double piece_tol = abs_tol / (breakpoints.size() + 1);
    for (double hi : breakpoints) {
        const QuadResult r = integrate(f, lo, hi, piece_tol);
        out.value += r.value;
        out.error += r.error;
        out.converged = out.converged && r.converged;
        lo = hi;
    }
    const auto tail = [&](double u) {
        const double om = 1.0 - u;
        return f(tail_start + u / om) / (om * om);
    };
    const QuadResult r = integrate(tail, 0.0, 1.0, piece_tol);
    out.value += r.value;
    out.error += r.error;
    out.converged = out.converged && r.converged;
    return out;
}

}  // namespace spikerace
