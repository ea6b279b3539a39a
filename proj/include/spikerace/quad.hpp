#pragma once

#include <functional>
#include <vector>

namespace spikerace {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    bool converged = false;
};

/** Adaptive Gauss-Kronrod 15(7) on a finite interval. */
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double abs_tol = 1e-10, int max_segments = 2000);

/**
 * Integral over (0, inf). Splits at the given interior breakpoints, then maps
 * the tail beyond the last breakpoint through u -> tail_start + u/(1-u).
 */
QuadResult integrate_positive_axis(const std::function<double(double)>& f,
                                   std::vector<double> breakpoints, double tail_start,
                                   double abs_tol = 1e-10);

}  // namespace spikerace
