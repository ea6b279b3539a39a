#pragma once

#include <Eigen/Dense>
#include <vector>

namespace spikerace {

/**
 * Clamped B-spline basis on [t_lo, t_hi] used for the time-varying gain on the
 * input currents. The first basis function is dropped so that the retained
 * functions vanish at t_lo and the gain there is carried by the input alone;
 * the basis therefore has degree + interior.size() members.
 */
struct BasisConfig {
    int degree = 3;
    double t_lo = 0.0;
    double t_hi = 1.0;
    std::vector<double> interior = {0.25, 0.5, 0.75};

    int dim() const { return degree + static_cast<int>(interior.size()); }
};

/** Default basis for a recording window: cubic, interior knots at the quartiles. */
BasisConfig default_basis(double window_end);

/** Throws std::invalid_argument when knots are out of order or out of range. */
void validate_basis(const BasisConfig& cfg);

/**
 * Evaluates the retained basis functions at t. The evaluation is right-closed:
 * t == t_hi uses the last span. Throws std::domain_error outside [t_lo, t_hi].
 */
Eigen::VectorXd eval_basis(const BasisConfig& cfg, double t);

/** Rows are eval_basis at each point. */
Eigen::MatrixXd eval_basis_matrix(const BasisConfig& cfg, const std::vector<double>& t);

}  // namespace spikerace
