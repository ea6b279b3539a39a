#include "spikerace/splines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spikerace {

BasisConfig default_basis(double window_end) {
    BasisConfig cfg;
    cfg.t_hi = window_end;
    cfg.interior = {0.25 * window_end, 0.5 * window_end, 0.75 * window_end};
    return cfg;
}

void validate_basis(const BasisConfig& cfg) {
    if (cfg.degree < 1) throw std::invalid_argument("basis degree must be >= 1");
    if (!(cfg.t_lo < cfg.t_hi)) throw std::invalid_argument("basis window is empty");
    double prev = cfg.t_lo;
    for (double k : cfg.interior) {
        if (!(k > prev) || !(k < cfg.t_hi))
            throw std::invalid_argument("interior knots must be strictly increasing inside the window");
        prev = k;
    }
}

Eigen::VectorXd eval_basis(const BasisConfig& cfg, double t) {
    if (!(t >= cfg.t_lo) || !(t <= cfg.t_hi))
        throw std::domain_error("basis evaluated outside its window");

    const int p = cfg.degree;
    const int n_int = static_cast<int>(cfg.interior.size());
    const int n_full = p + 1 + n_int;

    std::vector<double> knots(n_full + p + 1);
    for (int i = 0; i <= p; ++i) knots[i] = cfg.t_lo;
    for (int i = 0; i < n_int; ++i) knots[p + 1 + i] = cfg.interior[i];
    for (int i = 0; i <= p; ++i) knots[n_full + i] = cfg.t_hi;

    // span k with knots[k] <= t < knots[k+1], last span when t == t_hi
    int k = n_full - 1;
    if (t < cfg.t_hi) {
        k = static_cast<int>(std::upper_bound(knots.begin() + p, knots.begin() + n_full, t) -
                             knots.begin()) - 1;
    }

    // de Boor triangle for the p+1 basis functions alive on the span
    std::vector<double> nv(p + 1);
    nv[0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double denom = knots[k + r + 1] - knots[k + r + 1 - j];
            const double temp = nv[r] / denom;
            nv[r] = saved + (knots[k + r + 1] - t) * temp;
            saved = (t - knots[k + r + 1 - j]) * temp;
        }
        nv[j] = saved;
    }

    Eigen::VectorXd out = Eigen::VectorXd::Zero(n_full - 1);
    for (int r = 0; r <= p; ++r) {
        const int idx = k - p + r;  // index in the full basis
        if (idx >= 1) out[idx - 1] = nv[r];
    }
    return out;
}

Eigen::MatrixXd eval_basis_matrix(const BasisConfig& cfg, const std::vector<double>& t) {
    Eigen::MatrixXd out(t.size(), cfg.dim());
    for (std::size_t i = 0; i < t.size(); ++i) out.row(i) = eval_basis(cfg, t[i]);
    return out;
}

}  // namespace spikerace
