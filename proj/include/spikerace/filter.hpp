#pragma once

#include <Eigen/Dense>
#include <vector>

#include "spikerace/data.hpp"
#include "spikerace/igdist.hpp"
#include "spikerace/rng.hpp"
#include "spikerace/splines.hpp"

namespace spikerace {

/**
 * Per-train quantities that never change across parameter updates: intervals,
 * the basis row at each interval's freeze time (the previous spike), and the
 * censoring geometry at the window end.
 */
struct TrainCache {
    std::vector<double> isi;      // x_j = s_j - s_{j-1}, s_0 = 0
    std::vector<double> prev_s;   // s_{j-1}
    Eigen::MatrixXd basis;        // n rows, basis at prev_s[j]
    Eigen::VectorXd basis_last;   // basis at the final spike
    double tail = 0.0;            // window_end - s_n
    double window_end = 1.0;

    int n() const { return static_cast<int>(isi.size()); }
};

TrainCache make_cache(const SpikeTrain& train, const BasisConfig& cfg);

/** Both accumulators' rates at every freeze time, for one parameter setting. */
struct RateTable {
    Eigen::VectorXd ra, rb;        // per spike, frozen at prev_s
    double ra_last = 0.0, rb_last = 0.0;  // frozen at the final spike
};

RateTable make_rates(const CompetitionParams& p, const TrainCache& cache);

/**
 * Forward pass over one train. log_filtered row j holds
 * log P(label_j | intervals 1..j); the final row conditions on the censored
 * tail as well. loglik is the accumulated log normalizing constants, i.e.
 * the train's marginal log likelihood with labels summed out.
 */
struct FilterState {
    Eigen::MatrixX2d log_filtered;
    Eigen::VectorXd log_norm;
    double loglik = 0.0;
};

FilterState forward_filter(const CompetitionParams& p, const BasisConfig& cfg,
                           const SpikeTrain& train);
FilterState forward_filter(const CompetitionParams& p, const TrainCache& cache,
                           const RateTable& rates);

/** Marginal log likelihood of a train; empty trains reduce to the censoring terms. */
double marginal_loglik(const CompetitionParams& p, const BasisConfig& cfg,
                       const SpikeTrain& train);

/**
 * Draws one label path from the exact conditional given the train, walking the
 * filter output backwards. Throws std::runtime_error naming the spike index if
 * every continuation has zero probability (possible only with an inconsistent
 * FilterState).
 */
std::vector<Label> backward_sample(const CompetitionParams& p, const TrainCache& cache,
                                   const RateTable& rates, const FilterState& fs, Rng& rng);

/** Log density of one full label path (the filter's unnormalized target). */
double labeled_loglik(const CompetitionParams& p, const TrainCache& cache, const RateTable& rates,
                      const std::vector<Label>& labels);

/** Log likelihood of one train under a lone renewal process, censored tail included. */
double renewal_loglik(const StimulusParams& p, const TrainCache& cache);
double renewal_loglik(const StimulusParams& p, const BasisConfig& cfg, const SpikeTrain& train);

}  // namespace spikerace
