#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "spikerace/mcmc.hpp"
#include "spikerace/splines.hpp"

namespace spikerace {

struct PredictiveConfig {
    int n_rep = 2000;
    // credit each interval to the label before it instead of the one ending it
    bool attribute_to_previous = false;
    int workers = 1;
};

/**
 * Per-replicate scientific quantities of simulated dual-stimulus trials:
 * label switches, seconds attributed to stimulus A, and spike count. A
 * spikeless replicate contributes zero switches and hands the whole window
 * to the winner of one extra simulated race.
 */
struct PredictiveSummary {
    std::vector<int> switches;
    std::vector<double> time_a;
    std::vector<int> counts;
    int empty_replicates = 0;
    double mean_switches = 0.0;
    double mean_time_a = 0.0;
    double mean_count = 0.0;
};

/** Simulates one dual-stimulus trial per (evenly thinned or cycled) posterior draw. */
PredictiveSummary predictive_draws(const PosteriorDraws& draws, const BasisConfig& basis,
                                   double window_end, const PredictiveConfig& cfg,
                                   std::uint64_t seed);

/** Switch count and attributed stimulus-A time of one labeled train. */
int count_switches(const std::vector<Label>& labels);
double time_encoding_a(const std::vector<double>& times, const std::vector<Label>& labels,
                       double window_end, bool attribute_to_previous);

/** Fraction of stored label draws assigning each spike of one dual-stimulus trial to A. */
Eigen::VectorXd label_frequencies(const PosteriorDraws& draws, int trial);

/** Predictive mean spike count of one tagged renewal component. */
double predictive_mean_count(const PosteriorDraws& draws, const std::string& tag,
                             const BasisConfig& basis, double window_end, int n_rep,
                             std::uint64_t seed);

/** Squared error relative to the squared magnitude of the truth (which must be nonzero). */
double rse(const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth);
double rse(double estimate, double truth);

/** Order-statistic L1 distance between equally sized sample sets, relative to the second. */
double rwd(std::vector<double> x, std::vector<double> y);

/** Input current over an evenly spaced grid spanning the basis window, endpoints included. */
Eigen::VectorXd rate_curve(const StimulusParams& p, const BasisConfig& cfg, int points);

struct CoverageRow {
    std::string name;
    int covered = 0;           // datasets whose interval (or enough of the curve) holds the truth
    double mean_rel_width = 0.0;
    double pointwise = 0.0;    // scalars: covered fraction; curves: mean per-grid-point coverage
};

struct CoverageReport {
    std::vector<CoverageRow> rows;
    int n_datasets = 0;
};

/**
 * Frequentist check of central 95% credible intervals across repeated fits of
 * the competition model. Input current curves are compared pointwise on the
 * grid; a dataset counts as covering a curve when at least curve_fraction of
 * its grid points land inside the pointwise intervals.
 */
CoverageReport coverage_report(const std::vector<PosteriorDraws>& fits,
                               const std::vector<CompetitionParams>& truths,
                               const BasisConfig& basis, int grid_points = 1000,
                               double curve_fraction = 0.5);

}  // namespace spikerace
