#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "spikerace/data.hpp"
#include "spikerace/igdist.hpp"
#include "spikerace/rng.hpp"
#include "spikerace/splines.hpp"

namespace spikerace {

/** Renewal-style point process with the rate frozen at the previous spike. */
SpikeTrain simulate_iigpp(const StimulusParams& p, const BasisConfig& cfg, double window_end,
                          Rng& rng);

/**
 * Race of two accumulators. Each round both candidate intervals are drawn,
 * the previous round's loser gets its head start, and the earlier crossing
 * wins (ties to A). Returns the train and the per-spike winner labels.
 */
std::pair<SpikeTrain, std::vector<Label>> simulate_competition(const CompetitionParams& p,
                                                               const BasisConfig& cfg,
                                                               double window_end, Rng& rng);

/** Label chain that stays with probability p_stay; intervals from the labeled process. */
std::pair<SpikeTrain, std::vector<Label>> simulate_hmm(const StimulusParams& a,
                                                       const StimulusParams& b, double p_stay,
                                                       const BasisConfig& cfg, double window_end,
                                                       Rng& rng);

/** Scalar sampling recipe for one generator parameter. */
struct ScalarDist {
    enum class Kind { Point, TruncNormal, LogNormal, Beta } kind = Kind::Point;
    double a = 0.0;        // point value / mean / mean of log / first beta shape
    double b = 0.0;        // variance (TruncNormal, LogNormal) / second beta shape
    double lower = 0.0;    // truncation bound
    double p_zero = 0.0;   // probability of an exact zero instead of a draw

    static ScalarDist point(double v) { return {Kind::Point, v, 0.0, 0.0, 0.0}; }
    static ScalarDist trunc_normal(double mean, double var, double lower = 0.0) {
        return {Kind::TruncNormal, mean, var, lower, 0.0};
    }
    static ScalarDist log_normal(double mu, double var, double p_zero = 0.0) {
        return {Kind::LogNormal, mu, var, 0.0, p_zero};
    }
    static ScalarDist beta(double a, double b) { return {Kind::Beta, a, b, 0.0, 0.0}; }

    double draw(Rng& rng) const;
};

struct TripletSpec {
    enum class Generator { Competition, Iigpp, Wta, Hmm } generator = Generator::Competition;
    int n_a = 25, n_b = 25, n_ab = 25;
    double window_end = 1.0;

    ScalarDist input_a = ScalarDist::trunc_normal(40.0, 16.0);
    ScalarDist input_b = ScalarDist::trunc_normal(80.0, 16.0);
    ScalarDist noise_a = ScalarDist::trunc_normal(6.324555320336759, 4.0);
    ScalarDist noise_b = ScalarDist::trunc_normal(8.94427190999916, 4.0);
    ScalarDist delay = ScalarDist::log_normal(-2.5, 0.25, 0.2);
    ScalarDist input_ab = ScalarDist::trunc_normal(80.0, 64.0);   // iigpp generator
    ScalarDist noise_ab = ScalarDist::trunc_normal(7.745966692414834, 16.0);
    ScalarDist p_stay = ScalarDist::beta(10.0, 2.0);              // hmm generator
    double coef_var = 0.09;  // iid variance of each basis coefficient
};

/**
 * Named generator recipes: "competition", "iigpp", "hmm", "wta" reproduce the
 * moderate-spread designs; "competition-wide" uses the wide, floored design
 * used for recovery experiments.
 */
TripletSpec preset_spec(const std::string& name);

struct TripletTruth {
    TripletSpec::Generator generator;
    CompetitionParams comp;                 // a/b components always filled
    StimulusParams ab;                      // iigpp generator's third component
    double p_stay = 0.0;                    // hmm generator
    Label wta_winner = Label::A;            // wta generator
    std::vector<std::vector<Label>> ab_labels;  // competition and hmm generators
};

/**
 * Draws generator parameters from the spec, then simulates every trial on its
 * own substream keyed by (seed, condition, trial index), so results do not
 * depend on evaluation order.
 */
std::pair<Triplet, TripletTruth> simulate_triplet(const TripletSpec& spec, const BasisConfig& cfg,
                                                  std::uint64_t seed);

}  // namespace spikerace
