#pragma once

#include <Eigen/Dense>
#include <optional>

#include "spikerace/data.hpp"
#include "spikerace/splines.hpp"

namespace spikerace {

/**
 * One accumulator: drift `input`, diffusion `noise`, and basis coefficients
 * modulating the drift over the trial. The effective rate at time s is
 * input * exp(coef . basis(s)); the threshold-minus-reset gap is fixed at 1,
 * so an inter-event interval at frozen rate r has an inverse Gaussian law
 * with mean 1/r and shape 1/noise^2.
 */
struct StimulusParams {
    double input = 1.0;
    double noise = 1.0;
    Eigen::VectorXd coef;  // empty means no modulation
};

struct CompetitionParams {
    StimulusParams a;
    StimulusParams b;
    double delay = 0.0;  // the loser of a round starts the next race this much later
};

double input_current(const StimulusParams& p, const BasisConfig& cfg, double s);

// Scalar first-passage law at frozen rate r and noise sigma.
// log_ig_pdf is -inf for x <= 0; log_ig_sf is 0 there (nothing has happened yet).
double log_ig_pdf(double rate, double noise, double x);
double log_ig_sf(double rate, double noise, double x);
double log_ig_pdf_d(double rate, double noise, double x, double& d_rate, double& d_noise);
double log_ig_sf_d(double rate, double noise, double x, double& d_rate, double& d_noise);

// Same laws with the rate tied to a stimulus at freeze time s_prev.
double log_ig_pdf(const StimulusParams& p, const BasisConfig& cfg, double x, double s_prev);
double log_ig_sf(const StimulusParams& p, const BasisConfig& cfg, double x, double s_prev);

// Joint density of (interval, label) for one step of the race, on log scale.
// "first" has no delay; "step" delays the pdf when the label switches and the
// survival when it repeats; "last" adds censoring of both accumulators at the
// window end, with rates frozen at the final spike.
double log_joint_first(const CompetitionParams& p, const BasisConfig& cfg, double x, Label l);
double log_joint_step(const CompetitionParams& p, const BasisConfig& cfg, double x, Label l,
                      Label prev, double s_prev);
double log_joint_last(const CompetitionParams& p, const BasisConfig& cfg, double x, Label l,
                      std::optional<Label> prev, double s_prev, double window_end);

/** Probability the next spike carries label l, integrating the step density over x. */
double race_win_probability(const CompetitionParams& p, const BasisConfig& cfg, Label l,
                            std::optional<Label> prev, double s_prev);

namespace detail {

/** Rates and noises of both accumulators at one freeze time. */
struct RacePoint {
    double ra, sa, rb, sb;
};

double log_joint_step_raw(const RacePoint& rp, double delay, double x, Label l,
                          std::optional<Label> prev);

/** Accumulates d(log density)/d(ra, sa, rb, sb) on top of the value. */
double log_joint_step_raw_d(const RacePoint& rp, double delay, double x, Label l,
                            std::optional<Label> prev, double g[4]);

double log_censor_raw(const RacePoint& rp, double delay, double tail, Label last_label);
double log_censor_raw_d(const RacePoint& rp, double delay, double tail, Label last_label,
                        double g[4]);

}  // namespace detail
}  // namespace spikerace
