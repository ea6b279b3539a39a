#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "spikerace/data.hpp"
#include "spikerace/filter.hpp"
#include "spikerace/igdist.hpp"
#include "spikerace/rng.hpp"
#include "spikerace/splines.hpp"

namespace spikerace {

enum class Model { Competition, Iigpp, WtaA, WtaB };

std::string model_name(Model m);
Model model_from_name(const std::string& name);

/**
 * Weakly informative priors. The drift and noise parameters get either an
 * inverse Gaussian (mean, shape) or an inverse gamma (shape, scale) prior,
 * selected by `family`; the head-start delay gets a Gamma(shape, rate); the
 * basis coefficients are iid normal with a half-t prior on their scale,
 * sampled through the usual inverse-gamma expansion.
 */
struct PriorConfig {
    enum class Family { InverseGaussian, InverseGamma };
    Family family = Family::InverseGaussian;
    double input_a = 40.0, input_b = 1.0;
    double noise_a = 6.324555320336759, noise_b = 1.0;
    double delay_shape = 0.01, delay_rate = 0.1;
    double coef_df = 0.25, coef_scale = 2.0;
};

struct SamplerConfig {
    int warmup1 = 1000;   // step-size search, identity mass
    int warmup2 = 2500;   // adds mass-matrix and delay-proposal adaptation
    int samples = 5000;
    int leapfrog = 5;             // steps drawn uniformly from 1..2*leapfrog
    double init_step = 0.02;
    double target_accept = 0.65;
    double adapt_rate = 0.05;
    int adapt_interval = 200;
    double mass_reg = 0.001;
    double divergence = 1000.0;   // |energy error| that voids a trajectory
    int ensemble_size = 5;        // fresh delay candidates per sweep
    double mix_gamma_weight = 0.3;
    double proposal_var_floor = 1e-6;
    double init_delay = 0.01;
    int workers = 1;
};

/** Step size and mass for one HMC block; cov is the inverse mass. */
struct BlockTuning {
    double log_step = 0.0;
    Eigen::MatrixXd cov;
    Eigen::LLT<Eigen::MatrixXd> chol;

    void set_cov(const Eigen::MatrixXd& c);
    static BlockTuning identity(int dim, double step);
};

struct HmcStats {
    double accept_prob = 0.0;
    bool accepted = false;
    bool divergent = false;
};

/**
 * One jittered-trajectory HMC update of q against an unnormalized log target.
 * target(q, grad) must fill grad and return the log density.
 */
HmcStats hmc_update(Eigen::VectorXd& q,
                    const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>& target,
                    const BlockTuning& tune, int leapfrog, double divergence, Rng& rng);

/** Robbins-Monro drift of the log step size toward the target acceptance rate. */
void adapt_step_size(BlockTuning& tune, double accept_prob, double target, double rate);

/** Inverse mass from a window of draws: sample covariance plus reg on the diagonal. */
void adapt_mass(BlockTuning& tune, const std::vector<Eigen::VectorXd>& window, double reg);

/** Lognormal component of the delay proposal, moment-matched during warmup. */
struct DelayProposal {
    double mean_log = -4.6;
    double var_log = 1.0;
};

/** Scale update for one coefficient vector under the half-t expansion. */
void gibbs_coef_scale(const Eigen::VectorXd& coef, double& tau, double& aux,
                      const PriorConfig& priors, Rng& rng);

/** Full parameter state of the competition model chain. */
struct CompetitionState {
    CompetitionParams params;
    double tau_a = 1.0, tau_b = 1.0;
    double aux_a = 1.0, aux_b = 1.0;
    std::vector<std::vector<Label>> labels;  // one path per ab trial
};

struct PosteriorDraws {
    Model model = Model::Competition;
    std::vector<std::string> names;
    Eigen::MatrixXd values;        // draws x names
    Eigen::MatrixXd train_loglik;  // draws x (n_a + n_b + n_ab), marginal per train
    std::vector<std::vector<std::vector<Label>>> label_draws;  // competition only
    double accept_drift = 0.0, accept_coef = 0.0;              // kept-phase means
    int divergences = 0;
    std::uint64_t seed = 0;

    int n_draws() const { return static_cast<int>(values.rows()); }
    Eigen::VectorXd column(const std::string& name) const;
    bool has_column(const std::string& name) const;
};

/**
 * Runs the requested model on a triplet. The competition model alternates
 * HMC on (drifts, noises), HMC on the basis coefficients, conjugate scale
 * updates, and the joint delay/label refresh. The other models decompose into
 * independent single-process fits (the winner-take-all variants pool the
 * dual-stimulus trials with the winning condition).
 */
PosteriorDraws run_chain(const Triplet& data, Model model, const BasisConfig& basis,
                         const PriorConfig& priors, const SamplerConfig& cfg, std::uint64_t seed);

/**
 * Posterior for a single renewal process on one set of trains. Columns are
 * named with the given tag; train_loglik follows the input train order.
 */
PosteriorDraws fit_component(const std::vector<SpikeTrain>& trains, const BasisConfig& basis,
                             const PriorConfig& priors, const SamplerConfig& cfg,
                             std::uint64_t seed, const std::string& tag = "A");

/** Reassembles the tagged component's parameters from one stored draw row. */
StimulusParams stimulus_draw(const PosteriorDraws& draws, int row, const std::string& tag);

/** Reassembles the full competition parameter set from one stored draw row. */
CompetitionParams competition_draw(const PosteriorDraws& draws, int row);

/**
 * The competition chain's machinery, exposed so that calibration tests can
 * drive single sweeps against resimulated data.
 */
class CompetitionSampler {
  public:
    CompetitionSampler(const Triplet& data, const BasisConfig& basis, const PriorConfig& priors,
                       const SamplerConfig& cfg);

    void set_data(const Triplet& data);

    CompetitionState draw_prior_state(Rng& rng) const;
    CompetitionState init_state(Rng& rng) const;

    struct SweepInfo {
        HmcStats drift, coef;
        Eigen::VectorXd ab_train_loglik;  // marginal, at the sweep's final state
        int chosen_candidate = 0;
    };

    /** One full sweep at the current tuning. */
    SweepInfo step(CompetitionState& s, Rng& rng);

    /** Sweep plus the warmup adaptation appropriate for iteration `it`. */
    SweepInfo step_adapt(CompetitionState& s, Rng& rng, int it);

    /** Marginal log likelihood of every ab train at the state's parameters. */
    Eigen::VectorXd ab_marginals(const CompetitionState& s) const;

    /** Single-process likelihood of each single-stimulus train. */
    Eigen::VectorXd single_marginals(const CompetitionState& s) const;

    const BlockTuning& drift_tuning() const { return drift_; }
    const BlockTuning& coef_tuning() const { return coef_; }
    const DelayProposal& delay_proposal() const { return psi_; }
    BlockTuning& drift_tuning() { return drift_; }
    BlockTuning& coef_tuning() { return coef_; }
    DelayProposal& delay_proposal() { return psi_; }

    // Unnormalized log posteriors of the two HMC blocks at the state's labels
    // and delay, as functions of the block coordinates. Drift/noise block uses
    // log coordinates (log Ia, log Ib, log sa, log sb), coefficient block is
    // (coef_a; coef_b). grad may be null.
    double drift_noise_logpost(const CompetitionState& s, const Eigen::VectorXd& z,
                               Eigen::VectorXd* grad) const;
    double coef_logpost(const CompetitionState& s, const Eigen::VectorXd& z,
                        Eigen::VectorXd* grad) const;

    /** Joint delay/label refresh; updates the state in place. */
    SweepInfo ensemble_delay_labels(CompetitionState& s, Rng& rng);

  private:
    BasisConfig basis_;
    PriorConfig priors_;
    SamplerConfig cfg_;
    std::vector<TrainCache> a_, b_, ab_;
    BlockTuning drift_, coef_;
    DelayProposal psi_;
    std::vector<Eigen::VectorXd> drift_window_, coef_window_;
    std::vector<double> delay_window_;

    void apply_drift_z(CompetitionState& s, const Eigen::VectorXd& z) const;
    void apply_coef_z(CompetitionState& s, const Eigen::VectorXd& z) const;
};

}  // namespace spikerace
