#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "spikerace/data.hpp"
#include "spikerace/mcmc.hpp"
#include "spikerace/posteriorpred.hpp"

namespace spikerace {

/**
 * Widely applicable information criterion over per-train marginal log
 * likelihoods: lppd sums each train's log mean posterior likelihood, p_eff
 * sums the posterior variance of each train's log likelihood.
 */
struct WaicResult {
    double lppd = 0.0;
    double p_eff = 0.0;
    double waic = 0.0;
    Eigen::VectorXd train_lppd;
    Eigen::VectorXd train_var;
};

/** Computes the criterion from a draws-by-trains log-likelihood matrix (needs >= 2 draws). */
WaicResult waic(const Eigen::MatrixXd& train_loglik);

enum class Category { Iigpp, WtaPreferred, WtaNonPreferred, SlowJuggling, FastJuggling };

std::string category_name(Category c);

struct WaicTable {
    WaicResult iigpp, wta_a, wta_b, competition;
};

struct Classification {
    Model best = Model::Iigpp;
    Category category = Category::Iigpp;
    bool tie = false;
};

/**
 * Picks the smallest criterion value; exact ties fall to the simpler model in
 * the order iigpp, wta_a, wta_b, competition and raise the tie flag. A winning
 * winner-take-all model is Preferred when its adopted condition has the higher
 * predictive spike count (ties count as preferred); a winning competition
 * model splits into slow and fast switching at mean_switches = 0.5.
 */
Classification classify(const WaicTable& table, double mean_switches, double rate_a,
                        double rate_b);

struct PValueConfig {
    int max_draws = 500;     // posterior draws kept after thinning
    int moment_reps = 1000;  // simulations per draw for the count moments
    int workers = 1;
};

/**
 * Posterior predictive discrepancy p-values for one renewal-process fit.
 * Small p_avg_ll flags observed trains the fitted process finds unusually
 * unlikely; small p_mean_count or p_var_count flags first or second count
 * moments far from the predictive ones.
 */
struct PValueReport {
    double p_avg_ll = 1.0;
    double p_mean_count = 1.0;
    double p_var_count = 1.0;
    int draws_used = 0;

    bool adequate(double alpha) const {
        return p_avg_ll >= alpha && p_mean_count >= alpha && p_var_count >= alpha;
    }
};

PValueReport posterior_p_values(const PosteriorDraws& draws, const std::string& tag,
                                const std::vector<SpikeTrain>& trains, const BasisConfig& basis,
                                const PValueConfig& cfg, std::uint64_t seed);

/**
 * Do the two single-stimulus conditions actually differ? Compares the summed
 * lppd of per-condition fits against one fit sharing a single parameter set,
 * passing when the separate fits beat the shared one by more than log 3.
 */
struct Distinguishability {
    double lppd_separate = 0.0;
    double lppd_joint = 0.0;
    bool pass = false;
};

Distinguishability distinguishability_screen(const std::vector<SpikeTrain>& a_trains,
                                             const std::vector<SpikeTrain>& b_trains,
                                             const BasisConfig& basis, const PriorConfig& priors,
                                             const SamplerConfig& cfg, std::uint64_t seed);

struct ScreenConfig {
    int min_trials = 5;
    double alpha = 0.05;
    PValueConfig pvalue;
};

/**
 * Inclusion screen applied in order: enough trials per condition, adequate
 * single-condition fits, distinguishable A and B. Later stages are skipped
 * (and left at their defaults) once an earlier one fails.
 */
struct ScreenReport {
    int n_a = 0, n_b = 0, n_ab = 0;
    bool enough_trials = false;
    bool pvalues_run = false;
    PValueReport a_pvalues, b_pvalues;
    bool a_adequate = false, b_adequate = false;
    bool distinguish_run = false;
    Distinguishability distinct;
    bool pass = false;
};

ScreenReport screen_triplet(const Triplet& data, const BasisConfig& basis,
                            const PriorConfig& priors, const SamplerConfig& cfg,
                            const ScreenConfig& scfg, std::uint64_t seed);

/** Everything the four-way comparison produces, fits included. */
struct CompareOutcome {
    PosteriorDraws iigpp, wta_a, wta_b, competition;
    WaicTable table;
    PredictiveSummary predictive;
    double rate_a = 0.0;
    double rate_b = 0.0;
    Classification result;
};

/**
 * Fits all four candidate models to the triplet, scores them, draws posterior
 * predictive replicates from the competition fit (for the switching rate) and
 * predictive spike counts from the single-process fit (for the preferred
 * condition), then classifies. Substreams are derived from the one seed.
 */
CompareOutcome compare_models(const Triplet& data, const BasisConfig& basis,
                              const PriorConfig& priors, const SamplerConfig& cfg,
                              const PredictiveConfig& pred, std::uint64_t seed);

}  // namespace spikerace
