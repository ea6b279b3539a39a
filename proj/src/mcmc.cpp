#include "spikerace/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "spikerace/math.hpp"
#include "spikerace/parallel.hpp"

namespace spikerace {

std::string model_name(Model m) {
    switch (m) {
        case Model::Competition: return "competition";
        case Model::Iigpp: return "iigpp";
        case Model::WtaA: return "wta_a";
        case Model::WtaB: return "wta_b";
    }
    return "competition";
}

Model model_from_name(const std::string& name) {
    if (name == "competition") return Model::Competition;
    if (name == "iigpp") return Model::Iigpp;
    if (name == "wta_a") return Model::WtaA;
    if (name == "wta_b") return Model::WtaB;
    throw std::invalid_argument("unknown model: " + name);
}

void BlockTuning::set_cov(const Eigen::MatrixXd& c) {
    cov = c;
    chol.compute(cov);
    if (chol.info() != Eigen::Success)
        throw std::runtime_error("inverse mass matrix is not positive definite");
}

BlockTuning BlockTuning::identity(int dim, double step) {
    BlockTuning t;
    t.log_step = std::log(step);
    t.set_cov(Eigen::MatrixXd::Identity(dim, dim));
    return t;
}

HmcStats hmc_update(Eigen::VectorXd& q,
                    const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>& target,
                    const BlockTuning& tune, int leapfrog, double divergence, Rng& rng) {
    HmcStats stats;
    const int dim = static_cast<int>(q.size());
    const double eps = std::exp(tune.log_step) * rng.uniform(0.9, 1.1);
    const int steps = 1 + static_cast<int>(rng.uniform() * (2 * leapfrog));

    Eigen::VectorXd z(dim);
    for (int i = 0; i < dim; ++i) z[i] = rng.normal();
    const Eigen::VectorXd p0 = tune.chol.matrixU().solve(z);  // momentum ~ N(0, cov^-1)

    Eigen::VectorXd grad(dim);
    const double val0 = target(q, grad);
    const double h0 = -val0 + 0.5 * p0.dot(tune.cov * p0);
    if (!std::isfinite(h0)) {
        stats.divergent = true;
        return stats;
    }

    Eigen::VectorXd qn = q, p = p0, g = grad;
    double val = val0;
    bool bad = false;
    for (int l = 0; l < steps; ++l) {
        p += 0.5 * eps * g;
        qn += eps * (tune.cov * p);
        val = target(qn, g);
        if (!std::isfinite(val) || !g.allFinite()) {
            bad = true;
            break;
        }
        p += 0.5 * eps * g;
    }
    const double h1 = bad ? std::numeric_limits<double>::infinity()
                          : -val + 0.5 * p.dot(tune.cov * p);
    if (!std::isfinite(h1) || std::abs(h1 - h0) > divergence) {
        stats.divergent = true;
        return stats;
    }
    stats.accept_prob = std::min(1.0, std::exp(h0 - h1));
    if (rng.uniform() < stats.accept_prob) {
        q = qn;
        stats.accepted = true;
    }
    return stats;
}

void adapt_step_size(BlockTuning& tune, double accept_prob, double target, double rate) {
    tune.log_step += rate * (accept_prob - target);
}

void adapt_mass(BlockTuning& tune, const std::vector<Eigen::VectorXd>& window, double reg) {
    if (window.size() < 2) return;
    const int dim = static_cast<int>(window.front().size());
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
    for (const auto& v : window) mean += v;
    mean /= static_cast<double>(window.size());
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
    for (const auto& v : window) {
        const Eigen::VectorXd d = v - mean;
        cov += d * d.transpose();
    }
    cov /= static_cast<double>(window.size() - 1);
    cov += reg * Eigen::MatrixXd::Identity(dim, dim);
    tune.set_cov(cov);
}

void gibbs_coef_scale(const Eigen::VectorXd& coef, double& tau, double& aux,
                      const PriorConfig& priors, Rng& rng) {
    const double nu = priors.coef_df;
    const double p = static_cast<double>(coef.size());
    tau = rng.inv_gamma(0.5 * (nu + p), nu / aux + 0.5 * coef.squaredNorm());
    aux = rng.inv_gamma(0.5 * (nu + 1.0),
                        nu / tau + 1.0 / (priors.coef_scale * priors.coef_scale));
}

namespace {

// ---------------------------------------------------------------------------
// priors

double log_prior_scale_d(double x, double a, double b, PriorConfig::Family fam, double& dx) {
    if (x <= 0.0) {
        dx = 0.0;
        return kNegInf;
    }
    if (fam == PriorConfig::Family::InverseGaussian) {
        const double z = x - a;
        dx = -1.5 / x - b / (2.0 * a * a) + b / (2.0 * x * x);
        return 0.5 * std::log(b) - kLogSqrt2Pi - 1.5 * std::log(x) - b * z * z / (2.0 * a * a * x);
    }
    dx = -(a + 1.0) / x + b / (x * x);
    return a * std::log(b) - std::lgamma(a) - (a + 1.0) * std::log(x) - b / x;
}

double log_gamma_pdf(double x, double shape, double rate) {
    if (x <= 0.0) return kNegInf;
    return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double log_lognormal_pdf(double x, double mu, double var) {
    if (x <= 0.0) return kNegInf;
    const double z = std::log(x) - mu;
    return -std::log(x) - 0.5 * std::log(2.0 * M_PI * var) - z * z / (2.0 * var);
}

// ---------------------------------------------------------------------------
// data terms

struct SingleGrad {
    double d_input = 0.0, d_noise = 0.0;
    Eigen::VectorXd d_coef;
};

// Product of interval densities plus the censored tail, one accumulator.
// Fills g completely when given.
double single_train_ll(const StimulusParams& p, const TrainCache& c, SingleGrad* g) {
    if (g) {
        g->d_input = g->d_noise = 0.0;
        g->d_coef = Eigen::VectorXd::Zero(p.coef.size());
    }
    const int n = c.n();
    Eigen::ArrayXd rates;
    if (n > 0) {
        rates = p.coef.size() == 0 ? Eigen::ArrayXd::Constant(n, p.input).eval()
                                   : (p.input * (c.basis * p.coef).array().exp()).eval();
    }
    const double r_last = p.coef.size() == 0
                              ? p.input
                              : p.input * std::exp(p.coef.dot(c.basis_last));
    double total = 0.0;
    double dr, dn;
    for (int j = 0; j < n; ++j) {
        total += log_ig_pdf_d(rates[j], p.noise, c.isi[j], dr, dn);
        if (g) {
            g->d_input += dr * rates[j] / p.input;
            g->d_noise += dn;
            if (p.coef.size() > 0) g->d_coef += dr * rates[j] * c.basis.row(j).transpose();
        }
    }
    total += log_ig_sf_d(r_last, p.noise, c.tail, dr, dn);
    if (g) {
        g->d_input += dr * r_last / p.input;
        g->d_noise += dn;
        if (p.coef.size() > 0) g->d_coef += dr * r_last * c.basis_last;
    }
    return total;
}

double single_train_ll(const StimulusParams& p, const TrainCache& c) {
    return single_train_ll(p, c, nullptr);
}

struct CompGrad {
    double d_input_a = 0.0, d_noise_a = 0.0, d_input_b = 0.0, d_noise_b = 0.0;
    Eigen::VectorXd d_coef_a, d_coef_b;
};

// Label-conditional likelihood of one dual-stimulus train. Fills g when given.
double comp_train_ll(const CompetitionParams& p, const TrainCache& c, const RateTable& rt,
                     const std::vector<Label>& labels, CompGrad* g) {
    const int n = c.n();
    const int dim = static_cast<int>(p.a.coef.size());
    if (g) {
        *g = CompGrad{};
        g->d_coef_a = Eigen::VectorXd::Zero(dim);
        g->d_coef_b = Eigen::VectorXd::Zero(dim);
    }
    double total = 0.0;
    // raw is d/d(ra, sa, rb, sb) at the rates frozen for one step or the tail;
    // chain it back to the inputs through r = input * exp(coef . basis)
    auto chain = [&](const double raw[4], double ra, double rb,
                     const Eigen::Ref<const Eigen::RowVectorXd>& row) {
        g->d_input_a += raw[0] * ra / p.a.input;
        g->d_noise_a += raw[1];
        g->d_input_b += raw[2] * rb / p.b.input;
        g->d_noise_b += raw[3];
        if (dim > 0) {
            g->d_coef_a += raw[0] * ra * row.transpose();
            g->d_coef_b += raw[2] * rb * row.transpose();
        }
    };
    if (n == 0) {
        double raw[4] = {0, 0, 0, 0};
        double dr, dn;
        total += log_ig_sf_d(rt.ra_last, p.a.noise, c.tail, dr, dn);
        raw[0] += dr;
        raw[1] += dn;
        total += log_ig_sf_d(rt.rb_last, p.b.noise, c.tail, dr, dn);
        raw[2] += dr;
        raw[3] += dn;
        if (g) chain(raw, rt.ra_last, rt.rb_last, c.basis_last.transpose());
        return total;
    }
    for (int j = 0; j < n; ++j) {
        const detail::RacePoint rp{rt.ra[j], p.a.noise, rt.rb[j], p.b.noise};
        const auto prev = j == 0 ? std::optional<Label>{} : std::optional<Label>{labels[j - 1]};
        if (g) {
            double raw[4] = {0, 0, 0, 0};
            total += detail::log_joint_step_raw_d(rp, p.delay, c.isi[j], labels[j], prev, raw);
            chain(raw, rt.ra[j], rt.rb[j], c.basis.row(j));
        } else {
            total += detail::log_joint_step_raw(rp, p.delay, c.isi[j], labels[j], prev);
        }
    }
    const detail::RacePoint rp{rt.ra_last, p.a.noise, rt.rb_last, p.b.noise};
    if (g) {
        double raw[4] = {0, 0, 0, 0};
        total += detail::log_censor_raw_d(rp, p.delay, c.tail, labels[n - 1], raw);
        chain(raw, rt.ra_last, rt.rb_last, c.basis_last.transpose());
    } else {
        total += detail::log_censor_raw(rp, p.delay, c.tail, labels[n - 1]);
    }
    return total;
}

double empty_or_filter_ll(const CompetitionParams& p, const TrainCache& c, const RateTable& rt,
                          FilterState* fs) {
    if (c.n() == 0) {
        if (fs) *fs = FilterState{};
        const double ll = log_ig_sf(rt.ra_last, p.a.noise, c.tail) +
                          log_ig_sf(rt.rb_last, p.b.noise, c.tail);
        if (fs) fs->loglik = ll;
        return ll;
    }
    FilterState local = forward_filter(p, c, rt);
    const double ll = local.loglik;
    if (fs) *fs = std::move(local);
    return ll;
}

}  // namespace

// ---------------------------------------------------------------------------
// competition sampler

CompetitionSampler::CompetitionSampler(const Triplet& data, const BasisConfig& basis,
                                       const PriorConfig& priors, const SamplerConfig& cfg)
    : basis_(basis), priors_(priors), cfg_(cfg) {
    drift_ = BlockTuning::identity(4, cfg.init_step);
    coef_ = BlockTuning::identity(2 * basis.dim(), cfg.init_step);
    set_data(data);
}

void CompetitionSampler::set_data(const Triplet& data) {
    auto build = [&](const std::vector<SpikeTrain>& trains) {
        std::vector<TrainCache> out;
        out.reserve(trains.size());
        for (const auto& t : trains) out.push_back(make_cache(t, basis_));
        return out;
    };
    a_ = build(data.a_trials);
    b_ = build(data.b_trials);
    ab_ = build(data.ab_trials);
}

CompetitionState CompetitionSampler::draw_prior_state(Rng& rng) const {
    CompetitionState s;
    const int dim = basis_.dim();
    auto draw_scale = [&](double a, double b) {
        return priors_.family == PriorConfig::Family::InverseGaussian ? rng.inverse_gaussian(a, b)
                                                                      : rng.inv_gamma(a, b);
    };
    auto draw_component = [&](StimulusParams& p, double& tau, double& aux) {
        p.input = draw_scale(priors_.input_a, priors_.input_b);
        p.noise = draw_scale(priors_.noise_a, priors_.noise_b);
        aux = rng.inv_gamma(0.5, 1.0 / (priors_.coef_scale * priors_.coef_scale));
        tau = rng.inv_gamma(0.5 * priors_.coef_df, priors_.coef_df / aux);
        p.coef.resize(dim);
        const double sd = std::sqrt(tau);
        for (int k = 0; k < dim; ++k) p.coef[k] = rng.normal(0.0, sd);
    };
    draw_component(s.params.a, s.tau_a, s.aux_a);
    draw_component(s.params.b, s.tau_b, s.aux_b);
    s.params.delay = rng.gamma(priors_.delay_shape, priors_.delay_rate);
    s.labels.resize(ab_.size());
    return s;
}

CompetitionState CompetitionSampler::init_state(Rng& rng) const {
    (void)rng;
    CompetitionState s;
    const int dim = basis_.dim();
    auto mean_rate = [](const std::vector<TrainCache>& trains) {
        double time = 0.0;
        long count = 0;
        for (const auto& c : trains) {
            count += c.n();
            time += c.window_end - c.tail;  // time up to the last spike
        }
        if (count == 0 || time <= 0.0) {
            double window = trains.empty() ? 1.0 : trains.front().window_end;
            return 1.0 / window;
        }
        return static_cast<double>(count) / time;
    };
    s.params.a.input = mean_rate(a_);
    s.params.b.input = mean_rate(b_);
    s.params.a.noise = std::sqrt(s.params.a.input);
    s.params.b.noise = std::sqrt(s.params.b.input);
    s.params.a.coef = Eigen::VectorXd::Zero(dim);
    s.params.b.coef = Eigen::VectorXd::Zero(dim);
    s.params.delay = cfg_.init_delay;
    s.labels.resize(ab_.size());
    return s;
}

void CompetitionSampler::apply_drift_z(CompetitionState& s, const Eigen::VectorXd& z) const {
    s.params.a.input = std::exp(z[0]);
    s.params.b.input = std::exp(z[1]);
    s.params.a.noise = std::exp(z[2]);
    s.params.b.noise = std::exp(z[3]);
}

void CompetitionSampler::apply_coef_z(CompetitionState& s, const Eigen::VectorXd& z) const {
    const int dim = basis_.dim();
    s.params.a.coef = z.head(dim);
    s.params.b.coef = z.tail(dim);
}

double CompetitionSampler::drift_noise_logpost(const CompetitionState& s, const Eigen::VectorXd& z,
                                               Eigen::VectorXd* grad) const {
    CompetitionState local = s;
    apply_drift_z(local, z);
    const CompetitionParams& p = local.params;

    const int n_terms = static_cast<int>(a_.size() + b_.size() + ab_.size());
    std::vector<double> vals(n_terms);
    std::vector<Eigen::Vector4d> grads(grad ? n_terms : 0);
    parallel_for(n_terms, cfg_.workers, [&](int i) {
        double val;
        SingleGrad sg;
        CompGrad cg;
        if (i < static_cast<int>(a_.size())) {
            val = single_train_ll(p.a, a_[i], grad ? &sg : nullptr);
            if (grad) grads[i] << sg.d_input, 0.0, sg.d_noise, 0.0;
        } else if (i < static_cast<int>(a_.size() + b_.size())) {
            val = single_train_ll(p.b, b_[i - a_.size()], grad ? &sg : nullptr);
            if (grad) grads[i] << 0.0, sg.d_input, 0.0, sg.d_noise;
        } else {
            const int k = i - static_cast<int>(a_.size() + b_.size());
            val = comp_train_ll(p, ab_[k], make_rates(p, ab_[k]), s.labels[k], grad ? &cg : nullptr);
            if (grad) grads[i] << cg.d_input_a, cg.d_input_b, cg.d_noise_a, cg.d_noise_b;
        }
        vals[i] = val;
    });

    double total = 0.0;
    Eigen::Vector4d dnat = Eigen::Vector4d::Zero();  // d/d(Ia, Ib, sa, sb)
    for (int i = 0; i < n_terms; ++i) total += vals[i];
    if (grad)
        for (int i = 0; i < n_terms; ++i) dnat += grads[i];

    double dx;
    total += log_prior_scale_d(p.a.input, priors_.input_a, priors_.input_b, priors_.family, dx);
    dnat[0] += dx;
    total += log_prior_scale_d(p.b.input, priors_.input_a, priors_.input_b, priors_.family, dx);
    dnat[1] += dx;
    total += log_prior_scale_d(p.a.noise, priors_.noise_a, priors_.noise_b, priors_.family, dx);
    dnat[2] += dx;
    total += log_prior_scale_d(p.b.noise, priors_.noise_a, priors_.noise_b, priors_.family, dx);
    dnat[3] += dx;
    total += z.sum();  // log Jacobian of the log transform

    if (grad) {
        const Eigen::Vector4d nat(p.a.input, p.b.input, p.a.noise, p.b.noise);
        *grad = (dnat.array() * nat.array()).matrix() + Eigen::Vector4d::Ones();
    }
    return total;
}

double CompetitionSampler::coef_logpost(const CompetitionState& s, const Eigen::VectorXd& z,
                                        Eigen::VectorXd* grad) const {
    const int dim = basis_.dim();
    CompetitionState local = s;
    apply_coef_z(local, z);
    const CompetitionParams& p = local.params;

    const int n_terms = static_cast<int>(a_.size() + b_.size() + ab_.size());
    std::vector<double> vals(n_terms);
    std::vector<Eigen::VectorXd> grads(grad ? n_terms : 0);
    parallel_for(n_terms, cfg_.workers, [&](int i) {
        SingleGrad sg;
        CompGrad cg;
        double val;
        Eigen::VectorXd gi;
        if (i < static_cast<int>(a_.size())) {
            val = single_train_ll(p.a, a_[i], grad ? &sg : nullptr);
            if (grad) {
                gi.setZero(2 * dim);
                gi.head(dim) = sg.d_coef;
            }
        } else if (i < static_cast<int>(a_.size() + b_.size())) {
            val = single_train_ll(p.b, b_[i - a_.size()], grad ? &sg : nullptr);
            if (grad) {
                gi.setZero(2 * dim);
                gi.tail(dim) = sg.d_coef;
            }
        } else {
            const int k = i - static_cast<int>(a_.size() + b_.size());
            val = comp_train_ll(p, ab_[k], make_rates(p, ab_[k]), s.labels[k], grad ? &cg : nullptr);
            if (grad) {
                gi.resize(2 * dim);
                gi.head(dim) = cg.d_coef_a;
                gi.tail(dim) = cg.d_coef_b;
            }
        }
        vals[i] = val;
        if (grad) grads[i] = std::move(gi);
    });

    double total = 0.0;
    for (int i = 0; i < n_terms; ++i) total += vals[i];
    if (grad) {
        grad->setZero(2 * dim);
        for (int i = 0; i < n_terms; ++i) *grad += grads[i];
    }

    const Eigen::VectorXd ca = z.head(dim), cb = z.tail(dim);
    total += -0.5 * dim * std::log(2.0 * M_PI * s.tau_a) - ca.squaredNorm() / (2.0 * s.tau_a);
    total += -0.5 * dim * std::log(2.0 * M_PI * s.tau_b) - cb.squaredNorm() / (2.0 * s.tau_b);
    if (grad) {
        grad->head(dim) -= ca / s.tau_a;
        grad->tail(dim) -= cb / s.tau_b;
    }
    return total;
}

CompetitionSampler::SweepInfo CompetitionSampler::ensemble_delay_labels(CompetitionState& s,
                                                                        Rng& rng) {
    SweepInfo info;
    const int m = cfg_.ensemble_size;
    const int n_ab = static_cast<int>(ab_.size());
    std::vector<double> cand(m + 1);
    cand[0] = s.params.delay;
    for (int j = 1; j <= m; ++j)
        cand[j] = rng.bernoulli(cfg_.mix_gamma_weight)
                      ? rng.gamma(priors_.delay_shape, priors_.delay_rate)
                      : rng.lognormal(psi_.mean_log, std::sqrt(psi_.var_log));

    // rates do not involve the delay, so they are shared across candidates
    std::vector<RateTable> rates(n_ab);
    for (int i = 0; i < n_ab; ++i) rates[i] = make_rates(s.params, ab_[i]);

    std::vector<FilterState> fss((m + 1) * n_ab);
    std::vector<double> lls((m + 1) * n_ab);
    parallel_for((m + 1) * n_ab, cfg_.workers, [&](int idx) {
        const int j = idx / std::max(n_ab, 1);
        const int i = idx % std::max(n_ab, 1);
        CompetitionParams p = s.params;
        p.delay = cand[j];
        lls[idx] = empty_or_filter_ll(p, ab_[i], rates[i], &fss[idx]);
    });

    std::vector<double> logw(m + 1);
    for (int j = 0; j <= m; ++j) {
        double ll = 0.0;
        for (int i = 0; i < n_ab; ++i) ll += lls[j * n_ab + i];
        const double lq = log_add(
            std::log(cfg_.mix_gamma_weight) +
                log_gamma_pdf(cand[j], priors_.delay_shape, priors_.delay_rate),
            std::log(1.0 - cfg_.mix_gamma_weight) +
                log_lognormal_pdf(cand[j], psi_.mean_log, psi_.var_log));
        logw[j] = ll + log_gamma_pdf(cand[j], priors_.delay_shape, priors_.delay_rate) - lq;
    }
    const int chosen = rng.pick_log_weights(logw);
    s.params.delay = cand[chosen];
    info.chosen_candidate = chosen;

    info.ab_train_loglik.resize(n_ab);
    CompetitionParams p = s.params;
    for (int i = 0; i < n_ab; ++i) {
        const int idx = chosen * n_ab + i;
        info.ab_train_loglik[i] = lls[idx];
        s.labels[i] = ab_[i].n() == 0
                          ? std::vector<Label>{}
                          : backward_sample(p, ab_[i], rates[i], fss[idx], rng);
    }
    return info;
}

CompetitionSampler::SweepInfo CompetitionSampler::step(CompetitionState& s, Rng& rng) {
    Eigen::VectorXd z(4);
    z << std::log(s.params.a.input), std::log(s.params.b.input), std::log(s.params.a.noise),
        std::log(s.params.b.noise);
    const auto drift_target = [&](const Eigen::VectorXd& q, Eigen::VectorXd& g) {
        return drift_noise_logpost(s, q, &g);
    };
    const HmcStats drift_stats =
        hmc_update(z, drift_target, drift_, cfg_.leapfrog, cfg_.divergence, rng);
    apply_drift_z(s, z);

    const int dim = basis_.dim();
    Eigen::VectorXd zc(2 * dim);
    zc.head(dim) = s.params.a.coef;
    zc.tail(dim) = s.params.b.coef;
    const auto coef_target = [&](const Eigen::VectorXd& q, Eigen::VectorXd& g) {
        return coef_logpost(s, q, &g);
    };
    const HmcStats coef_stats =
        hmc_update(zc, coef_target, coef_, cfg_.leapfrog, cfg_.divergence, rng);
    apply_coef_z(s, zc);

    gibbs_coef_scale(s.params.a.coef, s.tau_a, s.aux_a, priors_, rng);
    gibbs_coef_scale(s.params.b.coef, s.tau_b, s.aux_b, priors_, rng);

    SweepInfo info = ensemble_delay_labels(s, rng);
    info.drift = drift_stats;
    info.coef = coef_stats;
    return info;
}

CompetitionSampler::SweepInfo CompetitionSampler::step_adapt(CompetitionState& s, Rng& rng,
                                                             int it) {
    SweepInfo info = step(s, rng);
    const int w1 = cfg_.warmup1, w2 = cfg_.warmup2;
    if (it < w1 + w2) {
        adapt_step_size(drift_, info.drift.accept_prob, cfg_.target_accept, cfg_.adapt_rate);
        adapt_step_size(coef_, info.coef.accept_prob, cfg_.target_accept, cfg_.adapt_rate);
    }
    if (it >= w1 && it < w1 + w2) {
        Eigen::VectorXd z(4);
        z << std::log(s.params.a.input), std::log(s.params.b.input), std::log(s.params.a.noise),
            std::log(s.params.b.noise);
        drift_window_.push_back(z);
        const int dim = basis_.dim();
        Eigen::VectorXd zc(2 * dim);
        zc.head(dim) = s.params.a.coef;
        zc.tail(dim) = s.params.b.coef;
        coef_window_.push_back(zc);
        delay_window_.push_back(s.params.delay);
        if ((it - w1 + 1) % cfg_.adapt_interval == 0) {
            adapt_mass(drift_, drift_window_, cfg_.mass_reg);
            adapt_mass(coef_, coef_window_, cfg_.mass_reg);
            std::vector<double> logs;
            for (double d : delay_window_)
                if (d > 0.0) logs.push_back(std::log(d));
            if (logs.size() >= 2) {
                double mean = 0.0;
                for (double v : logs) mean += v;
                mean /= static_cast<double>(logs.size());
                double var = 0.0;
                for (double v : logs) var += (v - mean) * (v - mean);
                var /= static_cast<double>(logs.size() - 1);
                psi_.mean_log = mean;
                psi_.var_log = std::max(var, cfg_.proposal_var_floor);
            }
            drift_window_.clear();
            coef_window_.clear();
            delay_window_.clear();
        }
    }
    return info;
}

Eigen::VectorXd CompetitionSampler::ab_marginals(const CompetitionState& s) const {
    Eigen::VectorXd out(ab_.size());
    for (std::size_t i = 0; i < ab_.size(); ++i) {
        const RateTable rt = make_rates(s.params, ab_[i]);
        out[i] = empty_or_filter_ll(s.params, ab_[i], rt, nullptr);
    }
    return out;
}

Eigen::VectorXd CompetitionSampler::single_marginals(const CompetitionState& s) const {
    Eigen::VectorXd out(a_.size() + b_.size());
    for (std::size_t i = 0; i < a_.size(); ++i) out[i] = single_train_ll(s.params.a, a_[i]);
    for (std::size_t i = 0; i < b_.size(); ++i)
        out[a_.size() + i] = single_train_ll(s.params.b, b_[i]);
    return out;
}

// ---------------------------------------------------------------------------
// single-component fits (shared by the renewal and winner-take-all models)

namespace {

struct SingleFit {
    Eigen::MatrixXd values;        // draws x (2 + dim + 1): input, noise, coef, tau
    Eigen::MatrixXd train_loglik;  // draws x n_trains
    double accept_drift = 0.0, accept_coef = 0.0;
    int divergences = 0;
};

struct SingleState {
    StimulusParams p;
    double tau = 1.0, aux = 1.0;
};

class SingleSampler {
  public:
    SingleSampler(std::vector<TrainCache> caches, const BasisConfig& basis,
                  const PriorConfig& priors, const SamplerConfig& cfg)
        : basis_(basis), priors_(priors), cfg_(cfg), caches_(std::move(caches)) {
        drift_ = BlockTuning::identity(2, cfg.init_step);
        coef_ = BlockTuning::identity(basis.dim(), cfg.init_step);
    }

    SingleState init_state() const {
        SingleState s;
        double time = 0.0;
        long count = 0;
        for (const auto& c : caches_) {
            count += c.n();
            time += c.window_end - c.tail;
        }
        s.p.input = (count == 0 || time <= 0.0)
                        ? 1.0 / (caches_.empty() ? 1.0 : caches_.front().window_end)
                        : static_cast<double>(count) / time;
        s.p.noise = std::sqrt(s.p.input);
        s.p.coef = Eigen::VectorXd::Zero(basis_.dim());
        return s;
    }

    double drift_logpost(const SingleState& s, const Eigen::VectorXd& z,
                         Eigen::VectorXd* grad) const {
        StimulusParams p = s.p;
        p.input = std::exp(z[0]);
        p.noise = std::exp(z[1]);
        double total = 0.0, d_input = 0.0, d_noise = 0.0;
        std::vector<double> vals(caches_.size());
        std::vector<Eigen::Vector2d> grads(grad ? caches_.size() : 0);
        parallel_for(static_cast<int>(caches_.size()), cfg_.workers, [&](int i) {
            SingleGrad sg;
            vals[i] = single_train_ll(p, caches_[i], grad ? &sg : nullptr);
            if (grad) grads[i] << sg.d_input, sg.d_noise;
        });
        for (std::size_t i = 0; i < caches_.size(); ++i) total += vals[i];
        if (grad)
            for (const auto& g : grads) {
                d_input += g[0];
                d_noise += g[1];
            }
        double dx;
        total += log_prior_scale_d(p.input, priors_.input_a, priors_.input_b, priors_.family, dx);
        d_input += dx;
        total += log_prior_scale_d(p.noise, priors_.noise_a, priors_.noise_b, priors_.family, dx);
        d_noise += dx;
        total += z.sum();
        if (grad) {
            grad->resize(2);
            (*grad)[0] = d_input * p.input + 1.0;
            (*grad)[1] = d_noise * p.noise + 1.0;
        }
        return total;
    }

    double coef_logpost(const SingleState& s, const Eigen::VectorXd& z,
                        Eigen::VectorXd* grad) const {
        const int dim = basis_.dim();
        StimulusParams p = s.p;
        p.coef = z;
        double total = 0.0;
        std::vector<double> vals(caches_.size());
        std::vector<Eigen::VectorXd> grads(grad ? caches_.size() : 0);
        parallel_for(static_cast<int>(caches_.size()), cfg_.workers, [&](int i) {
            SingleGrad sg;
            if (grad) sg.d_coef = Eigen::VectorXd::Zero(dim);
            vals[i] = single_train_ll(p, caches_[i], grad ? &sg : nullptr);
            if (grad) grads[i] = std::move(sg.d_coef);
        });
        if (grad) grad->setZero(dim);
        for (std::size_t i = 0; i < caches_.size(); ++i) {
            total += vals[i];
            if (grad) *grad += grads[i];
        }
        total += -0.5 * dim * std::log(2.0 * M_PI * s.tau) - z.squaredNorm() / (2.0 * s.tau);
        if (grad) *grad -= z / s.tau;
        return total;
    }

    SingleFit run(int n_keep, Rng& rng) {
        SingleState s = init_state();
        const int dim = basis_.dim();
        SingleFit out;
        out.values.resize(n_keep, 3 + dim);
        out.train_loglik.resize(n_keep, caches_.size());
        const int w1 = cfg_.warmup1, w2 = cfg_.warmup2;
        const int total = w1 + w2 + n_keep;
        long acc_d = 0, acc_c = 0;
        for (int it = 0; it < total; ++it) {
            Eigen::VectorXd z(2);
            z << std::log(s.p.input), std::log(s.p.noise);
            const HmcStats ds = hmc_update(
                z,
                [&](const Eigen::VectorXd& q, Eigen::VectorXd& g) {
                    return drift_logpost(s, q, &g);
                },
                drift_, cfg_.leapfrog, cfg_.divergence, rng);
            s.p.input = std::exp(z[0]);
            s.p.noise = std::exp(z[1]);

            Eigen::VectorXd zc = s.p.coef;
            const HmcStats cs = hmc_update(
                zc,
                [&](const Eigen::VectorXd& q, Eigen::VectorXd& g) {
                    return coef_logpost(s, q, &g);
                },
                coef_, cfg_.leapfrog, cfg_.divergence, rng);
            s.p.coef = zc;

            gibbs_coef_scale(s.p.coef, s.tau, s.aux, priors_, rng);

            if (it < w1 + w2) {
                adapt_step_size(drift_, ds.accept_prob, cfg_.target_accept, cfg_.adapt_rate);
                adapt_step_size(coef_, cs.accept_prob, cfg_.target_accept, cfg_.adapt_rate);
            }
            if (it >= w1 && it < w1 + w2) {
                Eigen::VectorXd zd(2);
                zd << std::log(s.p.input), std::log(s.p.noise);
                drift_window_.push_back(zd);
                coef_window_.push_back(s.p.coef);
                if ((it - w1 + 1) % cfg_.adapt_interval == 0) {
                    adapt_mass(drift_, drift_window_, cfg_.mass_reg);
                    adapt_mass(coef_, coef_window_, cfg_.mass_reg);
                    drift_window_.clear();
                    coef_window_.clear();
                }
            }
            if (it >= w1 + w2) {
                const int row = it - w1 - w2;
                out.values(row, 0) = s.p.input;
                out.values(row, 1) = s.p.noise;
                out.values.row(row).segment(2, dim) = s.p.coef.transpose();
                out.values(row, 2 + dim) = s.tau;
                for (std::size_t i = 0; i < caches_.size(); ++i)
                    out.train_loglik(row, i) = single_train_ll(s.p, caches_[i]);
                acc_d += ds.accepted ? 1 : 0;
                acc_c += cs.accepted ? 1 : 0;
                out.divergences += (ds.divergent || cs.divergent) ? 1 : 0;
            }
        }
        out.accept_drift = static_cast<double>(acc_d) / n_keep;
        out.accept_coef = static_cast<double>(acc_c) / n_keep;
        return out;
    }

  private:
    BasisConfig basis_;
    PriorConfig priors_;
    SamplerConfig cfg_;
    std::vector<TrainCache> caches_;
    BlockTuning drift_, coef_;
    std::vector<Eigen::VectorXd> drift_window_, coef_window_;
};

void append_component_names(std::vector<std::string>& names, const std::string& tag, int dim) {
    names.push_back("I_" + tag);
    names.push_back("sigma_" + tag);
    for (int k = 1; k <= dim; ++k) names.push_back("phi_" + tag + "_" + std::to_string(k));
    names.push_back("tau_" + tag);
}

}  // namespace

PosteriorDraws fit_component(const std::vector<SpikeTrain>& trains, const BasisConfig& basis,
                             const PriorConfig& priors, const SamplerConfig& cfg,
                             std::uint64_t seed, const std::string& tag) {
    std::vector<TrainCache> caches;
    caches.reserve(trains.size());
    for (const auto& t : trains) caches.push_back(make_cache(t, basis));
    SingleSampler sampler(std::move(caches), basis, priors, cfg);
    Rng rng(seed, {11});
    const SingleFit fit = sampler.run(cfg.samples, rng);

    PosteriorDraws out;
    out.model = Model::Iigpp;
    out.seed = seed;
    append_component_names(out.names, tag, basis.dim());
    out.values = fit.values;
    out.train_loglik = fit.train_loglik;
    out.accept_drift = fit.accept_drift;
    out.accept_coef = fit.accept_coef;
    out.divergences = fit.divergences;
    return out;
}

StimulusParams stimulus_draw(const PosteriorDraws& draws, int row, const std::string& tag) {
    StimulusParams p;
    p.input = draws.column("I_" + tag)[row];
    p.noise = draws.column("sigma_" + tag)[row];
    const std::string prefix = "phi_" + tag + "_";
    int dim = 0;
    while (draws.has_column(prefix + std::to_string(dim + 1))) ++dim;
    p.coef.resize(dim);
    for (int k = 0; k < dim; ++k) p.coef[k] = draws.column(prefix + std::to_string(k + 1))[row];
    return p;
}

CompetitionParams competition_draw(const PosteriorDraws& draws, int row) {
    CompetitionParams p;
    p.a = stimulus_draw(draws, row, "A");
    p.b = stimulus_draw(draws, row, "B");
    p.delay = draws.column("delta")[row];
    return p;
}

Eigen::VectorXd PosteriorDraws::column(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return values.col(i);
    throw std::invalid_argument("no draws column named " + name);
}

bool PosteriorDraws::has_column(const std::string& name) const {
    for (const auto& n : names)
        if (n == name) return true;
    return false;
}

PosteriorDraws run_chain(const Triplet& data, Model model, const BasisConfig& basis,
                         const PriorConfig& priors, const SamplerConfig& cfg,
                         std::uint64_t seed) {
    PosteriorDraws out;
    out.model = model;
    out.seed = seed;
    const int dim = basis.dim();
    const int n_a = static_cast<int>(data.a_trials.size());
    const int n_b = static_cast<int>(data.b_trials.size());
    const int n_ab = static_cast<int>(data.ab_trials.size());

    if (model == Model::Competition) {
        if (cfg.init_delay <= 0.0)
            throw std::invalid_argument("init_delay must be positive");
        CompetitionSampler sampler(data, basis, priors, cfg);
        Rng rng(seed, {1});
        CompetitionState s = sampler.init_state(rng);
        // initial label paths from the exact conditional at the starting point
        s.labels.resize(n_ab);
        for (int i = 0; i < n_ab; ++i) {
            const SpikeTrain& t = data.ab_trials[i];
            if (t.n() == 0) continue;
            const TrainCache cache = make_cache(t, basis);
            const RateTable rt = make_rates(s.params, cache);
            const FilterState fs = forward_filter(s.params, cache, rt);
            s.labels[i] = backward_sample(s.params, cache, rt, fs, rng);
        }

        const int total = cfg.warmup1 + cfg.warmup2 + cfg.samples;
        out.names = {"I_A", "I_B", "sigma_A", "sigma_B", "delta"};
        for (int k = 1; k <= dim; ++k) out.names.push_back("phi_A_" + std::to_string(k));
        for (int k = 1; k <= dim; ++k) out.names.push_back("phi_B_" + std::to_string(k));
        out.names.push_back("tau_A");
        out.names.push_back("tau_B");
        out.values.resize(cfg.samples, out.names.size());
        out.train_loglik.resize(cfg.samples, n_a + n_b + n_ab);
        out.label_draws.reserve(cfg.samples);

        long acc_d = 0, acc_c = 0;
        for (int it = 0; it < total; ++it) {
            const CompetitionSampler::SweepInfo info = sampler.step_adapt(s, rng, it);
            if (it < cfg.warmup1 + cfg.warmup2) continue;
            const int row = it - cfg.warmup1 - cfg.warmup2;
            Eigen::VectorXd v(out.names.size());
            v << s.params.a.input, s.params.b.input, s.params.a.noise, s.params.b.noise,
                s.params.delay, s.params.a.coef, s.params.b.coef, s.tau_a, s.tau_b;
            out.values.row(row) = v.transpose();
            out.train_loglik.row(row).head(n_a + n_b) =
                sampler.single_marginals(s).transpose();
            out.train_loglik.row(row).tail(n_ab) = info.ab_train_loglik.transpose();
            out.label_draws.push_back(s.labels);
            acc_d += info.drift.accepted ? 1 : 0;
            acc_c += info.coef.accepted ? 1 : 0;
            out.divergences += (info.drift.divergent || info.coef.divergent) ? 1 : 0;
        }
        out.accept_drift = static_cast<double>(acc_d) / cfg.samples;
        out.accept_coef = static_cast<double>(acc_c) / cfg.samples;
        return out;
    }

    // the remaining models decompose into independent single-process fits
    struct Part {
        PosteriorDraws fit;
        std::vector<int> global_train_index;
    };
    std::vector<Part> parts;
    auto global_index = [&](int cond, int i) {
        // 0 = a, 1 = b, 2 = ab in the triplet's train ordering
        return cond == 0 ? i : cond == 1 ? n_a + i : n_a + n_b + i;
    };
    auto indices = [&](std::initializer_list<int> conds) {
        std::vector<int> idx;
        for (int cond : conds) {
            const int n = cond == 0 ? n_a : cond == 1 ? n_b : n_ab;
            for (int i = 0; i < n; ++i) idx.push_back(global_index(cond, i));
        }
        return idx;
    };
    auto concat = [](const std::vector<SpikeTrain>& x, const std::vector<SpikeTrain>& y) {
        std::vector<SpikeTrain> out = x;
        out.insert(out.end(), y.begin(), y.end());
        return out;
    };

    if (model == Model::Iigpp) {
        parts.push_back({fit_component(data.a_trials, basis, priors, cfg, mix_seed(seed, {2}), "A"),
                         indices({0})});
        parts.push_back({fit_component(data.b_trials, basis, priors, cfg, mix_seed(seed, {3}), "B"),
                         indices({1})});
        parts.push_back(
            {fit_component(data.ab_trials, basis, priors, cfg, mix_seed(seed, {4}), "AB"),
             indices({2})});
    } else if (model == Model::WtaA) {
        parts.push_back({fit_component(concat(data.a_trials, data.ab_trials), basis, priors, cfg,
                                       mix_seed(seed, {2}), "A"),
                         indices({0, 2})});
        parts.push_back({fit_component(data.b_trials, basis, priors, cfg, mix_seed(seed, {3}), "B"),
                         indices({1})});
    } else {
        parts.push_back({fit_component(data.a_trials, basis, priors, cfg, mix_seed(seed, {2}), "A"),
                         indices({0})});
        parts.push_back({fit_component(concat(data.b_trials, data.ab_trials), basis, priors, cfg,
                                       mix_seed(seed, {3}), "B"),
                         indices({1, 2})});
    }

    out.train_loglik.resize(cfg.samples, n_a + n_b + n_ab);
    for (const auto& part : parts) {
        for (const auto& name : part.fit.names) out.names.push_back(name);
        for (std::size_t i = 0; i < part.global_train_index.size(); ++i)
            out.train_loglik.col(part.global_train_index[i]) = part.fit.train_loglik.col(i);
    }
    out.values.resize(cfg.samples, out.names.size());
    int col = 0;
    for (const auto& part : parts) {
        out.values.middleCols(col, part.fit.values.cols()) = part.fit.values;
        col += static_cast<int>(part.fit.values.cols());
    }
    double ad = 0.0, ac = 0.0;
    for (const auto& part : parts) {
        ad += part.fit.accept_drift;
        ac += part.fit.accept_coef;
        out.divergences += part.fit.divergences;
    }
    out.accept_drift = ad / parts.size();
    out.accept_coef = ac / parts.size();
    return out;
}

}  // namespace spikerace
