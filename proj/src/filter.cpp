#include "spikerace/filter.hpp"

#include <cmath>
#include <stdexcept>

#include "spikerace/math.hpp"

namespace spikerace {

using detail::RacePoint;

TrainCache make_cache(const SpikeTrain& train, const BasisConfig& cfg) {
    TrainCache c;
    c.window_end = train.window_end;
    const int n = train.n();
    c.isi.resize(n);
    c.prev_s.resize(n);
    double prev = 0.0;
    for (int j = 0; j < n; ++j) {
        c.prev_s[j] = prev;
        c.isi[j] = train.times[j] - prev;
        prev = train.times[j];
    }
    c.basis = eval_basis_matrix(cfg, c.prev_s);
    if (n > 0) {
        c.basis_last = eval_basis(cfg, train.times[n - 1]);
        c.tail = train.window_end - train.times[n - 1];
    } else {
        c.basis_last = eval_basis(cfg, cfg.t_lo);
        c.tail = train.window_end;
    }
    return c;
}

RateTable make_rates(const CompetitionParams& p, const TrainCache& cache) {
    RateTable t;
    const auto rate_for = [&](const StimulusParams& sp, const Eigen::MatrixXd& basis) {
        if (sp.coef.size() == 0)
            return Eigen::VectorXd::Constant(basis.rows(), sp.input).eval();
        return (sp.input * (basis * sp.coef).array().exp()).matrix().eval();
    };
    t.ra = rate_for(p.a, cache.basis);
    t.rb = rate_for(p.b, cache.basis);
    t.ra_last = p.a.coef.size() == 0 ? p.a.input
                                     : p.a.input * std::exp(p.a.coef.dot(cache.basis_last));
    t.rb_last = p.b.coef.size() == 0 ? p.b.input
                                     : p.b.input * std::exp(p.b.coef.dot(cache.basis_last));
    return t;
}

namespace {

RacePoint point_at(const CompetitionParams& p, const RateTable& rates, int j) {
    return {rates.ra[j], p.a.noise, rates.rb[j], p.b.noise};
}

RacePoint point_last(const CompetitionParams& p, const RateTable& rates) {
    return {rates.ra_last, p.a.noise, rates.rb_last, p.b.noise};
}

constexpr Label kLabels[2] = {Label::A, Label::B};

}  // namespace

FilterState forward_filter(const CompetitionParams& p, const TrainCache& cache,
                           const RateTable& rates) {
    const int n = cache.n();
    if (n == 0) throw std::invalid_argument("forward_filter needs at least one spike");

    FilterState fs;
    fs.log_filtered.resize(n, 2);
    fs.log_norm.resize(n);

    const double censor_tail = cache.tail;
    for (int j = 0; j < n; ++j) {
        const RacePoint rp = point_at(p, rates, j);
        const bool last = j == n - 1;
        double m[2];
        for (int li = 0; li < 2; ++li) {
            const Label l = kLabels[li];
            if (j == 0) {
                m[li] = detail::log_joint_step_raw(rp, p.delay, cache.isi[j], l, std::nullopt);
            } else {
                double terms[2];
                for (int pi = 0; pi < 2; ++pi)
                    terms[pi] = fs.log_filtered(j - 1, pi) +
                                detail::log_joint_step_raw(rp, p.delay, cache.isi[j], l,
                                                           kLabels[pi]);
                m[li] = log_add(terms[0], terms[1]);
            }
            if (last && m[li] != kNegInf)
                m[li] += detail::log_censor_raw(point_last(p, rates), p.delay, censor_tail, l);
        }
        const double c = log_add(m[0], m[1]);
        if (c == kNegInf)
            throw std::runtime_error("forward filter hit an impossible spike at index " +
                                     std::to_string(j));
        fs.log_filtered(j, 0) = m[0] - c;
        fs.log_filtered(j, 1) = m[1] - c;
        fs.log_norm[j] = c;
    }
    fs.loglik = fs.log_norm.sum();
    return fs;
}

FilterState forward_filter(const CompetitionParams& p, const BasisConfig& cfg,
                           const SpikeTrain& train) {
    const TrainCache cache = make_cache(train, cfg);
    return forward_filter(p, cache, make_rates(p, cache));
}

double marginal_loglik(const CompetitionParams& p, const BasisConfig& cfg,
                       const SpikeTrain& train) {
    if (train.n() == 0) {
        const RacePoint rp{input_current(p.a, cfg, cfg.t_lo), p.a.noise,
                           input_current(p.b, cfg, cfg.t_lo), p.b.noise};
        return log_ig_sf(rp.ra, rp.sa, train.window_end) +
               log_ig_sf(rp.rb, rp.sb, train.window_end);
    }
    return forward_filter(p, cfg, train).loglik;
}

std::vector<Label> backward_sample(const CompetitionParams& p, const TrainCache& cache,
                                   const RateTable& rates, const FilterState& fs, Rng& rng) {
    const int n = cache.n();
    std::vector<Label> labels(n);

    double w[2] = {fs.log_filtered(n - 1, 0), fs.log_filtered(n - 1, 1)};
    labels[n - 1] = kLabels[rng.pick_log_weights(w)];

    for (int j = n - 2; j >= 0; --j) {
        const RacePoint rp = point_at(p, rates, j + 1);
        const Label next = labels[j + 1];
        for (int pi = 0; pi < 2; ++pi) {
            double g = detail::log_joint_step_raw(rp, p.delay, cache.isi[j + 1], next,
                                                  kLabels[pi]);
            // the final factor carries the censoring, matching the filter's last step
            if (j + 1 == n - 1 && g != kNegInf)
                g += detail::log_censor_raw(point_last(p, rates), p.delay, cache.tail, next);
            w[pi] = fs.log_filtered(j, pi) + g;
        }
        if (w[0] == kNegInf && w[1] == kNegInf)
            throw std::runtime_error("no feasible label at spike " + std::to_string(j));
        labels[j] = kLabels[rng.pick_log_weights(w)];
    }
    return labels;
}

double renewal_loglik(const StimulusParams& p, const TrainCache& cache) {
    const int n = cache.n();
    double total = 0.0;
    if (n > 0) {
        const Eigen::VectorXd rates =
            p.coef.size() == 0
                ? Eigen::VectorXd::Constant(n, p.input).eval()
                : (p.input * (cache.basis * p.coef).array().exp()).matrix().eval();
        for (int j = 0; j < n; ++j) total += log_ig_pdf(rates[j], p.noise, cache.isi[j]);
    }
    const double r_last = p.coef.size() == 0
                              ? p.input
                              : p.input * std::exp(p.coef.dot(cache.basis_last));
    return total + log_ig_sf(r_last, p.noise, cache.tail);
}

double renewal_loglik(const StimulusParams& p, const BasisConfig& cfg, const SpikeTrain& train) {
    return renewal_loglik(p, make_cache(train, cfg));
}

double labeled_loglik(const CompetitionParams& p, const TrainCache& cache, const RateTable& rates,
                      const std::vector<Label>& labels) {
    const int n = cache.n();
    if (n == 0) {
        const RacePoint rp = point_last(p, rates);
        return log_ig_sf(rp.ra, rp.sa, cache.window_end) +
               log_ig_sf(rp.rb, rp.sb, cache.window_end);
    }
    double total = 0.0;
    for (int j = 0; j < n; ++j) {
        const RacePoint rp = point_at(p, rates, j);
        total += detail::log_joint_step_raw(
            rp, p.delay, cache.isi[j], labels[j],
            j == 0 ? std::optional<Label>{} : std::optional<Label>{labels[j - 1]});
    }
    total += detail::log_censor_raw(point_last(p, rates), p.delay, cache.tail, labels[n - 1]);
    return total;
}

}  // namespace spikerace
