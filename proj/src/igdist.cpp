#include "spikerace/igdist.hpp"

#include <cmath>
#include <stdexcept>

#include "spikerace/math.hpp"
#include "spikerace/quad.hpp"

namespace spikerace {

double input_current(const StimulusParams& p, const BasisConfig& cfg, double s) {
    if (p.coef.size() == 0) return p.input;
    return p.input * std::exp(p.coef.dot(eval_basis(cfg, s)));
}

double log_ig_pdf(double rate, double noise, double x) {
    if (x <= 0.0) return kNegInf;
    const double z = 1.0 - rate * x;
    return -std::log(noise) - kLogSqrt2Pi - 1.5 * std::log(x) - z * z / (2.0 * noise * noise * x);
}

double log_ig_pdf_d(double rate, double noise, double x, double& d_rate, double& d_noise) {
    if (x <= 0.0) {
        d_rate = d_noise = 0.0;
        return kNegInf;
    }
    const double z = 1.0 - rate * x;
    const double s2 = noise * noise;
    d_rate = z / s2;
    d_noise = -1.0 / noise + z * z / (s2 * noise * x);
    return -std::log(noise) - kLogSqrt2Pi - 1.5 * std::log(x) - z * z / (2.0 * s2 * x);
}

namespace {

struct SfParts {
    double log_sf;
    double log_phi_mu;   // log Phi(-u)
    double log_tilt_v;   // eta + log Phi(v)
    double u, sx;
};

// Survival of the inverse Gaussian written as Phi(-u) - exp(eta) Phi(v) with
// u = (r x - 1) / (sigma sqrt(x)), v = -(r x + 1) / (sigma sqrt(x)) and
// eta = 2 r / sigma^2. Everything stays on log scale: eta alone can exceed
// 1e4 at realistic drifts, so the tilt term must never be exponentiated.
SfParts sf_parts(double rate, double noise, double x) {
    const double sx = std::sqrt(x);
    const double u = (rate * x - 1.0) / (noise * sx);
    const double v = -(rate * x + 1.0) / (noise * sx);
    const double eta = 2.0 * rate / (noise * noise);
    const double log_phi_mu = norm_log_cdf(-u);
    // survival below the double range: report log zero rather than the NaN
    // that -inf minus -inf would produce below
    if (log_phi_mu == kNegInf) return {kNegInf, kNegInf, kNegInf, u, sx};
    const double log_tilt_v = eta + norm_log_cdf(v);
    // d is <= 0 in exact arithmetic; rounding can push it over when the
    // survival is below machine precision, so keep a hair of headroom
    const double d = std::min(log_tilt_v - log_phi_mu, -1e-16);
    return {log_phi_mu + log1mexp(d), log_phi_mu, log_tilt_v, u, sx};
}

}  // namespace

double log_ig_sf(double rate, double noise, double x) {
    if (x <= 0.0) return 0.0;
    return sf_parts(rate, noise, x).log_sf;
}

double log_ig_sf_d(double rate, double noise, double x, double& d_rate, double& d_noise) {
    if (x <= 0.0) {
        d_rate = d_noise = 0.0;
        return 0.0;
    }
    const SfParts p = sf_parts(rate, noise, x);
    const double s2 = noise * noise;
    const double tilt_ratio = std::exp(p.log_tilt_v - p.log_sf);
    const double dens_ratio = std::exp(norm_log_pdf(p.u) - p.log_sf);
    d_rate = -(2.0 / s2) * tilt_ratio;
    d_noise = -(2.0 / (s2 * p.sx)) * dens_ratio + (4.0 * rate / (s2 * noise)) * tilt_ratio;
    return p.log_sf;
}

double log_ig_pdf(const StimulusParams& p, const BasisConfig& cfg, double x, double s_prev) {
    return log_ig_pdf(input_current(p, cfg, s_prev), p.noise, x);
}

double log_ig_sf(const StimulusParams& p, const BasisConfig& cfg, double x, double s_prev) {
    return log_ig_sf(input_current(p, cfg, s_prev), p.noise, x);
}

namespace detail {

double log_joint_step_raw(const RacePoint& rp, double delay, double x, Label l,
                          std::optional<Label> prev) {
    const bool is_a = l == Label::A;
    const double rw = is_a ? rp.ra : rp.rb, sw = is_a ? rp.sa : rp.sb;
    const double rl = is_a ? rp.rb : rp.ra, sl = is_a ? rp.sb : rp.sa;
    double pdf_arg = x, sf_arg = x;
    if (prev) {
        // whoever lost the previous round accumulated for delay less time
        if (*prev != l) pdf_arg -= delay;
        else sf_arg -= delay;
    }
    return log_ig_pdf(rw, sw, pdf_arg) + log_ig_sf(rl, sl, sf_arg);
}

double log_joint_step_raw_d(const RacePoint& rp, double delay, double x, Label l,
                            std::optional<Label> prev, double g[4]) {
    const bool is_a = l == Label::A;
    const double rw = is_a ? rp.ra : rp.rb, sw = is_a ? rp.sa : rp.sb;
    const double rl = is_a ? rp.rb : rp.ra, sl = is_a ? rp.sb : rp.sa;
    double pdf_arg = x, sf_arg = x;
    if (prev) {
        if (*prev != l) pdf_arg -= delay;
        else sf_arg -= delay;
    }
    double dr_w, ds_w, dr_l, ds_l;
    const double val = log_ig_pdf_d(rw, sw, pdf_arg, dr_w, ds_w) +
                       log_ig_sf_d(rl, sl, sf_arg, dr_l, ds_l);
    g[is_a ? 0 : 2] += dr_w;
    g[is_a ? 1 : 3] += ds_w;
    g[is_a ? 2 : 0] += dr_l;
    g[is_a ? 3 : 1] += ds_l;
    return val;
}

double log_censor_raw(const RacePoint& rp, double delay, double tail, Label last_label) {
    const bool is_a = last_label == Label::A;
    const double rw = is_a ? rp.ra : rp.rb, sw = is_a ? rp.sa : rp.sb;
    const double rl = is_a ? rp.rb : rp.ra, sl = is_a ? rp.sb : rp.sa;
    return log_ig_sf(rw, sw, tail) + log_ig_sf(rl, sl, tail - delay);
}

double log_censor_raw_d(const RacePoint& rp, double delay, double tail, Label last_label,
                        double g[4]) {
    const bool is_a = last_label == Label::A;
    const double rw = is_a ? rp.ra : rp.rb, sw = is_a ? rp.sa : rp.sb;
    const double rl = is_a ? rp.rb : rp.ra, sl = is_a ? rp.sb : rp.sa;
    double dr_w, ds_w, dr_l, ds_l;
    const double val = log_ig_sf_d(rw, sw, tail, dr_w, ds_w) +
                       log_ig_sf_d(rl, sl, tail - delay, dr_l, ds_l);
    g[is_a ? 0 : 2] += dr_w;
    g[is_a ? 1 : 3] += ds_w;
    g[is_a ? 2 : 0] += dr_l;
    g[is_a ? 3 : 1] += ds_l;
    return val;
}

}  // namespace detail

namespace {

detail::RacePoint race_point(const CompetitionParams& p, const BasisConfig& cfg, double s) {
    return {input_current(p.a, cfg, s), p.a.noise, input_current(p.b, cfg, s), p.b.noise};
}

}  // namespace

double log_joint_first(const CompetitionParams& p, const BasisConfig& cfg, double x, Label l) {
    return detail::log_joint_step_raw(race_point(p, cfg, cfg.t_lo), p.delay, x, l, std::nullopt);
}

double log_joint_step(const CompetitionParams& p, const BasisConfig& cfg, double x, Label l,
                      Label prev, double s_prev) {
    return detail::log_joint_step_raw(race_point(p, cfg, s_prev), p.delay, x, l, prev);
}

double log_joint_last(const CompetitionParams& p, const BasisConfig& cfg, double x, Label l,
                      std::optional<Label> prev, double s_prev, double window_end) {
    const double s = s_prev + x;
    if (s > window_end) throw std::domain_error("last spike would land past window_end");
    const double base = detail::log_joint_step_raw(race_point(p, cfg, s_prev), p.delay, x, l, prev);
    return base + detail::log_censor_raw(race_point(p, cfg, s), p.delay, window_end - s, l);
}

double race_win_probability(const CompetitionParams& p, const BasisConfig& cfg, Label l,
                            std::optional<Label> prev, double s_prev) {
    const detail::RacePoint rp = race_point(p, cfg, s_prev);
    const auto f = [&](double x) {
        const double lg = detail::log_joint_step_raw(rp, p.delay, x, l, prev);
        return lg == kNegInf ? 0.0 : std::exp(lg);
    };
    const double tail_start = std::max(10.0 / std::min(rp.ra, rp.rb), p.delay * 2.0 + 1e-3);
    return integrate_positive_axis(f, {p.delay}, tail_start, 1e-10).value;
}

}  // namespace spikerace
