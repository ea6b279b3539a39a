#include "spikerace/simulate.hpp"

#include <cmath>
#include <stdexcept>

namespace spikerace {

namespace {

double draw_interval(const StimulusParams& p, const BasisConfig& cfg, double s, Rng& rng) {
    const double r = input_current(p, cfg, s);
    return rng.inverse_gaussian(1.0 / r, 1.0 / (p.noise * p.noise));
}

}  // namespace

SpikeTrain simulate_iigpp(const StimulusParams& p, const BasisConfig& cfg, double window_end,
                          Rng& rng) {
    SpikeTrain out;
    out.window_end = window_end;
    double s = 0.0;
    for (;;) {
        s += draw_interval(p, cfg, s, rng);
        if (s > window_end) return out;
        out.times.push_back(s);
    }
}

std::pair<SpikeTrain, std::vector<Label>> simulate_competition(const CompetitionParams& p,
                                                               const BasisConfig& cfg,
                                                               double window_end, Rng& rng) {
    SpikeTrain train;
    train.window_end = window_end;
    std::vector<Label> labels;
    double s = 0.0;
    bool first = true;
    Label prev = Label::A;
    for (;;) {
        double cand_a = draw_interval(p.a, cfg, s, rng);
        double cand_b = draw_interval(p.b, cfg, s, rng);
        if (!first) {
            // the accumulator that lost the previous round starts late
            if (prev == Label::A) cand_b += p.delay;
            else cand_a += p.delay;
        }
        const Label winner = cand_a <= cand_b ? Label::A : Label::B;
        s += std::min(cand_a, cand_b);
        if (s > window_end) return {train, labels};
        train.times.push_back(s);
        labels.push_back(winner);
        prev = winner;
        first = false;
    }
}

std::pair<SpikeTrain, std::vector<Label>> simulate_hmm(const StimulusParams& a,
                                                       const StimulusParams& b, double p_stay,
                                                       const BasisConfig& cfg, double window_end,
                                                       Rng& rng) {
    SpikeTrain train;
    train.window_end = window_end;
    std::vector<Label> labels;
    double s = 0.0;
    Label state = rng.bernoulli(0.5) ? Label::A : Label::B;
    for (;;) {
        if (!labels.empty() && !rng.bernoulli(p_stay)) state = other(state);
        s += draw_interval(state == Label::A ? a : b, cfg, s, rng);
        if (s > window_end) return {train, labels};
        train.times.push_back(s);
        labels.push_back(state);
    }
}

double ScalarDist::draw(Rng& rng) const {
    if (p_zero > 0.0 && rng.bernoulli(p_zero)) return 0.0;
    switch (kind) {
        case Kind::Point:
            return a;
        case Kind::TruncNormal:
            return rng.truncated_normal(a, std::sqrt(b), lower);
        case Kind::LogNormal:
            return rng.lognormal(a, std::sqrt(b));
        case Kind::Beta:
            return rng.beta(a, b);
    }
    return a;
}

TripletSpec preset_spec(const std::string& name) {
    TripletSpec s;
    if (name == "competition") {
        s.generator = TripletSpec::Generator::Competition;
    } else if (name == "competition-wide") {
        s.generator = TripletSpec::Generator::Competition;
        s.input_a = ScalarDist::trunc_normal(40.0, 400.0, 10.0);
        s.input_b = ScalarDist::trunc_normal(80.0, 400.0, 10.0);
        s.noise_a = ScalarDist::trunc_normal(6.324555320336759, 25.0, 3.0);
        s.noise_b = ScalarDist::trunc_normal(8.94427190999916, 25.0, 3.0);
        s.delay = ScalarDist::log_normal(-3.5, 1.0);
    } else if (name == "iigpp") {
        s.generator = TripletSpec::Generator::Iigpp;
    } else if (name == "hmm") {
        s.generator = TripletSpec::Generator::Hmm;
    } else if (name == "wta") {
        s.generator = TripletSpec::Generator::Wta;
        s.input_a = ScalarDist::trunc_normal(40.0, 36.0);
        s.input_b = ScalarDist::trunc_normal(80.0, 36.0);
    } else {
        throw std::invalid_argument("unknown simulation preset: " + name);
    }
    return s;
}

std::pair<Triplet, TripletTruth> simulate_triplet(const TripletSpec& spec, const BasisConfig& cfg,
                                                  std::uint64_t seed) {
    TripletTruth truth;
    truth.generator = spec.generator;

    Rng param_rng(seed, {0});
    const int dim = cfg.dim();
    auto draw_coef = [&]() {
        Eigen::VectorXd c(dim);
        const double sd = std::sqrt(spec.coef_var);
        for (int k = 0; k < dim; ++k) c[k] = param_rng.normal(0.0, sd);
        return c;
    };

    truth.comp.a = {spec.input_a.draw(param_rng), spec.noise_a.draw(param_rng), draw_coef()};
    truth.comp.b = {spec.input_b.draw(param_rng), spec.noise_b.draw(param_rng), draw_coef()};
    truth.comp.delay = 0.0;

    switch (spec.generator) {
        case TripletSpec::Generator::Competition:
            truth.comp.delay = spec.delay.draw(param_rng);
            break;
        case TripletSpec::Generator::Iigpp:
            truth.ab = {spec.input_ab.draw(param_rng), spec.noise_ab.draw(param_rng), draw_coef()};
            break;
        case TripletSpec::Generator::Hmm:
            truth.p_stay = spec.p_stay.draw(param_rng);
            break;
        case TripletSpec::Generator::Wta:
            truth.wta_winner = param_rng.bernoulli(0.5) ? Label::A : Label::B;
            truth.ab = truth.wta_winner == Label::A ? truth.comp.a : truth.comp.b;
            break;
    }

    Triplet trip;
    trip.window_end = spec.window_end;
    for (int i = 0; i < spec.n_a; ++i) {
        Rng rng(seed, {1, static_cast<std::uint64_t>(i)});
        trip.a_trials.push_back(simulate_iigpp(truth.comp.a, cfg, spec.window_end, rng));
    }
    for (int i = 0; i < spec.n_b; ++i) {
        Rng rng(seed, {2, static_cast<std::uint64_t>(i)});
        trip.b_trials.push_back(simulate_iigpp(truth.comp.b, cfg, spec.window_end, rng));
    }
    for (int i = 0; i < spec.n_ab; ++i) {
        Rng rng(seed, {3, static_cast<std::uint64_t>(i)});
        switch (spec.generator) {
            case TripletSpec::Generator::Competition: {
                auto [train, labels] = simulate_competition(truth.comp, cfg, spec.window_end, rng);
                trip.ab_trials.push_back(std::move(train));
                truth.ab_labels.push_back(std::move(labels));
                break;
            }
            case TripletSpec::Generator::Iigpp:
                trip.ab_trials.push_back(simulate_iigpp(truth.ab, cfg, spec.window_end, rng));
                break;
            case TripletSpec::Generator::Hmm: {
                auto [train, labels] = simulate_hmm(truth.comp.a, truth.comp.b, truth.p_stay, cfg,
                                                    spec.window_end, rng);
                trip.ab_trials.push_back(std::move(train));
                truth.ab_labels.push_back(std::move(labels));
                break;
            }
            case TripletSpec::Generator::Wta:
                trip.ab_trials.push_back(simulate_iigpp(truth.ab, cfg, spec.window_end, rng));
                break;
        }
    }
    return {trip, truth};
}

}  // namespace spikerace
