#include "spikerace/posteriorpred.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spikerace/parallel.hpp"
#include "spikerace/simulate.hpp"

namespace spikerace {

namespace {

/** Linearly interpolated empirical quantile of an already sorted vector. */
double quantile_sorted(const std::vector<double>& sorted, double p) {
    const int n = static_cast<int>(sorted.size());
    if (n == 1) return sorted[0];
    const double h = p * (n - 1);
    const int lo = std::min(static_cast<int>(h), n - 2);
    return sorted[lo] + (h - lo) * (sorted[lo + 1] - sorted[lo]);
}

std::pair<double, double> central_interval(std::vector<double> x, double mass) {
    std::sort(x.begin(), x.end());
    const double tail = 0.5 * (1.0 - mass);
    return {quantile_sorted(x, tail), quantile_sorted(x, 1.0 - tail)};
}

int draw_row(int k, int n_rep, int n_draws) {
    // thin evenly when there are enough draws, cycle otherwise
    if (n_rep <= n_draws) return static_cast<int>(static_cast<long>(k) * n_draws / n_rep);
    return k % n_draws;
}

}  // namespace

int count_switches(const std::vector<Label>& labels) {
    int c = 0;
    for (std::size_t j = 1; j < labels.size(); ++j)
        if (labels[j] != labels[j - 1]) ++c;
    return c;
}

double time_encoding_a(const std::vector<double>& times, const std::vector<Label>& labels,
                       double window_end, bool attribute_to_previous) {
    const int n = static_cast<int>(times.size());
    if (n == 0) throw std::invalid_argument("time_encoding_a needs a labeled spike");
    double t_a = 0.0;
    double prev = 0.0;
    for (int j = 0; j < n; ++j) {
        // the first interval always goes to its ending spike's label
        const Label owner = attribute_to_previous && j > 0 ? labels[j - 1] : labels[j];
        if (owner == Label::A) t_a += times[j] - prev;
        prev = times[j];
    }
    if (labels[n - 1] == Label::A) t_a += window_end - prev;
    return t_a;
}

PredictiveSummary predictive_draws(const PosteriorDraws& draws, const BasisConfig& basis,
                                   double window_end, const PredictiveConfig& cfg,
                                   std::uint64_t seed) {
    const int s = draws.n_draws();
    if (s < 1) throw std::invalid_argument("predictive_draws needs at least one draw");
    const int n_rep = cfg.n_rep;

    PredictiveSummary out;
    out.switches.resize(n_rep);
    out.time_a.resize(n_rep);
    out.counts.resize(n_rep);
    std::vector<char> empty(n_rep, 0);

    parallel_for(n_rep, cfg.workers, [&](int k) {
        const CompetitionParams theta = competition_draw(draws, draw_row(k, n_rep, s));
        Rng rng(seed, {6, static_cast<std::uint64_t>(k)});
        const auto [train, labels] = simulate_competition(theta, basis, window_end, rng);
        out.counts[k] = train.n();
        if (train.n() == 0) {
            // decide who owned the spikeless window with one more race
            const double ra = input_current(theta.a, basis, basis.t_lo);
            const double rb = input_current(theta.b, basis, basis.t_lo);
            const double xa = rng.inverse_gaussian(1.0 / ra, 1.0 / (theta.a.noise * theta.a.noise));
            const double xb = rng.inverse_gaussian(1.0 / rb, 1.0 / (theta.b.noise * theta.b.noise));
            out.switches[k] = 0;
            out.time_a[k] = xa <= xb ? window_end : 0.0;
            empty[k] = 1;
            return;
        }
        out.switches[k] = count_switches(labels);
        out.time_a[k] =
            time_encoding_a(train.times, labels, window_end, cfg.attribute_to_previous);
    });

    double sw = 0.0, ta = 0.0, ct = 0.0;
    for (int k = 0; k < n_rep; ++k) {
        sw += out.switches[k];
        ta += out.time_a[k];
        ct += out.counts[k];
        out.empty_replicates += empty[k];
    }
    out.mean_switches = sw / n_rep;
    out.mean_time_a = ta / n_rep;
    out.mean_count = ct / n_rep;
    return out;
}

Eigen::VectorXd label_frequencies(const PosteriorDraws& draws, int trial) {
    if (draws.label_draws.empty())
        throw std::invalid_argument("label_frequencies needs stored label draws");
    if (trial < 0 || trial >= static_cast<int>(draws.label_draws.front().size()))
        throw std::invalid_argument("label_frequencies: no such trial");
    const int n = static_cast<int>(draws.label_draws.front()[trial].size());
    Eigen::VectorXd freq = Eigen::VectorXd::Zero(n);
    for (const auto& per_trial : draws.label_draws)
        for (int j = 0; j < n; ++j)
            if (per_trial[trial][j] == Label::A) freq[j] += 1.0;
    return freq / static_cast<double>(draws.label_draws.size());
}

double predictive_mean_count(const PosteriorDraws& draws, const std::string& tag,
                             const BasisConfig& basis, double window_end, int n_rep,
                             std::uint64_t seed) {
    const int s = draws.n_draws();
    if (s < 1 || n_rep < 1) throw std::invalid_argument("predictive_mean_count needs draws");
    double total = 0.0;
    for (int k = 0; k < n_rep; ++k) {
        const StimulusParams theta = stimulus_draw(draws, draw_row(k, n_rep, s), tag);
        Rng rng(seed, {7, static_cast<std::uint64_t>(k)});
        total += simulate_iigpp(theta, basis, window_end, rng).n();
    }
    return total / n_rep;
}

double rse(const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth) {
    if (estimate.size() != truth.size())
        throw std::invalid_argument("rse: estimate and truth sizes differ");
    const double denom = truth.squaredNorm();
    if (denom == 0.0) throw std::domain_error("rse: truth has zero norm");
    return (estimate - truth).squaredNorm() / denom;
}

double rse(double estimate, double truth) {
    if (truth == 0.0) throw std::domain_error("rse: truth is zero");
    const double d = estimate - truth;
    return d * d / (truth * truth);
}

double rwd(std::vector<double> x, std::vector<double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("rwd: sample counts differ");
    if (x.empty()) throw std::invalid_argument("rwd: empty samples");
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    double num = 0.0, denom = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        num += std::abs(x[i] - y[i]);
        denom += std::abs(y[i]);
    }
    if (denom == 0.0) throw std::domain_error("rwd: reference samples sum to zero");
    return num / denom;
}

Eigen::VectorXd rate_curve(const StimulusParams& p, const BasisConfig& cfg, int points) {
    if (points < 2) throw std::invalid_argument("rate_curve needs at least two grid points");
    Eigen::VectorXd out(points);
    const double span = cfg.t_hi - cfg.t_lo;
    for (int i = 0; i < points; ++i) {
        const double t = cfg.t_lo + span * i / (points - 1);
        out[i] = p.coef.size() == 0 ? p.input : p.input * std::exp(p.coef.dot(eval_basis(cfg, t)));
    }
    return out;
}

CoverageReport coverage_report(const std::vector<PosteriorDraws>& fits,
                               const std::vector<CompetitionParams>& truths,
                               const BasisConfig& basis, int grid_points,
                               double curve_fraction) {
    if (fits.empty() || fits.size() != truths.size())
        throw std::invalid_argument("coverage_report needs one truth per fit");
    const int n_runs = static_cast<int>(fits.size());

    CoverageReport out;
    out.n_datasets = n_runs;

    struct ScalarSpec {
        std::string column;
        double (*pick)(const CompetitionParams&);
    };
    const ScalarSpec scalars[] = {
        {"sigma_A", [](const CompetitionParams& p) { return p.a.noise; }},
        {"sigma_B", [](const CompetitionParams& p) { return p.b.noise; }},
        {"delta", [](const CompetitionParams& p) { return p.delay; }},
    };
    for (const auto& spec : scalars) {
        CoverageRow row;
        row.name = spec.column;
        double width_sum = 0.0;
        for (int r = 0; r < n_runs; ++r) {
            const Eigen::VectorXd col = fits[r].column(spec.column);
            const auto [lo, hi] =
                central_interval(std::vector<double>(col.data(), col.data() + col.size()), 0.95);
            const double truth = spec.pick(truths[r]);
            if (lo <= truth && truth <= hi) ++row.covered;
            width_sum += truth != 0.0 ? (hi - lo) / std::abs(truth) : hi - lo;
        }
        row.mean_rel_width = width_sum / n_runs;
        row.pointwise = static_cast<double>(row.covered) / n_runs;
        out.rows.push_back(row);
    }

    std::vector<double> grid(grid_points);
    for (int g = 0; g < grid_points; ++g)
        grid[g] = basis.t_lo + (basis.t_hi - basis.t_lo) * g / (grid_points - 1);
    const Eigen::MatrixXd bgrid = eval_basis_matrix(basis, grid);
    const auto curve_of = [&](const StimulusParams& sp) -> Eigen::VectorXd {
        if (sp.coef.size() == 0) return Eigen::VectorXd::Constant(grid_points, sp.input);
        return sp.input * (bgrid * sp.coef).array().exp();
    };

    for (const std::string tag : {"A", "B"}) {
        CoverageRow row;
        row.name = "curve_" + tag;
        double width_sum = 0.0, point_cover = 0.0;
        long width_terms = 0;
        for (int r = 0; r < n_runs; ++r) {
            const int s = fits[r].n_draws();
            const Eigen::VectorXd truth_curve = curve_of(tag == "A" ? truths[r].a : truths[r].b);
            // curves of every draw, one row per draw
            Eigen::MatrixXd curves(s, grid_points);
            for (int d = 0; d < s; ++d)
                curves.row(d) = curve_of(stimulus_draw(fits[r], d, tag)).transpose();
            int inside = 0;
            for (int g = 0; g < grid_points; ++g) {
                std::vector<double> col(s);
                for (int d = 0; d < s; ++d) col[d] = curves(d, g);
                const auto [lo, hi] = central_interval(std::move(col), 0.95);
                if (lo <= truth_curve[g] && truth_curve[g] <= hi) ++inside;
                width_sum += (hi - lo) / std::abs(truth_curve[g]);
                ++width_terms;
            }
            point_cover += static_cast<double>(inside) / grid_points;
            if (static_cast<double>(inside) / grid_points >= curve_fraction) ++row.covered;
        }
        row.mean_rel_width = width_sum / static_cast<double>(width_terms);
        row.pointwise = point_cover / n_runs;
        out.rows.push_back(row);
    }
    return out;
}

}  // namespace spikerace
