// Python surface for the toolkit. Data crosses the boundary as plain lists
// and numpy arrays; configuration crosses as the same JSON text the CLI
// accepts, so both front ends share one parser and one set of defaults.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spikerace/data.hpp"
#include "spikerace/filter.hpp"
#include "spikerace/io.hpp"
#include "spikerace/mcmc.hpp"
#include "spikerace/modelselect.hpp"
#include "spikerace/posteriorpred.hpp"
#include "spikerace/simulate.hpp"

namespace py = pybind11;

namespace {

using namespace spikerace;

using Trials = std::vector<std::vector<double>>;

RunConfig config_with(const std::string& config, std::optional<std::uint64_t> seed,
                      std::optional<int> workers) {
    RunConfig cfg = config_from_json_text(config);
    if (seed) cfg.seed = *seed;
    if (workers) cfg.workers = *workers;
    if (cfg.workers < 1) cfg.workers = 1;
    return cfg;
}

Triplet make_triplet(double window_end, const Trials& a, const Trials& b, const Trials& ab) {
    Triplet data;
    data.window_end = window_end;
    const auto fill = [&](const Trials& rows) {
        std::vector<SpikeTrain> trains;
        for (const auto& row : rows) trains.push_back({row, window_end});
        return trains;
    };
    data.a_trials = fill(a);
    data.b_trials = fill(b);
    data.ab_trials = fill(ab);
    validate_triplet(data);
    return data;
}

Trials trials_list(const std::vector<SpikeTrain>& trains) {
    Trials rows;
    for (const auto& t : trains) rows.push_back(t.times);
    return rows;
}

std::string labels_string(const std::vector<Label>& labels) {
    std::string s;
    for (Label l : labels) s.push_back(label_char(l));
    return s;
}

StimulusParams stimulus_of(const py::dict& d) {
    StimulusParams p;
    p.input = d["input"].cast<double>();
    p.noise = d["noise"].cast<double>();
    if (d.contains("coef")) {
        const auto coef = d["coef"].cast<std::vector<double>>();
        p.coef = Eigen::Map<const Eigen::VectorXd>(coef.data(),
                                                   static_cast<Eigen::Index>(coef.size()));
    }
    return p;
}

BasisConfig basis_of(double window_end, int degree, const std::optional<std::vector<double>>& knots) {
    RunConfig cfg;
    cfg.basis_degree = degree;
    if (knots) cfg.interior_knots = *knots;
    return basis_for(cfg, window_end);
}

py::dict waic_dict(const WaicResult& w) {
    py::dict out;
    out["lppd"] = w.lppd;
    out["p_eff"] = w.p_eff;
    out["waic"] = w.waic;
    out["train_lppd"] = w.train_lppd;
    out["train_var"] = w.train_var;
    return out;
}

py::dict draws_dict(const PosteriorDraws& d) {
    py::dict out;
    out["model"] = model_name(d.model);
    out["names"] = d.names;
    out["values"] = d.values;
    out["train_loglik"] = d.train_loglik;
    out["accept_drift"] = d.accept_drift;
    out["accept_coef"] = d.accept_coef;
    out["divergences"] = d.divergences;
    if (!d.label_draws.empty()) {
        std::vector<std::vector<std::string>> labels;
        for (const auto& draw : d.label_draws) {
            std::vector<std::string> per_trial;
            for (const auto& trial : draw) per_trial.push_back(labels_string(trial));
            labels.push_back(std::move(per_trial));
        }
        out["labels"] = labels;
    }
    return out;
}

py::dict pvalue_dict(const PValueReport& r) {
    py::dict out;
    out["p_avg_ll"] = r.p_avg_ll;
    out["p_mean_count"] = r.p_mean_count;
    out["p_var_count"] = r.p_var_count;
    out["draws_used"] = r.draws_used;
    return out;
}

py::dict simulate_py(std::optional<std::string> preset, std::optional<std::uint64_t> seed,
                     std::optional<int> n_a, std::optional<int> n_b, std::optional<int> n_ab,
                     std::optional<double> window_end, const std::string& config) {
    RunConfig cfg = config_with(config, seed, std::nullopt);
    if (preset) cfg.preset = *preset;
    if (n_a) cfg.n_a = *n_a;
    if (n_b) cfg.n_b = *n_b;
    if (n_ab) cfg.n_ab = *n_ab;
    if (window_end) cfg.window_end = *window_end;

    const TripletSpec spec = spec_for(cfg);
    const BasisConfig basis = basis_for(cfg, spec.window_end);
    const auto [data, truth] = simulate_triplet(spec, basis, cfg.seed);

    const auto generator_name = [](TripletSpec::Generator g) {
        switch (g) {
            case TripletSpec::Generator::Competition: return "competition";
            case TripletSpec::Generator::Iigpp: return "iigpp";
            case TripletSpec::Generator::Hmm: return "hmm";
            default: return "wta";
        }
    };

    py::dict t;
    t["preset"] = cfg.preset;
    t["generator"] = generator_name(truth.generator);
    t["input_a"] = truth.comp.a.input;
    t["noise_a"] = truth.comp.a.noise;
    t["coef_a"] = truth.comp.a.coef;
    t["input_b"] = truth.comp.b.input;
    t["noise_b"] = truth.comp.b.noise;
    t["coef_b"] = truth.comp.b.coef;
    t["delay"] = truth.comp.delay;
    if (truth.generator == TripletSpec::Generator::Iigpp) {
        t["input_ab"] = truth.ab.input;
        t["noise_ab"] = truth.ab.noise;
        t["coef_ab"] = truth.ab.coef;
    }
    if (truth.generator == TripletSpec::Generator::Hmm) t["p_stay"] = truth.p_stay;
    if (truth.generator == TripletSpec::Generator::Wta)
        t["wta_winner"] = std::string(1, label_char(truth.wta_winner));
    if (!truth.ab_labels.empty()) {
        std::vector<std::string> rows;
        for (const auto& labels : truth.ab_labels) rows.push_back(labels_string(labels));
        t["ab_labels"] = rows;
    }

    py::dict out;
    out["window_end"] = data.window_end;
    out["a_trials"] = trials_list(data.a_trials);
    out["b_trials"] = trials_list(data.b_trials);
    out["ab_trials"] = trials_list(data.ab_trials);
    out["seed"] = cfg.seed;
    out["truth"] = t;
    return out;
}

py::dict fit_py(double window_end, const Trials& a, const Trials& b, const Trials& ab,
                std::optional<std::string> model, std::optional<std::uint64_t> seed,
                std::optional<int> workers, const std::string& config) {
    RunConfig cfg = config_with(config, seed, workers);
    if (model) cfg.model = *model;
    const Triplet data = make_triplet(window_end, a, b, ab);
    const BasisConfig basis = basis_for(cfg, window_end);
    SamplerConfig sampler = cfg.sampler;
    sampler.workers = cfg.workers;
    const PosteriorDraws draws =
        run_chain(data, model_from_name(cfg.model), basis, cfg.priors, sampler, cfg.seed);
    return draws_dict(draws);
}

py::dict compare_py(double window_end, const Trials& a, const Trials& b, const Trials& ab,
                    std::optional<std::uint64_t> seed, std::optional<int> workers,
                    const std::string& config) {
    RunConfig cfg = config_with(config, seed, workers);
    const Triplet data = make_triplet(window_end, a, b, ab);
    const BasisConfig basis = basis_for(cfg, window_end);
    SamplerConfig sampler = cfg.sampler;
    sampler.workers = cfg.workers;
    PredictiveConfig pred = cfg.predictive;
    pred.workers = cfg.workers;

    const CompareOutcome out = compare_models(data, basis, cfg.priors, sampler, pred, cfg.seed);

    py::dict waic_table;
    waic_table["iigpp"] = waic_dict(out.table.iigpp);
    waic_table["wta_a"] = waic_dict(out.table.wta_a);
    waic_table["wta_b"] = waic_dict(out.table.wta_b);
    waic_table["competition"] = waic_dict(out.table.competition);

    py::dict fits;
    fits["iigpp"] = draws_dict(out.iigpp);
    fits["wta_a"] = draws_dict(out.wta_a);
    fits["wta_b"] = draws_dict(out.wta_b);
    fits["competition"] = draws_dict(out.competition);

    py::dict res;
    res["waic"] = waic_table;
    res["fits"] = fits;
    res["best"] = model_name(out.result.best);
    res["category"] = category_name(out.result.category);
    res["tie"] = out.result.tie;
    res["mean_switches"] = out.predictive.mean_switches;
    res["rate_a"] = out.rate_a;
    res["rate_b"] = out.rate_b;
    return res;
}

py::dict screen_py(double window_end, const Trials& a, const Trials& b, const Trials& ab,
                   std::optional<std::uint64_t> seed, std::optional<int> workers,
                   const std::string& config) {
    RunConfig cfg = config_with(config, seed, workers);
    const Triplet data = make_triplet(window_end, a, b, ab);
    const BasisConfig basis = basis_for(cfg, window_end);
    SamplerConfig sampler = cfg.sampler;
    sampler.workers = cfg.workers;
    ScreenConfig scfg = cfg.screen;
    scfg.pvalue.workers = cfg.workers;

    const ScreenReport r = screen_triplet(data, basis, cfg.priors, sampler, scfg, cfg.seed);

    py::dict out;
    out["n_a"] = r.n_a;
    out["n_b"] = r.n_b;
    out["n_ab"] = r.n_ab;
    out["enough_trials"] = r.enough_trials;
    out["pass"] = r.pass;
    if (r.pvalues_run) {
        out["a_pvalues"] = pvalue_dict(r.a_pvalues);
        out["b_pvalues"] = pvalue_dict(r.b_pvalues);
        out["a_adequate"] = r.a_adequate;
        out["b_adequate"] = r.b_adequate;
    }
    if (r.distinguish_run) {
        out["lppd_separate"] = r.distinct.lppd_separate;
        out["lppd_joint"] = r.distinct.lppd_joint;
        out["distinct"] = r.distinct.pass;
    }
    return out;
}

double loglik_py(const std::vector<double>& times, double window_end, const py::dict& a,
                 const py::dict& b, double delay, int degree,
                 const std::optional<std::vector<double>>& knots) {
    SpikeTrain train{times, window_end};
    validate_train(train);
    CompetitionParams p{stimulus_of(a), stimulus_of(b), delay};
    return marginal_loglik(p, basis_of(window_end, degree, knots), train);
}

double renewal_loglik_py(const std::vector<double>& times, double window_end, const py::dict& params,
                         int degree, const std::optional<std::vector<double>>& knots) {
    SpikeTrain train{times, window_end};
    validate_train(train);
    return renewal_loglik(stimulus_of(params), basis_of(window_end, degree, knots), train);
}

}  // namespace

PYBIND11_MODULE(spikerace, m) {
    m.doc() = "Racing-accumulator and renewal point-process toolkit for spike train triplets";

    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    m.def("simulate", &simulate_py, py::arg("preset") = std::nullopt,
          py::arg("seed") = std::nullopt, py::arg("n_a") = std::nullopt,
          py::arg("n_b") = std::nullopt, py::arg("n_ab") = std::nullopt,
          py::arg("window_end") = std::nullopt, py::arg("config") = std::string(),
          "Draw a synthetic triplet from a named preset; returns trials plus the "
          "generating truth.");

    m.def("fit", &fit_py, py::arg("window_end"), py::arg("a_trials"), py::arg("b_trials"),
          py::arg("ab_trials"), py::arg("model") = std::nullopt, py::arg("seed") = std::nullopt,
          py::arg("workers") = std::nullopt, py::arg("config") = std::string(),
          "Sample one model's posterior on a triplet; returns named draws and "
          "per-train marginal log likelihoods.");

    m.def("compare", &compare_py, py::arg("window_end"), py::arg("a_trials"),
          py::arg("b_trials"), py::arg("ab_trials"), py::arg("seed") = std::nullopt,
          py::arg("workers") = std::nullopt, py::arg("config") = std::string(),
          "Fit all four candidate models, score them by WAIC, and classify the "
          "triplet.");

    m.def("screen", &screen_py, py::arg("window_end"), py::arg("a_trials"), py::arg("b_trials"),
          py::arg("ab_trials"), py::arg("seed") = std::nullopt,
          py::arg("workers") = std::nullopt, py::arg("config") = std::string(),
          "Run the staged inclusion screen on a triplet.");

    m.def(
        "waic",
        [](const Eigen::MatrixXd& train_loglik) { return waic_dict(waic(train_loglik)); },
        py::arg("train_loglik"),
        "Widely applicable information criterion from a draws-by-trains log "
        "likelihood matrix.");

    m.def("loglik", &loglik_py, py::arg("times"), py::arg("window_end"), py::arg("a"),
          py::arg("b"), py::arg("delay") = 0.0, py::arg("degree") = 3,
          py::arg("knots") = std::nullopt,
          "Marginal log likelihood of one dual-stimulus train under the "
          "competition model, labels summed out. a and b are dicts with keys "
          "input, noise, and optionally coef.");

    m.def("renewal_loglik", &renewal_loglik_py, py::arg("times"), py::arg("window_end"),
          py::arg("params"), py::arg("degree") = 3, py::arg("knots") = std::nullopt,
          "Log likelihood of one train under a lone renewal process.");
}
