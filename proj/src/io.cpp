#include "spikerace/io.hpp"

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include <json.hpp>

namespace spikerace {

using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    return out;
}

json parse(const std::string& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
}

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : allowed)
            if (item.key() == k) known = true;
        if (!known) throw InputError("unknown key '" + item.key() + "' in " + where);
    }
}

template <typename T>
void maybe(const json& j, const char* key, T& field) {
    if (j.contains(key)) j.at(key).get_to(field);
}

std::string generator_name(TripletSpec::Generator g) {
    switch (g) {
        case TripletSpec::Generator::Competition: return "competition";
        case TripletSpec::Generator::Iigpp: return "iigpp";
        case TripletSpec::Generator::Wta: return "wta";
        case TripletSpec::Generator::Hmm: return "hmm";
    }
    return "competition";
}

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<double> coef_vector(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

std::string labels_string(const std::vector<Label>& labels) {
    if (labels.empty()) return "-";
    std::string s;
    s.reserve(labels.size());
    for (Label l : labels) s.push_back(label_char(l));
    return s;
}

json pvalue_json(const PValueReport& r) {
    return json{{"avg_ll", r.p_avg_ll},
                {"mean_count", r.p_mean_count},
                {"var_count", r.p_var_count},
                {"draws_used", r.draws_used}};
}

}  // namespace

namespace {

RunConfig config_from_json(const json& j, const std::string& where) {
    RunConfig cfg;
    try {
        check_keys(j, "config",
                   {"model", "seed", "workers", "preset", "n_a", "n_b", "n_ab", "window_end",
                    "basis", "priors", "sampler", "screen", "predictive"});
        maybe(j, "model", cfg.model);
        maybe(j, "seed", cfg.seed);
        maybe(j, "workers", cfg.workers);
        maybe(j, "preset", cfg.preset);
        maybe(j, "n_a", cfg.n_a);
        maybe(j, "n_b", cfg.n_b);
        maybe(j, "n_ab", cfg.n_ab);
        maybe(j, "window_end", cfg.window_end);

        if (j.contains("basis")) {
            const json& b = j.at("basis");
            check_keys(b, "basis", {"degree", "interior_knots"});
            maybe(b, "degree", cfg.basis_degree);
            maybe(b, "interior_knots", cfg.interior_knots);
        }
        if (j.contains("priors")) {
            const json& p = j.at("priors");
            check_keys(p, "priors",
                       {"family", "input_a", "input_b", "noise_a", "noise_b", "delay_shape",
                        "delay_rate", "coef_df", "coef_scale"});
            if (p.contains("family")) {
                const std::string fam = p.at("family").get<std::string>();
                if (fam == "inverse_gaussian")
                    cfg.priors.family = PriorConfig::Family::InverseGaussian;
                else if (fam == "inverse_gamma")
                    cfg.priors.family = PriorConfig::Family::InverseGamma;
                else
                    throw InputError("unknown prior family '" + fam + "'");
            }
            maybe(p, "input_a", cfg.priors.input_a);
            maybe(p, "input_b", cfg.priors.input_b);
            maybe(p, "noise_a", cfg.priors.noise_a);
            maybe(p, "noise_b", cfg.priors.noise_b);
            maybe(p, "delay_shape", cfg.priors.delay_shape);
            maybe(p, "delay_rate", cfg.priors.delay_rate);
            maybe(p, "coef_df", cfg.priors.coef_df);
            maybe(p, "coef_scale", cfg.priors.coef_scale);
        }
        if (j.contains("sampler")) {
            const json& s = j.at("sampler");
            check_keys(s, "sampler",
                       {"warmup1", "warmup2", "samples", "leapfrog", "init_step", "target_accept",
                        "adapt_rate", "adapt_interval", "mass_reg", "divergence", "ensemble_size",
                        "mix_gamma_weight", "proposal_var_floor", "init_delay"});
            maybe(s, "warmup1", cfg.sampler.warmup1);
            maybe(s, "warmup2", cfg.sampler.warmup2);
            maybe(s, "samples", cfg.sampler.samples);
            maybe(s, "leapfrog", cfg.sampler.leapfrog);
            maybe(s, "init_step", cfg.sampler.init_step);
            maybe(s, "target_accept", cfg.sampler.target_accept);
            maybe(s, "adapt_rate", cfg.sampler.adapt_rate);
            maybe(s, "adapt_interval", cfg.sampler.adapt_interval);
            maybe(s, "mass_reg", cfg.sampler.mass_reg);
            maybe(s, "divergence", cfg.sampler.divergence);
            maybe(s, "ensemble_size", cfg.sampler.ensemble_size);
            maybe(s, "mix_gamma_weight", cfg.sampler.mix_gamma_weight);
            maybe(s, "proposal_var_floor", cfg.sampler.proposal_var_floor);
            maybe(s, "init_delay", cfg.sampler.init_delay);
        }
        if (j.contains("screen")) {
            const json& s = j.at("screen");
            check_keys(s, "screen", {"min_trials", "alpha", "pvalue_draws", "moment_reps"});
            maybe(s, "min_trials", cfg.screen.min_trials);
            maybe(s, "alpha", cfg.screen.alpha);
            maybe(s, "pvalue_draws", cfg.screen.pvalue.max_draws);
            maybe(s, "moment_reps", cfg.screen.pvalue.moment_reps);
        }
        if (j.contains("predictive")) {
            const json& p = j.at("predictive");
            check_keys(p, "predictive", {"n_rep", "attribute_to_previous"});
            maybe(p, "n_rep", cfg.predictive.n_rep);
            maybe(p, "attribute_to_previous", cfg.predictive.attribute_to_previous);
        }
    } catch (const json::exception& e) {
        throw InputError(where + ": " + e.what());
    }
    return cfg;
}

}  // namespace

RunConfig load_config(const std::string& path) { return config_from_json(parse(path), path); }

RunConfig config_from_json_text(const std::string& text) {
    if (text.empty()) return RunConfig{};
    try {
        return config_from_json(json::parse(text), "config");
    } catch (const json::exception& e) {
        throw InputError(std::string("config: ") + e.what());
    }
}

std::string config_hash(const RunConfig& cfg) {
    json j;
    j["model"] = cfg.model;
    j["seed"] = cfg.seed;
    j["preset"] = cfg.preset;
    j["n_a"] = cfg.n_a;
    j["n_b"] = cfg.n_b;
    j["n_ab"] = cfg.n_ab;
    j["window_end"] = cfg.window_end;
    j["basis"] = {{"degree", cfg.basis_degree}, {"interior_knots", cfg.interior_knots}};
    j["priors"] = {
        {"family",
         cfg.priors.family == PriorConfig::Family::InverseGaussian ? "inverse_gaussian"
                                                                   : "inverse_gamma"},
        {"input_a", cfg.priors.input_a},
        {"input_b", cfg.priors.input_b},
        {"noise_a", cfg.priors.noise_a},
        {"noise_b", cfg.priors.noise_b},
        {"delay_shape", cfg.priors.delay_shape},
        {"delay_rate", cfg.priors.delay_rate},
        {"coef_df", cfg.priors.coef_df},
        {"coef_scale", cfg.priors.coef_scale}};
    j["sampler"] = {{"warmup1", cfg.sampler.warmup1},
                    {"warmup2", cfg.sampler.warmup2},
                    {"samples", cfg.sampler.samples},
                    {"leapfrog", cfg.sampler.leapfrog},
                    {"init_step", cfg.sampler.init_step},
                    {"target_accept", cfg.sampler.target_accept},
                    {"adapt_rate", cfg.sampler.adapt_rate},
                    {"adapt_interval", cfg.sampler.adapt_interval},
                    {"mass_reg", cfg.sampler.mass_reg},
                    {"divergence", cfg.sampler.divergence},
                    {"ensemble_size", cfg.sampler.ensemble_size},
                    {"mix_gamma_weight", cfg.sampler.mix_gamma_weight},
                    {"proposal_var_floor", cfg.sampler.proposal_var_floor},
                    {"init_delay", cfg.sampler.init_delay}};
    j["screen"] = {{"min_trials", cfg.screen.min_trials},
                   {"alpha", cfg.screen.alpha},
                   {"pvalue_draws", cfg.screen.pvalue.max_draws},
                   {"moment_reps", cfg.screen.pvalue.moment_reps}};
    j["predictive"] = {{"n_rep", cfg.predictive.n_rep},
                       {"attribute_to_previous", cfg.predictive.attribute_to_previous}};
    const std::string dump = j.dump();

    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

BasisConfig basis_for(const RunConfig& cfg, double window_end) {
    BasisConfig b;
    b.degree = cfg.basis_degree;
    b.t_lo = 0.0;
    b.t_hi = window_end;
    if (cfg.interior_knots.empty()) {
        b.interior = {0.25 * window_end, 0.5 * window_end, 0.75 * window_end};
    } else {
        b.interior = cfg.interior_knots;
    }
    try {
        validate_basis(b);
    } catch (const std::invalid_argument& e) {
        throw InputError(std::string("basis: ") + e.what());
    }
    return b;
}

TripletSpec spec_for(const RunConfig& cfg) {
    TripletSpec spec;
    try {
        spec = preset_spec(cfg.preset);
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }
    if (cfg.n_a < 1 || cfg.n_b < 1 || cfg.n_ab < 1)
        throw InputError("trial counts must be at least 1");
    if (cfg.window_end <= 0.0) throw InputError("window_end must be positive");
    spec.n_a = cfg.n_a;
    spec.n_b = cfg.n_b;
    spec.n_ab = cfg.n_ab;
    spec.window_end = cfg.window_end;
    return spec;
}

Triplet load_triplet(const std::string& path) {
    const json j = parse(path);
    Triplet data;
    try {
        check_keys(j, path,
                   {"window_end", "a_trials", "b_trials", "ab_trials", "config_hash", "seed"});
        data.window_end = j.at("window_end").get<double>();
        const auto read_trains = [&](const char* key) {
            std::vector<SpikeTrain> trains;
            for (const auto& row : j.at(key)) {
                SpikeTrain t;
                t.window_end = data.window_end;
                t.times = row.get<std::vector<double>>();
                trains.push_back(std::move(t));
            }
            return trains;
        };
        data.a_trials = read_trains("a_trials");
        data.b_trials = read_trains("b_trials");
        data.ab_trials = read_trains("ab_trials");
    } catch (const json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
    try {
        validate_triplet(data);
    } catch (const std::invalid_argument& e) {
        throw InputError(path + ": " + e.what());
    }
    return data;
}

void save_triplet(const std::string& path, const Triplet& data, const std::string& hash,
                  std::uint64_t seed) {
    json j;
    j["window_end"] = data.window_end;
    const auto dump_trains = [](const std::vector<SpikeTrain>& trains) {
        json rows = json::array();
        for (const auto& t : trains) rows.push_back(t.times);
        return rows;
    };
    j["a_trials"] = dump_trains(data.a_trials);
    j["b_trials"] = dump_trains(data.b_trials);
    j["ab_trials"] = dump_trains(data.ab_trials);
    j["config_hash"] = hash;
    j["seed"] = seed;
    open_out(path) << j.dump(2) << "\n";
}

void save_truth(const std::string& path, const TripletTruth& truth, const std::string& hash,
                std::uint64_t seed) {
    json j;
    j["generator"] = generator_name(truth.generator);
    j["input_a"] = truth.comp.a.input;
    j["noise_a"] = truth.comp.a.noise;
    j["coef_a"] = coef_vector(truth.comp.a.coef);
    j["input_b"] = truth.comp.b.input;
    j["noise_b"] = truth.comp.b.noise;
    j["coef_b"] = coef_vector(truth.comp.b.coef);
    j["delay"] = truth.comp.delay;
    if (truth.generator == TripletSpec::Generator::Iigpp) {
        j["input_ab"] = truth.ab.input;
        j["noise_ab"] = truth.ab.noise;
        j["coef_ab"] = coef_vector(truth.ab.coef);
    }
    if (truth.generator == TripletSpec::Generator::Hmm) j["p_stay"] = truth.p_stay;
    if (truth.generator == TripletSpec::Generator::Wta)
        j["wta_winner"] = std::string(1, label_char(truth.wta_winner));
    if (!truth.ab_labels.empty()) {
        json rows = json::array();
        for (const auto& labels : truth.ab_labels) rows.push_back(labels_string(labels));
        j["ab_labels"] = rows;
    }
    j["config_hash"] = hash;
    j["seed"] = seed;
    open_out(path) << j.dump(2) << "\n";
}

void save_draws_csv(const std::string& path, const PosteriorDraws& draws) {
    std::ofstream out = open_out(path);
    std::string header;
    for (const auto& name : draws.names) {
        if (!header.empty()) header += ',';
        header += name;
    }
    for (int i = 0; i < draws.train_loglik.cols(); ++i)
        header += ",lml_train_" + std::to_string(i);
    out << header << "\n";
    for (int r = 0; r < draws.n_draws(); ++r) {
        std::string line;
        for (int c = 0; c < draws.values.cols(); ++c) {
            if (c > 0) line += ',';
            line += format_value(draws.values(r, c));
        }
        for (int c = 0; c < draws.train_loglik.cols(); ++c) {
            line += ',';
            line += format_value(draws.train_loglik(r, c));
        }
        out << line << "\n";
    }
    if (!out) throw InputError("cannot write " + path);
}

void save_labels(const std::string& path, const PosteriorDraws& draws) {
    std::ofstream out = open_out(path);
    for (std::size_t d = 0; d < draws.label_draws.size(); ++d)
        for (std::size_t t = 0; t < draws.label_draws[d].size(); ++t)
            out << d << " " << t << " " << labels_string(draws.label_draws[d][t]) << "\n";
    if (!out) throw InputError("cannot write " + path);
}

void save_manifest(const std::string& path, const std::string& command, const RunConfig& cfg,
                   const std::map<std::string, std::string>& files,
                   const std::map<std::string, double>& numbers) {
    json j;
    j["command"] = command;
    j["model"] = cfg.model;
    j["seed"] = cfg.seed;
    j["workers"] = cfg.workers;
    j["config_hash"] = config_hash(cfg);
    j["files"] = files;
    j["metrics"] = numbers;
    open_out(path) << j.dump(2) << "\n";
}

void save_waic_json(const std::string& path, const WaicTable& table, const Classification& cls,
                    double mean_switches, double rate_a, double rate_b, const std::string& hash,
                    std::uint64_t seed) {
    const auto entry = [](const WaicResult& w) {
        return json{{"lppd", w.lppd}, {"p_eff", w.p_eff}, {"waic", w.waic}};
    };
    json j;
    j["models"] = {{"iigpp", entry(table.iigpp)},
                   {"wta_a", entry(table.wta_a)},
                   {"wta_b", entry(table.wta_b)},
                   {"competition", entry(table.competition)}};
    j["best"] = model_name(cls.best);
    j["category"] = category_name(cls.category);
    j["tie"] = cls.tie;
    j["mean_switches"] = mean_switches;
    j["rate_a"] = rate_a;
    j["rate_b"] = rate_b;
    j["config_hash"] = hash;
    j["seed"] = seed;
    open_out(path) << j.dump(2) << "\n";
}

void save_screen_json(const std::string& path, const ScreenReport& report,
                      const std::string& hash, std::uint64_t seed) {
    json j;
    j["n_a"] = report.n_a;
    j["n_b"] = report.n_b;
    j["n_ab"] = report.n_ab;
    j["enough_trials"] = report.enough_trials;
    j["pvalues_run"] = report.pvalues_run;
    if (report.pvalues_run) {
        j["a_pvalues"] = pvalue_json(report.a_pvalues);
        j["b_pvalues"] = pvalue_json(report.b_pvalues);
        j["a_adequate"] = report.a_adequate;
        j["b_adequate"] = report.b_adequate;
    }
    j["distinguish_run"] = report.distinguish_run;
    if (report.distinguish_run) {
        j["lppd_separate"] = report.distinct.lppd_separate;
        j["lppd_joint"] = report.distinct.lppd_joint;
        j["distinct"] = report.distinct.pass;
    }
    j["pass"] = report.pass;
    j["config_hash"] = hash;
    j["seed"] = seed;
    open_out(path) << j.dump(2) << "\n";
}

}  // namespace spikerace
