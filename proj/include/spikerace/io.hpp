#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "spikerace/data.hpp"
#include "spikerace/errors.hpp"
#include "spikerace/mcmc.hpp"
#include "spikerace/modelselect.hpp"
#include "spikerace/posteriorpred.hpp"
#include "spikerace/simulate.hpp"

namespace spikerace {

/** Everything a command needs beyond its file arguments. */
struct RunConfig {
    std::string model = "competition";
    std::uint64_t seed = 1;
    int workers = 1;

    // simulation
    std::string preset = "competition";
    int n_a = 25, n_b = 25, n_ab = 25;
    double window_end = 1.0;

    // basis; empty interior knots mean quartiles of the data window
    int basis_degree = 3;
    std::vector<double> interior_knots;

    PriorConfig priors;
    SamplerConfig sampler;
    ScreenConfig screen;
    PredictiveConfig predictive;
};

/** Reads a JSON config; unknown keys are rejected to catch typos. */
RunConfig load_config(const std::string& path);

/** Same parsing from in-memory JSON text (empty text means all defaults). */
RunConfig config_from_json_text(const std::string& text);

/** FNV-1a hash of the canonical config dump, as 16 hex digits. */
std::string config_hash(const RunConfig& cfg);

/** The basis the config implies for a recording window of the given length. */
BasisConfig basis_for(const RunConfig& cfg, double window_end);

/** The generator spec the config implies; bad presets or counts become InputError. */
TripletSpec spec_for(const RunConfig& cfg);

Triplet load_triplet(const std::string& path);
void save_triplet(const std::string& path, const Triplet& data, const std::string& hash,
                  std::uint64_t seed);

void save_truth(const std::string& path, const TripletTruth& truth, const std::string& hash,
                std::uint64_t seed);

/** Header of parameter names then lml_train_<i> columns; every value printed with %.17g. */
void save_draws_csv(const std::string& path, const PosteriorDraws& draws);

/** One line per (draw, dual-stimulus trial): indices then the label letters, '-' if none. */
void save_labels(const std::string& path, const PosteriorDraws& draws);

void save_manifest(const std::string& path, const std::string& command, const RunConfig& cfg,
                   const std::map<std::string, std::string>& files,
                   const std::map<std::string, double>& numbers);

void save_waic_json(const std::string& path, const WaicTable& table, const Classification& cls,
                    double mean_switches, double rate_a, double rate_b, const std::string& hash,
                    std::uint64_t seed);

void save_screen_json(const std::string& path, const ScreenReport& report,
                      const std::string& hash, std::uint64_t seed);

}  // namespace spikerace
