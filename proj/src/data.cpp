#include "spikerace/data.hpp"

#include <stdexcept>

namespace spikerace {

void validate_train(const SpikeTrain& train, const std::string& context) {
    if (!(train.window_end > 0.0))
        throw std::invalid_argument(context + ": window_end must be positive");
    double prev = 0.0;
    for (std::size_t j = 0; j < train.times.size(); ++j) {
        const double t = train.times[j];
        if (!(t > prev))
            throw std::invalid_argument(context + ": spike " + std::to_string(j) +
                                        " is not strictly after its predecessor (or <= 0)");
        if (!(t <= train.window_end))
            throw std::invalid_argument(context + ": spike " + std::to_string(j) +
                                        " lies past window_end");
        prev = t;
    }
}

void validate_triplet(const Triplet& t) {
    if (t.a_trials.empty() || t.b_trials.empty() || t.ab_trials.empty())
        throw std::invalid_argument("triplet needs at least one trial per condition");
    auto check_all = [&](const std::vector<SpikeTrain>& trains, const std::string& cond) {
        for (std::size_t i = 0; i < trains.size(); ++i) {
            if (trains[i].window_end != t.window_end)
                throw std::invalid_argument(cond + " trial " + std::to_string(i) +
                                            ": window_end differs from the triplet's");
            validate_train(trains[i], cond + " trial " + std::to_string(i));
        }
    };
    check_all(t.a_trials, "a");
    check_all(t.b_trials, "b");
    check_all(t.ab_trials, "ab");
}

}  // namespace spikerace
