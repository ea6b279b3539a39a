#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace spikerace {

/** Which accumulator produced a spike on a dual-stimulus trial. */
enum class Label : std::uint8_t { A = 0, B = 1 };

inline Label other(Label l) { return l == Label::A ? Label::B : Label::A; }
inline char label_char(Label l) { return l == Label::A ? 'A' : 'B'; }

struct SpikeTrain {
    std::vector<double> times;  // strictly increasing, in (0, window_end]
    double window_end = 1.0;

    int n() const { return static_cast<int>(times.size()); }
};

/** One experimental unit: trials under stimulus A, B, and both together. */
struct Triplet {
    std::vector<SpikeTrain> a_trials;
    std::vector<SpikeTrain> b_trials;
    std::vector<SpikeTrain> ab_trials;
    double window_end = 1.0;
};

/** Throws std::invalid_argument on unordered or out-of-window spike times. */
void validate_train(const SpikeTrain& train, const std::string& context = "train");

/** Validates every train and requires at least one trial per condition. */
void validate_triplet(const Triplet& t);

}  // namespace spikerace
