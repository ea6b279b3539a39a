#pragma once

#include <stdexcept>

namespace spikerace {

/** Bad or missing input files and malformed configuration (exit code 2). */
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/** Non-finite results from an otherwise valid run (exit code 3). */
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace spikerace
