#pragma once

#include <stdexcept>
#include <string>

// Error taxonomy. The CLI maps each class to a distinct exit code, so keep
// the classes disjoint: config_error for rejected user input, convergence_error
// for iterative/series machinery that failed to meet its tolerance,
// oracle_error for reference-model checks that did not hold.

namespace tdli {

struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

struct convergence_error : std::runtime_error {
    explicit convergence_error(const std::string& what) : std::runtime_error(what) {}
};

struct oracle_error : std::runtime_error {
    explicit oracle_error(const std::string& what) : std::runtime_error(what) {}
};

// A mass bin where every shot produced at least one count: the zero-fraction
// rate estimator is undefined there.
struct saturated_bin_error : std::runtime_error {
    explicit saturated_bin_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace tdli
