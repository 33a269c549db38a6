// errors.hpp — Exception types shared across the simulator

#pragma once

#include <stdexcept>
#include <string>

namespace zeno {

// Physical or numerical parameter outside its admissible domain.
class InvalidParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Caller misused an API (empty trajectory, mismatched grids, negative time).
class UsageError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Integration produced non-finite values or lost probability off the count ladder.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, double time)
        : std::runtime_error(what), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

// Post-processing could not interpret its input (e.g. non-unimodal spectrum).
class AnalysisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace zeno
