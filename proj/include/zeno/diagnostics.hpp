// diagnostics.hpp — Collected non-fatal warnings

#pragma once

#include <string>
#include <vector>

namespace zeno {

struct Diagnostics {
    std::vector<std::string> warnings;

    void warn(std::string message) { warnings.push_back(std::move(message)); }
    bool empty() const noexcept { return warnings.empty(); }
    void merge(const Diagnostics& other) {
        warnings.insert(warnings.end(), other.warnings.begin(), other.warnings.end());
    }
};

}  // namespace zeno
