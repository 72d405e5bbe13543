#pragma once

#include "akt/solver.hpp"

#include <string>

#ifndef AKT_DATA_DIR
#define AKT_DATA_DIR "data"
#endif

namespace testing_support {

inline std::string data_path(const std::string& file) { return std::string(AKT_DATA_DIR) + "/" + file; }

// Largest increase of the exact objective between consecutive outer iterations.
inline double worst_increase(const akt::FitSummary& s) {
    double worst = 0.0;
    for (std::size_t k = 1; k < s.objective_history.size(); ++k) {
        worst = std::max(worst, s.objective_history[k] - s.objective_history[k - 1]);
    }
    return worst;
}

}  // namespace testing_support
