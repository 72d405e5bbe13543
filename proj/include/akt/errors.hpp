#pragma once

#include <stdexcept>
#include <string>

namespace akt {

// Configuration problems are reported with std::invalid_argument; these two
// cover the remaining failure classes the CLI maps to distinct exit codes.

/// Numerical failure inside a fit or factorization.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unreadable or unwritable files, malformed data files.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace akt
