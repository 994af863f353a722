#pragma once
#include <stdexcept>
#include <string>

namespace hnnflow {

// solver breakdowns: non-convergence, blow-up, step rejection
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// bad run configuration; message carries the offending key or line number
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace hnnflow
