// Error taxonomy shared across modules. Usage errors raise std::domain_error;
// these two carry the remaining CLI exit codes: numeric_error for failed
// quadrature/blow-up (exit 2), resource_error for exceeded enumeration or
// lattice caps (exit 3).
#pragma once

#include <stdexcept>

namespace lab {

struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct resource_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace lab
