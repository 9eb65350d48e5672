#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace gesmr {

using Vector = std::vector<double>;

/// Bad user configuration: unknown names, invalid divisors, empty parent pools.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Broken internal contract, e.g. sorting a population with stale values.
class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace gesmr
