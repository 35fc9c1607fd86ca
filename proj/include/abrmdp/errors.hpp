#pragma once

#include <stdexcept>
#include <string>

namespace abrmdp {

/// Invalid scenario, malformed input file or a violated type invariant.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The model admits no feasible joint action (e.g. R_th below N * R_min
/// while congestion is forbidden).
class InfeasibleModel : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace abrmdp
