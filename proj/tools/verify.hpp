#pragma once

#include <string>
#include <vector>

namespace dnsp::tools {

struct CheckResult {
    std::string suite;
    std::string check;
    int instances = 0;
    double worst = 0.0; ///< largest residual seen
    double tolerance = 0.0;
    bool passed = false;
};

/// Known suite names: gradients, svd, priors, all.
bool is_suite(const std::string& name);

/// Runs a suite with fixed seeds. Throws ConfigError for an unknown name.
std::vector<CheckResult> run_suite(const std::string& name);

} // namespace dnsp::tools
