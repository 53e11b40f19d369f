// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace linwalk::suite {

struct CriterionResult {
    int id = 0;
    std::string name;
    std::string statement; // which mathematical property the check exercises
    bool pass = false;
    bool diagnostic = false; // reported, never load-bearing for limits with no
                             // published rate
    double runtime_seconds = 0.0;
    double budget_seconds = 0.0;
    std::vector<std::string> details;
};

/// Number of acceptance criteria.
int criterion_count();

/// Runs one criterion (1-based). The master seed pins every random input so
/// the suite is a fixed, reproducible experiment.
CriterionResult run_criterion(int id, std::uint64_t master_seed = 20240808,
                              unsigned workers = 1);

/// Runs all criteria in order.
std::vector<CriterionResult> run_all(std::uint64_t master_seed = 20240808, unsigned workers = 1);

/// One line per criterion: "[PASS] 03 mc-vs-oracle (12.3s) ...".
std::string format_line(const CriterionResult& r);

} // namespace linwalk::suite
