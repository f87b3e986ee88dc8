#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace roughsew::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_failure = 1,
    exit_config = 2,
    exit_capability = 3,
    exit_hypothesis = 4,
    exit_convergence = 5,
};

// Entry point of the roughsew executable: solve | rate | verify | compare | invert | constants.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace roughsew::cli
