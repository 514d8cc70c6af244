#pragma once

#include <string>
#include <vector>

namespace sdd {

// Exit codes of the command-line tool.
enum exit_code : int {
    exit_pass = 0,
    exit_io = 1,
    exit_precondition = 2,
    exit_check_failed = 3,
};

// sddtt solve|transform|verify|experiment <config> [--out DIR] [--dt X] [--ds X]
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

}  // namespace sdd
