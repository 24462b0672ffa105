#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace zskg {

// Command-line entry point; args excludes the program name. Returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr);

}  // namespace zskg
