#pragma once

#include <string>
#include <vector>

namespace vitag {

// The whole command-line surface behind the binary's main(), taking argv
// without the program name so tests can drive it in-process.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 data error
// (unparseable or inconsistent input files), 3 internal error.
int run(const std::vector<std::string>& args);

}  // namespace vitag
