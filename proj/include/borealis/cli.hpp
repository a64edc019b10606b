#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace borealis::cli {

inline constexpr int kOk = 0;
inline constexpr int kValidationError = 1;
inline constexpr int kRuntimeError = 2;

/// Entry point of the `borealis` command. args[0] is the program name.
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace borealis::cli
