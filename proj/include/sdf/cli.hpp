#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sdf {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int usage = 1;
inline constexpr int data = 2;
inline constexpr int config = 3;
inline constexpr int invariant = 4;
} // namespace exit_code

/// Entry point of the `sdf` tool; args exclude the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace sdf
