#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace icpgen::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Largest sample size evaluated with the exact assignment.
inline constexpr std::size_t kExactEmdLimit = 2000;

// Entry point behind the icpgen binary. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace icpgen::cli
