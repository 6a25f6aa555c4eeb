#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace molblocks::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Runs one subcommand (vocab, tokenize, detokenize, hotspots, cluster,
/// filter, bench). `args[0]` is the program name. "-" as an input path reads
/// `in`. Returns 0 on success, 1 on a usage error, 2 on a data error.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace molblocks::cli
