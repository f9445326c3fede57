#pragma once

#include <string>
#include <vector>

namespace hhcl::cli {

inline constexpr const char* kToolVersion = "0.1.0";

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;  // bad flags, bad config, incompatible inputs
inline constexpr int kExitIo = 3;
inline constexpr int kExitNumeric = 4;
inline constexpr int kExitCollapse = 5;

/// Runs the `hhcl` command line. args[0] is the program name.
int run(const std::vector<std::string>& args);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);

}  // namespace hhcl::cli
