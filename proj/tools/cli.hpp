#pragma once

namespace ordcert::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes: 0 success, 1 usage or IO error, 2 empty confidence set
/// under --fail-on-empty.
int run(int argc, char** argv);

}  // namespace ordcert::cli
