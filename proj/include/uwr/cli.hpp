#pragma once

namespace uwr {

/// Entry point for the uwrobust tool. Returns the process exit code:
/// 0 success, 1 invalid configuration/flags, 2 runtime failure.
int run(int argc, const char* const* argv);

}  // namespace uwr
