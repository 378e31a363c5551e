#pragma once

namespace gcdl {

// Entry point behind the command-line binary. Exit codes: 0 success,
// 1 runtime failure, 2 usage or config error.
int cli_main(int argc, const char* const* argv);

}  // namespace gcdl
