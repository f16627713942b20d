#pragma once

namespace wwsp {

// Exit codes: 0 success, 1 invalid input, 2 usage error.
int run_cli(int argc, const char* const* argv);

}  // namespace wwsp
