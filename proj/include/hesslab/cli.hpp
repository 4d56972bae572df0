#pragma once

namespace hesslab::cli {

// Exit codes: 0 all checks passed, 1 a mathematical check failed,
// 2 usage or I/O error.
int run(int argc, const char* const* argv);

}  // namespace hesslab::cli
