#pragma once

namespace pcr::cli {

// Exit codes: 0 success, 1 runtime failure (one-line diagnostic on stderr),
// 2 usage error.
int run(int argc, char** argv);

}  // namespace pcr::cli
