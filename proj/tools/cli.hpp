// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>

namespace prolite::cli {

/// Exit codes: 0 success (run: at least one solution), 1 no solution, 2 error or usage error.
int main(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace prolite::cli
