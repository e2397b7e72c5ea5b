// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace prolite::detail {

extern const char* const kPreludeSource;

}  // namespace prolite::detail
