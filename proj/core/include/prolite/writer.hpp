// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "prolite/reader.hpp"
#include "prolite/term.hpp"

namespace prolite {

struct WriteOptions {
    const Bindings* bindings = nullptr;
    const OpTable* ops = nullptr;  // defaults to OpTable::standard()
    /// Names for variables; unnamed variables print as _G<id>.
    const std::vector<std::pair<std::string, VarId>>* var_names = nullptr;
};

/// Canonical rendering: operators per the op table, lists as [a,b|T],
/// rationals as `N rdiv D`, atoms quoted where needed.
std::string write_term(const Term& t, const WriteOptions& options = {});

/// Atom text with quotes added when it would not read back as the same atom.
std::string quote_atom_if_needed(const std::string& name);

}  // namespace prolite
