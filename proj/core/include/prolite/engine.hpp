// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "prolite/clpfd.hpp"
#include "prolite/clpr.hpp"
#include "prolite/errors.hpp"
#include "prolite/reader.hpp"
#include "prolite/term.hpp"

namespace prolite {

/// Per-query resource limits; both must be positive.
struct Budget {
    std::uint64_t max_steps = 5'000'000;
    std::chrono::milliseconds wall_timeout{10'000};
};

struct EngineOptions {
    bool occurs_check = false;
    fd::LabelStrategy label_strategy = fd::LabelStrategy::Leftmost;
    clpr::RConfig r_config;
    /// Label FD variables reachable from the query when a solution leaves them non-ground.
    bool auto_label = true;
};

/// Clauses indexed by (name, arity). Immutable after consult.
class Database {
public:
    const std::vector<Clause>* clauses(Symbol name, std::size_t arity) const;
    bool defines(Symbol name, std::size_t arity) const { return clauses(name, arity) != nullptr; }
    std::size_t predicate_count() const { return preds_.size(); }
    /// Directives are not executed; each one produces a warning.
    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    friend Database consult(const Program& program);
    friend const Database& prelude_database();
    std::map<std::pair<std::uint32_t, std::size_t>, std::vector<Clause>> preds_;
    std::vector<std::string> warnings_;
};

/// Indexes a program. Throws LogicError(BuiltinRedefinition) when a head names a builtin.
Database consult(const Program& program);

/// Native builtins and the library predicates defined in the prelude.
bool is_builtin(std::string_view name, std::size_t arity);

/// Exact arithmetic evaluation. `/` is exact, `//` floors, `mod` follows the divisor's sign.
/// Throws Instantiation, Type and Evaluation errors.
Rational eval_arith(const Term& expr, const Bindings& bindings);

/// Plain syntactic unification (no constraint wakeup). On failure the bindings are restored.
bool unify(const Term& a, const Term& b, Bindings& bindings, bool occurs_check = false);

class Machine;

/// Lazily enumerates the solutions of one query in SLD order.
class Solver {
public:
    /// `query` uses variables 0..query.var_count-1; they keep those ids in bindings().
    Solver(const Database& db, const ParsedTerm& query, Budget budget = {}, EngineOptions options = {});
    Solver(const Database& db, std::string_view query_text, Budget budget = {}, EngineOptions options = {});
    ~Solver();
    Solver(const Solver&) = delete;
    Solver& operator=(const Solver&) = delete;

    /// Advances to the next solution; false when exhausted. Errors propagate as LogicError.
    bool next();

    const ParsedTerm& query() const;
    const Bindings& bindings() const;
    /// Fully substituted value of a query variable in the current solution.
    Term value(VarId query_var) const;
    std::optional<Term> value(std::string_view var_name) const;
    /// Query variable bindings rendered as `Name = Value` in query order; unbound names omitted.
    std::vector<std::pair<std::string, std::string>> answer_text() const;

    const fd::FdStore& fd_store() const;
    const clpr::RStore& r_store() const;
    /// Exact value or residue of an unbound rational variable.
    clpr::Residue residue(std::span<const VarId> vars) const;

    std::uint64_t steps() const;
    bool auto_labeled() const;
    /// Text produced by write/1, format/2 and friends.
    const std::string& output() const;

private:
    std::unique_ptr<Machine> m_;
};

/// Collects up to `limit` solutions as rendered answers.
std::vector<std::vector<std::pair<std::string, std::string>>> solve_all(const Database& db, std::string_view query,
                                                                        std::size_t limit = SIZE_MAX,
                                                                        Budget budget = {});

}  // namespace prolite
