// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "prolite/errors.hpp"
#include "prolite/numeric.hpp"
#include "prolite/term.hpp"

namespace prolite::clpr {

enum class RowRel { Eq, Le, Lt };

/// sum(coeffs[x] * x) rel constant. Zero coefficients are never stored.
struct LinRow {
    std::map<VarId, Rational> coeffs;
    Rational constant;
    RowRel rel = RowRel::Eq;
};

struct Residue {
    std::map<VarId, Rational> values;
    /// Requested variables without a value plus the free variables they depend on.
    std::vector<VarId> undetermined;
    bool complete() const { return undetermined.empty(); }
};

struct RConfig {
    std::size_t ineq_cap = 12;
    std::size_t elimination_row_cap = 4096;
};

/// Equations in reduced row-echelon form (pivot = smallest variable id of the
/// reduced row) and raw inequality rows, with an undo log.
class RStore {
public:
    explicit RStore(RConfig config = {}) : config_(config) {}

    bool has(VarId v) const { return vars_.count(v) != 0; }
    std::vector<VarId> vars() const { return {vars_.begin(), vars_.end()}; }
    void ensure(VarId v);

    /// Reduces and inserts the row; false when the store becomes inconsistent.
    /// Throws IneqCapExceeded when the inequality check exceeds its caps.
    bool post(LinRow row);

    /// Fourier-Motzkin feasibility of the inequality rows after echelon substitution.
    bool check_ineq() const;

    std::optional<Rational> value(VarId v) const;
    /// Pivot variables whose definitions are constant.
    std::vector<std::pair<VarId, Rational>> determined() const;
    Residue residue(std::span<const VarId> vars) const;

    std::size_t row_count() const { return defs_.size(); }
    std::size_t ineq_count() const { return ineqs_.size(); }
    /// No pivot occurs in any definition.
    bool echelon_invariant() const;

    std::size_t mark() const { return log_.size(); }
    void restore(std::size_t mark);

private:
    /// pivot = sum(coeffs[y] * y) + constant over non-pivot y
    struct Def {
        std::map<VarId, Rational> coeffs;
        Rational constant;
    };
    struct Undo {
        enum Kind { SetDef, AddIneq, AddVar } kind;
        VarId var = 0;
        std::optional<Def> old;
    };

    LinRow substitute(const LinRow& row) const;
    void set_def(VarId pivot, std::optional<Def> def);

    RConfig config_;
    std::map<VarId, Def> defs_;
    std::vector<LinRow> ineqs_;
    std::set<VarId> vars_;
    std::vector<Undo> log_;
};

/// Parses `L op R` with op in =, =:=, <, >, =<, >= or the # family into a row over
/// the unbound variables of the expressions. Throws NonLinearUnsupported, Type, Evaluation.
LinRow linearize_relation(const Term& relation, const Bindings& bindings);

/// True for relations that r_post accepts.
bool is_relation(const Term& t);

/// Linearizes and posts one relation; false on inconsistency.
bool r_post(const Term& relation, const Bindings& bindings, RStore& store);
inline Residue r_residue(const RStore& store, std::span<const VarId> vars) { return store.residue(vars); }
inline bool r_check_ineq(const RStore& store) { return store.check_ineq(); }

}  // namespace prolite::clpr
