// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "prolite/numeric.hpp"

namespace prolite {

using VarId = std::uint32_t;

/// Interned name. Two symbols are equal iff their ids are equal.
class Symbol {
public:
    Symbol() = default;
    static Symbol intern(std::string_view name);
    static Symbol from_id(std::uint32_t id) { return Symbol(id); }

    std::uint32_t id() const { return id_; }
    const std::string& name() const;

    friend bool operator==(Symbol a, Symbol b) { return a.id_ == b.id_; }
    friend auto operator<=>(Symbol a, Symbol b) { return a.id_ <=> b.id_; }

private:
    explicit Symbol(std::uint32_t id) : id_(id) {}
    std::uint32_t id_ = 0;  // 0 is "[]"
};

enum class TermKind : std::uint8_t { Unbound, Var, Atom, Int, Rat, Compound };

namespace detail {
struct Boxed;
}

/// Immutable logic term. Small integers, atoms, and variables are stored inline;
/// big integers, rationals and compounds share an immutable heap node.
class Term {
public:
    /// The "no term" value; used for unbound slots.
    Term() = default;

    static Term var(VarId id);
    static Term atom(Symbol s);
    static Term atom(std::string_view name) { return atom(Symbol::intern(name)); }
    static Term integer(std::int64_t value);
    static Term integer(const BigInt& value);
    /// Int when the value is integral, otherwise Rat.
    static Term number(const Rational& value);
    static Term compound(Symbol functor, std::vector<Term> args);
    static Term compound(std::string_view functor, std::vector<Term> args) {
        return compound(Symbol::intern(functor), std::move(args));
    }
    static Term list(std::span<const Term> items, Term tail = nil());
    static Term nil();

    TermKind kind() const { return kind_; }
    bool is_null() const { return kind_ == TermKind::Unbound; }
    bool is_var() const { return kind_ == TermKind::Var; }
    bool is_atom() const { return kind_ == TermKind::Atom; }
    bool is_int() const { return kind_ == TermKind::Int; }
    bool is_rat() const { return kind_ == TermKind::Rat; }
    bool is_number() const { return kind_ == TermKind::Int || kind_ == TermKind::Rat; }
    bool is_compound() const { return kind_ == TermKind::Compound; }
    bool is_callable() const { return is_atom() || is_compound(); }
    bool is_atom(std::string_view name) const;
    bool is_nil() const;
    /// Compound with the given name and arity.
    bool is_functor(std::string_view name, std::size_t arity) const;

    VarId var_id() const { return static_cast<VarId>(small_); }
    /// Atom name or compound functor.
    Symbol symbol() const;
    const std::string& name() const { return symbol().name(); }

    bool is_small_int() const { return kind_ == TermKind::Int && !box_; }
    std::int64_t small_int() const { return small_; }
    BigInt int_value() const;
    /// Value of an Int or Rat term.
    Rational number_value() const;

    std::size_t arity() const;
    std::span<const Term> args() const;
    const Term& arg(std::size_t i) const { return args()[i]; }

    /// Structural equality (variables compare by id).
    friend bool operator==(const Term& a, const Term& b);

private:
    TermKind kind_ = TermKind::Unbound;
    std::int64_t small_ = 0;
    std::shared_ptr<const detail::Boxed> box_;
};

/// Standard order of terms: Var < Number < Atom < Compound.
int compare_terms(const Term& a, const Term& b);

struct Clause {
    Term head;
    std::vector<Term> body;  // empty for a fact
    /// Variables are numbered 0..var_count-1 and renamed on each use.
    std::uint32_t var_count = 0;
};

/// Variable binding map with a trail. A slot that holds a null Term is unbound.
class Bindings {
public:
    VarId fresh();
    VarId fresh_block(std::uint32_t count);
    std::size_t var_count() const { return slots_.size(); }

    bool is_bound(VarId v) const { return v < slots_.size() && !slots_[v].is_null(); }
    const Term& value(VarId v) const { return slots_[v]; }
    void bind(VarId v, Term t);

    struct Mark {
        std::size_t trail;
        std::size_t vars;
    };
    Mark mark() const { return {trail_.size(), slots_.size()}; }
    /// Unbinds everything bound since the mark and forgets variables created since.
    void undo_to(Mark m);

    std::span<const VarId> trail() const { return trail_; }

private:
    std::vector<Term> slots_;
    std::vector<VarId> trail_;
};

/// Follows the binding chain of the root only.
const Term& deref(const Term& t, const Bindings& b);

/// True iff variable v occurs anywhere in the dereferenced expansion of t.
bool occurs(VarId v, const Term& t, const Bindings& b);

/// Deep substitution of all bound variables.
Term resolve(const Term& t, const Bindings& b);

/// Renames Var(i) to Var(base + i).
Term offset_vars(const Term& t, VarId base);

/// Collects distinct unbound variables of t in depth-first left-to-right order.
void collect_vars(const Term& t, const Bindings& b, std::vector<VarId>& out);

bool is_proper_list(const Term& t, const Bindings& b);
/// Elements of a proper list; nullopt-like empty return with ok=false otherwise.
bool list_elements(const Term& t, const Bindings& b, std::vector<Term>& out);

}  // namespace prolite
