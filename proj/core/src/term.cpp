// SPDX-License-Identifier: Apache-2.0
#include "prolite/term.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>
#include <unordered_set>

namespace prolite {

namespace {

class SymbolTable {
public:
    SymbolTable() { intern("[]"); }

    std::uint32_t intern(std::string_view name) {
        {
            std::shared_lock lock(mu_);
            auto it = ids_.find(name);
            if (it != ids_.end()) return it->second;
        }
        std::unique_lock lock(mu_);
        auto it = ids_.find(name);
        if (it != ids_.end()) return it->second;
        names_.emplace_back(name);
        auto id = static_cast<std::uint32_t>(names_.size() - 1);
        ids_.emplace(names_.back(), id);
        return id;
    }

    const std::string& name(std::uint32_t id) {
        std::shared_lock lock(mu_);
        return names_[id];
    }

private:
    std::shared_mutex mu_;
    std::deque<std::string> names_;  // stable addresses
    std::unordered_map<std::string_view, std::uint32_t> ids_;
};

SymbolTable& symbols() {
    static SymbolTable table;
    return table;
}

}  // namespace

Symbol Symbol::intern(std::string_view name) { return Symbol(symbols().intern(name)); }

const std::string& Symbol::name() const { return symbols().name(id_); }

namespace detail {
struct Boxed {
    BigInt big;
    Rational rat;
    Symbol functor;
    std::vector<Term> args;
};
}  // namespace detail

Term Term::var(VarId id) {
    Term t;
    t.kind_ = TermKind::Var;
    t.small_ = id;
    return t;
}

Term Term::atom(Symbol s) {
    Term t;
    t.kind_ = TermKind::Atom;
    t.small_ = s.id();
    return t;
}

Term Term::nil() { return atom(Symbol()); }

Term Term::integer(std::int64_t value) {
    Term t;
    t.kind_ = TermKind::Int;
    t.small_ = value;
    return t;
}

Term Term::integer(const BigInt& value) {
    if (auto small = to_int64(value)) return integer(*small);
    Term t;
    t.kind_ = TermKind::Int;
    auto box = std::make_shared<detail::Boxed>();
    box->big = value;
    t.box_ = std::move(box);
    return t;
}

Term Term::number(const Rational& value) {
    if (value.is_integer()) return integer(value.num());
    Term t;
    t.kind_ = TermKind::Rat;
    auto box = std::make_shared<detail::Boxed>();
    box->rat = value;
    t.box_ = std::move(box);
    return t;
}

Term Term::compound(Symbol functor, std::vector<Term> args) {
    if (args.empty()) return atom(functor);
    Term t;
    t.kind_ = TermKind::Compound;
    auto box = std::make_shared<detail::Boxed>();
    box->functor = functor;
    box->args = std::move(args);
    t.box_ = std::move(box);
    return t;
}

Term Term::list(std::span<const Term> items, Term tail) {
    static const Symbol dot = Symbol::intern(".");
    Term result = std::move(tail);
    for (auto it = items.rbegin(); it != items.rend(); ++it) {
        result = compound(dot, {*it, result});
    }
    return result;
}

bool Term::is_atom(std::string_view name) const { return is_atom() && symbol().name() == name; }

bool Term::is_nil() const { return is_atom() && small_ == 0; }

bool Term::is_functor(std::string_view name, std::size_t arity) const {
    return is_compound() && box_->args.size() == arity && box_->functor.name() == name;
}

Symbol Term::symbol() const {
    if (kind_ == TermKind::Compound) return box_->functor;
    return Symbol::from_id(static_cast<std::uint32_t>(small_));
}

BigInt Term::int_value() const {
    if (box_) return box_->big;
    return BigInt(small_);
}

Rational Term::number_value() const {
    if (kind_ == TermKind::Rat) return box_->rat;
    return Rational(int_value());
}

std::size_t Term::arity() const { return kind_ == TermKind::Compound ? box_->args.size() : 0; }

std::span<const Term> Term::args() const {
    if (kind_ != TermKind::Compound) return {};
    return box_->args;
}

bool operator==(const Term& a, const Term& b) {
    if (a.kind_ != b.kind_) return false;
    switch (a.kind_) {
    case TermKind::Unbound:
        return true;
    case TermKind::Var:
    case TermKind::Atom:
        return a.small_ == b.small_;
    case TermKind::Int:
        if (!a.box_ && !b.box_) return a.small_ == b.small_;
        if (!a.box_ || !b.box_) return false;
        return a.box_->big == b.box_->big;
    case TermKind::Rat:
        return a.box_->rat == b.box_->rat;
    case TermKind::Compound: {
        if (a.box_ == b.box_) return true;
        if (!(a.box_->functor == b.box_->functor)) return false;
        if (a.box_->args.size() != b.box_->args.size()) return false;
        for (std::size_t i = 0; i < a.box_->args.size(); ++i) {
            if (!(a.box_->args[i] == b.box_->args[i])) return false;
        }
        return true;
    }
    }
    return false;
}

int compare_terms(const Term& a, const Term& b) {
    auto rank = [](const Term& t) {
        switch (t.kind()) {
        case TermKind::Unbound:
        case TermKind::Var:
            return 0;
        case TermKind::Int:
        case TermKind::Rat:
            return 1;
        case TermKind::Atom:
            return 3;
        case TermKind::Compound:
            return 4;
        }
        return 5;
    };
    int ra = rank(a);
    int rb = rank(b);
    if (ra != rb) return ra < rb ? -1 : 1;
    switch (a.kind()) {
    case TermKind::Unbound:
        return 0;
    case TermKind::Var:
        return a.var_id() < b.var_id() ? -1 : (a.var_id() > b.var_id() ? 1 : 0);
    case TermKind::Int:
    case TermKind::Rat: {
        if (a.is_small_int() && b.is_small_int()) {
            return a.small_int() < b.small_int() ? -1 : (a.small_int() > b.small_int() ? 1 : 0);
        }
        auto c = a.number_value() <=> b.number_value();
        if (c < 0) return -1;
        if (c > 0) return 1;
        // 1 and 1/1 cannot differ; Int sorts before Rat only when values tie
        return 0;
    }
    case TermKind::Atom: {
        const auto& na = a.name();
        const auto& nb = b.name();
        return na < nb ? -1 : (na > nb ? 1 : 0);
    }
    case TermKind::Compound: {
        if (a.arity() != b.arity()) return a.arity() < b.arity() ? -1 : 1;
        const auto& na = a.name();
        const auto& nb = b.name();
        if (na != nb) return na < nb ? -1 : 1;
        for (std::size_t i = 0; i < a.arity(); ++i) {
            int c = compare_terms(a.arg(i), b.arg(i));
            if (c != 0) return c;
        }
        return 0;
    }
    }
    return 0;
}

VarId Bindings::fresh() {
    slots_.emplace_back();
    return static_cast<VarId>(slots_.size() - 1);
}

VarId Bindings::fresh_block(std::uint32_t count) {
    auto base = static_cast<VarId>(slots_.size());
    slots_.resize(slots_.size() + count);
    return base;
}

void Bindings::bind(VarId v, Term t) {
    slots_[v] = std::move(t);
    trail_.push_back(v);
}

void Bindings::undo_to(Mark m) {
    while (trail_.size() > m.trail) {
        VarId v = trail_.back();
        trail_.pop_back();
        if (v < slots_.size()) slots_[v] = Term();
    }
    if (slots_.size() > m.vars) slots_.resize(m.vars);
}

const Term& deref(const Term& t, const Bindings& b) {
    const Term* cur = &t;
    while (cur->is_var() && b.is_bound(cur->var_id())) cur = &b.value(cur->var_id());
    return *cur;
}

bool occurs(VarId v, const Term& t, const Bindings& b) {
    std::vector<const Term*> stack{&deref(t, b)};
    while (!stack.empty()) {
        const Term* cur = stack.back();
        stack.pop_back();
        if (cur->is_var()) {
            if (cur->var_id() == v) return true;
            continue;
        }
        for (const Term& a : cur->args()) stack.push_back(&deref(a, b));
    }
    return false;
}

namespace {

Term resolve_impl(const Term& t, const Bindings& b, std::unordered_set<VarId>& active) {
    const Term& d = deref(t, b);
    if (!d.is_compound()) return d;
    // a cyclic binding (possible without occurs check) is cut at the revisited variable
    std::vector<Term> args;
    args.reserve(d.arity());
    bool changed = false;
    for (const Term& a : d.args()) {
        if (a.is_var() && b.is_bound(a.var_id())) {
            VarId v = a.var_id();
            if (active.count(v)) {
                args.push_back(a);
                continue;
            }
            active.insert(v);
            args.push_back(resolve_impl(a, b, active));
            active.erase(v);
            changed = true;
        } else if (a.is_compound()) {
            Term r = resolve_impl(a, b, active);
            if (!(r == a)) changed = true;
            args.push_back(std::move(r));
        } else {
            args.push_back(a);
        }
    }
    if (!changed) return d;
    return Term::compound(d.symbol(), std::move(args));
}

}  // namespace

Term resolve(const Term& t, const Bindings& b) {
    std::unordered_set<VarId> active;
    return resolve_impl(t, b, active);
}

Term offset_vars(const Term& t, VarId base) {
    switch (t.kind()) {
    case TermKind::Var:
        return Term::var(t.var_id() + base);
    case TermKind::Compound: {
        std::vector<Term> args;
        args.reserve(t.arity());
        for (const Term& a : t.args()) args.push_back(offset_vars(a, base));
        return Term::compound(t.symbol(), std::move(args));
    }
    default:
        return t;
    }
}

void collect_vars(const Term& t, const Bindings& b, std::vector<VarId>& out) {
    // bound variables already expanded are skipped, so cyclic bindings terminate
    std::unordered_set<VarId> expanded;
    std::vector<const Term*> stack{&t};
    while (!stack.empty()) {
        const Term* cur = stack.back();
        stack.pop_back();
        while (cur->is_var() && b.is_bound(cur->var_id())) {
            if (!expanded.insert(cur->var_id()).second) {
                cur = nullptr;
                break;
            }
            cur = &b.value(cur->var_id());
        }
        if (!cur) continue;
        if (cur->is_var()) {
            if (std::find(out.begin(), out.end(), cur->var_id()) == out.end()) out.push_back(cur->var_id());
            continue;
        }
        const auto args = cur->args();
        for (auto it = args.rbegin(); it != args.rend(); ++it) stack.push_back(&*it);
    }
}

bool list_elements(const Term& t, const Bindings& b, std::vector<Term>& out) {
    const Term* cur = &deref(t, b);
    while (cur->is_functor(".", 2)) {
        out.push_back(cur->arg(0));
        cur = &deref(cur->arg(1), b);
    }
    return cur->is_nil();
}

bool is_proper_list(const Term& t, const Bindings& b) {
    std::vector<Term> items;
    return list_elements(t, b, items);
}

}  // namespace prolite
