// SPDX-License-Identifier: Apache-2.0
#include "prolite/clpr.hpp"

#include <algorithm>

namespace prolite::clpr {

namespace {

void add_scaled(std::map<VarId, Rational>& into, const std::map<VarId, Rational>& from, const Rational& scale) {
    for (const auto& [v, c] : from) {
        Rational& slot = into[v];
        slot += c * scale;
        if (slot.is_zero()) into.erase(v);
    }
}

// sum(c * y) <= k, or < k when strict
struct IneqRow {
    std::map<VarId, Rational> c;
    Rational k;
    bool strict = false;

    // Scales so the leading coefficient has magnitude 1, giving duplicates one shape.
    void normalize() {
        if (c.empty()) return;
        Rational s = c.begin()->second.abs();
        for (auto& [v, x] : c) x /= s;
        k /= s;
    }
    friend bool operator<(const IneqRow& a, const IneqRow& b) {
        if (a.strict != b.strict) return a.strict < b.strict;
        if (a.k != b.k) return a.k < b.k;
        return std::lexicographical_compare(a.c.begin(), a.c.end(), b.c.begin(), b.c.end(),
                                            [](const auto& x, const auto& y) {
                                                if (x.first != y.first) return x.first < y.first;
                                                return x.second < y.second;
                                            });
    }
};

}  // namespace

void RStore::ensure(VarId v) {
    if (vars_.insert(v).second) log_.push_back({Undo::AddVar, v, std::nullopt});
}

void RStore::set_def(VarId pivot, std::optional<Def> def) {
    auto it = defs_.find(pivot);
    std::optional<Def> old;
    if (it != defs_.end()) old = it->second;
    log_.push_back({Undo::SetDef, pivot, std::move(old)});
    if (def) {
        defs_[pivot] = std::move(*def);
    } else if (it != defs_.end()) {
        defs_.erase(it);
    }
}

LinRow RStore::substitute(const LinRow& row) const {
    LinRow out;
    out.rel = row.rel;
    out.constant = row.constant;
    for (const auto& [v, c] : row.coeffs) {
        auto it = defs_.find(v);
        if (it == defs_.end()) {
            Rational& slot = out.coeffs[v];
            slot += c;
            if (slot.is_zero()) out.coeffs.erase(v);
            continue;
        }
        add_scaled(out.coeffs, it->second.coeffs, c);
        out.constant -= c * it->second.constant;
    }
    return out;
}

bool RStore::post(LinRow row) {
    for (const auto& [v, c] : row.coeffs) ensure(v);
    if (row.rel != RowRel::Eq) {
        ineqs_.push_back(std::move(row));
        log_.push_back({Undo::AddIneq, 0, std::nullopt});
        return check_ineq();
    }
    LinRow r = substitute(row);
    if (r.coeffs.empty()) return r.constant.is_zero();

    auto [pivot, cp] = *r.coeffs.begin();
    Def d;
    d.constant = r.constant / cp;
    for (const auto& [y, c] : r.coeffs) {
        if (y != pivot) d.coeffs[y] = -c / cp;
    }
    // eliminate the new pivot from existing definitions
    std::vector<VarId> touched;
    for (const auto& [q, def] : defs_) {
        if (def.coeffs.count(pivot)) touched.push_back(q);
    }
    for (VarId q : touched) {
        Def nd = defs_.at(q);
        Rational a = nd.coeffs.at(pivot);
        nd.coeffs.erase(pivot);
        add_scaled(nd.coeffs, d.coeffs, a);
        nd.constant += a * d.constant;
        set_def(q, std::move(nd));
    }
    set_def(pivot, std::move(d));
    return ineqs_.empty() || check_ineq();
}

bool RStore::check_ineq() const {
    if (ineqs_.size() > config_.ineq_cap) {
        throw LogicError(ErrorKind::IneqCapExceeded,
                         std::to_string(ineqs_.size()) + " inequality rows exceed the cap of " +
                             std::to_string(config_.ineq_cap));
    }
    std::vector<IneqRow> rows;
    for (const auto& raw : ineqs_) {
        LinRow s = substitute(raw);
        IneqRow r{std::move(s.coeffs), std::move(s.constant), raw.rel == RowRel::Lt};
        r.normalize();
        rows.push_back(std::move(r));
    }
    while (true) {
        std::vector<IneqRow> live;
        for (auto& r : rows) {
            if (!r.c.empty()) {
                live.push_back(std::move(r));
                continue;
            }
            int s = r.k.sign();
            if (s < 0 || (s == 0 && r.strict)) return false;
        }
        if (live.empty()) return true;
        std::sort(live.begin(), live.end());
        live.erase(std::unique(live.begin(), live.end(),
                               [](const IneqRow& a, const IneqRow& b) { return !(a < b) && !(b < a); }),
                   live.end());

        // eliminate the variable with the fewest generated pairs
        std::map<VarId, std::pair<std::size_t, std::size_t>> counts;
        for (const auto& r : live) {
            for (const auto& [v, c] : r.c) {
                auto& [pos, neg] = counts[v];
                (c.sign() > 0 ? pos : neg)++;
            }
        }
        VarId elim = counts.begin()->first;
        std::size_t best = SIZE_MAX;
        for (const auto& [v, pn] : counts) {
            std::size_t cost = pn.first * pn.second;
            if (cost < best) {
                best = cost;
                elim = v;
            }
        }
        std::vector<IneqRow> pos, neg, next;
        for (auto& r : live) {
            auto it = r.c.find(elim);
            if (it == r.c.end()) {
                next.push_back(std::move(r));
            } else if (it->second.sign() > 0) {
                pos.push_back(std::move(r));
            } else {
                neg.push_back(std::move(r));
            }
        }
        for (const auto& p : pos) {
            for (const auto& n : neg) {
                Rational sp = Rational(1) / p.c.at(elim);
                Rational sn = Rational(1) / n.c.at(elim).abs();
                IneqRow m;
                add_scaled(m.c, p.c, sp);
                add_scaled(m.c, n.c, sn);
                m.c.erase(elim);
                m.k = p.k * sp + n.k * sn;
                m.strict = p.strict || n.strict;
                m.normalize();
                next.push_back(std::move(m));
                if (next.size() > config_.elimination_row_cap) {
                    throw LogicError(ErrorKind::IneqCapExceeded, "inequality elimination exceeded its row cap");
                }
            }
        }
        rows = std::move(next);
    }
}

std::optional<Rational> RStore::value(VarId v) const {
    auto it = defs_.find(v);
    if (it == defs_.end() || !it->second.coeffs.empty()) return std::nullopt;
    return it->second.constant;
}

std::vector<std::pair<VarId, Rational>> RStore::determined() const {
    std::vector<std::pair<VarId, Rational>> out;
    for (const auto& [v, d] : defs_) {
        if (d.coeffs.empty()) out.emplace_back(v, d.constant);
    }
    return out;
}

Residue RStore::residue(std::span<const VarId> vars) const {
    Residue out;
    for (VarId v : vars) {
        if (auto x = value(v)) {
            out.values[v] = *x;
            continue;
        }
        out.undetermined.push_back(v);
        auto it = defs_.find(v);
        if (it == defs_.end()) continue;
        for (const auto& [y, c] : it->second.coeffs) out.undetermined.push_back(y);
    }
    std::sort(out.undetermined.begin(), out.undetermined.end());
    out.undetermined.erase(std::unique(out.undetermined.begin(), out.undetermined.end()), out.undetermined.end());
    return out;
}

bool RStore::echelon_invariant() const {
    for (const auto& [p, d] : defs_) {
        for (const auto& [y, c] : d.coeffs) {
            if (c.is_zero() || defs_.count(y) || y == p) return false;
        }
    }
    return true;
}

void RStore::restore(std::size_t mark) {
    while (log_.size() > mark) {
        Undo u = std::move(log_.back());
        log_.pop_back();
        switch (u.kind) {
        case Undo::SetDef:
            if (u.old) {
                defs_[u.var] = std::move(*u.old);
            } else {
                defs_.erase(u.var);
            }
            break;
        case Undo::AddIneq:
            ineqs_.pop_back();
            break;
        case Undo::AddVar:
            vars_.erase(u.var);
            break;
        }
    }
}

// ---------------------------------------------------------------- term level

namespace {

struct RExpr {
    std::map<VarId, Rational> c;
    Rational k;
    bool ground() const { return c.empty(); }
};

class Linearizer {
public:
    Linearizer(const Bindings& b, std::set<VarId>& seen) : b_(b), seen_(seen) {}

    RExpr run(const Term& raw) {
        const Term& t = deref(raw, b_);
        RExpr e;
        switch (t.kind()) {
        case TermKind::Var:
            seen_.insert(t.var_id());
            e.c[t.var_id()] = 1;
            return e;
        case TermKind::Int:
        case TermKind::Rat:
            e.k = t.number_value();
            return e;
        case TermKind::Atom:
            throw LogicError(ErrorKind::Type, "evaluable expected, found " + t.name());
        case TermKind::Unbound:
            throw LogicError(ErrorKind::Instantiation, "unbound term");
        case TermKind::Compound:
            break;
        }
        const std::string& f = t.name();
        const std::size_t n = t.arity();
        if (n == 2 && (f == "+" || f == "-")) {
            e = run(t.arg(0));
            RExpr r = run(t.arg(1));
            Rational s = f == "+" ? 1 : -1;
            add_scaled(e.c, r.c, s);
            e.k += r.k * s;
            return e;
        }
        if (n == 1 && (f == "+" || f == "-")) {
            e = run(t.arg(0));
            if (f == "-") scale(e, -1);
            return e;
        }
        if (n == 2 && f == "*") {
            RExpr a = run(t.arg(0));
            RExpr b = run(t.arg(1));
            if (a.ground()) {
                scale(b, a.k);
                return b;
            }
            if (b.ground()) {
                scale(a, b.k);
                return a;
            }
            throw LogicError(ErrorKind::NonLinearUnsupported, "product of two non-ground expressions");
        }
        if (n == 2 && f == "/") {
            RExpr a = run(t.arg(0));
            RExpr b = run(t.arg(1));
            if (!b.ground()) throw LogicError(ErrorKind::NonLinearUnsupported, "division by a non-ground expression");
            if (b.k.is_zero()) throw LogicError(ErrorKind::Evaluation, "zero divisor");
            scale(a, Rational(1) / b.k);
            return a;
        }
        if ((n == 1 && f == "abs") || (n == 2 && (f == "min" || f == "max"))) {
            std::vector<Rational> vals;
            for (const Term& a : t.args()) {
                RExpr x = run(a);
                if (!x.ground()) throw LogicError(ErrorKind::NonLinearUnsupported, f + " over a non-ground expression");
                vals.push_back(x.k);
            }
            if (f == "abs") {
                e.k = vals[0].abs();
            } else if (f == "min") {
                e.k = std::min(vals[0], vals[1]);
            } else {
                e.k = std::max(vals[0], vals[1]);
            }
            return e;
        }
        throw LogicError(ErrorKind::NonLinearUnsupported,
                         "operator " + f + "/" + std::to_string(n) + " in a rational constraint");
    }

private:
    static void scale(RExpr& e, const Rational& s) {
        if (s.is_zero()) {
            e.c.clear();
            e.k = 0;
            return;
        }
        for (auto& [v, c] : e.c) c *= s;
        e.k *= s;
    }

    const Bindings& b_;
    std::set<VarId>& seen_;
};

enum class Shape { Eq, Lt, Gt, Le, Ge };

std::optional<Shape> shape_of(const Term& t) {
    if (!t.is_compound() || t.arity() != 2) return std::nullopt;
    const std::string& f = t.name();
    if (f == "=" || f == "=:=" || f == "#=") return Shape::Eq;
    if (f == "<" || f == "#<") return Shape::Lt;
    if (f == ">" || f == "#>") return Shape::Gt;
    if (f == "=<" || f == "#=<") return Shape::Le;
    if (f == ">=" || f == "#>=") return Shape::Ge;
    return std::nullopt;
}

LinRow build(const Term& relation, const Bindings& b, std::set<VarId>& seen) {
    auto shape = shape_of(relation);
    if (!shape) throw LogicError(ErrorKind::Type, "rational constraint expected, found " + relation.name());
    Linearizer lin(b, seen);
    RExpr l = lin.run(relation.arg(0));
    RExpr r = lin.run(relation.arg(1));
    // d = L - R, or R - L for > and >=
    bool flip = *shape == Shape::Gt || *shape == Shape::Ge;
    RExpr d = flip ? r : l;
    const RExpr& s = flip ? l : r;
    add_scaled(d.c, s.c, -1);
    d.k -= s.k;
    LinRow row;
    row.coeffs = std::move(d.c);
    row.constant = -d.k;
    switch (*shape) {
    case Shape::Eq: row.rel = RowRel::Eq; break;
    case Shape::Lt:
    case Shape::Gt: row.rel = RowRel::Lt; break;
    case Shape::Le:
    case Shape::Ge: row.rel = RowRel::Le; break;
    }
    return row;
}

}  // namespace

bool is_relation(const Term& t) { return shape_of(t).has_value(); }

LinRow linearize_relation(const Term& relation, const Bindings& bindings) {
    std::set<VarId> seen;
    return build(relation, bindings, seen);
}

bool r_post(const Term& relation, const Bindings& bindings, RStore& store) {
    std::set<VarId> seen;
    LinRow row = build(relation, bindings, seen);
    for (VarId v : seen) store.ensure(v);
    return store.post(std::move(row));
}

}  // namespace prolite::clpr
