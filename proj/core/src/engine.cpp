// SPDX-License-Identifier: Apache-2.0
#include "prolite/engine.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <set>
#include <unordered_map>

#include "prelude.hpp"
#include "prolite/writer.hpp"

namespace prolite {

// ---------------------------------------------------------------- database

const std::vector<Clause>* Database::clauses(Symbol name, std::size_t arity) const {
    auto it = preds_.find({name.id(), arity});
    return it == preds_.end() ? nullptr : &it->second;
}

namespace {

struct NativeKey {
    std::string name;
    std::size_t arity;
    bool operator==(const NativeKey&) const = default;
};

struct NativeKeyHash {
    std::size_t operator()(const NativeKey& k) const { return std::hash<std::string>()(k.name) ^ (k.arity * 0x9e3779b9u); }
};

// Names handled directly by the machine.
const std::vector<std::pair<const char*, std::size_t>>& native_names() {
    static const std::vector<std::pair<const char*, std::size_t>> names = {
        {"true", 0}, {"fail", 0}, {"false", 0}, {"!", 0}, {",", 2}, {";", 2}, {"->", 2}, {"\\+", 1}, {"not", 1},
        {"call", 1}, {"call", 2}, {"call", 3}, {"call", 4}, {"call", 5}, {"call", 6}, {"call", 7}, {"call", 8},
        {"findall", 3}, {"forall", 2}, {"aggregate_all", 3}, {"between", 3}, {"is", 2}, {"=:=", 2}, {"=\\=", 2},
        {"<", 2}, {">", 2}, {"=<", 2}, {">=", 2}, {"succ", 2}, {"plus", 3}, {"=", 2}, {"\\=", 2}, {"==", 2},
        {"\\==", 2}, {"@<", 2}, {"@>", 2}, {"@=<", 2}, {"@>=", 2}, {"compare", 3}, {"var", 1}, {"nonvar", 1},
        {"atom", 1}, {"number", 1}, {"integer", 1}, {"float", 1}, {"atomic", 1}, {"compound", 1},
        {"callable", 1}, {"is_list", 1}, {"ground", 1}, {"functor", 3}, {"arg", 3}, {"=..", 2},
        {"copy_term", 2}, {"msort", 2}, {"sort", 2}, {"sort", 4}, {"keysort", 2}, {"$list_length", 2},
        {"$make_list", 2}, {"write", 1}, {"print", 1}, {"writeln", 1}, {"write_canonical", 1}, {"nl", 0},
        {"tab", 1}, {"format", 1}, {"format", 2}, {"#=", 2}, {"#\\=", 2}, {"#<", 2}, {"#>", 2}, {"#=<", 2},
        {"#>=", 2}, {"in", 2}, {"ins", 2}, {"label", 1}, {"labeling", 2}, {"$label", 3}, {"$fd_exclude", 2},
        {"$autolabel", 0}, {"{}", 1}, {"$r", 1}, {"fd_domain", 3}, {"fd_inf", 2}, {"fd_sup", 2}, {"fd_size", 2},
    };
    return names;
}

bool is_native(std::string_view name, std::size_t arity) {
    static const std::unordered_map<NativeKey, bool, NativeKeyHash> table = [] {
        std::unordered_map<NativeKey, bool, NativeKeyHash> t;
        for (const auto& [n, a] : native_names()) t[{n, a}] = true;
        return t;
    }();
    return table.count({std::string(name), arity}) != 0;
}

void index_clause(std::map<std::pair<std::uint32_t, std::size_t>, std::vector<Clause>>& preds, Clause c) {
    const Term& h = c.head;
    if (!h.is_callable()) throw LogicError(ErrorKind::Type, "clause head is not callable");
    preds[{h.symbol().id(), h.is_atom() ? 0 : h.arity()}].push_back(std::move(c));
}

}  // namespace

const Database& prelude_database() {
    static const Database db = [] {
        Database d;
        Program p = parse_program(detail::kPreludeSource);
        for (auto& c : p.clauses) index_clause(d.preds_, std::move(c));
        return d;
    }();
    return db;
}

bool is_builtin(std::string_view name, std::size_t arity) {
    return is_native(name, arity) || prelude_database().defines(Symbol::intern(name), arity);
}

Database consult(const Program& program) {
    Database db;
    for (const Clause& c : program.clauses) {
        const Term& h = c.head;
        if (h.is_callable()) {
            std::size_t arity = h.is_atom() ? 0 : h.arity();
            if (is_builtin(h.name(), arity)) {
                throw LogicError(ErrorKind::BuiltinRedefinition,
                                 "cannot redefine builtin " + h.name() + "/" + std::to_string(arity));
            }
        }
        index_clause(db.preds_, c);
    }
    for (const Term& d : program.directives) {
        db.warnings_.push_back("directive ignored: " + write_term(d));
    }
    return db;
}

// ---------------------------------------------------------------- plain unification

namespace {

template <typename BindFn, typename AttrFn>
bool unify_core(const Term& a, const Term& b, Bindings& bs, bool occurs_check, BindFn bind, AttrFn attributed) {
    // only cyclic terms (no occurs check) can need this much work
    constexpr std::size_t kMaxUnifySteps = 50'000'000;
    std::vector<std::pair<Term, Term>> stack;
    stack.emplace_back(a, b);
    std::size_t steps = 0;
    while (!stack.empty()) {
        if (++steps > kMaxUnifySteps) {
            throw LogicError(ErrorKind::Representation, "unification does not terminate on cyclic terms");
        }
        auto [x0, y0] = std::move(stack.back());
        stack.pop_back();
        const Term x = deref(x0, bs);
        const Term y = deref(y0, bs);
        if (x.is_var() && y.is_var()) {
            if (x.var_id() == y.var_id()) continue;
            VarId xv = x.var_id(), yv = y.var_id();
            bool ax = attributed(xv), ay = attributed(yv);
            // keep attributed variables as binding targets; otherwise bind the younger variable
            if (ax && !ay) {
                bind(yv, x);
            } else if (ay && !ax) {
                bind(xv, y);
            } else if (xv > yv) {
                bind(xv, y);
            } else {
                bind(yv, x);
            }
            continue;
        }
        if (x.is_var() || y.is_var()) {
            const Term& v = x.is_var() ? x : y;
            const Term& t = x.is_var() ? y : x;
            if (occurs_check && occurs(v.var_id(), t, bs)) return false;
            bind(v.var_id(), t);
            continue;
        }
        if (x.kind() != y.kind()) return false;
        switch (x.kind()) {
        case TermKind::Atom:
            if (x.symbol() != y.symbol()) return false;
            break;
        case TermKind::Int:
        case TermKind::Rat:
            if (x.is_small_int() && y.is_small_int()) {
                if (x.small_int() != y.small_int()) return false;
            } else if (!(x.number_value() == y.number_value())) {
                return false;
            }
            break;
        case TermKind::Compound: {
            if (x.symbol() != y.symbol() || x.arity() != y.arity()) return false;
            auto xa = x.args();
            auto ya = y.args();
            for (std::size_t i = xa.size(); i-- > 0;) stack.emplace_back(xa[i], ya[i]);
            break;
        }
        default:
            return false;
        }
    }
    return true;
}

}  // namespace

bool unify(const Term& a, const Term& b, Bindings& bindings, bool occurs_check) {
    auto mark = bindings.mark();
    bool ok = unify_core(
        a, b, bindings, occurs_check, [&](VarId v, const Term& t) { bindings.bind(v, t); },
        [](VarId) { return false; });
    if (!ok) bindings.undo_to(mark);
    return ok;
}

// ---------------------------------------------------------------- machine

namespace {

struct GoalNode;
using GoalList = std::shared_ptr<const GoalNode>;

struct GoalNode {
    Term goal;
    std::size_t barrier;  // choice-point height a cut in this goal returns to
    GoalList next;
};

GoalList push(Term g, std::size_t barrier, GoalList next) {
    return std::make_shared<const GoalNode>(GoalNode{std::move(g), barrier, std::move(next)});
}

struct Marks {
    Bindings::Mark bindings;
    std::size_t fd;
    std::size_t r;
};

struct ChoicePoint {
    Marks marks;
    GoalList alt;  // resumed goals for an alternative choice point
    // clause alternatives (clauses != nullptr)
    const std::vector<Clause>* clauses = nullptr;
    std::size_t next = 0;
    Term goal;
    GoalList cont;
};

Term make_list(const std::vector<Term>& items) { return Term::list(items); }

LogicError type_err(const std::string& expected, const Term& culprit) {
    return LogicError(ErrorKind::Type, expected + " expected, found " + write_term(culprit));
}

LogicError inst_err() { return LogicError(ErrorKind::Instantiation, "arguments are not sufficiently instantiated"); }

bool contains_rational(const Term& raw, const Bindings& b) {
    const Term& t = deref(raw, b);
    if (t.is_rat()) return true;
    if (!t.is_compound()) return false;
    if (t.arity() == 2 && t.name() == "/") return true;
    for (const Term& a : t.args()) {
        if (contains_rational(a, b)) return true;
    }
    return false;
}

Term rename_fresh(const Term& t, std::map<VarId, VarId>& map, Bindings& b) {
    switch (t.kind()) {
    case TermKind::Var: {
        auto [it, inserted] = map.try_emplace(t.var_id(), 0);
        if (inserted) it->second = b.fresh();
        return Term::var(it->second);
    }
    case TermKind::Compound: {
        std::vector<Term> args;
        args.reserve(t.arity());
        for (const Term& a : t.args()) args.push_back(rename_fresh(a, map, b));
        return Term::compound(t.symbol(), std::move(args));
    }
    default:
        return t;
    }
}

}  // namespace

class Machine {
public:
    Machine(const Database& db, ParsedTerm query, Budget budget, EngineOptions options)
        : db_(db),
          prelude_(prelude_database()),
          query_(std::move(query)),
          budget_(budget),
          opt_(options),
          fd_([this] { tick(); }),
          r_(options.r_config),
          start_(std::chrono::steady_clock::now()) {
        if (budget_.max_steps == 0 || budget_.wall_timeout.count() <= 0) {
            throw std::invalid_argument("budget limits must be positive");
        }
        const Term& q = query_.term;
        if (!q.is_callable()) {
            if (q.is_var()) throw inst_err();
            throw type_err("callable", q);
        }
        if (query_.var_count) b_.fresh_block(query_.var_count);
        initial_ = marks();
        GoalList tail = opt_.auto_label ? push(Term::atom("$autolabel"), 0, nullptr) : nullptr;
        goals_ = push(q, 0, tail);
    }

    bool next() {
        if (exhausted_) return false;
        try {
            bool ok;
            if (!started_) {
                started_ = true;
                ok = run(0);
            } else {
                ok = backtrack(0) && run(0);
            }
            if (!ok) {
                exhausted_ = true;
                cps_.clear();
                restore(initial_);
            }
            return ok;
        } catch (...) {
            exhausted_ = true;
            throw;
        }
    }

    const ParsedTerm& query() const { return query_; }
    const Bindings& bindings() const { return b_; }
    const fd::FdStore& fd() const { return fd_; }
    const clpr::RStore& r() const { return r_; }
    std::uint64_t steps() const { return steps_; }
    bool auto_labeled() const { return auto_labeled_; }
    const std::string& output() const { return out_; }

private:
    using Handler = bool (Machine::*)(const Term& goal, std::size_t barrier);

    // ------------------------------------------------------------ core loop

    void tick() {
        ++steps_;
        if (steps_ > budget_.max_steps) {
            throw LogicError(ErrorKind::BudgetSteps, "step budget of " + std::to_string(budget_.max_steps) + " exhausted");
        }
        if ((steps_ & 1023) == 0 && std::chrono::steady_clock::now() - start_ > budget_.wall_timeout) {
            throw LogicError(ErrorKind::BudgetTime,
                             "wall-clock budget of " + std::to_string(budget_.wall_timeout.count()) + " ms exhausted");
        }
    }

    Marks marks() const { return {b_.mark(), fd_.mark(), r_.mark()}; }

    void restore(const Marks& m) {
        b_.undo_to(m.bindings);
        fd_.restore(m.fd);
        r_.restore(m.r);
        pending_.clear();
    }

    bool run(std::size_t base) {
        while (true) {
            if (!goals_) return true;
            tick();
            GoalList node = goals_;
            goals_ = node->next;
            if (!execute(node->goal, node->barrier) && !backtrack(base)) return false;
        }
    }

    bool backtrack(std::size_t base) {
        while (cps_.size() > base) {
            ChoicePoint& cp = cps_.back();
            restore(cp.marks);
            if (!cp.clauses) {
                goals_ = cp.alt;
                cps_.pop_back();
                return true;
            }
            if (retry_clauses()) return true;
        }
        return false;
    }

    void push_alternative(GoalList alt) {
        ChoicePoint cp;
        cp.marks = marks();
        cp.alt = std::move(alt);
        cps_.push_back(std::move(cp));
    }

    void cut_to(std::size_t height) {
        while (cps_.size() > height) cps_.pop_back();
    }

    // Tries the remaining clauses of the top choice point.
    bool retry_clauses() {
        const std::size_t height = cps_.size() - 1;
        while (true) {
            ChoicePoint& cp = cps_[height];
            const Clause& c = (*cp.clauses)[cp.next++];
            const bool last = cp.next >= cp.clauses->size();
            Term goal = cp.goal;
            GoalList cont = cp.cont;
            Marks m = cp.marks;
            if (last) cps_.pop_back();
            VarId base = c.var_count ? b_.fresh_block(c.var_count) : 0;
            if (unify(goal, offset_vars(c.head, base))) {
                GoalList g = std::move(cont);
                for (auto it = c.body.rbegin(); it != c.body.rend(); ++it) g = push(offset_vars(*it, base), height, g);
                goals_ = std::move(g);
                return true;
            }
            restore(m);
            if (last) return false;
        }
    }

    bool call_user(const Term& goal, const std::vector<Clause>& clauses) {
        if (clauses.empty()) return false;
        ChoicePoint cp;
        cp.marks = marks();
        cp.clauses = &clauses;
        cp.goal = goal;
        cp.cont = goals_;
        cps_.push_back(std::move(cp));
        return retry_clauses();
    }

    bool execute(const Term& raw, std::size_t barrier) {
        const Term goal = deref(raw, b_);
        if (goal.is_var()) throw inst_err();
        if (!goal.is_callable()) throw type_err("callable", goal);
        const std::size_t arity = goal.is_atom() ? 0 : goal.arity();
        const Symbol name = goal.symbol();
        if (auto h = handler(name, arity)) return (this->*h)(goal, barrier);
        if (const auto* cl = prelude_.clauses(name, arity)) return call_user(goal, *cl);
        if (const auto* cl = db_.clauses(name, arity)) return call_user(goal, *cl);
        throw LogicError(ErrorKind::Existence, "unknown procedure " + name.name() + "/" + std::to_string(arity));
    }

    // ------------------------------------------------------------ unification with constraint wakeup

    bool attributed(VarId v) const { return fd_.has(v) || r_.has(v); }

    bool unify(const Term& a, const Term& b) {
        bool ok = unify_core(
            a, b, b_, opt_.occurs_check,
            [&](VarId v, const Term& t) {
                b_.bind(v, t);
                if (attributed(v)) pending_.push_back(v);
            },
            [&](VarId v) { return attributed(v); });
        if (!ok) {
            pending_.clear();
            return false;
        }
        return wake();
    }

    bool wake() {
        while (!pending_.empty()) {
            VarId v = pending_.back();
            pending_.pop_back();
            const Term val = deref(Term::var(v), b_);
            if (fd_.has(v)) {
                if (val.is_int()) {
                    auto x = to_int64(val.int_value());
                    if (!x || *x > fd::kMaxValue || *x < -fd::kMaxValue) {
                        pending_.clear();
                        return false;
                    }
                    if (!fd_.restrict(v, fd::FdDomain::singleton(*x))) return fail_wake();
                } else if (val.is_var()) {
                    VarId w = val.var_id();
                    if (r_.has(w)) throw LogicError(ErrorKind::TypeMix, "variable is both finite-domain and rational");
                    fd_.ensure(w);
                    if (!fd_.post(fd::LinearProp{{{1, v}, {-1, w}}, 0, fd::LinRel::Eq})) return fail_wake();
                } else {
                    return fail_wake();
                }
            }
            if (r_.has(v)) {
                clpr::LinRow row;
                if (val.is_number()) {
                    row.coeffs[v] = 1;
                    row.constant = val.number_value();
                } else if (val.is_var()) {
                    VarId w = val.var_id();
                    if (fd_.has(w)) throw LogicError(ErrorKind::TypeMix, "variable is both finite-domain and rational");
                    row.coeffs[v] = 1;
                    row.coeffs[w] = -1;
                } else {
                    return fail_wake();
                }
                if (!r_.post(std::move(row))) return fail_wake();
            }
        }
        sync_stores();
        return true;
    }

    bool fail_wake() {
        pending_.clear();
        return false;
    }

    // Binds variables the stores have determined.
    void sync_stores() {
        for (VarId v : fd_.drain_fixed()) {
            if (!b_.is_bound(v)) b_.bind(v, Term::integer(fd_.domain(v).min()));
        }
        if (r_.row_count() == 0) return;
        for (auto& [v, val] : r_.determined()) {
            if (!b_.is_bound(v)) b_.bind(v, Term::number(val));
        }
    }

    // ------------------------------------------------------------ dispatch

    Handler handler(Symbol name, std::size_t arity) const {
        static const std::unordered_map<NativeKey, Handler, NativeKeyHash> table = {
            {{"true", 0}, &Machine::b_true},
            {{"fail", 0}, &Machine::b_fail},
            {{"false", 0}, &Machine::b_fail},
            {{"!", 0}, &Machine::b_cut},
            {{",", 2}, &Machine::b_conj},
            {{";", 2}, &Machine::b_disj},
            {{"->", 2}, &Machine::b_ifthen},
            {{"\\+", 1}, &Machine::b_not},
            {{"not", 1}, &Machine::b_not},
            {{"call", 1}, &Machine::b_call},
            {{"call", 2}, &Machine::b_call},
            {{"call", 3}, &Machine::b_call},
            {{"call", 4}, &Machine::b_call},
            {{"call", 5}, &Machine::b_call},
            {{"call", 6}, &Machine::b_call},
            {{"call", 7}, &Machine::b_call},
            {{"call", 8}, &Machine::b_call},
            {{"findall", 3}, &Machine::b_findall},
            {{"forall", 2}, &Machine::b_forall},
            {{"aggregate_all", 3}, &Machine::b_aggregate_all},
            {{"between", 3}, &Machine::b_between},
            {{"is", 2}, &Machine::b_is},
            {{"=:=", 2}, &Machine::b_arith_compare},
            {{"=\\=", 2}, &Machine::b_arith_compare},
            {{"<", 2}, &Machine::b_arith_compare},
            {{">", 2}, &Machine::b_arith_compare},
            {{"=<", 2}, &Machine::b_arith_compare},
            {{">=", 2}, &Machine::b_arith_compare},
            {{"succ", 2}, &Machine::b_succ},
            {{"plus", 3}, &Machine::b_plus},
            {{"=", 2}, &Machine::b_unify},
            {{"\\=", 2}, &Machine::b_not_unify},
            {{"==", 2}, &Machine::b_term_compare},
            {{"\\==", 2}, &Machine::b_term_compare},
            {{"@<", 2}, &Machine::b_term_compare},
            {{"@>", 2}, &Machine::b_term_compare},
            {{"@=<", 2}, &Machine::b_term_compare},
            {{"@>=", 2}, &Machine::b_term_compare},
            {{"compare", 3}, &Machine::b_compare},
            {{"var", 1}, &Machine::b_type_check},
            {{"nonvar", 1}, &Machine::b_type_check},
            {{"atom", 1}, &Machine::b_type_check},
            {{"number", 1}, &Machine::b_type_check},
            {{"integer", 1}, &Machine::b_type_check},
            {{"float", 1}, &Machine::b_type_check},
            {{"atomic", 1}, &Machine::b_type_check},
            {{"compound", 1}, &Machine::b_type_check},
            {{"callable", 1}, &Machine::b_type_check},
            {{"is_list", 1}, &Machine::b_type_check},
            {{"ground", 1}, &Machine::b_type_check},
            {{"functor", 3}, &Machine::b_functor},
            {{"arg", 3}, &Machine::b_arg},
            {{"=..", 2}, &Machine::b_univ},
            {{"copy_term", 2}, &Machine::b_copy_term},
            {{"msort", 2}, &Machine::b_sort},
            {{"sort", 2}, &Machine::b_sort},
            {{"sort", 4}, &Machine::b_sort4},
            {{"keysort", 2}, &Machine::b_keysort},
            {{"$list_length", 2}, &Machine::b_list_length},
            {{"$make_list", 2}, &Machine::b_make_list},
            {{"write", 1}, &Machine::b_write},
            {{"print", 1}, &Machine::b_write},
            {{"writeln", 1}, &Machine::b_write},
            {{"write_canonical", 1}, &Machine::b_write},
            {{"nl", 0}, &Machine::b_nl},
            {{"tab", 1}, &Machine::b_tab},
            {{"format", 1}, &Machine::b_format},
            {{"format", 2}, &Machine::b_format},
            {{"#=", 2}, &Machine::b_constraint},
            {{"#\\=", 2}, &Machine::b_constraint},
            {{"#<", 2}, &Machine::b_constraint},
            {{"#>", 2}, &Machine::b_constraint},
            {{"#=<", 2}, &Machine::b_constraint},
            {{"#>=", 2}, &Machine::b_constraint},
            {{"in", 2}, &Machine::b_constraint},
            {{"ins", 2}, &Machine::b_constraint},
            {{"label", 1}, &Machine::b_label},
            {{"labeling", 2}, &Machine::b_label},
            {{"$label", 3}, &Machine::b_label_step},
            {{"$fd_exclude", 2}, &Machine::b_fd_exclude},
            {{"$autolabel", 0}, &Machine::b_autolabel},
            {{"{}", 1}, &Machine::b_braces},
            {{"$r", 1}, &Machine::b_r},
            {{"fd_domain", 3}, &Machine::b_fd_reflect},
            {{"fd_inf", 2}, &Machine::b_fd_reflect},
            {{"fd_sup", 2}, &Machine::b_fd_reflect},
            {{"fd_size", 2}, &Machine::b_fd_reflect},
        };
        auto it = table.find({name.name(), arity});
        return it == table.end() ? nullptr : it->second;
    }

    // ------------------------------------------------------------ control

    bool b_true(const Term&, std::size_t) { return true; }
    bool b_fail(const Term&, std::size_t) { return false; }

    bool b_cut(const Term&, std::size_t barrier) {
        cut_to(barrier);
        return true;
    }

    bool b_conj(const Term& g, std::size_t barrier) {
        goals_ = push(g.arg(0), barrier, push(g.arg(1), barrier, goals_));
        return true;
    }

    bool b_disj(const Term& g, std::size_t barrier) {
        const Term lhs = deref(g.arg(0), b_);
        if (lhs.is_functor("->", 2)) {
            const std::size_t h = cps_.size();
            push_alternative(push(g.arg(1), barrier, goals_));
            goals_ = push(lhs.arg(0), h + 1, push(Term::atom("!"), h, push(lhs.arg(1), barrier, goals_)));
            return true;
        }
        push_alternative(push(g.arg(1), barrier, goals_));
        goals_ = push(lhs, barrier, goals_);
        return true;
    }

    bool b_ifthen(const Term& g, std::size_t barrier) {
        const std::size_t h = cps_.size();
        goals_ = push(g.arg(0), h, push(Term::atom("!"), h, push(g.arg(1), barrier, goals_)));
        return true;
    }

    bool b_not(const Term& g, std::size_t) {
        const std::size_t h = cps_.size();
        push_alternative(goals_);
        goals_ = push(g.arg(0), h + 1, push(Term::atom("!"), h, push(Term::atom("fail"), h, nullptr)));
        return true;
    }

    bool b_call(const Term& g, std::size_t) {
        Term target = deref(g.arg(0), b_);
        if (g.arity() > 1) {
            std::vector<Term> args;
            if (target.is_compound()) {
                args.assign(target.args().begin(), target.args().end());
            } else if (!target.is_atom()) {
                if (target.is_var()) throw inst_err();
                throw type_err("callable", target);
            }
            for (std::size_t i = 1; i < g.arity(); ++i) args.push_back(g.arg(i));
            target = Term::compound(target.symbol(), std::move(args));
        }
        goals_ = push(target, cps_.size(), goals_);
        return true;
    }

    // Runs `goal` to exhaustion, collecting resolved copies of `templ`.
    std::vector<Term> collect(const Term& templ, const Term& goal) {
        const Marks m = marks();
        const std::size_t base = cps_.size();
        GoalList saved = goals_;
        goals_ = push(goal, base, nullptr);
        std::vector<Term> raw;
        bool ok = run(base);
        while (ok) {
            raw.push_back(resolve(templ, b_));
            ok = backtrack(base) && run(base);
        }
        restore(m);
        goals_ = std::move(saved);
        std::vector<Term> out;
        out.reserve(raw.size());
        for (const Term& t : raw) {
            std::map<VarId, VarId> fresh;
            out.push_back(rename_fresh(t, fresh, b_));
        }
        return out;
    }

    bool b_findall(const Term& g, std::size_t) {
        std::vector<Term> items = collect(g.arg(0), g.arg(1));
        return unify(g.arg(2), make_list(items));
    }

    bool b_forall(const Term& g, std::size_t barrier) {
        Term inner = Term::compound(",", {g.arg(0), Term::compound("\\+", {g.arg(1)})});
        goals_ = push(Term::compound("\\+", {inner}), barrier, goals_);
        return true;
    }

    bool b_aggregate_all(const Term& g, std::size_t) {
        const Term spec = deref(g.arg(0), b_);
        if (spec.is_atom("count")) {
            auto items = collect(Term::atom("x"), g.arg(1));
            return unify(g.arg(2), Term::integer(static_cast<std::int64_t>(items.size())));
        }
        if (!spec.is_compound() || spec.arity() != 1) throw type_err("aggregate specification", spec);
        const std::string& kind = spec.name();
        auto items = collect(spec.arg(0), g.arg(1));
        if (kind == "count") return unify(g.arg(2), Term::integer(static_cast<std::int64_t>(items.size())));
        if (kind == "bag") return unify(g.arg(2), make_list(items));
        if (kind == "set") {
            std::sort(items.begin(), items.end(), [](const Term& a, const Term& b) { return compare_terms(a, b) < 0; });
            items.erase(std::unique(items.begin(), items.end(),
                                    [](const Term& a, const Term& b) { return compare_terms(a, b) == 0; }),
                        items.end());
            return unify(g.arg(2), make_list(items));
        }
        if (kind == "sum" || kind == "max" || kind == "min") {
            if (items.empty()) {
                if (kind == "sum") return unify(g.arg(2), Term::integer(0));
                return false;
            }
            Rational acc = eval_arith(items[0], b_);
            for (std::size_t i = 1; i < items.size(); ++i) {
                Rational v = eval_arith(items[i], b_);
                if (kind == "sum") {
                    acc += v;
                } else if (kind == "max") {
                    if (acc < v) acc = v;
                } else if (v < acc) {
                    acc = v;
                }
            }
            return unify(g.arg(2), Term::number(acc));
        }
        throw type_err("aggregate specification", spec);
    }

    bool b_between(const Term& g, std::size_t barrier) {
        const Term lo = deref(g.arg(0), b_);
        const Term hi = deref(g.arg(1), b_);
        const Term x = deref(g.arg(2), b_);
        if (lo.is_var() || hi.is_var()) throw inst_err();
        if (!lo.is_int()) throw type_err("integer", lo);
        bool unbounded = hi.is_atom("inf") || hi.is_atom("infinite");
        if (!unbounded && !hi.is_int()) throw type_err("integer", hi);
        BigInt l = lo.int_value();
        if (x.is_int()) return x.int_value() >= l && (unbounded || x.int_value() <= hi.int_value());
        if (!x.is_var()) throw type_err("integer", x);
        if (!unbounded && l > hi.int_value()) return false;
        if (unbounded || l < hi.int_value()) {
            Term rest = Term::compound("between", {Term::integer(BigInt(l + 1)), hi, x});
            push_alternative(push(rest, barrier, goals_));
        }
        return unify(x, Term::integer(l));
    }

    // ------------------------------------------------------------ arithmetic

    bool b_is(const Term& g, std::size_t) { return unify(g.arg(0), Term::number(eval_arith(g.arg(1), b_))); }

    bool b_arith_compare(const Term& g, std::size_t) {
        Rational a = eval_arith(g.arg(0), b_);
        Rational c = eval_arith(g.arg(1), b_);
        const std::string& op = g.name();
        if (op == "=:=") return a == c;
        if (op == "=\\=") return !(a == c);
        if (op == "<") return a < c;
        if (op == ">") return a > c;
        if (op == "=<") return a <= c;
        return a >= c;
    }

    bool b_succ(const Term& g, std::size_t) {
        const Term a = deref(g.arg(0), b_);
        if (a.is_int()) {
            if (a.int_value().sign() < 0) throw type_err("not_less_than_zero", a);
            return unify(g.arg(1), Term::integer(BigInt(a.int_value() + 1)));
        }
        const Term c = deref(g.arg(1), b_);
        if (!c.is_int()) {
            if (c.is_var()) throw inst_err();
            throw type_err("integer", c);
        }
        if (c.int_value().sign() <= 0) return false;
        return unify(a, Term::integer(BigInt(c.int_value() - 1)));
    }

    bool b_plus(const Term& g, std::size_t) {
        const Term a = deref(g.arg(0), b_), c = deref(g.arg(1), b_), s = deref(g.arg(2), b_);
        if (a.is_number() && c.is_number()) return unify(s, Term::number(a.number_value() + c.number_value()));
        if (a.is_number() && s.is_number()) return unify(c, Term::number(s.number_value() - a.number_value()));
        if (c.is_number() && s.is_number()) return unify(a, Term::number(s.number_value() - c.number_value()));
        throw inst_err();
    }

    // ------------------------------------------------------------ terms

    bool b_unify(const Term& g, std::size_t) { return unify(g.arg(0), g.arg(1)); }

    bool b_not_unify(const Term& g, std::size_t) {
        const Marks m = marks();
        bool ok = unify(g.arg(0), g.arg(1));
        restore(m);
        return !ok;
    }

    bool b_term_compare(const Term& g, std::size_t) {
        int c = compare_terms(resolve(g.arg(0), b_), resolve(g.arg(1), b_));
        const std::string& op = g.name();
        if (op == "==") return c == 0;
        if (op == "\\==") return c != 0;
        if (op == "@<") return c < 0;
        if (op == "@>") return c > 0;
        if (op == "@=<") return c <= 0;
        return c >= 0;
    }

    bool b_compare(const Term& g, std::size_t) {
        int c = compare_terms(resolve(g.arg(1), b_), resolve(g.arg(2), b_));
        return unify(g.arg(0), Term::atom(c < 0 ? "<" : (c > 0 ? ">" : "=")));
    }

    bool b_type_check(const Term& g, std::size_t) {
        const Term t = deref(g.arg(0), b_);
        const std::string& op = g.name();
        if (op == "var") return t.is_var();
        if (op == "nonvar") return !t.is_var();
        if (op == "atom") return t.is_atom();
        if (op == "number") return t.is_number();
        if (op == "integer") return t.is_int();
        if (op == "float") return t.is_rat();
        if (op == "atomic") return t.is_atom() || t.is_number();
        if (op == "compound") return t.is_compound();
        if (op == "callable") return t.is_callable();
        if (op == "is_list") return is_proper_list(t, b_);
        std::vector<VarId> vs;
        collect_vars(t, b_, vs);
        return vs.empty();
    }

    bool b_functor(const Term& g, std::size_t) {
        const Term t = deref(g.arg(0), b_);
        if (!t.is_var()) {
            if (t.is_compound()) {
                return unify(g.arg(1), Term::atom(t.symbol())) &&
                       unify(g.arg(2), Term::integer(static_cast<std::int64_t>(t.arity())));
            }
            return unify(g.arg(1), t) && unify(g.arg(2), Term::integer(0));
        }
        const Term n = deref(g.arg(1), b_);
        const Term a = deref(g.arg(2), b_);
        if (n.is_var() || a.is_var()) throw inst_err();
        if (!a.is_int()) throw type_err("integer", a);
        auto arity = to_int64(a.int_value());
        if (!arity || *arity < 0 || *arity > 1'000'000) throw type_err("arity", a);
        if (*arity == 0) return unify(t, n);
        if (!n.is_atom()) throw type_err("atom", n);
        std::vector<Term> args;
        for (std::int64_t i = 0; i < *arity; ++i) args.push_back(Term::var(b_.fresh()));
        return unify(t, Term::compound(n.symbol(), std::move(args)));
    }

    bool b_arg(const Term& g, std::size_t) {
        const Term n = deref(g.arg(0), b_);
        const Term t = deref(g.arg(1), b_);
        if (n.is_var() || t.is_var()) throw inst_err();
        if (!n.is_int()) throw type_err("integer", n);
        if (!t.is_compound()) throw type_err("compound", t);
        auto i = to_int64(n.int_value());
        if (!i || *i < 1 || static_cast<std::size_t>(*i) > t.arity()) return false;
        return unify(g.arg(2), t.arg(static_cast<std::size_t>(*i - 1)));
    }

    bool b_univ(const Term& g, std::size_t) {
        const Term t = deref(g.arg(0), b_);
        if (!t.is_var()) {
            std::vector<Term> items;
            if (t.is_compound()) {
                items.push_back(Term::atom(t.symbol()));
                items.insert(items.end(), t.args().begin(), t.args().end());
            } else {
                items.push_back(t);
            }
            return unify(g.arg(1), make_list(items));
        }
        std::vector<Term> items;
        if (!list_elements(g.arg(1), b_, items)) throw inst_err();
        if (items.empty()) throw type_err("non-empty list", g.arg(1));
        const Term head = deref(items[0], b_);
        if (items.size() == 1) return unify(t, head);
        if (!head.is_atom()) throw type_err("atom", head);
        return unify(t, Term::compound(head.symbol(), std::vector<Term>(items.begin() + 1, items.end())));
    }

    bool b_copy_term(const Term& g, std::size_t) {
        std::map<VarId, VarId> fresh;
        Term copy = rename_fresh(resolve(g.arg(0), b_), fresh, b_);
        return unify(g.arg(1), copy);
    }

    std::vector<Term> proper_list(const Term& t) {
        std::vector<Term> items;
        if (!list_elements(t, b_, items)) {
            if (deref(t, b_).is_var()) throw inst_err();
            throw type_err("list", resolve(t, b_));
        }
        for (auto& i : items) i = resolve(i, b_);
        return items;
    }

    bool b_sort(const Term& g, std::size_t) {
        std::vector<Term> items = proper_list(g.arg(0));
        auto less = [](const Term& a, const Term& b) { return compare_terms(a, b) < 0; };
        std::stable_sort(items.begin(), items.end(), less);
        if (g.name() == "sort") {
            items.erase(std::unique(items.begin(), items.end(),
                                    [](const Term& a, const Term& b) { return compare_terms(a, b) == 0; }),
                        items.end());
        }
        return unify(g.arg(1), make_list(items));
    }

    bool b_sort4(const Term& g, std::size_t) {
        const Term key = deref(g.arg(0), b_);
        const Term order = deref(g.arg(1), b_);
        if (!key.is_int()) throw type_err("integer", key);
        if (!order.is_atom()) throw type_err("order", order);
        const std::string& o = order.name();
        if (o != "@<" && o != "@=<" && o != "@>" && o != "@>=") throw type_err("order", order);
        auto k = to_int64(key.int_value()).value_or(-1);
        std::vector<Term> items = proper_list(g.arg(2));
        auto extract = [&](const Term& t) -> const Term& {
            if (k == 0) return t;
            if (!t.is_compound() || static_cast<std::size_t>(k) > t.arity() || k < 0) throw type_err("compound", t);
            return t.arg(static_cast<std::size_t>(k - 1));
        };
        bool desc = o == "@>" || o == "@>=";
        std::stable_sort(items.begin(), items.end(), [&](const Term& a, const Term& b) {
            int c = compare_terms(extract(a), extract(b));
            return desc ? c > 0 : c < 0;
        });
        if (o == "@<" || o == "@>") {
            items.erase(std::unique(items.begin(), items.end(),
                                    [&](const Term& a, const Term& b) {
                                        return compare_terms(extract(a), extract(b)) == 0;
                                    }),
                        items.end());
        }
        return unify(g.arg(3), make_list(items));
    }

    bool b_keysort(const Term& g, std::size_t) {
        std::vector<Term> items = proper_list(g.arg(0));
        for (const Term& t : items) {
            if (!t.is_functor("-", 2)) throw type_err("pair", t);
        }
        std::stable_sort(items.begin(), items.end(),
                         [](const Term& a, const Term& b) { return compare_terms(a.arg(0), b.arg(0)) < 0; });
        return unify(g.arg(1), make_list(items));
    }

    bool b_list_length(const Term& g, std::size_t) {
        std::vector<Term> items;
        if (!list_elements(g.arg(0), b_, items)) return false;
        return unify(g.arg(1), Term::integer(static_cast<std::int64_t>(items.size())));
    }

    bool b_make_list(const Term& g, std::size_t) {
        const Term n = deref(g.arg(0), b_);
        if (!n.is_int()) throw type_err("integer", n);
        auto len = to_int64(n.int_value());
        if (!len || *len < 0 || *len > 10'000'000) throw LogicError(ErrorKind::Representation, "list length");
        std::vector<Term> items;
        for (std::int64_t i = 0; i < *len; ++i) items.push_back(Term::var(b_.fresh()));
        return unify(g.arg(1), make_list(items));
    }

    // ------------------------------------------------------------ output

    std::string show(const Term& t, bool quoted) const {
        WriteOptions o;
        o.bindings = &b_;
        (void)quoted;
        return write_term(t, o);
    }

    bool b_write(const Term& g, std::size_t) {
        const Term t = deref(g.arg(0), b_);
        if (t.is_atom() && g.name() != "write_canonical") {
            out_ += t.name();
        } else {
            out_ += show(t, g.name() == "write_canonical" || g.name() == "print");
        }
        if (g.name() == "writeln") out_ += "\n";
        return true;
    }

    bool b_nl(const Term&, std::size_t) {
        out_ += "\n";
        return true;
    }

    bool b_tab(const Term& g, std::size_t) {
        auto n = to_int64(eval_arith(g.arg(0), b_).floor()).value_or(0);
        out_.append(static_cast<std::size_t>(std::max<std::int64_t>(0, std::min<std::int64_t>(n, 10'000))), ' ');
        return true;
    }

    std::string text_of(const Term& raw) {
        const Term t = deref(raw, b_);
        if (t.is_atom()) return t.name();
        std::vector<Term> items;
        if (list_elements(t, b_, items)) {
            std::string s;
            for (const Term& i : items) {
                const Term c = deref(i, b_);
                if (c.is_int()) {
                    s.push_back(static_cast<char>(to_int64(c.int_value()).value_or('?')));
                } else if (c.is_atom()) {
                    s += c.name();
                } else {
                    throw type_err("text", t);
                }
            }
            return s;
        }
        throw type_err("text", t);
    }

    bool b_format(const Term& g, std::size_t) {
        const std::string fmt = text_of(g.arg(0));
        std::vector<Term> args;
        if (g.arity() == 2) {
            const Term a = deref(g.arg(1), b_);
            if (!list_elements(a, b_, args)) args = {a};
        }
        std::size_t next = 0;
        auto take = [&]() -> Term {
            if (next >= args.size()) throw LogicError(ErrorKind::Type, "format: not enough arguments");
            return deref(args[next++], b_);
        };
        for (std::size_t i = 0; i < fmt.size(); ++i) {
            char c = fmt[i];
            if (c != '~' || i + 1 >= fmt.size()) {
                out_.push_back(c);
                continue;
            }
            ++i;
            std::string num;
            while (i < fmt.size() && std::isdigit(static_cast<unsigned char>(fmt[i]))) num.push_back(fmt[i++]);
            if (i >= fmt.size()) break;
            char d = fmt[i];
            switch (d) {
            case 'w':
            case 'p':
            case 'q':
            case 'a': {
                Term t = take();
                out_ += t.is_atom() ? t.name() : show(t, d == 'q');
                break;
            }
            case 'd': {
                Term t = take();
                if (!t.is_int()) throw type_err("integer", t);
                out_ += t.int_value().str();
                break;
            }
            case 'f':
            case 'e':
            case 'g': {
                Rational v = eval_arith(take(), b_);
                int prec = num.empty() ? 6 : std::stoi(num);
                char spec[16];
                std::snprintf(spec, sizeof spec, "%%.%d%c", std::min(prec, 50), d);
                char buf[512];
                std::snprintf(buf, sizeof buf, spec, v.to_double());
                out_ += buf;
                break;
            }
            case 'n': out_ += "\n"; break;
            case '~': out_ += "~"; break;
            case 's': out_ += text_of(take()); break;
            case 't':
            case '|':
            case '+': break;
            default: throw LogicError(ErrorKind::Type, std::string("format: unknown directive ~") + d);
            }
        }
        return true;
    }

    // ------------------------------------------------------------ constraints

    enum class Route { Fd, R };

    Route route(const Term& g) {
        std::vector<VarId> vs;
        collect_vars(g, b_, vs);
        bool any_fd = false, any_r = false;
        for (VarId v : vs) {
            any_fd = any_fd || fd_.has(v);
            any_r = any_r || r_.has(v);
        }
        if (any_fd && any_r) throw LogicError(ErrorKind::TypeMix, "constraint mixes finite-domain and rational variables");
        if (any_r || contains_rational(g, b_)) {
            if (any_fd) throw LogicError(ErrorKind::TypeMix, "rational constraint over finite-domain variables");
            return Route::R;
        }
        return Route::Fd;
    }

    bool post_fd(const Term& g) {
        fd::PostContext ctx{b_, fd_, [this] { return b_.fresh(); }};
        if (!fd::fd_post(g, ctx)) return false;
        sync_stores();
        return true;
    }

    bool b_constraint(const Term& g, std::size_t barrier) {
        const std::string& op = g.name();
        if (op == "in" || op == "ins") {
            std::vector<VarId> vs;
            collect_vars(g.arg(0), b_, vs);
            for (VarId v : vs) {
                if (r_.has(v)) throw LogicError(ErrorKind::TypeMix, "domain posted on a rational variable");
            }
            return post_fd(g);
        }
        if (route(g) == Route::Fd) return post_fd(g);
        if (op == "#\\=") {
            Term lt = Term::compound("$r", {Term::compound("<", {g.arg(0), g.arg(1)})});
            Term gt = Term::compound("$r", {Term::compound(">", {g.arg(0), g.arg(1)})});
            goals_ = push(Term::compound(";", {lt, gt}), barrier, goals_);
            return true;
        }
        return post_r(g);
    }

    bool post_r(const Term& rel) {
        std::vector<VarId> vs;
        collect_vars(rel, b_, vs);
        for (VarId v : vs) {
            if (fd_.has(v)) throw LogicError(ErrorKind::TypeMix, "rational constraint over finite-domain variables");
        }
        if (!clpr::r_post(rel, b_, r_)) return false;
        sync_stores();
        return true;
    }

    bool b_braces(const Term& g, std::size_t barrier) {
        std::vector<Term> parts;
        flatten_conjunction(deref(g.arg(0), b_), parts);
        for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
            goals_ = push(Term::compound("$r", {*it}), barrier, goals_);
        }
        return true;
    }

    bool b_r(const Term& g, std::size_t barrier) {
        const Term rel = deref(g.arg(0), b_);
        if (rel.is_compound() && rel.arity() == 2 && (rel.name() == "=\\=" || rel.name() == "#\\=")) {
            Term lt = Term::compound("$r", {Term::compound("<", {rel.arg(0), rel.arg(1)})});
            Term gt = Term::compound("$r", {Term::compound(">", {rel.arg(0), rel.arg(1)})});
            goals_ = push(Term::compound(";", {lt, gt}), barrier, goals_);
            return true;
        }
        if (rel.is_functor(",", 2)) return b_braces(Term::compound("{}", {rel}), barrier);
        if (!clpr::is_relation(rel)) throw type_err("rational constraint", rel);
        return post_r(rel);
    }

    struct LabelVar {
        VarId id;
    };

    // Unbound finite-domain variables of a label list, in list order.
    std::vector<VarId> label_vars(const Term& list, bool require_finite) {
        std::vector<Term> items;
        if (!list_elements(list, b_, items)) {
            if (deref(list, b_).is_var()) throw inst_err();
            throw type_err("list", resolve(list, b_));
        }
        std::vector<VarId> out;
        for (const Term& i : items) {
            const Term t = deref(i, b_);
            if (t.is_int()) continue;
            if (!t.is_var()) throw type_err("integer", t);
            if (r_.has(t.var_id())) throw LogicError(ErrorKind::TypeMix, "labeling a rational variable");
            if (require_finite && !fd_.domain(t.var_id()).finite()) {
                throw LogicError(ErrorKind::UnboundedDomain, "labeling a variable without finite bounds");
            }
            out.push_back(t.var_id());
        }
        return out;
    }

    bool b_label(const Term& g, std::size_t barrier) {
        fd::LabelStrategy strategy = opt_.label_strategy;
        bool down = false;
        Term vars = g.arg(g.arity() - 1);
        if (g.arity() == 2) {
            std::vector<Term> opts;
            if (!list_elements(g.arg(0), b_, opts)) throw type_err("labeling options", g.arg(0));
            for (const Term& o : opts) {
                const Term t = deref(o, b_);
                if (t.is_atom("ff") || t.is_atom("ffc") || t.is_atom("min")) {
                    strategy = fd::LabelStrategy::FirstFail;
                } else if (t.is_atom("leftmost")) {
                    strategy = fd::LabelStrategy::Leftmost;
                } else if (t.is_atom("down")) {
                    down = true;
                } else if (t.is_atom("up") || t.is_atom("step") || t.is_atom("enum") || t.is_atom("bisect")) {
                    continue;
                } else {
                    throw type_err("labeling option", t);
                }
            }
        }
        label_vars(vars, true);
        Term s = Term::atom(strategy == fd::LabelStrategy::FirstFail ? "ff" : "leftmost");
        goals_ = push(Term::compound("$label", {s, Term::atom(down ? "down" : "up"), vars}), barrier, goals_);
        return true;
    }

    bool b_label_step(const Term& g, std::size_t barrier) {
        auto strategy = deref(g.arg(0), b_).is_atom("ff") ? fd::LabelStrategy::FirstFail : fd::LabelStrategy::Leftmost;
        bool down = deref(g.arg(1), b_).is_atom("down");
        std::vector<VarId> vs = label_vars(g.arg(2), false);
        auto pick = fd::select_variable(vs, fd_, strategy);
        if (!pick) return true;
        const VarId x = vs[*pick];
        fd::FdDomain d = fd_.domain(x);
        if (!d.finite()) throw LogicError(ErrorKind::UnboundedDomain, "labeling a variable without finite bounds");
        const std::int64_t v = down ? d.max() : d.min();
        Term xv = Term::var(x);
        Term val = Term::integer(v);
        GoalList again = push(g, barrier, goals_);
        push_alternative(push(Term::compound("$fd_exclude", {xv, val}), barrier, again));
        goals_ = again;
        return unify(xv, val);
    }

    bool b_fd_exclude(const Term& g, std::size_t) {
        const Term x = deref(g.arg(0), b_);
        const std::int64_t v = deref(g.arg(1), b_).small_int();
        if (x.is_int()) return !(x.int_value() == v);
        if (!fd_.restrict(x.var_id(), fd_.domain(x.var_id()).remove(v))) return false;
        sync_stores();
        return true;
    }

    bool b_autolabel(const Term&, std::size_t barrier) {
        std::vector<VarId> seeds;
        for (VarId q = 0; q < query_.var_count; ++q) {
            std::vector<VarId> vs;
            collect_vars(Term::var(q), b_, vs);
            for (VarId v : vs) {
                if (fd_.has(v) && std::find(seeds.begin(), seeds.end(), v) == seeds.end()) seeds.push_back(v);
            }
        }
        if (seeds.empty()) return true;
        std::vector<VarId> order = seeds;
        for (VarId v : fd_.connected(seeds)) {
            if (std::find(seeds.begin(), seeds.end(), v) == seeds.end()) order.push_back(v);
        }
        std::vector<Term> vars;
        for (VarId v : order) {
            if (!b_.is_bound(v) && !fd_.domain(v).is_singleton()) vars.push_back(Term::var(v));
        }
        if (vars.empty()) return true;
        auto_labeled_ = true;
        Term s = Term::atom(opt_.label_strategy == fd::LabelStrategy::FirstFail ? "ff" : "leftmost");
        goals_ = push(Term::compound("$label", {s, Term::atom("up"), make_list(vars)}), barrier, goals_);
        return true;
    }

    bool b_fd_reflect(const Term& g, std::size_t) {
        const Term x = deref(g.arg(0), b_);
        fd::FdDomain d;
        if (x.is_int()) {
            d = fd::FdDomain::singleton(to_int64(x.int_value()).value_or(0));
        } else if (x.is_var()) {
            d = fd_.domain(x.var_id());
        } else {
            throw type_err("integer", x);
        }
        auto bound = [](std::int64_t v) {
            if (v >= fd::kInf) return Term::atom("sup");
            if (v <= -fd::kInf) return Term::atom("inf");
            return Term::integer(v);
        };
        const std::string& op = g.name();
        if (op == "fd_inf") return unify(g.arg(1), bound(d.min()));
        if (op == "fd_sup") return unify(g.arg(1), bound(d.max()));
        if (op == "fd_size") {
            auto s = d.size();
            return unify(g.arg(1), s ? Term::integer(BigInt(*s)) : Term::atom("sup"));
        }
        return unify(g.arg(1), bound(d.min())) && unify(g.arg(2), bound(d.max()));
    }

    // ------------------------------------------------------------ state

    const Database& db_;
    const Database& prelude_;
    ParsedTerm query_;
    Budget budget_;
    EngineOptions opt_;
    Bindings b_;
    fd::FdStore fd_;
    clpr::RStore r_;
    std::vector<ChoicePoint> cps_;
    GoalList goals_;
    std::vector<VarId> pending_;
    Marks initial_{};
    std::uint64_t steps_ = 0;
    std::chrono::steady_clock::time_point start_;
    bool started_ = false;
    bool exhausted_ = false;
    bool auto_labeled_ = false;
    std::string out_;
};

// ---------------------------------------------------------------- solver facade

Solver::Solver(const Database& db, const ParsedTerm& query, Budget budget, EngineOptions options)
    : m_(std::make_unique<Machine>(db, query, budget, options)) {}

Solver::Solver(const Database& db, std::string_view query_text, Budget budget, EngineOptions options)
    : Solver(db, read_term(query_text), budget, options) {}

Solver::~Solver() = default;

bool Solver::next() { return m_->next(); }
const ParsedTerm& Solver::query() const { return m_->query(); }
const Bindings& Solver::bindings() const { return m_->bindings(); }
Term Solver::value(VarId query_var) const { return resolve(Term::var(query_var), m_->bindings()); }

std::optional<Term> Solver::value(std::string_view var_name) const {
    for (const auto& [name, id] : m_->query().var_names) {
        if (name == var_name) return value(id);
    }
    return std::nullopt;
}

std::vector<std::pair<std::string, std::string>> Solver::answer_text() const {
    std::vector<std::pair<std::string, std::string>> out;
    const auto& names = m_->query().var_names;
    WriteOptions o;
    o.var_names = &names;
    for (const auto& [name, id] : names) {
        if (name.empty() || name[0] == '_') continue;
        Term v = value(id);
        if (v.is_var() && v.var_id() == id) continue;
        out.emplace_back(name, write_term(v, o));
    }
    return out;
}

const fd::FdStore& Solver::fd_store() const { return m_->fd(); }
const clpr::RStore& Solver::r_store() const { return m_->r(); }

clpr::Residue Solver::residue(std::span<const VarId> vars) const {
    std::vector<VarId> targets;
    for (VarId v : vars) {
        const Term t = deref(Term::var(v), m_->bindings());
        if (t.is_var()) targets.push_back(t.var_id());
    }
    return m_->r().residue(targets);
}

std::uint64_t Solver::steps() const { return m_->steps(); }
bool Solver::auto_labeled() const { return m_->auto_labeled(); }
const std::string& Solver::output() const { return m_->output(); }

std::vector<std::vector<std::pair<std::string, std::string>>> solve_all(const Database& db, std::string_view query,
                                                                        std::size_t limit, Budget budget) {
    std::vector<std::vector<std::pair<std::string, std::string>>> out;
    Solver s(db, query, budget);
    while (out.size() < limit && s.next()) out.push_back(s.answer_text());
    return out;
}

}  // namespace prolite
