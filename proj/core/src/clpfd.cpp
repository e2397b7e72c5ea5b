// SPDX-License-Identifier: Apache-2.0
#include "prolite/clpfd.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace prolite::fd {

namespace {

__extension__ typedef __int128 i128;

// Interval sums saturate here; anything at or past it is treated as unbounded.
constexpr i128 kBig = i128{1} << 112;

i128 sat(i128 v) { return v >= kBig ? kBig : (v <= -kBig ? -kBig : v); }
bool pinf(i128 v) { return v >= kBig; }
bool ninf(i128 v) { return v <= -kBig; }

i128 mul_bound(std::int64_t c, std::int64_t bound) {
    if (bound >= kInf) return c > 0 ? kBig : -kBig;
    if (bound <= -kInf) return c > 0 ? -kBig : kBig;
    return sat(i128{c} * bound);
}

i128 floor_div128(i128 a, i128 b) {
    i128 q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

i128 ceil_div128(i128 a, i128 b) { return -floor_div128(-a, b); }

// Converts a derived bound back to the int64 domain scale.
std::int64_t lower(i128 v) {
    if (v <= -kInf) return -kInf;
    if (v >= kInf) throw LogicError(ErrorKind::Representation, "finite-domain bound out of range");
    return static_cast<std::int64_t>(v);
}

std::int64_t upper(i128 v) {
    if (v >= kInf) return kInf;
    if (v <= -kInf) throw LogicError(ErrorKind::Representation, "finite-domain bound out of range");
    return static_cast<std::int64_t>(v);
}

std::int64_t floor_mod64(std::int64_t a, std::int64_t m) {
    std::int64_t r = a % m;
    if (r != 0 && ((r < 0) != (m < 0))) r += m;
    return r;
}

// Value-level pruning is only attempted below this domain size.
constexpr std::uint64_t kValueLimit = 1u << 16;

}  // namespace

// ---------------------------------------------------------------- FdDomain

FdDomain FdDomain::range(std::int64_t lo, std::int64_t hi) {
    FdDomain d;
    lo = std::max(lo, -kInf);
    hi = std::min(hi, kInf);
    if (lo <= hi) d.iv_.push_back({lo, hi});
    return d;
}

FdDomain FdDomain::from_values(std::vector<std::int64_t> values) {
    std::sort(values.begin(), values.end());
    FdDomain d;
    for (std::int64_t v : values) {
        if (!d.iv_.empty() && v <= d.iv_.back().hi + 1) {
            d.iv_.back().hi = std::max(d.iv_.back().hi, v);
        } else {
            d.iv_.push_back({v, v});
        }
    }
    return d;
}

std::optional<std::uint64_t> FdDomain::size() const {
    if (!finite()) return std::nullopt;
    std::uint64_t n = 0;
    for (const auto& i : iv_) n += static_cast<std::uint64_t>(i.hi - i.lo) + 1;
    return n;
}

bool FdDomain::contains(std::int64_t v) const {
    auto it = std::lower_bound(iv_.begin(), iv_.end(), v, [](const Interval& i, std::int64_t x) { return i.hi < x; });
    return it != iv_.end() && it->lo <= v;
}

FdDomain FdDomain::intersect(const FdDomain& other) const {
    FdDomain out;
    std::size_t i = 0, j = 0;
    while (i < iv_.size() && j < other.iv_.size()) {
        std::int64_t lo = std::max(iv_[i].lo, other.iv_[j].lo);
        std::int64_t hi = std::min(iv_[i].hi, other.iv_[j].hi);
        if (lo <= hi) out.iv_.push_back({lo, hi});
        if (iv_[i].hi < other.iv_[j].hi) {
            ++i;
        } else {
            ++j;
        }
    }
    return out;
}

FdDomain FdDomain::unite(const FdDomain& other) const {
    std::vector<Interval> all(iv_);
    all.insert(all.end(), other.iv_.begin(), other.iv_.end());
    std::sort(all.begin(), all.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    FdDomain out;
    for (const auto& i : all) {
        if (!out.iv_.empty() && i.lo <= out.iv_.back().hi + 1) {
            out.iv_.back().hi = std::max(out.iv_.back().hi, i.hi);
        } else {
            out.iv_.push_back(i);
        }
    }
    return out;
}

FdDomain FdDomain::remove(std::int64_t v) const {
    FdDomain out;
    for (const auto& i : iv_) {
        if (v < i.lo || v > i.hi) {
            out.iv_.push_back(i);
            continue;
        }
        if (i.lo < v) out.iv_.push_back({i.lo, v - 1});
        if (v < i.hi) out.iv_.push_back({v + 1, i.hi});
    }
    return out;
}

std::optional<std::int64_t> FdDomain::next_above(std::int64_t v) const {
    for (const auto& i : iv_) {
        if (i.hi <= v) continue;
        return std::max(i.lo, v + 1);
    }
    return std::nullopt;
}

std::vector<std::int64_t> FdDomain::values() const {
    std::vector<std::int64_t> out;
    if (!finite()) return out;
    for (const auto& i : iv_) {
        for (std::int64_t v = i.lo;; ++v) {
            out.push_back(v);
            if (v == i.hi) break;
        }
    }
    return out;
}

std::string FdDomain::str() const {
    if (iv_.empty()) return "{}";
    auto bound = [](std::int64_t v) {
        if (v >= kInf) return std::string("sup");
        if (v <= -kInf) return std::string("inf");
        return std::to_string(v);
    };
    std::string out;
    for (std::size_t k = 0; k < iv_.size(); ++k) {
        if (k) out += "\\/";
        if (iv_[k].lo == iv_[k].hi) {
            out += bound(iv_[k].lo);
        } else {
            out += bound(iv_[k].lo) + ".." + bound(iv_[k].hi);
        }
    }
    return out;
}

// ---------------------------------------------------------------- propagators

std::vector<VarId> propagator_vars(const Propagator& p) {
    std::vector<VarId> out;
    std::visit(
        [&](const auto& q) {
            using T = std::decay_t<decltype(q)>;
            if constexpr (std::is_same_v<T, LinearProp>) {
                for (const auto& [c, v] : q.terms) out.push_back(v);
            } else {
                out.push_back(q.x);
                out.push_back(q.result);
            }
        },
        p);
    return out;
}

// ---------------------------------------------------------------- FdStore

FdDomain FdStore::domain(VarId v) const {
    auto it = domains_.find(v);
    return it == domains_.end() ? FdDomain::all() : it->second;
}

std::vector<VarId> FdStore::vars() const {
    std::vector<VarId> out;
    out.reserve(domains_.size());
    for (const auto& [v, d] : domains_) out.push_back(v);
    return out;
}

void FdStore::ensure(VarId v) {
    if (has(v)) return;
    domains_.emplace(v, FdDomain::all());
    trail_.push_back({TrailEntry::NewVar, v, {}});
}

bool FdStore::restrict(VarId v, const FdDomain& d) {
    ensure(v);
    if (!set_domain(v, domains_.at(v).intersect(d))) {
        queue_.clear();
        std::fill(queued_.begin(), queued_.end(), false);
        return false;
    }
    return propagate_fixpoint();
}

bool FdStore::post(Propagator p) {
    for (VarId v : propagator_vars(p)) ensure(v);
    std::size_t index = props_.size();
    props_.push_back(std::move(p));
    queued_.push_back(false);
    trail_.push_back({TrailEntry::NewProp, 0, {}});
    std::vector<VarId> vs = propagator_vars(props_.back());
    std::sort(vs.begin(), vs.end());
    vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
    for (VarId v : vs) {
        watchers_[v].push_back(index);
        trail_.push_back({TrailEntry::Watch, v, {}});
    }
    if (difference_cycle()) return false;
    enqueue(index);
    return propagate_fixpoint();
}

void FdStore::enqueue(std::size_t index) {
    if (queued_[index]) return;
    queued_[index] = true;
    queue_.push_back(index);
}

bool FdStore::set_domain(VarId v, FdDomain d) {
    FdDomain& cur = domains_.at(v);
    if (d == cur) return true;
    if (d.empty()) return false;
    trail_.push_back({TrailEntry::Domain, v, std::move(cur)});
    cur = std::move(d);
    if (cur.is_singleton()) fixed_.push_back(v);
    auto it = watchers_.find(v);
    if (it != watchers_.end()) {
        for (std::size_t i : it->second) enqueue(i);
    }
    return true;
}

bool FdStore::propagate_fixpoint() {
    while (!queue_.empty()) {
        std::size_t i = queue_.front();
        queue_.pop_front();
        queued_[i] = false;
        if (tick_) tick_();
        if (!run(i)) {
            for (std::size_t q : queue_) queued_[q] = false;
            queue_.clear();
            return false;
        }
    }
    return true;
}

void FdStore::restore(std::size_t mark) {
    while (trail_.size() > mark) {
        TrailEntry e = std::move(trail_.back());
        trail_.pop_back();
        switch (e.kind) {
        case TrailEntry::Domain:
            domains_.at(e.var) = std::move(e.old);
            break;
        case TrailEntry::NewVar:
            domains_.erase(e.var);
            break;
        case TrailEntry::NewProp:
            props_.pop_back();
            queued_.pop_back();
            break;
        case TrailEntry::Watch: {
            auto it = watchers_.find(e.var);
            it->second.pop_back();
            if (it->second.empty()) watchers_.erase(it);
            break;
        }
        }
    }
    for (std::size_t q : queue_) {
        if (q < queued_.size()) queued_[q] = false;
    }
    queue_.clear();
    fixed_.clear();
}

std::vector<VarId> FdStore::drain_fixed() {
    std::vector<VarId> out;
    out.swap(fixed_);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    std::erase_if(out, [&](VarId v) { return !domain(v).is_singleton(); });
    return out;
}

std::vector<VarId> FdStore::connected(std::span<const VarId> seeds) const {
    std::set<VarId> seen;
    std::vector<VarId> stack(seeds.begin(), seeds.end());
    std::vector<bool> prop_seen(props_.size(), false);
    while (!stack.empty()) {
        VarId v = stack.back();
        stack.pop_back();
        if (!seen.insert(v).second) continue;
        auto it = watchers_.find(v);
        if (it == watchers_.end()) continue;
        for (std::size_t i : it->second) {
            if (prop_seen[i]) continue;
            prop_seen[i] = true;
            for (VarId w : propagator_vars(props_[i])) {
                if (!seen.count(w)) stack.push_back(w);
            }
        }
    }
    return {seen.begin(), seen.end()};
}

bool FdStore::run(std::size_t index) {
    // running only enqueues; props_ is not resized here
    const Propagator& p = props_[index];
    return std::visit(
        [&](const auto& q) {
            using T = std::decay_t<decltype(q)>;
            if constexpr (std::is_same_v<T, LinearProp>) {
                return run_linear(q);
            } else if constexpr (std::is_same_v<T, ModProp>) {
                return run_mod(q);
            } else {
                return run_abs(q);
            }
        },
        p);
}

bool FdStore::run_linear(const LinearProp& p) {
    const std::size_t n = p.terms.size();
    std::vector<FdDomain> doms(n);
    for (std::size_t i = 0; i < n; ++i) doms[i] = domains_.at(p.terms[i].second);

    if (p.rel == LinRel::Ne) {
        std::size_t open = n;
        BigInt fixed_sum = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (doms[i].is_singleton()) {
                fixed_sum += BigInt(p.terms[i].first) * doms[i].min();
            } else if (open == n) {
                open = i;
            } else {
                return true;  // two or more free variables: nothing to prune
            }
        }
        BigInt rest = BigInt(p.constant) - fixed_sum;
        if (open == n) return !rest.is_zero();
        BigInt c = p.terms[open].first;
        if (rest % c != 0) return true;
        BigInt q = rest / c;
        auto v = to_int64(q);
        if (!v || *v >= kInf || *v <= -kInf) return true;
        return set_domain(p.terms[open].second, doms[open].remove(*v));
    }

    // Interval sums of c_i * x_i.
    std::vector<i128> lo(n), hi(n);
    int lo_inf = 0, hi_inf = 0;
    i128 lo_sum = 0, hi_sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::int64_t c = p.terms[i].first;
        std::int64_t a = doms[i].min(), b = doms[i].max();
        lo[i] = c > 0 ? mul_bound(c, a) : mul_bound(c, b);
        hi[i] = c > 0 ? mul_bound(c, b) : mul_bound(c, a);
        if (ninf(lo[i])) {
            ++lo_inf;
        } else {
            lo_sum += lo[i];
        }
        if (pinf(hi[i])) {
            ++hi_inf;
        } else {
            hi_sum += hi[i];
        }
    }
    const i128 k = p.constant;

    // Ground case: exact check avoids any saturation.
    if (std::all_of(doms.begin(), doms.end(), [](const FdDomain& d) { return d.is_singleton(); })) {
        BigInt s = 0;
        for (std::size_t i = 0; i < n; ++i) s += BigInt(p.terms[i].first) * doms[i].min();
        return p.rel == LinRel::Eq ? s == p.constant : s <= p.constant;
    }
    if (lo_inf == 0 && sat(lo_sum) > k) return false;
    if (p.rel == LinRel::Eq && hi_inf == 0 && sat(hi_sum) < k) return false;

    for (std::size_t i = 0; i < n; ++i) {
        const std::int64_t c = p.terms[i].first;
        const VarId v = p.terms[i].second;
        FdDomain d = domains_.at(v);
        // sum of the other terms' lows / highs
        bool rest_lo_inf = ninf(lo[i]) ? lo_inf > 1 : lo_inf > 0;
        bool rest_hi_inf = pinf(hi[i]) ? hi_inf > 1 : hi_inf > 0;
        i128 rest_lo = ninf(lo[i]) ? lo_sum : lo_sum - lo[i];
        i128 rest_hi = pinf(hi[i]) ? hi_sum : hi_sum - hi[i];

        // c*x <= k - rest_lo
        if (!rest_lo_inf) {
            i128 bound = sat(k - rest_lo);
            if (!pinf(bound) && !ninf(bound)) {
                if (c > 0) {
                    d = d.clamp(-kInf, upper(floor_div128(bound, c)));
                } else {
                    d = d.clamp(lower(ceil_div128(bound, c)), kInf);
                }
            } else if (ninf(bound)) {
                throw LogicError(ErrorKind::Representation, "finite-domain bound out of range");
            }
        }
        // c*x >= k - rest_hi
        if (p.rel == LinRel::Eq && !rest_hi_inf) {
            i128 bound = sat(k - rest_hi);
            if (!pinf(bound) && !ninf(bound)) {
                if (c > 0) {
                    d = d.clamp(lower(ceil_div128(bound, c)), kInf);
                } else {
                    d = d.clamp(-kInf, upper(floor_div128(bound, c)));
                }
            } else if (pinf(bound)) {
                throw LogicError(ErrorKind::Representation, "finite-domain bound out of range");
            }
        }
        if (!set_domain(v, std::move(d))) return false;
    }
    return true;
}

bool FdStore::run_mod(const ModProp& p) {
    const std::int64_t m = p.modulus;
    const std::int64_t am = m < 0 ? -m : m;
    FdDomain x = domains_.at(p.x);
    FdDomain z = domains_.at(p.result);
    if (!p.truncated) {
        z = m > 0 ? z.clamp(0, m - 1) : z.clamp(m + 1, 0);
    } else if (x.min() >= 0) {
        z = z.clamp(0, am - 1);
    } else if (x.max() <= 0) {
        z = z.clamp(-(am - 1), 0);
    } else {
        z = z.clamp(-(am - 1), am - 1);
    }
    if (!set_domain(p.result, z)) return false;
    auto size = x.size();
    if (!size || *size > kValueLimit) return true;

    auto f = [&](std::int64_t v) { return p.truncated ? v % m : floor_mod64(v, m); };
    std::vector<std::int64_t> xs, zs;
    for (std::int64_t v : x.values()) {
        std::int64_t r = f(v);
        if (z.contains(r)) {
            xs.push_back(v);
            zs.push_back(r);
        }
    }
    if (!set_domain(p.x, FdDomain::from_values(std::move(xs)))) return false;
    return set_domain(p.result, FdDomain::from_values(std::move(zs)));
}

bool FdStore::run_abs(const AbsProp& p) {
    FdDomain x = domains_.at(p.x);
    FdDomain y = domains_.at(p.result).clamp(0, kInf);

    // y within the image bounds of |x|
    if (x.min() >= 0) {
        y = y.clamp(x.min(), x.max());
    } else if (x.max() <= 0) {
        y = y.clamp(x.max() <= -kInf ? kInf : -x.max(), x.min() <= -kInf ? kInf : -x.min());
    } else {
        std::int64_t top = std::max(x.min() <= -kInf ? kInf : -x.min(), x.max());
        y = y.clamp(0, top);
    }
    if (!set_domain(p.result, y)) return false;
    y = domains_.at(p.result);

    // x within [-ymax, -ymin] u [ymin, ymax]
    std::int64_t ymin = y.min(), ymax = y.max();
    FdDomain branches = FdDomain::range(ymin, ymax).unite(
        FdDomain::range(ymax >= kInf ? -kInf : -ymax, -ymin));
    if (!set_domain(p.x, x.intersect(branches))) return false;
    x = domains_.at(p.x);

    auto size = x.size();
    if (!size || *size > kValueLimit) return true;
    std::vector<std::int64_t> xs, ys;
    for (std::int64_t v : x.values()) {
        std::int64_t a = v < 0 ? -v : v;
        if (y.contains(a)) {
            xs.push_back(v);
            ys.push_back(a);
        }
    }
    if (!set_domain(p.x, FdDomain::from_values(std::move(xs)))) return false;
    return set_domain(p.result, FdDomain::from_values(std::move(ys)));
}

// Difference constraints x - y <= k form a graph; a negative cycle is unsatisfiable
// regardless of domain bounds.
bool FdStore::difference_cycle() const {
    struct Edge {
        VarId from, to;
        i128 w;
    };
    std::vector<Edge> edges;
    auto add = [&](const LinearProp& q, bool negate) {
        std::int64_t a = q.terms[0].first, b = q.terms[1].first;
        if (a != -b) return;
        i128 k = q.constant;
        VarId x = q.terms[0].second, y = q.terms[1].second;
        i128 scale = a < 0 ? -a : a;
        if (negate) {
            k = -k;
            a = -a;
        }
        // a*(x - y) <= k  with a = +/-scale
        i128 bound = floor_div128(k, scale);
        if (a > 0) {
            edges.push_back({y, x, bound});  // x - y <= bound
        } else {
            edges.push_back({x, y, bound});  // y - x <= bound
        }
    };
    for (const auto& p : props_) {
        const auto* q = std::get_if<LinearProp>(&p);
        if (!q || q->terms.size() != 2 || q->rel == LinRel::Ne) continue;
        add(*q, false);
        if (q->rel == LinRel::Eq) add(*q, true);
    }
    if (edges.size() < 2) return false;
    std::map<VarId, i128> dist;
    for (const auto& e : edges) {
        dist[e.from] = 0;
        dist[e.to] = 0;
    }
    for (std::size_t round = 0; round < dist.size(); ++round) {
        bool changed = false;
        for (const auto& e : edges) {
            i128 cand = dist[e.from] + e.w;
            if (cand < dist[e.to]) {
                dist[e.to] = cand;
                changed = true;
            }
        }
        if (!changed) return false;
    }
    return true;
}

// ---------------------------------------------------------------- labeling

std::optional<std::size_t> select_variable(std::span<const VarId> vars, const FdStore& store,
                                           LabelStrategy strategy) {
    std::optional<std::size_t> best;
    std::uint64_t best_size = 0;
    for (std::size_t i = 0; i < vars.size(); ++i) {
        FdDomain d = store.domain(vars[i]);
        if (d.is_singleton()) continue;
        if (strategy == LabelStrategy::Leftmost) return i;
        std::uint64_t s = d.size().value_or(UINT64_MAX);
        if (!best || s < best_size) {
            best = i;
            best_size = s;
        }
    }
    return best;
}

Labeler::Labeler(FdStore& store, std::vector<VarId> vars, LabelStrategy strategy)
    : store_(store), vars_(std::move(vars)), strategy_(strategy), base_mark_(store.mark()) {
    for (VarId v : vars_) {
        if (!store_.domain(v).finite()) {
            throw LogicError(ErrorKind::UnboundedDomain, "labeling a variable without finite bounds");
        }
    }
}

Labeler::~Labeler() { store_.restore(base_mark_); }

// Pushes choices until every variable is fixed (true) or a branch fails (false).
bool Labeler::descend() {
    while (true) {
        auto i = select_variable(vars_, store_, strategy_);
        if (!i) return true;
        FdDomain d = store_.domain(vars_[*i]);
        Frame f{*i, d.min(), store_.mark()};
        stack_.push_back(f);
        if (!store_.restrict(vars_[*i], FdDomain::singleton(f.value))) return false;
    }
}

// Moves to the next untried value of the deepest frame; false when the search is exhausted.
bool Labeler::advance() {
    while (!stack_.empty()) {
        Frame& f = stack_.back();
        store_.restore(f.mark);
        auto next = store_.domain(vars_[f.var_index]).next_above(f.value);
        if (!next) {
            stack_.pop_back();
            continue;
        }
        f.value = *next;
        if (store_.restrict(vars_[f.var_index], FdDomain::singleton(f.value))) return true;
    }
    return false;
}

std::optional<std::vector<std::int64_t>> Labeler::next() {
    if (done_) return std::nullopt;
    bool ok;
    if (!started_) {
        started_ = true;
        ok = descend();
    } else {
        ok = false;
    }
    while (!ok) {
        if (!advance()) {
            done_ = true;
            store_.restore(base_mark_);
            return std::nullopt;
        }
        ok = descend();
    }
    std::vector<std::int64_t> out;
    out.reserve(vars_.size());
    for (VarId v : vars_) out.push_back(store_.domain(v).min());
    if (stack_.empty()) {
        // already ground on entry: exactly one assignment
        done_ = true;
    }
    return out;
}

std::vector<std::vector<std::int64_t>> label_all(FdStore& store, std::vector<VarId> vars, LabelStrategy strategy) {
    std::vector<std::vector<std::int64_t>> out;
    Labeler l(store, std::move(vars), strategy);
    while (auto s = l.next()) out.push_back(std::move(*s));
    return out;
}

// ---------------------------------------------------------------- term-level posting

namespace {

struct LinExpr {
    std::map<VarId, BigInt> coeffs;
    BigInt constant = 0;

    bool ground() const {
        return std::all_of(coeffs.begin(), coeffs.end(), [](const auto& kv) { return kv.second.is_zero(); });
    }
    void add(const LinExpr& o, const BigInt& scale) {
        for (const auto& [v, c] : o.coeffs) coeffs[v] += c * scale;
        constant += o.constant * scale;
    }
};

std::int64_t checked(const BigInt& v) {
    auto x = to_int64(v);
    if (!x || *x > kMaxValue || *x < -kMaxValue) {
        throw LogicError(ErrorKind::Representation, "integer " + v.str() + " exceeds the finite-domain range");
    }
    return *x;
}

class Flattener {
public:
    explicit Flattener(PostContext& ctx) : ctx_(ctx) {}

    LinExpr linearize(const Term& raw) {
        const Term& t = deref(raw, ctx_.bindings);
        LinExpr e;
        switch (t.kind()) {
        case TermKind::Var:
            e.coeffs[t.var_id()] = 1;
            return e;
        case TermKind::Int:
            e.constant = t.int_value();
            return e;
        case TermKind::Rat:
            throw LogicError(ErrorKind::Type, "integer expected, found a rational");
        case TermKind::Atom:
            throw LogicError(ErrorKind::Type, "evaluable expected, found " + t.name());
        case TermKind::Unbound:
            throw LogicError(ErrorKind::Instantiation, "unbound term");
        case TermKind::Compound:
            break;
        }
        const std::string& f = t.name();
        if (t.arity() == 2 && (f == "+" || f == "-")) {
            e = linearize(t.arg(0));
            e.add(linearize(t.arg(1)), f == "+" ? 1 : -1);
            return e;
        }
        if (t.arity() == 1 && (f == "-" || f == "+")) {
            e.add(linearize(t.arg(0)), f == "-" ? -1 : 1);
            return e;
        }
        if (t.arity() == 2 && f == "*") {
            LinExpr a = linearize(t.arg(0));
            LinExpr b = linearize(t.arg(1));
            if (a.ground()) {
                e.add(b, a.constant);
                return e;
            }
            if (b.ground()) {
                e.add(a, b.constant);
                return e;
            }
            throw LogicError(ErrorKind::NonLinearUnsupported, "product of two non-ground expressions");
        }
        if (t.arity() == 1 && f == "abs") {
            VarId x = as_var(linearize(t.arg(0)));
            VarId y = ctx_.fresh_var();
            ctx_.store.ensure(y);
            if (!ctx_.store.post(AbsProp{x, y})) failed_ = true;
            e.coeffs[y] = 1;
            return e;
        }
        if (t.arity() == 2 && (f == "mod" || f == "rem")) {
            LinExpr m = linearize(t.arg(1));
            if (!m.ground()) throw LogicError(ErrorKind::NonLinearUnsupported, f + " with a non-ground modulus");
            if (m.constant.is_zero()) throw LogicError(ErrorKind::Evaluation, "zero divisor");
            std::int64_t mv = checked(m.constant);
            LinExpr a = linearize(t.arg(0));
            if (a.ground()) {
                BigInt r = f == "mod" ? floor_mod(a.constant, m.constant) : BigInt(a.constant % m.constant);
                e.constant = r;
                return e;
            }
            VarId x = as_var(a);
            VarId z = ctx_.fresh_var();
            ctx_.store.ensure(z);
            if (!ctx_.store.post(ModProp{x, mv, z, f == "rem"})) failed_ = true;
            e.coeffs[z] = 1;
            return e;
        }
        if (t.arity() == 2 && (f == "//" || f == "/" || f == "min" || f == "max" || f == "^" ||
                               f == "**")) {
            throw LogicError(ErrorKind::NonLinearUnsupported, "operator " + f + " in a finite-domain constraint");
        }
        throw LogicError(ErrorKind::Type, "evaluable expected, found " + f + "/" + std::to_string(t.arity()));
    }

    // A single variable with coefficient 1 is used directly; otherwise an auxiliary is introduced.
    VarId as_var(const LinExpr& e) {
        std::vector<std::pair<VarId, BigInt>> nz;
        for (const auto& [v, c] : e.coeffs) {
            if (!c.is_zero()) nz.emplace_back(v, c);
        }
        if (nz.size() == 1 && nz[0].second == 1 && e.constant.is_zero()) {
            ctx_.store.ensure(nz[0].first);
            return nz[0].first;
        }
        VarId aux = ctx_.fresh_var();
        ctx_.store.ensure(aux);
        LinExpr rel = e;
        rel.coeffs[aux] -= 1;
        if (!post_linear(rel, LinRel::Eq)) failed_ = true;
        return aux;
    }

    // Posts e rel 0.
    bool post_linear(const LinExpr& e, LinRel rel) {
        LinearProp p;
        p.rel = rel;
        BigInt g = 0;
        std::vector<std::pair<BigInt, VarId>> terms;
        for (const auto& [v, c] : e.coeffs) {
            if (c.is_zero()) continue;
            terms.emplace_back(c, v);
            g = boost::multiprecision::gcd(g, c);
        }
        BigInt k = -e.constant;
        if (terms.empty()) {
            switch (rel) {
            case LinRel::Eq: return k.is_zero();
            case LinRel::Ne: return !k.is_zero();
            case LinRel::Le: return k >= 0;
            }
        }
        g = boost::multiprecision::abs(g);
        if (g > 1) {
            switch (rel) {
            case LinRel::Eq:
                if (k % g != 0) return false;
                k /= g;
                break;
            case LinRel::Ne:
                if (k % g != 0) return true;
                k /= g;
                break;
            case LinRel::Le:
                k = floor_div(k, g);
                break;
            }
            for (auto& [c, v] : terms) c /= g;
        }
        for (const auto& [c, v] : terms) p.terms.emplace_back(checked(c), v);
        p.constant = checked(k);
        for (const auto& [c, v] : p.terms) ctx_.store.ensure(v);
        return ctx_.store.post(std::move(p));
    }

    bool failed() const { return failed_; }

private:
    PostContext& ctx_;
    bool failed_ = false;
};

void domain_bound(const Term& raw, const Bindings& b, std::int64_t& out) {
    const Term& t = deref(raw, b);
    if (t.is_atom("inf")) {
        out = -kInf;
        return;
    }
    if (t.is_atom("sup")) {
        out = kInf;
        return;
    }
    if (t.is_compound() && t.is_functor("-", 1)) {
        const Term& a = deref(t.arg(0), b);
        if (a.is_int()) {
            out = checked(-a.int_value());
            return;
        }
    }
    if (t.is_var()) throw LogicError(ErrorKind::Instantiation, "domain bound is unbound");
    if (!t.is_int()) throw LogicError(ErrorKind::Type, "integer domain bound expected");
    out = checked(t.int_value());
}

const Term& list_or_throw(const Term& t, const Bindings& b, std::vector<Term>& out) {
    if (!list_elements(t, b, out)) throw LogicError(ErrorKind::Type, "list expected");
    return t;
}

}  // namespace

FdDomain parse_domain(const Term& raw, const Bindings& b) {
    const Term& t = deref(raw, b);
    if (t.is_functor("..", 2)) {
        std::int64_t lo = 0, hi = 0;
        domain_bound(t.arg(0), b, lo);
        domain_bound(t.arg(1), b, hi);
        return FdDomain::range(lo, hi);
    }
    if (t.is_functor("\\/", 2)) return parse_domain(t.arg(0), b).unite(parse_domain(t.arg(1), b));
    std::int64_t v = 0;
    domain_bound(t, b, v);
    if (v <= -kInf || v >= kInf) throw LogicError(ErrorKind::Type, "domain element must be an integer");
    return FdDomain::singleton(v);
}

bool is_constraint_goal(const Term& goal) {
    if (!goal.is_compound() || goal.arity() != 2) return false;
    const std::string& f = goal.name();
    return f == "#=" || f == "#\\=" || f == "#<" || f == "#>" || f == "#=<" || f == "#>=" || f == "in" ||
           f == "ins";
}

bool fd_post(const Term& goal, PostContext& ctx) {
    const std::string& f = goal.name();
    if (f == "in" || f == "ins") {
        FdDomain d = parse_domain(goal.arg(1), ctx.bindings);
        std::vector<Term> targets;
        if (f == "ins") {
            list_or_throw(goal.arg(0), ctx.bindings, targets);
        } else {
            targets.push_back(goal.arg(0));
        }
        for (const Term& raw : targets) {
            const Term& t = deref(raw, ctx.bindings);
            if (t.is_var()) {
                if (!ctx.store.restrict(t.var_id(), d)) return false;
            } else if (t.is_int()) {
                auto v = to_int64(t.int_value());
                if (!v || !d.contains(*v)) return false;
            } else {
                throw LogicError(ErrorKind::Type, "integer or variable expected in domain membership");
            }
        }
        return true;
    }

    Flattener fl(ctx);
    LinExpr e = fl.linearize(goal.arg(0));
    if (fl.failed()) return false;
    e.add(fl.linearize(goal.arg(1)), -1);
    if (fl.failed()) return false;
    // e = L - R
    bool ok;
    if (f == "#=") {
        ok = fl.post_linear(e, LinRel::Eq);
    } else if (f == "#\\=") {
        ok = fl.post_linear(e, LinRel::Ne);
    } else if (f == "#=<") {
        ok = fl.post_linear(e, LinRel::Le);
    } else if (f == "#<") {
        e.constant += 1;
        ok = fl.post_linear(e, LinRel::Le);
    } else if (f == "#>=") {
        LinExpr n;
        n.add(e, -1);
        ok = fl.post_linear(n, LinRel::Le);
    } else {  // #>
        LinExpr n;
        n.add(e, -1);
        n.constant += 1;
        ok = fl.post_linear(n, LinRel::Le);
    }
    return ok && !fl.failed();
}

}  // namespace prolite::fd
