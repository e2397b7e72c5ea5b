// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "prolite/errors.hpp"
#include "prolite/term.hpp"

namespace prolite::fd {

/// Bounds at or beyond +/-kInf mean "unbounded"; finite domain values lie strictly inside.
constexpr std::int64_t kInf = std::int64_t{1} << 62;
constexpr std::int64_t kMaxValue = kInf - 1;

struct Interval {
    std::int64_t lo;
    std::int64_t hi;
    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Integer set as sorted, disjoint, non-adjacent intervals. Empty means failure.
class FdDomain {
public:
    FdDomain() = default;  // empty
    static FdDomain all() { return range(-kInf, kInf); }
    static FdDomain range(std::int64_t lo, std::int64_t hi);
    static FdDomain singleton(std::int64_t v) { return range(v, v); }
    /// Builds a domain from arbitrary values (duplicates allowed).
    static FdDomain from_values(std::vector<std::int64_t> values);

    bool empty() const { return iv_.empty(); }
    std::int64_t min() const { return iv_.front().lo; }
    std::int64_t max() const { return iv_.back().hi; }
    bool has_min() const { return !empty() && min() > -kInf; }
    bool has_max() const { return !empty() && max() < kInf; }
    bool finite() const { return has_min() && has_max(); }
    bool is_singleton() const { return iv_.size() == 1 && iv_[0].lo == iv_[0].hi; }
    /// Number of values; nullopt when unbounded.
    std::optional<std::uint64_t> size() const;
    bool contains(std::int64_t v) const;

    FdDomain intersect(const FdDomain& other) const;
    FdDomain unite(const FdDomain& other) const;
    FdDomain remove(std::int64_t v) const;
    FdDomain clamp(std::int64_t lo, std::int64_t hi) const { return intersect(range(lo, hi)); }
    /// Smallest value strictly greater than v, if any.
    std::optional<std::int64_t> next_above(std::int64_t v) const;

    std::span<const Interval> intervals() const { return iv_; }
    /// Values of a finite domain in ascending order.
    std::vector<std::int64_t> values() const;
    std::string str() const;  // e.g. "1..3\/5"

    friend bool operator==(const FdDomain&, const FdDomain&) = default;

private:
    std::vector<Interval> iv_;
};

enum class LinRel { Eq, Ne, Le };

/// sum(coeff * var) rel constant
struct LinearProp {
    std::vector<std::pair<std::int64_t, VarId>> terms;
    std::int64_t constant = 0;
    LinRel rel = LinRel::Eq;
};

/// result = x mod modulus (floored) or x rem modulus (truncated); modulus is nonzero.
struct ModProp {
    VarId x;
    std::int64_t modulus;
    VarId result;
    bool truncated = false;
};

/// result = |x|
struct AbsProp {
    VarId x;
    VarId result;
};

using Propagator = std::variant<LinearProp, ModProp, AbsProp>;

std::vector<VarId> propagator_vars(const Propagator& p);

/// Domains plus the posted propagator network, with a mark stack for backtracking.
class FdStore {
public:
    using Tick = std::function<void()>;
    explicit FdStore(Tick tick = {}) : tick_(std::move(tick)) {}

    bool has(VarId v) const { return domains_.count(v) != 0; }
    /// Domain of v; unregistered variables are unbounded.
    FdDomain domain(VarId v) const;
    std::vector<VarId> vars() const;
    std::size_t propagator_count() const { return props_.size(); }
    const Propagator& propagator(std::size_t i) const { return props_[i]; }

    /// Registers v with an unbounded domain if it is new.
    void ensure(VarId v);
    /// Intersects v's domain with d and propagates; false on failure.
    bool restrict(VarId v, const FdDomain& d);
    /// Adds a propagator and propagates to fixpoint; false on failure.
    bool post(Propagator p);
    /// Runs queued propagators until nothing changes; false on failure.
    bool propagate_fixpoint();

    std::size_t mark() const { return trail_.size(); }
    void restore(std::size_t mark);

    /// Variables whose domains became singletons since the last call.
    std::vector<VarId> drain_fixed();

    /// Variables reachable from `seeds` through shared propagators, in ascending id order
    /// (seeds excluded from neither).
    std::vector<VarId> connected(std::span<const VarId> seeds) const;

private:
    struct TrailEntry {
        enum Kind { Domain, NewVar, NewProp, Watch } kind;
        VarId var = 0;
        FdDomain old;
    };

    bool set_domain(VarId v, FdDomain d);
    bool run(std::size_t index);
    bool run_linear(const LinearProp& p);
    bool run_mod(const ModProp& p);
    bool run_abs(const AbsProp& p);
    bool difference_cycle() const;
    void enqueue(std::size_t index);

    Tick tick_;
    std::map<VarId, FdDomain> domains_;
    std::unordered_map<VarId, std::vector<std::size_t>> watchers_;
    std::vector<Propagator> props_;
    std::vector<TrailEntry> trail_;
    std::deque<std::size_t> queue_;
    std::vector<bool> queued_;
    std::vector<VarId> fixed_;
};

enum class LabelStrategy { Leftmost, FirstFail };

/// Picks the next variable to label among the non-singleton ones; nullopt when all are fixed.
std::optional<std::size_t> select_variable(std::span<const VarId> vars, const FdStore& store,
                                           LabelStrategy strategy);

/// Depth-first enumeration of ground assignments, values ascending, interleaved with propagation.
/// The store is restored to its entry state when the enumeration is exhausted or destroyed.
class Labeler {
public:
    /// Throws LogicError(UnboundedDomain) when a variable lacks finite bounds.
    Labeler(FdStore& store, std::vector<VarId> vars, LabelStrategy strategy = LabelStrategy::Leftmost);
    ~Labeler();
    Labeler(const Labeler&) = delete;
    Labeler& operator=(const Labeler&) = delete;

    /// Next assignment (values in the order of `vars`), or nullopt when exhausted.
    std::optional<std::vector<std::int64_t>> next();

private:
    struct Frame {
        std::size_t var_index;
        std::int64_t value;
        std::size_t mark;
    };
    bool descend();
    bool advance();

    FdStore& store_;
    std::vector<VarId> vars_;
    LabelStrategy strategy_;
    std::size_t base_mark_;
    std::vector<Frame> stack_;
    bool started_ = false;
    bool done_ = false;
};

std::vector<std::vector<std::int64_t>> label_all(FdStore& store, std::vector<VarId> vars,
                                                 LabelStrategy strategy = LabelStrategy::Leftmost);

/// Term-level posting context: terms are read through `bindings`, auxiliary
/// variables come from `fresh_var`.
struct PostContext {
    const Bindings& bindings;
    FdStore& store;
    std::function<VarId()> fresh_var;
};

/// True when `goal` is one of the # relations, in/2 or ins/2.
bool is_constraint_goal(const Term& goal);

/// Flattens and posts a # relation (or in/ins), then propagates.
/// Returns false on failure. Throws NonLinearUnsupported, Type, Instantiation, Representation.
bool fd_post(const Term& goal, PostContext& ctx);

/// Parses a domain term such as 0..9, 1..3 \/ 7, inf..0 or an integer.
FdDomain parse_domain(const Term& t, const Bindings& b);

}  // namespace prolite::fd
