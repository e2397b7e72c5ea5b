// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>
#include <set>

#include "prolite/clpfd.hpp"
#include "prolite/engine.hpp"
#include "prolite/errors.hpp"
#include "prolite/harness.hpp"
#include "prolite/reader.hpp"
#include "support/generators.hpp"

using namespace prolite;
using namespace prolite::fd;
using prolite::testing::uniform;

namespace {

bool well_formed(const FdDomain& d) {
    const auto iv = d.intervals();
    for (std::size_t i = 0; i < iv.size(); ++i) {
        if (iv[i].lo > iv[i].hi) return false;
        if (i > 0 && iv[i].lo < iv[i - 1].hi + 2) return false;  // sorted, disjoint, non-adjacent
    }
    return true;
}

std::set<std::int64_t> members(const FdDomain& d, std::int64_t lo, std::int64_t hi) {
    std::set<std::int64_t> out;
    for (std::int64_t v = lo; v <= hi; ++v) {
        if (d.contains(v)) out.insert(v);
    }
    return out;
}

}  // namespace

TEST(FdDomain, SetAlgebraAgreesWithStdSet) {
    std::mt19937_64 rng(3);
    auto random_domain = [&] {
        std::vector<std::int64_t> vals;
        for (auto n = uniform(rng, 0, 12); n > 0; --n) vals.push_back(uniform(rng, -10, 10));
        return FdDomain::from_values(vals);
    };
    for (int i = 0; i < 2000; ++i) {
        FdDomain a = random_domain(), b = random_domain();
        auto sa = members(a, -12, 12), sb = members(b, -12, 12);
        std::set<std::int64_t> inter, uni;
        std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::inserter(inter, inter.begin()));
        std::set_union(sa.begin(), sa.end(), sb.begin(), sb.end(), std::inserter(uni, uni.begin()));
        FdDomain di = a.intersect(b), du = a.unite(b);
        EXPECT_TRUE(well_formed(di) && well_formed(du));
        EXPECT_EQ(members(di, -12, 12), inter);
        EXPECT_EQ(members(du, -12, 12), uni);
        const auto v = uniform(rng, -10, 10);
        FdDomain dr = a.remove(v);
        EXPECT_TRUE(well_formed(dr));
        auto expected = sa;
        expected.erase(v);
        EXPECT_EQ(members(dr, -12, 12), expected);
        EXPECT_EQ(a.empty(), sa.empty());
        if (!sa.empty()) {
            EXPECT_EQ(a.min(), *sa.begin());
            EXPECT_EQ(a.max(), *sa.rbegin());
            EXPECT_EQ(*a.size(), sa.size());
        }
    }
    EXPECT_EQ(FdDomain::range(1, 3).unite(FdDomain::singleton(5)).str(), "1..3\\/5");
    EXPECT_FALSE(FdDomain::all().size().has_value());
}

TEST(FdStore, RestoreReturnsEveryDomainExactly) {
    FdStore store;
    for (VarId v = 0; v < 3; ++v) ASSERT_TRUE(store.restrict(v, FdDomain::range(0, 9)));
    ASSERT_TRUE(store.post(LinearProp{{{1, 0}, {1, 1}, {1, 2}}, 12, LinRel::Eq}));
    std::vector<FdDomain> snapshot;
    for (VarId v = 0; v < 3; ++v) snapshot.push_back(store.domain(v));
    const auto mark = store.mark();
    EXPECT_TRUE(store.restrict(0, FdDomain::singleton(9)));
    EXPECT_FALSE(store.restrict(1, FdDomain::singleton(9)));
    store.restore(mark);
    for (VarId v = 0; v < 3; ++v) EXPECT_EQ(store.domain(v), snapshot[v]);
    EXPECT_EQ(store.propagator_count(), 1u);
}

TEST(FdStore, LabelerEnumeratesAndRestores) {
    FdStore store;
    ASSERT_TRUE(store.restrict(0, FdDomain::range(0, 3)));
    ASSERT_TRUE(store.restrict(1, FdDomain::range(0, 3)));
    ASSERT_TRUE(store.post(LinearProp{{{1, 0}, {-1, 1}}, -1, LinRel::Le}));  // X < Y
    const auto before0 = store.domain(0), before1 = store.domain(1);
    auto all = label_all(store, {0, 1});
    EXPECT_EQ(all.size(), 6u);
    EXPECT_TRUE(std::is_sorted(all.begin(), all.end()));
    EXPECT_EQ(store.domain(0), before0);
    EXPECT_EQ(store.domain(1), before1);
    FdStore unbounded;
    unbounded.ensure(7);
    EXPECT_THROW(Labeler(unbounded, {7}), LogicError);
}

TEST(FdStore, ModAndAbsPropagation) {
    FdStore store;
    ASSERT_TRUE(store.restrict(0, FdDomain::range(0, 9)));
    ASSERT_TRUE(store.restrict(1, FdDomain::singleton(1)));
    ASSERT_TRUE(store.post(ModProp{0, 2, 1, false}));
    EXPECT_EQ(members(store.domain(0), 0, 9), (std::set<std::int64_t>{1, 3, 5, 7, 9}));
    ASSERT_TRUE(store.restrict(2, FdDomain::range(-5, 5)));
    ASSERT_TRUE(store.restrict(3, FdDomain::range(4, 20)));
    ASSERT_TRUE(store.post(AbsProp{2, 3}));
    EXPECT_EQ(members(store.domain(2), -5, 5), (std::set<std::int64_t>{-5, -4, 4, 5}));
    EXPECT_EQ(store.domain(3), FdDomain::range(4, 5));
}

// Random instances: engine labeling against the brute-force oracle.
TEST(ClpFd, LabelingIsCompleteAndLexicographic) {
    std::size_t ordered_checked = 0;
    for (std::uint64_t seed = 1000; seed < 1300; ++seed) {
        auto csp = prolite::testing::random_csp(seed);
        auto brute = csp_brute_oracle(csp.instance);
        auto engine = prolite::testing::engine_csp_solutions(csp);
        std::set<std::vector<std::int64_t>> a(brute.begin(), brute.end()), b(engine.begin(), engine.end());
        ASSERT_EQ(a, b) << csp.program();
        if (!csp.has_disjunction) {
            EXPECT_EQ(engine, brute) << "order differs\n" << csp.program();
            ++ordered_checked;
        }
        auto ff = prolite::testing::engine_csp_solutions(csp, true, LabelStrategy::FirstFail);
        EXPECT_EQ((std::set<std::vector<std::int64_t>>(ff.begin(), ff.end())), a) << "first-fail\n" << csp.program();
    }
    EXPECT_GT(ordered_checked, 50u);
}

TEST(ClpFd, PropagationNeverPrunesASolution) {
    for (std::uint64_t seed = 2000; seed < 2300; ++seed) {
        auto csp = prolite::testing::random_csp(seed);
        if (csp.has_disjunction) continue;
        auto brute = csp_brute_oracle(csp.instance);
        std::string program = csp.program();
        program.replace(program.find("    label(["), std::string::npos, "    true.\n");
        Database db = consult(parse_program(program));
        EngineOptions opts;
        opts.auto_label = false;
        Solver solver(db, csp.query(), Budget{}, opts);
        if (!solver.next()) {
            EXPECT_TRUE(brute.empty()) << program;
            continue;
        }
        for (std::size_t i = 0; i < csp.instance.vars.size(); ++i) {
            Term t = solver.value(static_cast<VarId>(i));
            FdDomain d = t.is_int() ? FdDomain::singleton(t.small_int()) : solver.fd_store().domain(t.var_id());
            for (const auto& sol : brute) EXPECT_TRUE(d.contains(sol[i])) << program << " var " << i;
        }
    }
}

TEST(ClpFd, FourDigitDisjunctionMatchesBruteForce) {
    std::string src =
        "digits(D1, D2, D3, D4) :-\n"
        "  D1 in 0..9, D2 in 0..9, D3 in 0..9, D4 in 1..9,\n"
        "  D1 mod 2 #\\= 0, D1 + D2 + D3 + D4 #= 20, D4 #> D3, D3 #> D2, D2 #> D1,\n"
        "  (4*D1 #= D2 ; 4*D1 #= D3 ; 4*D1 #= D4 ; 4*D2 #= D1 ; 4*D2 #= D3 ; 4*D2 #= D4 ;\n"
        "   4*D3 #= D1 ; 4*D3 #= D2 ; 4*D3 #= D4 ; 4*D4 #= D1 ; 4*D4 #= D2 ; 4*D4 #= D3),\n"
        "  abs(D3 - D2) #> 3,\n"
        "  label([D1, D2, D3, D4]).\n";
    Database db = consult(parse_program(src));
    auto sols = solve_all(db, "digits(A, B, C, D)");
    ASSERT_EQ(sols.size(), 1u);
    EXPECT_EQ(sols[0][0].second + sols[0][1].second + sols[0][2].second + sols[0][3].second, "1289");
}

TEST(ClpFd, AutoLabelingGroundsAnswers) {
    Database db = consult(parse_program("q(X, Y) :- X in 1..2, Y in 1..2.\n"));
    auto sols = solve_all(db, "q(X, Y)");
    ASSERT_EQ(sols.size(), 4u);
    EXPECT_EQ(sols[0][0].second + sols[0][1].second, "11");
    EXPECT_EQ(sols[3][0].second + sols[3][1].second, "22");
    Solver s(db, "q(X, Y)");
    ASSERT_TRUE(s.next());
    EXPECT_TRUE(s.auto_labeled());
}

TEST(ClpFd, RejectsNonLinearAndUnboundedLabeling) {
    try {
        solve_all(Database{}, "X in 0..3, Y in 0..3, X * Y #= 2");
        FAIL();
    } catch (const LogicError& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NonLinearUnsupported);
    }
    try {
        solve_all(Database{}, "X #> 3, label([X])");
        FAIL();
    } catch (const LogicError& e) {
        EXPECT_EQ(e.kind(), ErrorKind::UnboundedDomain);
    }
    // a ground factor keeps multiplication linear
    EXPECT_EQ(solve_all(Database{}, "X in 0..9, 3 * X #= 12").size(), 1u);
}

TEST(ClpFd, AllDistinctAndReflection) {
    EXPECT_EQ(solve_all(Database{}, "L = [A, B, C], L ins 1..3, all_distinct(L), label(L)").size(), 6u);
    auto reflected = solve_all(Database{}, "X in 1..4, X #\\= 2, fd_size(X, S), fd_domain(X, Lo, Hi)");
    ASSERT_EQ(reflected.size(), 3u);
    EXPECT_EQ(reflected[0][1].second, "3");
    EXPECT_EQ(reflected[0][2].second + ".." + reflected[0][3].second, "1..4");
}
