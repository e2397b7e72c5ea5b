// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "prolite/harness.hpp"
#include "support/nav_sim.hpp"

using namespace prolite;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char* const kFortyTwo = "```prolog\nproblem(A) :- A is 6 * 7.\n```\n";
const char* const kProse = "The answer is forty-two.";

ProblemRecord problem(const std::string& id, std::int64_t gold) {
    ProblemRecord p;
    p.id = id;
    p.category = Category::MathWord;
    p.statement = "What is six times seven?";
    p.gold = Rational(gold);
    return p;
}

}  // namespace

TEST(Schema, AcceptsAliasesAndOptionalFields) {
    auto ps = parse_problems(json::parse(R"j([
        {"id": "a", "type": "mwp", "question": "q", "gold": 3},
        {"id": "b", "category": "csp", "problem": "q", "answer": 2.5, "entanglement": 2, "entry": "solve(X)"},
        {"id": "c", "category": "navigate", "statement": "q", "answer": 12345678901234567890}
    ])j"));
    ASSERT_EQ(ps.size(), 3u);
    EXPECT_EQ(ps[0].category, Category::MathWord);
    EXPECT_EQ(ps[0].gold, Rational(3));
    EXPECT_FALSE(ps[0].gold_is_float);
    EXPECT_TRUE(ps[1].gold_is_float);
    EXPECT_EQ(ps[1].entanglement, 2);
    EXPECT_EQ(ps[1].entry, "solve(X)");
    EXPECT_EQ(ps[2].gold.num().str(), "12345678901234567890");
    EXPECT_TRUE(parse_problems(json::array()).empty());
}

TEST(Schema, ErrorsNameTheOffendingPath) {
    auto path_of = [](const char* text) {
        try {
            parse_problems(json::parse(text));
        } catch (const SchemaError& e) {
            return e.path();
        }
        return std::string("no error");
    };
    EXPECT_EQ(path_of(R"j({"id": "a"})j"), "$");
    EXPECT_EQ(path_of(R"j([{"id": "a", "category": "mwp", "statement": "q", "answer": 1},
                         {"category": "mwp", "statement": "q", "answer": 1}])j"),
              "$[1].id");
    EXPECT_EQ(path_of(R"j([{"id": "a", "category": "poetry", "statement": "q", "answer": 1}])j"), "$[0].category");
    EXPECT_EQ(path_of(R"j([{"id": "a", "category": "mwp", "statement": "q", "answer": "ten"}])j"), "$[0].answer");
    EXPECT_EQ(path_of(R"j([{"id": "a", "category": "mwp", "statement": "q", "answer": 1, "entry": "p(x)"}])j"),
              "$[0].entry");
    EXPECT_THROW(parse_problems(json::parse(R"j([{"id": "a", "category": "mwp", "statement": "q", "answer": 1},
                                                {"id": "a", "category": "mwp", "statement": "r", "answer": 2}])j")),
                 DuplicateId);
}

TEST(Schema, LoadMergesFixturesAndRoundTrips) {
    const fs::path dir = fs::temp_directory_path() / ("prolite_harness_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const fs::path file = dir / "extra.json";
    std::ofstream(file) << problems_to_json({problem("extra-1", 42)});
    auto merged = load_problems(file, true);
    EXPECT_EQ(merged.size(), fixtures().size() + 1);
    EXPECT_EQ(merged.back().id, "extra-1");
    EXPECT_EQ(parse_problems(json::parse(problems_to_json(fixtures()))).size(), fixtures().size());
    std::ofstream(file) << problems_to_json({fixtures()[0]});
    EXPECT_THROW(load_problems(file, true), DuplicateId);
    fs::remove_all(dir);
}

TEST(Schema, FixturesCoverEveryNamedCategory) {
    std::set<Category> seen;
    for (const auto& f : fixtures()) {
        seen.insert(f.category);
        EXPECT_TRUE(f.reference_program.has_value()) << f.id;
    }
    EXPECT_GE(fixtures().size(), 8u);
    EXPECT_TRUE(seen.count(Category::MathWord));
    EXPECT_TRUE(seen.count(Category::ConstraintSatisfaction));
    EXPECT_TRUE(seen.count(Category::AlgorithmicInstructions));
}

TEST(AnswerMatching, ExactForIntegersToleranceForFloats) {
    ProblemRecord p = problem("p", 3);
    EXPECT_TRUE(answer_matches(Rational(3), p));
    EXPECT_FALSE(answer_matches(Rational::normalize(3000001, 1000000), p));
    p.gold = Rational::from_double(2.5);
    p.gold_is_float = true;
    EXPECT_TRUE(answer_matches(Rational::normalize(25000001, 10000000), p));
    EXPECT_FALSE(answer_matches(Rational::normalize(2501, 1000), p));
}

TEST(Oracles, SumItUpAndCinema) {
    EXPECT_EQ(sum_it_up_oracle({1, -2, 3, 0, 4, 0, -1, -1, 0, 0}, {7, 3, -4, -2}, SumRule::Plain), 8);
    EXPECT_THROW(sum_it_up_oracle({1, 2, 3}, {1}, SumRule::Plain), std::invalid_argument);
    EXPECT_THROW(sum_it_up_oracle({1, 1, 1, 1, 1, 1, 1, 1, 1, 0}, {1, 2}, SumRule::Plain), NoZeroSquare);
    EXPECT_EQ(parse_sum_rule("plain"), SumRule::Plain);
    EXPECT_EQ(cinema_oracle(1, 3, {}), 2);
    EXPECT_EQ(cinema_oracle(2, 2, {{1, 1}}), 2);
    EXPECT_EQ(cinema_oracle(3, 3, {}), 5);
    EXPECT_THROW(cinema_oracle(2, 2, {{3, 1}}), std::invalid_argument);
}

TEST(Oracles, LinearGold) {
    auto s = linear_gold_oracle({"Ducks + Cranes = 27", "2 * Ducks + 4 * Cranes = 78"});
    EXPECT_EQ(s.at("Ducks"), Rational(15));
    EXPECT_EQ(s.at("Cranes"), Rational(12));
    EXPECT_EQ(linear_gold_oracle({"3 * X = 1"}).at("X"), Rational::normalize(1, 3));
    EXPECT_THROW(linear_gold_oracle({"X + Y = 1"}), Singular);
    EXPECT_THROW(linear_gold_oracle({"X + Y = 1", "2 * X + 2 * Y = 3"}), Inconsistent);
}

TEST(Oracles, CspBruteForce) {
    CspInstance inst;
    inst.vars = {{"A", 0, 3}, {"B", 0, 3}};
    inst.constraints = {"A + B #= 3", "A #< B"};
    inst.answer = "10 * A + B";
    auto sols = csp_brute_oracle(inst);
    EXPECT_EQ(sols, (std::vector<std::vector<std::int64_t>>{{0, 3}, {1, 2}}));
    EXPECT_EQ(csp_answers(inst), (std::vector<std::int64_t>{3, 12}));
    CspInstance huge;
    for (int i = 0; i < 8; ++i) huge.vars.push_back({"V" + std::to_string(i), 0, 99});
    EXPECT_THROW(csp_brute_oracle(huge), SearchSpaceTooLarge);
}

TEST(Navigate, InstructionsRenderAndParseBack) {
    for (auto kind : {NavTemplate::TakeSteps, NavTemplate::Forward, NavTemplate::Backward, NavTemplate::Left,
                      NavTemplate::Right}) {
        for (int n : {1, 2, 10}) {
            NavStep s{kind, n};
            EXPECT_EQ(parse_instruction(render_instruction(s)), s) << render_instruction(s);
        }
    }
    for (auto kind : {NavTemplate::TurnLeft, NavTemplate::TurnRight, NavTemplate::TurnAround,
                      NavTemplate::AlwaysFaceForward}) {
        NavStep s{kind, 0};
        EXPECT_EQ(parse_instruction(render_instruction(s)), s);
    }
    EXPECT_THROW(parse_instruction("Jump twice"), UnknownInstruction);
    EXPECT_EQ(navigate_oracle({{NavTemplate::Forward, 3}, {NavTemplate::Right, 4}}), Rational(5));
    EXPECT_EQ(navigate_oracle({{NavTemplate::Forward, 3}, {NavTemplate::TurnAround, 0}, {NavTemplate::TakeSteps, 3}}),
              Rational(0));
}

TEST(Navigate, GeneratorIsDeterministicAndAgreesWithSimulator) {
    auto a = gen_navigate(99, 500), b = gen_navigate(99, 500);
    ASSERT_EQ(a.size(), 500u);
    EXPECT_EQ(problems_to_json({a[7].record}), problems_to_json({b[7].record}));
    std::vector<ProblemRecord> records;
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].steps, b[i].steps);
        EXPECT_GE(a[i].steps.size(), 2u);
        EXPECT_LE(a[i].steps.size(), 8u);
        EXPECT_EQ(parse_instructions(a[i].record.statement.substr(a[i].record.statement.find("north. ") + 7,
                                                                  a[i].record.statement.find(" How far") -
                                                                      a[i].record.statement.find("north. ") - 7)),
                  a[i].steps);
        prolite::testing::NavWalk walk;
        walk.statement(a[i].record.statement);
        EXPECT_NEAR(a[i].record.gold.to_double(), walk.distance(), 1e-9) << a[i].record.statement;
        records.push_back(a[i].record);
    }
    EXPECT_NE(problems_to_json({gen_navigate(100, 1)[0].record}), problems_to_json({a[0].record}));
    EXPECT_EQ(parse_problems(json::parse(problems_to_json(records))).size(), records.size());
    EXPECT_THROW(gen_navigate(1, 0), std::invalid_argument);
}

TEST(Evaluate, AccuracyAndMeanAttemptsFromRuns) {
    std::vector<ProblemRecord> ps{problem("right", 42), problem("wrong", 41)};
    ScriptedProvider provider({kProse, kProse, kFortyTwo});
    RetryPolicy policy;
    EvalOptions opts;
    opts.sanity_lane = false;
    EvalReport r = evaluate(ps, provider, policy, 4, opts);
    ASSERT_EQ(r.problems.size(), 2u);
    ASSERT_EQ(r.runs.size(), 8u);
    EXPECT_EQ(r.problems[0].correct_runs, 4u);
    EXPECT_EQ(r.problems[1].correct_runs, 0u);
    EXPECT_DOUBLE_EQ(r.problems[0].mean_attempts, 3.0);
    EXPECT_DOUBLE_EQ(r.problems[1].mean_attempts, 3.0);
    for (const auto& p : r.problems) {
        std::size_t correct = 0, total = 0;
        for (const auto& run : r.runs) {
            if (run.problem_id != p.id) continue;
            ++total;
            correct += run.correct;
            EXPECT_GE(run.attempts_used, 1u);
            EXPECT_LE(run.attempts_used, policy.max_attempts);
        }
        EXPECT_EQ(p.total_runs, total);
        EXPECT_DOUBLE_EQ(p.accuracy(), static_cast<double>(correct) / static_cast<double>(total));
    }
}

TEST(Evaluate, WorkerCountDoesNotChangeResults) {
    std::map<std::string, std::string> programs;
    for (const auto& f : fixtures()) programs[f.id] = *f.reference_program;
    RetryPolicy policy;
    EvalOptions one, three;
    three.workers = 3;
    StochasticProvider p1(programs, 0.5, 5), p3(programs, 0.5, 5);
    const std::string a = emit_report(evaluate(fixtures(), p1, policy, 3, one), ReportFormat::Json);
    const std::string b = emit_report(evaluate(fixtures(), p3, policy, 3, three), ReportFormat::Json);
    EXPECT_EQ(a, b);
}

TEST(Evaluate, SanityLaneChecksReferencePrograms) {
    std::map<std::string, std::string> programs;
    for (const auto& f : fixtures()) programs[f.id] = *f.reference_program;
    ReferenceProvider provider(programs);
    RetryPolicy policy;
    EvalReport r = evaluate(fixtures(), provider, policy, 1);
    for (const auto& p : r.problems) {
        EXPECT_EQ(p.sanity, true) << p.id << ": " << p.sanity_detail;
        EXPECT_EQ(p.correct_runs, 1u) << p.id;
        EXPECT_DOUBLE_EQ(p.mean_attempts, 1.0);
    }
}

TEST(Report, EmptyAndNonEmptyRenderings) {
    EvalReport empty;
    EXPECT_EQ(emit_report(empty, ReportFormat::Json), R"j({"problems":[],"categories":{}})j");
    const std::string csv = emit_report(empty, ReportFormat::Csv);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "scope,id,category,correct_runs,total_runs,accuracy,mean_attempts,sanity");

    ScriptedProvider provider({kFortyTwo});
    EvalOptions opts;
    opts.sanity_lane = false;
    EvalReport r = evaluate({problem("p|1", 42)}, provider, RetryPolicy{}, 2, opts);
    const json j = json::parse(emit_report(r, ReportFormat::Json));
    EXPECT_EQ(j.at("problems").at(0).at("accuracy"), 1.0);
    EXPECT_TRUE(j.at("categories").contains("math_word"));
    EXPECT_EQ(emit_report(r, ReportFormat::Json), emit_report(r, ReportFormat::Json));
    EXPECT_NE(emit_report(r, ReportFormat::Markdown).find("p\\|1"), std::string::npos);
}
