// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>

#include "prolite/orchestrator.hpp"

using namespace prolite;
namespace fs = std::filesystem;

namespace {

const char* const kGood = "```prolog\n% the answer\nproblem(A) :- A is 6 * 7.\n```\n";
const char* const kProse = "I think the answer is probably forty-two.";

fs::path temp_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("prolite_orch_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST(RetryPolicy, ScheduleIsLinearAndMonotone) {
    RetryPolicy p;
    EXPECT_DOUBLE_EQ(temperature_at(0, p), 0.0);
    EXPECT_DOUBLE_EQ(temperature_at(49, p), 0.3);
    for (std::size_t k = 1; k < p.max_attempts; ++k) EXPECT_GT(temperature_at(k, p), temperature_at(k - 1, p));
    EXPECT_THROW(temperature_at(50, p), std::out_of_range);
    RetryPolicy one;
    one.max_attempts = 1;
    one.temp_start = one.temp_end = 0.2;
    EXPECT_DOUBLE_EQ(temperature_at(0, one), 0.2);
}

TEST(RetryPolicy, ValidateRejectsBadPolicies) {
    RetryPolicy p;
    p.max_attempts = 0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p.max_attempts = 3;
    p.temp_start = 0.5;
    p.temp_end = 0.1;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p.temp_start = 0.0;
    p.per_attempt_budget.max_steps = 0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(Extraction, PrefersLastFencedBlock) {
    auto e = extract_program("first\n```prolog\np(1).\n```\nthen\n```\nproblem(2).\n```\n");
    ASSERT_TRUE(e.ok);
    EXPECT_NE(e.source.find("problem(2)"), std::string::npos);
    EXPECT_EQ(e.source.find("p(1)"), std::string::npos);
}

TEST(Extraction, FallsBackToParsableSuffix) {
    auto e = extract_program("Here is my program:\nproblem(A) :- A = 3.\n");
    ASSERT_TRUE(e.ok);
    EXPECT_EQ(e.source, "problem(A) :- A = 3.\n");
    EXPECT_FALSE(extract_program(kProse).ok);
    EXPECT_FALSE(extract_program("").ok);
}

TEST(RunCandidate, ClassifiesEveryOutcome) {
    EXPECT_EQ(run_candidate("problem(A) :- A is 1/4.").status, ExecStatus::Ok);
    EXPECT_EQ(*run_candidate("problem(A) :- A is 1/4.").answer, Rational::normalize(1, 4));
    EXPECT_EQ(run_candidate("problem(A) :- A is .").status, ExecStatus::ParseError);
    EXPECT_EQ(run_candidate("problem(A) :- A is foo + 1.").status, ExecStatus::RuntimeError);
    EXPECT_EQ(run_candidate("problem(A) :- undefined_thing(A).").status, ExecStatus::RuntimeError);
    EXPECT_EQ(run_candidate("problem(A) :- fail.").status, ExecStatus::NoSolution);
    EXPECT_EQ(run_candidate("problem(a).").status, ExecStatus::NonNumeric);
    EXPECT_EQ(run_candidate("problem(_).").status, ExecStatus::Underdetermined);
    EXPECT_EQ(run_candidate("problem(A) :- {A + B = 3}.").status, ExecStatus::Underdetermined);
    EXPECT_EQ(run_candidate("problem(A) :- A #> 3.").status, ExecStatus::Underdetermined);

    Budget tight;
    tight.max_steps = 1000;
    EXPECT_EQ(run_candidate("loop :- loop.\nproblem(A) :- loop, A = 1.", "problem(Answer)", tight).status,
              ExecStatus::BudgetExceeded);

    ExecResult many = run_candidate("problem(A) :- member(A, [3, 4]).");
    EXPECT_EQ(many.status, ExecStatus::Ok);
    EXPECT_EQ(*many.answer, Rational(3));
    EXPECT_TRUE(many.more_solutions);

    ExecResult custom = run_candidate("solve(x, 5).", "solve(x, R)");
    EXPECT_EQ(*custom.answer, Rational(5));
    EXPECT_THROW(run_candidate("p.", "p"), std::invalid_argument);
}

TEST(ExecStatus, NamesRoundTrip) {
    for (auto s : {ExecStatus::ExtractionFailure, ExecStatus::ProviderError, ExecStatus::ParseError,
                   ExecStatus::RuntimeError, ExecStatus::BudgetExceeded, ExecStatus::NoSolution,
                   ExecStatus::NonNumeric, ExecStatus::Underdetermined, ExecStatus::Ok}) {
        EXPECT_EQ(parse_exec_status(exec_status_name(s)), s);
    }
    EXPECT_FALSE(parse_exec_status("bogus").has_value());
    EXPECT_EQ(render_number(Rational(42)), "42");
    EXPECT_EQ(render_number(Rational::normalize(1, 4)), "0.25");
}

TEST(MultipleTry, StopsAtFirstSuccessAndFollowsSchedule) {
    ScriptedProvider provider({kProse, "```prolog\nproblem(a).\n```", kGood, kProse});
    RetryPolicy policy;
    policy.max_attempts = 10;
    std::vector<TranscriptRecord> seen;
    Outcome o = multiple_try({"p1", "statement"}, provider, policy, "PROMPT",
                             [&](const TranscriptRecord& r) { seen.push_back(r); });
    ASSERT_EQ(o.attempts_used, 3u);
    EXPECT_EQ(*o.answer, Rational(42));
    ASSERT_EQ(seen.size(), 3u);
    for (std::size_t k = 0; k < o.attempts.size(); ++k) {
        const Attempt& a = o.attempts[k];
        EXPECT_EQ(a.index, k);
        EXPECT_DOUBLE_EQ(a.temperature, temperature_at(k, policy));
        EXPECT_EQ(a.prompt_sha256, sha256_hex("PROMPT"));
        EXPECT_EQ(a.exec_status == ExecStatus::Ok, a.answer.has_value());
        EXPECT_EQ(seen[k].attempt, k);
        EXPECT_EQ(seen[k].exec_status, a.exec_status);
    }
    EXPECT_EQ(o.attempts[0].exec_status, ExecStatus::ExtractionFailure);
    EXPECT_FALSE(o.attempts[0].program.has_value());
    EXPECT_EQ(o.attempts[1].exec_status, ExecStatus::NonNumeric);
}

TEST(MultipleTry, ExhaustsCapWithoutAnswer) {
    ScriptedProvider provider({kProse});
    RetryPolicy policy;
    Outcome o = multiple_try({"p1", "s"}, provider, policy, "PROMPT");
    EXPECT_EQ(o.attempts_used, policy.max_attempts);
    EXPECT_FALSE(o.answer.has_value());
}

TEST(MultipleTry, SinkRunsBeforeNextProviderCall) {
    struct Probe : Provider {
        std::size_t calls = 0;
        std::size_t* sunk = nullptr;
        std::string name() const override { return "probe"; }
        std::string complete(const CompletionRequest& r) override {
            EXPECT_EQ(*sunk, r.attempt);  // every earlier attempt already reached the sink
            ++calls;
            if (r.attempt == 1) throw ProviderError("transient");
            return r.attempt < 3 ? kProse : kGood;
        }
    } probe;
    std::size_t sunk = 0;
    probe.sunk = &sunk;
    RetryPolicy policy;
    Outcome o = multiple_try({"p", "s"}, probe, policy, "PROMPT", [&](const TranscriptRecord&) { ++sunk; });
    EXPECT_EQ(probe.calls, 4u);
    EXPECT_EQ(sunk, 4u);
    EXPECT_EQ(o.attempts[1].exec_status, ExecStatus::ProviderError);
}

TEST(Transcript, JsonRoundTripAndReplay) {
    TranscriptRecord r;
    r.problem_id = "q7";
    r.attempt = 2;
    r.temperature = 0.0122448979591837;
    r.prompt_sha256 = sha256_hex("x");
    r.completion = "line1\n\"quoted\"";
    r.exec_status = ExecStatus::Ok;
    r.answer = Rational::normalize(-7, 3);
    r.wall_ms = 12;
    TranscriptRecord back = TranscriptRecord::from_json(nlohmann::json::parse(r.to_json().dump()));
    EXPECT_EQ(back.to_json(), r.to_json());
    // non-integer answers are stored as the nearest double
    EXPECT_DOUBLE_EQ(back.answer->to_double(), r.answer->to_double());
    r.answer = Rational(BigInt(1) << 80);
    EXPECT_EQ(TranscriptRecord::from_json(r.to_json()).answer, r.answer);

    const fs::path dir = temp_dir("replay");
    {
        JsonlTranscript out(transcript_path(dir, "q7", 0));
        for (std::size_t k = 0; k < 2; ++k) {
            TranscriptRecord rec = r;
            rec.attempt = k;
            rec.completion = k == 0 ? kProse : kGood;
            out.append(rec);
        }
    }
    ReplayProvider replay(dir);
    RetryPolicy policy;
    Outcome o = multiple_try({"q7", "s"}, replay, policy, "PROMPT");
    EXPECT_EQ(o.attempts_used, 2u);
    EXPECT_EQ(*o.answer, Rational(42));
    ReplayProvider short_replay(dir);
    EXPECT_THROW(short_replay.complete({"q7", 0, 2, 0.0, "PROMPT", 0}), TranscriptExhausted);
    EXPECT_THROW(short_replay.complete({"missing", 0, 0, 0.0, "PROMPT", 0}), TranscriptExhausted);
    fs::remove_all(dir);
}

TEST(Providers, StochasticDrawsAreDeterministic) {
    std::map<std::string, std::string> programs{{"a", "problem(1)."}, {"b", "problem(2)."}};
    StochasticProvider p1(programs, 0.5, 7), p2(programs, 0.5, 7), p3(programs, 0.5, 8);
    std::size_t prose = 0, differs = 0;
    for (std::size_t k = 0; k < 400; ++k) {
        CompletionRequest req{k % 2 ? "a" : "b", k / 100, k, 0.0, "P", 0};
        const std::string c = p1.complete(req);
        EXPECT_EQ(c, p2.complete(req));
        if (!extract_program(c).ok) ++prose;
        if (c != p3.complete(req)) ++differs;
    }
    EXPECT_GT(prose, 150u);
    EXPECT_LT(prose, 250u);
    EXPECT_GT(differs, 0u);
    StochasticProvider always(programs, 0.0, 1);
    EXPECT_TRUE(extract_program(always.complete({"a", 0, 0, 0.0, "P", 0})).ok);
}

TEST(Providers, LiveRequiresCredentialFromEnvironment) {
    LiveConfig cfg;
    cfg.credential_env = "PROLITE_TEST_UNSET_CREDENTIAL";
    ::unsetenv(cfg.credential_env.c_str());
    try {
        LiveProvider live(cfg);
        FAIL();
    } catch (const ProviderError& e) {
        EXPECT_NE(std::string(e.what()).find("missing credential"), std::string::npos);
    }
    ::setenv(cfg.credential_env.c_str(), "", 1);
    EXPECT_THROW(LiveProvider{cfg}, ProviderError);
    ::unsetenv(cfg.credential_env.c_str());
}

TEST(Prompt, DeterministicAndRequiresShots) {
    const auto& t = builtin_template("nlr-math_word");
    std::vector<Shot> shots{{"Two plus two?", "problem(A) :- A is 2 + 2."}};
    EXPECT_EQ(assemble_prompt("Q", shots, t), assemble_prompt("Q", shots, t));
    EXPECT_NE(assemble_prompt("Q", shots, t).find("Two plus two?"), std::string::npos);
    EXPECT_THROW(assemble_prompt("Q", {}, t), std::invalid_argument);
    for (const char* name : {"nlr-constraint_satisfaction", "nlr-algorithmic_instructions", "navigate", "generic"}) {
        EXPECT_EQ(builtin_template(name).name, name);
    }
}

TEST(Hashing, Sha256KnownVectorsAndSeeds) {
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_EQ(attempt_seed("p", 3), attempt_seed("p", 3));
    EXPECT_NE(attempt_seed("p", 3), attempt_seed("p", 4));
    EXPECT_NE(attempt_seed("p", 3), attempt_seed("q", 3));
}
