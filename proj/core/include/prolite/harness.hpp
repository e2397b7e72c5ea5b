// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "prolite/numeric.hpp"
#include "prolite/orchestrator.hpp"
#include "prolite/term.hpp"

namespace prolite {

// ---------------------------------------------------------------- problems

enum class Category { MathWord, ConstraintSatisfaction, AlgorithmicInstructions, Navigate, External };

const char* category_name(Category c);
/// Accepts canonical names and common aliases ("mwp", "csp", "algorithmic", ...).
std::optional<Category> parse_category(std::string_view text);

struct ProblemRecord {
    std::string id;
    Category category = Category::External;
    std::string statement;
    Rational gold;
    bool gold_is_float = false;  // floats compare with relative tolerance 1e-6
    std::string entry = "problem(Answer)";
    std::optional<int> entanglement;
    std::optional<std::string> reference_program;

    nlohmann::json to_json() const;
};

class SchemaError : public std::runtime_error {
public:
    SchemaError(const std::string& path, const std::string& message)
        : std::runtime_error("schema error at " + path + ": " + message), path_(path) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

class DuplicateId : public std::runtime_error {
public:
    explicit DuplicateId(const std::string& id) : std::runtime_error("duplicate problem id: " + id) {}
};

/// Top-level list of {id, category, statement, answer, entanglement?, entry?, reference_program?}.
/// Aliases: question/problem -> statement, gold -> answer, type -> category.
std::vector<ProblemRecord> parse_problems(const nlohmann::json& doc);
std::vector<ProblemRecord> load_problems(const std::filesystem::path& path, bool include_fixtures = false);

/// Built-in benchmark problems with hand-written reference programs.
const std::vector<ProblemRecord>& fixtures();

/// Exact equality for integer golds, relative tolerance 1e-6 for float golds.
bool answer_matches(const Rational& answer, const ProblemRecord& problem);

std::string problems_to_json(const std::vector<ProblemRecord>& problems);

// ---------------------------------------------------------------- oracles

/// Nine instruction templates; TakeSteps and Forward both move along the heading.
enum class NavTemplate {
    TakeSteps,
    Forward,
    Backward,
    Left,
    Right,
    TurnLeft,
    TurnRight,
    TurnAround,
    AlwaysFaceForward,
};

struct NavStep {
    NavTemplate kind = NavTemplate::TakeSteps;
    int steps = 0;  // 0 for turns
    bool operator==(const NavStep&) const = default;
};

struct NavState {
    std::int64_t x = 0;
    std::int64_t y = 0;
    int heading = 0;  // 0 north, 1 east, 2 south, 3 west
};

class UnknownInstruction : public std::invalid_argument {
public:
    explicit UnknownInstruction(const std::string& text) : std::invalid_argument("unknown instruction: " + text) {}
};

std::string render_instruction(const NavStep& step);
NavStep parse_instruction(std::string_view text);
/// Splits on sentence ends and parses each instruction.
std::vector<NavStep> parse_instructions(std::string_view text);
NavState apply_instruction(NavState state, const NavStep& step);

/// Euclidean distance from the origin: exact for perfect squares, otherwise the nearest double.
Rational navigate_oracle(const std::vector<NavStep>& steps);

/// Prolog program computing the distance of `steps` through problem(Answer).
std::string navigate_program(const std::vector<NavStep>& steps);

struct NavigateProblem {
    ProblemRecord record;
    std::vector<NavStep> steps;
};

/// Deterministic per seed; 2..8 instructions, step counts 1..10. Throws std::invalid_argument for n < 1.
std::vector<NavigateProblem> gen_navigate(std::uint64_t seed, std::size_t n);

enum class SumRule { Plain, PrevEqualClears, NeighborSumZeroes };
std::optional<SumRule> parse_sum_rule(std::string_view text);

class NoZeroSquare : public std::runtime_error {
public:
    NoZeroSquare() : std::runtime_error("no zero square left for placement") {}
};

/// Throws std::invalid_argument unless squares has 10 entries.
std::int64_t sum_it_up_oracle(const std::vector<std::int64_t>& squares, const std::vector<std::int64_t>& waitlist,
                              SumRule rule);

enum class FillOrder { RowMajor };

/// Rows and columns are 1-based. A seat is filled when no orthogonal neighbour is filled.
std::int64_t cinema_oracle(int rows, int cols, const std::vector<std::pair<int, int>>& pre_seated,
                           FillOrder order = FillOrder::RowMajor);

class Singular : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class Inconsistent : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Gaussian elimination over exact rationals for equations `Lhs = Rhs` over named variables.
std::map<std::string, Rational> linear_gold_oracle(const std::vector<std::string>& equations);

struct CspVar {
    std::string name;
    std::int64_t lo = 0;
    std::int64_t hi = 0;
};

struct CspInstance {
    std::vector<CspVar> vars;
    std::vector<std::string> constraints;  // clp(fd) syntax with , ; \+ over the named variables
    std::optional<std::string> answer;     // expression evaluated per solution
};

class SearchSpaceTooLarge : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Every assignment satisfying all constraints, in lexicographic order of `vars`.
/// Throws SearchSpaceTooLarge beyond 10^7 candidate tuples.
std::vector<std::vector<std::int64_t>> csp_brute_oracle(const CspInstance& instance);

/// Distinct values of `instance.answer` over the solutions, ascending.
std::vector<std::int64_t> csp_answers(const CspInstance& instance);

CspInstance csp_instance_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------- evaluation

struct ProblemResult {
    std::string id;
    Category category = Category::External;
    std::size_t correct_runs = 0;
    std::size_t total_runs = 0;
    double mean_attempts = 0.0;
    std::optional<bool> sanity;  // reference program reproduces gold through the engine
    std::string sanity_detail;

    double accuracy() const { return total_runs ? static_cast<double>(correct_runs) / total_runs : 0.0; }
};

struct RunRecord {
    std::string problem_id;
    std::size_t repeat = 0;
    std::optional<Rational> answer;
    std::size_t attempts_used = 0;
    bool correct = false;
};

struct EvalReport {
    std::vector<ProblemResult> problems;
    std::vector<RunRecord> runs;
    std::map<std::string, std::string> metadata;
};

struct EvalOptions {
    std::size_t workers = 1;
    std::optional<std::filesystem::path> transcript_dir;  // one JSONL file per (problem, repeat)
    bool sanity_lane = true;
    EngineOptions engine;
    /// Shots per prompt drawn from the shot pool.
    std::size_t max_shots = 5;
};

/// Few-shot exemplars for `problem`: other fixtures of the same category, then a generic set.
std::vector<Shot> select_shots(const ProblemRecord& problem, std::size_t max_shots);
std::string prompt_for(const ProblemRecord& problem, std::size_t max_shots);

/// Runs `repeats` independent multiple-try loops per problem. TranscriptExhausted propagates.
EvalReport evaluate(const std::vector<ProblemRecord>& problems, Provider& provider, const RetryPolicy& policy,
                    std::size_t repeats, const EvalOptions& options = {});

enum class ReportFormat { Json, Csv, Markdown };

/// Deterministic rendering; JSON of an empty report is {"problems":[],"categories":{}}.
std::string emit_report(const EvalReport& report, ReportFormat format);

}  // namespace prolite
