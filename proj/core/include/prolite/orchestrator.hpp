// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "prolite/engine.hpp"
#include "prolite/numeric.hpp"

namespace prolite {

struct RetryPolicy {
    std::size_t max_attempts = 50;
    double temp_start = 0.0;
    double temp_end = 0.3;
    Budget per_attempt_budget;

    /// Throws std::invalid_argument unless max_attempts >= 1 and temp_start <= temp_end.
    void validate() const;
};

/// Linear schedule from temp_start (k = 0) to temp_end (k = max_attempts - 1).
/// Throws std::out_of_range outside [0, max_attempts).
double temperature_at(std::size_t k, const RetryPolicy& policy);

enum class ExecStatus {
    ExtractionFailure,
    ProviderError,
    ParseError,
    RuntimeError,
    BudgetExceeded,
    NoSolution,
    NonNumeric,
    Underdetermined,
    Ok,
};

const char* exec_status_name(ExecStatus status);
std::optional<ExecStatus> parse_exec_status(std::string_view name);

/// Integer text when the denominator is 1, otherwise the nearest double.
std::string render_number(const Rational& value);

struct ExecResult {
    ExecStatus status = ExecStatus::NoSolution;
    std::optional<Rational> answer;
    std::string detail;
    bool more_solutions = false;  // a second solution exists; the first one is used
    bool auto_labeled = false;
    std::uint64_t steps = 0;
};

/// Consults `source`, runs `entry` (default problem(Answer)), and classifies the result.
/// The answer variable is the last argument of the entry goal. Never throws LogicError.
ExecResult run_candidate(const std::string& source, const std::string& entry = "problem(Answer)",
                         const Budget& budget = {}, const EngineOptions& options = {});

struct Extraction {
    bool ok = false;
    std::string source;
    std::string reason;
};

/// Last fenced code block if any; otherwise the longest suffix of lines that parses as a program.
Extraction extract_program(const std::string& completion);

struct Shot {
    std::string problem;
    std::string program;  // commented program
};

struct PromptTemplate {
    std::string name;
    std::string preamble;
    std::string cue;
};

/// Built-in templates: "nlr-math_word", "nlr-constraint_satisfaction", "nlr-algorithmic_instructions",
/// "navigate", "generic".
const PromptTemplate& builtin_template(const std::string& name);

/// Deterministic prompt text. Throws std::invalid_argument when `shots` is empty.
std::string assemble_prompt(const std::string& problem, const std::vector<Shot>& shots, const PromptTemplate& tmpl);

std::string sha256_hex(const std::string& data);

// ---------------------------------------------------------------- providers

struct CompletionRequest {
    std::string problem_id;
    std::size_t repeat = 0;
    std::size_t attempt = 0;
    double temperature = 0.0;
    std::string prompt;
    std::uint64_t seed = 0;
};

class ProviderError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A replay source ran out of recorded completions. Aborts the run.
class TranscriptExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Must tolerate concurrent calls.
class Provider {
public:
    virtual ~Provider() = default;
    virtual std::string name() const = 0;
    /// Throws ProviderError (counted as a failed attempt) or TranscriptExhausted.
    virtual std::string complete(const CompletionRequest& request) = 0;
};

/// Returns completions[attempt], repeating the last entry past the end.
class ScriptedProvider : public Provider {
public:
    explicit ScriptedProvider(std::vector<std::string> completions);
    std::string name() const override { return "scripted"; }
    std::string complete(const CompletionRequest& request) override;

private:
    std::vector<std::string> completions_;
};

/// Emits each problem's reference program in a fenced block; prose for unknown ids.
class ReferenceProvider : public Provider {
public:
    explicit ReferenceProvider(std::map<std::string, std::string> programs);
    std::string name() const override { return "scripted:reference"; }
    std::string complete(const CompletionRequest& request) override;

private:
    std::map<std::string, std::string> programs_;
};

/// Reference program with probability 1 - p, prose with probability p, independently per attempt.
/// Draws depend only on (seed, problem id, repeat, attempt).
class StochasticProvider : public Provider {
public:
    StochasticProvider(std::map<std::string, std::string> programs, double fail_probability, std::uint64_t seed);
    std::string name() const override;
    std::string complete(const CompletionRequest& request) override;

private:
    std::map<std::string, std::string> programs_;
    double p_;
    std::uint64_t seed_;
};

struct TranscriptRecord {
    std::string problem_id;
    std::size_t attempt = 0;
    double temperature = 0.0;
    std::string prompt_sha256;
    std::string completion;
    ExecStatus exec_status = ExecStatus::NoSolution;
    std::optional<Rational> answer;
    std::int64_t wall_ms = 0;

    nlohmann::json to_json() const;
    static TranscriptRecord from_json(const nlohmann::json& j);
};

/// Transcript file for one (problem, repeat) inside a run directory.
std::filesystem::path transcript_path(const std::filesystem::path& dir, const std::string& problem_id,
                                      std::size_t repeat);

/// Serves completions recorded under a run directory.
class ReplayProvider : public Provider {
public:
    explicit ReplayProvider(std::filesystem::path dir);
    std::string name() const override { return "replay:" + dir_.string(); }
    std::string complete(const CompletionRequest& request) override;

private:
    const std::vector<TranscriptRecord>& load(const std::string& problem_id, std::size_t repeat);

    std::filesystem::path dir_;
    std::mutex mu_;
    std::map<std::pair<std::string, std::size_t>, std::vector<TranscriptRecord>> cache_;
};

struct LiveConfig {
    std::string base_url = "https://api.openai.com";
    std::string path = "/v1/chat/completions";
    std::string model = "gpt-4";
    std::string credential_env = "PROLITE_API_KEY";
    int timeout_seconds = 120;
};

/// Chat-completions endpoint. The bearer token is read from the environment variable named in the config.
class LiveProvider : public Provider {
public:
    /// Throws ProviderError("missing credential ...") when the variable is unset or empty.
    explicit LiveProvider(LiveConfig config);
    std::string name() const override { return "live:" + config_.model; }
    std::string complete(const CompletionRequest& request) override;

private:
    LiveConfig config_;
    std::string token_;
};

// ---------------------------------------------------------------- multiple try

struct Attempt {
    std::size_t index = 0;
    double temperature = 0.0;
    std::string prompt_sha256;
    std::string completion;
    std::optional<std::string> program;  // absent on extraction failure
    ExecStatus exec_status = ExecStatus::NoSolution;
    std::optional<Rational> answer;
    std::string detail;
};

struct Outcome {
    std::string problem_id;
    std::optional<Rational> answer;
    std::vector<Attempt> attempts;
    std::size_t attempts_used = 0;

    nlohmann::json to_json() const;
};

/// Receives every attempt before the next provider call.
using AttemptSink = std::function<void(const TranscriptRecord&)>;

/// Appends records to one JSONL file, flushing after each line.
class JsonlTranscript {
public:
    explicit JsonlTranscript(const std::filesystem::path& path);
    void append(const TranscriptRecord& record);
    AttemptSink sink();

private:
    std::filesystem::path path_;
    std::mutex mu_;
};

struct TryRequest {
    std::string problem_id;
    std::string statement;
    std::string entry = "problem(Answer)";
    std::size_t repeat = 0;
};

std::uint64_t attempt_seed(const std::string& problem_id, std::size_t attempt);

/// Retries with increasing temperature until the first attempt that yields a numeric answer.
/// The prompt is identical across attempts. TranscriptExhausted propagates.
Outcome multiple_try(const TryRequest& request, Provider& provider, const RetryPolicy& policy,
                     const std::string& prompt, const AttemptSink& sink = {},
                     const EngineOptions& options = {});

}  // namespace prolite
