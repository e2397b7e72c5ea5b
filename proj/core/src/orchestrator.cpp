// SPDX-License-Identifier: Apache-2.0
#include "prolite/orchestrator.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "prolite/writer.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

namespace prolite {

// ---------------------------------------------------------------- schedule

void RetryPolicy::validate() const {
    if (max_attempts < 1) throw std::invalid_argument("max_attempts must be at least 1");
    if (!(temp_start <= temp_end)) throw std::invalid_argument("temp_start must not exceed temp_end");
    if (per_attempt_budget.max_steps == 0 || per_attempt_budget.wall_timeout.count() <= 0) {
        throw std::invalid_argument("per-attempt budget limits must be positive");
    }
}

double temperature_at(std::size_t k, const RetryPolicy& policy) {
    if (k >= policy.max_attempts) {
        throw std::out_of_range("attempt index " + std::to_string(k) + " outside [0, " +
                                std::to_string(policy.max_attempts) + ")");
    }
    if (policy.max_attempts == 1) return policy.temp_start;
    return policy.temp_start + (policy.temp_end - policy.temp_start) * static_cast<double>(k) /
                                   static_cast<double>(policy.max_attempts - 1);
}

namespace {

constexpr std::pair<ExecStatus, const char*> kStatusNames[] = {
    {ExecStatus::ExtractionFailure, "extraction-failure"},
    {ExecStatus::ProviderError, "provider-error"},
    {ExecStatus::ParseError, "parse-error"},
    {ExecStatus::RuntimeError, "runtime-error"},
    {ExecStatus::BudgetExceeded, "budget-exceeded"},
    {ExecStatus::NoSolution, "no-solution"},
    {ExecStatus::NonNumeric, "non-numeric"},
    {ExecStatus::Underdetermined, "underdetermined"},
    {ExecStatus::Ok, "ok"},
};

}  // namespace

const char* exec_status_name(ExecStatus status) {
    for (const auto& [s, n] : kStatusNames) {
        if (s == status) return n;
    }
    return "unknown";
}

std::optional<ExecStatus> parse_exec_status(std::string_view name) {
    for (const auto& [s, n] : kStatusNames) {
        if (name == n) return s;
    }
    return std::nullopt;
}

std::string render_number(const Rational& value) {
    if (value.is_integer()) return value.num().str();
    return format_double(value.to_double());
}

// ---------------------------------------------------------------- execution

ExecResult run_candidate(const std::string& source, const std::string& entry, const Budget& budget,
                         const EngineOptions& options) {
    ParsedTerm query = read_term(entry);
    const Term& goal = query.term;
    if (!goal.is_compound() || !goal.arg(goal.arity() - 1).is_var()) {
        throw std::invalid_argument("entry must be a goal whose last argument is a variable: " + entry);
    }
    const VarId answer_var = goal.arg(goal.arity() - 1).var_id();

    ExecResult result;
    Database db;
    try {
        db = consult(parse_program(source));
    } catch (const LogicError& e) {
        bool syntax = e.kind() == ErrorKind::Lex || e.kind() == ErrorKind::Parse || e.kind() == ErrorKind::OperatorClash;
        result.status = syntax ? ExecStatus::ParseError : ExecStatus::RuntimeError;
        result.detail = e.what();
        return result;
    }

    try {
        Solver solver(db, query, budget, options);
        const bool found = solver.next();
        result.steps = solver.steps();
        result.auto_labeled = solver.auto_labeled();
        if (!found) {
            result.status = ExecStatus::NoSolution;
            return result;
        }
        const Term value = solver.value(answer_var);
        if (value.is_number()) {
            result.status = ExecStatus::Ok;
            result.answer = value.number_value();
        } else if (value.is_var()) {
            result.status = ExecStatus::Underdetermined;
            result.detail = "answer variable is not determined";
        } else {
            result.status = ExecStatus::NonNumeric;
            result.detail = "answer is " + write_term(value);
        }
        try {
            result.more_solutions = solver.next();
        } catch (const LogicError&) {
            // the first solution stands; the probe only feeds the log
        }
        result.steps = solver.steps();
    } catch (const LogicError& e) {
        if (e.is_budget()) {
            result.status = ExecStatus::BudgetExceeded;
        } else if (e.kind() == ErrorKind::UnboundedDomain) {
            result.status = ExecStatus::Underdetermined;
        } else {
            result.status = ExecStatus::RuntimeError;
        }
        result.detail = e.what();
    }
    return result;
}

// ---------------------------------------------------------------- extraction

namespace {

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

bool is_fence(const std::string& line) {
    auto pos = line.find_first_not_of(" \t");
    return pos != std::string::npos && line.compare(pos, 3, "```") == 0;
}

bool blank(const std::string& s) { return s.find_first_not_of(" \t\r\n") == std::string::npos; }

bool lexes(const std::string& source) {
    try {
        tokenize(source);
        return true;
    } catch (const LogicError&) {
        return false;
    }
}

std::string join(const std::vector<std::string>& lines, std::size_t from, std::size_t to) {
    std::string out;
    for (std::size_t i = from; i < to; ++i) {
        out += lines[i];
        out += '\n';
    }
    return out;
}

}  // namespace

Extraction extract_program(const std::string& completion) {
    const std::vector<std::string> lines = split_lines(completion);
    std::optional<std::string> last_block;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (!is_fence(lines[i])) continue;
        std::size_t j = i + 1;
        while (j < lines.size() && !is_fence(lines[j])) ++j;
        last_block = join(lines, i + 1, j);
        i = j;
    }
    if (last_block && !blank(*last_block) && lexes(*last_block)) return {true, *last_block, ""};

    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (blank(lines[i]) || is_fence(lines[i])) continue;
        std::string suffix = join(lines, i, lines.size());
        try {
            Program p = parse_program(suffix);
            if (!p.clauses.empty()) return {true, suffix, ""};
        } catch (const LogicError&) {
        }
    }
    Extraction e;
    e.reason = last_block ? "fenced block does not tokenize and no program suffix parses"
                          : "no fenced block and no program suffix parses";
    return e;
}

// ---------------------------------------------------------------- prompts

const PromptTemplate& builtin_template(const std::string& name) {
    static const std::string kCue =
        "Write a commented Prolog program for the problem above. Define problem(Answer) so that Answer is bound "
        "to the final number. Reply with the program in a single ```prolog fenced block.";
    static const std::map<std::string, PromptTemplate> templates = {
        {"nlr-math_word",
         {"nlr-math_word",
          "You solve math word problems by writing Prolog. Name one variable per unknown quantity, state every "
          "relationship from the text as a linear equation inside a {...} block (CLP(R) style), and explain each "
          "step in a % comment before the code line that encodes it.",
          kCue}},
        {"nlr-constraint_satisfaction",
         {"nlr-constraint_satisfaction",
          "You solve constraint puzzles by writing Prolog with CLP(FD). Give every unknown a finite domain, state "
          "each condition as a #= / #\\= / #< / #> constraint, use ( ... ; ... ) for alternatives, and explain each "
          "step in a % comment before the code line that encodes it.",
          kCue}},
        {"nlr-algorithmic_instructions",
         {"nlr-algorithmic_instructions",
          "You solve step-by-step procedure problems by writing Prolog. Represent the full state as terms, write "
          "one predicate per update rule, apply the instructions recursively, and explain each rule in a % comment.",
          kCue}},
        {"navigate",
         {"navigate",
          "You track an agent on a grid by writing Prolog. Keep the coordinates and a heading encoded as a number "
          "in 0..3 (0 north, 1 east, 2 south, 3 west), apply each instruction in order, and compute the Euclidean "
          "distance from the start with sqrt/1.",
          kCue}},
        {"generic",
         {"generic",
          "You solve reasoning problems by writing Prolog. Explain the implicit reasoning in % comments and encode "
          "the explicit relationships as clauses and constraints.",
          kCue}},
    };
    auto it = templates.find(name);
    if (it == templates.end()) throw std::invalid_argument("unknown prompt template: " + name);
    return it->second;
}

std::string assemble_prompt(const std::string& problem, const std::vector<Shot>& shots, const PromptTemplate& tmpl) {
    if (shots.empty()) throw std::invalid_argument("prompt template " + tmpl.name + " needs at least one shot");
    std::string out = tmpl.preamble;
    out += "\n\n";
    for (std::size_t i = 0; i < shots.size(); ++i) {
        out += "### Example " + std::to_string(i + 1) + "\nProblem:\n" + shots[i].problem + "\n\nProgram:\n```prolog\n";
        out += shots[i].program;
        if (!shots[i].program.empty() && shots[i].program.back() != '\n') out += '\n';
        out += "```\n\n";
    }
    out += "### Task\nProblem:\n" + problem + "\n\n" + tmpl.cue + "\n";
    return out;
}

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256 failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 15]);
    }
    return out;
}

// ---------------------------------------------------------------- providers

namespace {

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

const char* kProse = "I worked through the problem step by step, but I could not settle on a final program.";

std::string fenced(const std::string& program) {
    std::string out = "Here is the program.\n```prolog\n" + program;
    if (!program.empty() && program.back() != '\n') out += '\n';
    return out + "```\n";
}

}  // namespace

std::uint64_t attempt_seed(const std::string& problem_id, std::size_t attempt) {
    return splitmix(fnv1a(problem_id) ^ splitmix(attempt)) >> 1;
}

ScriptedProvider::ScriptedProvider(std::vector<std::string> completions) : completions_(std::move(completions)) {
    if (completions_.empty()) throw std::invalid_argument("scripted provider needs at least one completion");
}

std::string ScriptedProvider::complete(const CompletionRequest& request) {
    return completions_[std::min(request.attempt, completions_.size() - 1)];
}

ReferenceProvider::ReferenceProvider(std::map<std::string, std::string> programs) : programs_(std::move(programs)) {}

std::string ReferenceProvider::complete(const CompletionRequest& request) {
    auto it = programs_.find(request.problem_id);
    return it == programs_.end() ? kProse : fenced(it->second);
}

StochasticProvider::StochasticProvider(std::map<std::string, std::string> programs, double fail_probability,
                                       std::uint64_t seed)
    : programs_(std::move(programs)), p_(fail_probability), seed_(seed) {
    if (!(p_ >= 0.0 && p_ <= 1.0)) throw std::invalid_argument("failure probability must lie in [0, 1]");
}

std::string StochasticProvider::name() const {
    return "stochastic:" + format_double(p_) + ":" + std::to_string(seed_);
}

std::string StochasticProvider::complete(const CompletionRequest& request) {
    std::uint64_t h = splitmix(seed_);
    h = splitmix(h ^ fnv1a(request.problem_id));
    h = splitmix(h ^ request.repeat);
    h = splitmix(h ^ request.attempt);
    const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
    if (u < p_) return kProse;
    auto it = programs_.find(request.problem_id);
    return it == programs_.end() ? kProse : fenced(it->second);
}

// ---------------------------------------------------------------- transcripts

namespace {

nlohmann::json answer_json(const Rational& r) {
    if (r.is_integer()) {
        if (auto v = to_int64(r.num())) return *v;
        return r.num().str();
    }
    return r.to_double();
}

}  // namespace

nlohmann::json TranscriptRecord::to_json() const {
    nlohmann::ordered_json j;
    j["problem_id"] = problem_id;
    j["attempt"] = attempt;
    j["temperature"] = temperature;
    j["prompt_sha256"] = prompt_sha256;
    j["completion"] = completion;
    j["exec_status"] = exec_status_name(exec_status);
    if (answer) j["answer"] = answer_json(*answer);
    j["wall_ms"] = wall_ms;
    return nlohmann::json(j);
}

TranscriptRecord TranscriptRecord::from_json(const nlohmann::json& j) {
    TranscriptRecord r;
    r.problem_id = j.at("problem_id").get<std::string>();
    r.attempt = j.at("attempt").get<std::size_t>();
    r.temperature = j.at("temperature").get<double>();
    r.prompt_sha256 = j.at("prompt_sha256").get<std::string>();
    r.completion = j.at("completion").get<std::string>();
    auto status = parse_exec_status(j.at("exec_status").get<std::string>());
    if (!status) throw std::invalid_argument("unknown exec_status in transcript");
    r.exec_status = *status;
    if (j.contains("answer")) {
        const auto& a = j.at("answer");
        if (a.is_number_integer()) {
            r.answer = Rational(a.get<std::int64_t>());
        } else if (a.is_number()) {
            r.answer = Rational::from_double(a.get<double>());
        } else if (a.is_string()) {
            r.answer = Rational(parse_bigint(a.get<std::string>()));
        }
    }
    r.wall_ms = j.value("wall_ms", std::int64_t{0});
    return r;
}

std::filesystem::path transcript_path(const std::filesystem::path& dir, const std::string& problem_id,
                                      std::size_t repeat) {
    std::string safe;
    for (char c : problem_id) safe.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c : '_');
    return dir / (safe + ".r" + std::to_string(repeat) + ".jsonl");
}

JsonlTranscript::JsonlTranscript(const std::filesystem::path& path) : path_(path) {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    std::ofstream out(path_, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open transcript " + path_.string());
}

void JsonlTranscript::append(const TranscriptRecord& record) {
    std::lock_guard lock(mu_);
    std::ofstream out(path_, std::ios::app);
    out << record.to_json().dump() << '\n';
    out.flush();
    if (!out) throw std::runtime_error("cannot write transcript " + path_.string());
}

AttemptSink JsonlTranscript::sink() {
    return [this](const TranscriptRecord& r) { append(r); };
}

ReplayProvider::ReplayProvider(std::filesystem::path dir) : dir_(std::move(dir)) {
    if (!std::filesystem::is_directory(dir_)) throw std::invalid_argument("replay directory not found: " + dir_.string());
}

const std::vector<TranscriptRecord>& ReplayProvider::load(const std::string& problem_id, std::size_t repeat) {
    auto key = std::make_pair(problem_id, repeat);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    std::vector<TranscriptRecord> records;
    std::ifstream in(transcript_path(dir_, problem_id, repeat));
    std::string line;
    while (in && std::getline(in, line)) {
        if (blank(line)) continue;
        TranscriptRecord r = TranscriptRecord::from_json(nlohmann::json::parse(line));
        if (r.problem_id != problem_id) continue;
        if (records.size() <= r.attempt) records.resize(r.attempt + 1);
        records[r.attempt] = std::move(r);
    }
    return cache_.emplace(key, std::move(records)).first->second;
}

std::string ReplayProvider::complete(const CompletionRequest& request) {
    std::lock_guard lock(mu_);
    const auto& records = load(request.problem_id, request.repeat);
    if (request.attempt >= records.size() || records[request.attempt].problem_id.empty()) {
        throw TranscriptExhausted("no recorded completion for " + request.problem_id + " repeat " +
                                  std::to_string(request.repeat) + " attempt " + std::to_string(request.attempt));
    }
    return records[request.attempt].completion;
}

LiveProvider::LiveProvider(LiveConfig config) : config_(std::move(config)) {
    const char* token = std::getenv(config_.credential_env.c_str());
    if (!token || !*token) throw ProviderError("missing credential: set " + config_.credential_env);
    token_ = token;
}

std::string LiveProvider::complete(const CompletionRequest& request) {
    nlohmann::json body = {
        {"model", config_.model},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})},
        {"temperature", request.temperature},
        {"seed", request.seed},
    };
    httplib::Client client(config_.base_url);
    client.set_bearer_token_auth(token_);
    client.set_connection_timeout(config_.timeout_seconds, 0);
    client.set_read_timeout(config_.timeout_seconds, 0);
    auto res = client.Post(config_.path, body.dump(), "application/json");
    if (!res) throw ProviderError("request failed: " + httplib::to_string(res.error()));
    if (res->status != 200) throw ProviderError("endpoint returned HTTP " + std::to_string(res->status));
    try {
        auto j = nlohmann::json::parse(res->body);
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError(std::string("malformed completion response: ") + e.what());
    }
}

// ---------------------------------------------------------------- multiple try

nlohmann::json Outcome::to_json() const {
    nlohmann::ordered_json j;
    j["problem_id"] = problem_id;
    if (answer) {
        j["answer"] = render_number(*answer);
        j["answer_exact"] = answer->str();
    }
    j["attempts_used"] = attempts_used;
    auto arr = nlohmann::ordered_json::array();
    for (const Attempt& a : attempts) {
        nlohmann::ordered_json x;
        x["index"] = a.index;
        x["temperature"] = a.temperature;
        x["prompt_sha256"] = a.prompt_sha256;
        x["completion"] = a.completion;
        if (a.program) x["program"] = *a.program;
        x["exec_status"] = exec_status_name(a.exec_status);
        if (a.answer) x["answer"] = a.answer->str();
        x["detail"] = a.detail;
        arr.push_back(std::move(x));
    }
    j["attempts"] = std::move(arr);
    return nlohmann::json(j);
}

Outcome multiple_try(const TryRequest& request, Provider& provider, const RetryPolicy& policy,
                     const std::string& prompt, const AttemptSink& sink, const EngineOptions& options) {
    policy.validate();
    Outcome outcome;
    outcome.problem_id = request.problem_id;
    const std::string digest = sha256_hex(prompt);
    for (std::size_t k = 0; k < policy.max_attempts; ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        Attempt a;
        a.index = k;
        a.temperature = temperature_at(k, policy);
        a.prompt_sha256 = digest;
        CompletionRequest req{request.problem_id, request.repeat, k, a.temperature, prompt,
                              attempt_seed(request.problem_id, k)};
        bool have_completion = true;
        try {
            a.completion = provider.complete(req);
        } catch (const ProviderError& e) {
            a.exec_status = ExecStatus::ProviderError;
            a.detail = e.what();
            have_completion = false;
        }
        if (have_completion) {
            Extraction ex = extract_program(a.completion);
            if (!ex.ok) {
                a.exec_status = ExecStatus::ExtractionFailure;
                a.detail = ex.reason;
            } else {
                a.program = ex.source;
                ExecResult r = run_candidate(ex.source, request.entry, policy.per_attempt_budget, options);
                a.exec_status = r.status;
                a.answer = r.answer;
                a.detail = r.detail;
                if (r.more_solutions) a.detail += a.detail.empty() ? "more solutions exist" : "; more solutions exist";
                if (r.auto_labeled) a.detail += a.detail.empty() ? "auto-labeled" : "; auto-labeled";
            }
        }
        if (sink) {
            TranscriptRecord rec;
            rec.problem_id = request.problem_id;
            rec.attempt = k;
            rec.temperature = a.temperature;
            rec.prompt_sha256 = digest;
            rec.completion = a.completion;
            rec.exec_status = a.exec_status;
            rec.answer = a.answer;
            rec.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0)
                              .count();
            sink(rec);
        }
        const bool ok = a.exec_status == ExecStatus::Ok;
        if (ok) outcome.answer = a.answer;
        outcome.attempts.push_back(std::move(a));
        if (ok) break;
    }
    outcome.attempts_used = outcome.attempts.size();
    return outcome;
}

}  // namespace prolite
