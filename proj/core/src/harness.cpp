// SPDX-License-Identifier: Apache-2.0
#include "prolite/harness.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "prolite/reader.hpp"

namespace prolite {

// ---------------------------------------------------------------- categories

namespace {

constexpr std::pair<Category, const char*> kCategoryNames[] = {
    {Category::MathWord, "math_word"},
    {Category::ConstraintSatisfaction, "constraint_satisfaction"},
    {Category::AlgorithmicInstructions, "algorithmic_instructions"},
    {Category::Navigate, "navigate"},
    {Category::External, "external"},
};

std::string normalize_key(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == ' ' || c == '-') {
            out.push_back('_');
        } else {
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    return out;
}

}  // namespace

const char* category_name(Category c) {
    for (const auto& [k, n] : kCategoryNames) {
        if (k == c) return n;
    }
    return "external";
}

std::optional<Category> parse_category(std::string_view text) {
    static const std::map<std::string, Category> aliases = {
        {"math_word", Category::MathWord},
        {"math_word_problem", Category::MathWord},
        {"math_word_problems", Category::MathWord},
        {"mwp", Category::MathWord},
        {"constraint_satisfaction", Category::ConstraintSatisfaction},
        {"constraint_satisfaction_problem", Category::ConstraintSatisfaction},
        {"constraint_satisfaction_problems", Category::ConstraintSatisfaction},
        {"csp", Category::ConstraintSatisfaction},
        {"algorithmic_instructions", Category::AlgorithmicInstructions},
        {"algorithmic_instruction", Category::AlgorithmicInstructions},
        {"algorithmic", Category::AlgorithmicInstructions},
        {"ai", Category::AlgorithmicInstructions},
        {"navigate", Category::Navigate},
        {"external", Category::External},
        {"gsm8k", Category::External},
    };
    auto it = aliases.find(normalize_key(text));
    if (it == aliases.end()) return std::nullopt;
    return it->second;
}

// ---------------------------------------------------------------- problem records

nlohmann::json ProblemRecord::to_json() const {
    nlohmann::ordered_json j;
    j["id"] = id;
    j["category"] = category_name(category);
    j["statement"] = statement;
    if (gold_is_float) {
        j["answer"] = gold.to_double();
    } else if (auto v = to_int64(gold.num()); v && gold.is_integer()) {
        j["answer"] = *v;
    } else {
        j["answer"] = gold.to_double();
    }
    if (entanglement) j["entanglement"] = *entanglement;
    j["entry"] = entry;
    if (reference_program) j["reference_program"] = *reference_program;
    return nlohmann::json(j);
}

namespace {

const nlohmann::json* field(const nlohmann::json& obj, std::initializer_list<const char*> names, std::string* used) {
    for (const char* n : names) {
        auto it = obj.find(n);
        if (it != obj.end()) {
            *used = n;
            return &*it;
        }
    }
    return nullptr;
}

ProblemRecord parse_record(const nlohmann::json& obj, const std::string& path) {
    if (!obj.is_object()) throw SchemaError(path, "expected an object");
    ProblemRecord r;
    std::string key;

    const auto* id = field(obj, {"id"}, &key);
    if (!id) throw SchemaError(path + ".id", "missing");
    if (id->is_number_integer()) {
        r.id = std::to_string(id->get<std::int64_t>());
    } else if (id->is_string() && !id->get<std::string>().empty()) {
        r.id = id->get<std::string>();
    } else {
        throw SchemaError(path + ".id", "expected a non-empty string");
    }

    const auto* cat = field(obj, {"category", "type"}, &key);
    if (!cat) throw SchemaError(path + ".category", "missing");
    if (!cat->is_string()) throw SchemaError(path + "." + key, "expected a string");
    auto c = parse_category(cat->get<std::string>());
    if (!c) throw SchemaError(path + "." + key, "unknown category " + cat->get<std::string>());
    r.category = *c;

    const auto* st = field(obj, {"statement", "question", "problem"}, &key);
    if (!st) throw SchemaError(path + ".statement", "missing");
    if (!st->is_string()) throw SchemaError(path + "." + key, "expected a string");
    r.statement = st->get<std::string>();

    const auto* ans = field(obj, {"answer", "gold"}, &key);
    if (!ans) throw SchemaError(path + ".answer", "missing");
    if (ans->is_number_integer()) {
        r.gold = ans->is_number_unsigned() ? Rational(BigInt(ans->get<std::uint64_t>()))
                                           : Rational(ans->get<std::int64_t>());
    } else if (ans->is_number_float()) {
        const double d = ans->get<double>();
        if (!std::isfinite(d)) throw SchemaError(path + "." + key, "expected a finite number");
        r.gold = Rational::from_double(d);
        r.gold_is_float = true;
    } else {
        throw SchemaError(path + "." + key, "expected a number");
    }

    if (const auto* e = field(obj, {"entanglement"}, &key); e && !e->is_null()) {
        if (!e->is_number_integer() || e->get<std::int64_t>() < 0) {
            throw SchemaError(path + ".entanglement", "expected a non-negative integer");
        }
        r.entanglement = static_cast<int>(e->get<std::int64_t>());
    }
    if (const auto* e = field(obj, {"entry"}, &key); e && !e->is_null()) {
        if (!e->is_string()) throw SchemaError(path + ".entry", "expected a string");
        r.entry = e->get<std::string>();
        try {
            ParsedTerm q = read_term(r.entry);
            if (!q.term.is_compound() || !q.term.arg(q.term.arity() - 1).is_var()) {
                throw SchemaError(path + ".entry", "last argument must be the answer variable");
            }
        } catch (const LogicError& err) {
            throw SchemaError(path + ".entry", err.what());
        }
    }
    if (const auto* e = field(obj, {"reference_program"}, &key); e && !e->is_null()) {
        if (!e->is_string()) throw SchemaError(path + ".reference_program", "expected a string");
        r.reference_program = e->get<std::string>();
    }
    return r;
}

void check_unique(const std::vector<ProblemRecord>& records) {
    std::set<std::string> seen;
    for (const auto& r : records) {
        if (!seen.insert(r.id).second) throw DuplicateId(r.id);
    }
}

}  // namespace

std::vector<ProblemRecord> parse_problems(const nlohmann::json& doc) {
    if (!doc.is_array()) throw SchemaError("$", "expected a list of problems");
    std::vector<ProblemRecord> out;
    for (std::size_t i = 0; i < doc.size(); ++i) out.push_back(parse_record(doc[i], "$[" + std::to_string(i) + "]"));
    check_unique(out);
    return out;
}

std::vector<ProblemRecord> load_problems(const std::filesystem::path& path, bool include_fixtures) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read problems file " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError("$", e.what());
    }
    std::vector<ProblemRecord> out;
    if (include_fixtures) out = fixtures();
    for (auto& r : parse_problems(doc)) out.push_back(std::move(r));
    check_unique(out);
    return out;
}

bool answer_matches(const Rational& answer, const ProblemRecord& problem) {
    if (!problem.gold_is_float) return answer == problem.gold;
    const double g = problem.gold.to_double();
    return std::fabs(answer.to_double() - g) <= 1e-6 * std::max(1.0, std::fabs(g));
}

std::string problems_to_json(const std::vector<ProblemRecord>& problems) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : problems) arr.push_back(p.to_json());
    return arr.dump(2) + "\n";
}

// ---------------------------------------------------------------- prompts

namespace {

const std::vector<Shot>& generic_shots() {
    static const std::vector<Shot> shots = {
        {"A farm has chickens and cows. Together they have 20 heads and 56 legs. How many cows are there?",
         "% Every animal has one head; chickens have 2 legs and cows 4.\n"
         "problem(Cows) :-\n"
         "    { Chickens + Cows = 20,\n"
         "      2 * Chickens + 4 * Cows = 56 }.\n"},
        {"I am a two-digit number. My digits add up to 11 and my tens digit is larger than my ones digit. What is the "
         "smallest number I can be?",
         "% Labeling the tens digit upwards finds the smallest number first.\n"
         "problem(N) :-\n"
         "    T in 1..9, O in 0..9,\n"
         "    T + O #= 11,\n"
         "    T #> O,\n"
         "    N #= 10 * T + O,\n"
         "    once(label([T, O])).\n"},
        {"A counter starts at 5. Double it three times and then subtract 7. What is the final value?",
         "% Apply the doubling step a fixed number of times.\n"
         "problem(V) :-\n"
         "    repeat_double(3, 5, D),\n"
         "    V is D - 7.\n"
         "repeat_double(0, X, X) :- !.\n"
         "repeat_double(K, X0, X) :- X1 is 2 * X0, K1 is K - 1, repeat_double(K1, X1, X).\n"},
    };
    return shots;
}

const std::vector<NavigateProblem>& navigate_exemplars() {
    static const std::vector<NavigateProblem> ex = gen_navigate(20240101, 4);
    return ex;
}

std::string template_for(Category c) {
    switch (c) {
    case Category::MathWord: return "nlr-math_word";
    case Category::ConstraintSatisfaction: return "nlr-constraint_satisfaction";
    case Category::AlgorithmicInstructions: return "nlr-algorithmic_instructions";
    case Category::Navigate: return "navigate";
    case Category::External: return "generic";
    }
    return "generic";
}

}  // namespace

std::vector<Shot> select_shots(const ProblemRecord& problem, std::size_t max_shots) {
    std::vector<Shot> out;
    auto add = [&](const std::string& text, const std::string& program) {
        if (out.size() < max_shots) out.push_back({text, program});
    };
    if (problem.category == Category::Navigate) {
        for (const auto& n : navigate_exemplars()) {
            if (n.record.id != problem.id) add(n.record.statement, *n.record.reference_program);
        }
    }
    for (const auto& f : fixtures()) {
        if (f.category == problem.category && f.id != problem.id) add(f.statement, *f.reference_program);
    }
    for (const auto& s : generic_shots()) add(s.problem, s.program);
    return out;
}

std::string prompt_for(const ProblemRecord& problem, std::size_t max_shots) {
    return assemble_prompt(problem.statement, select_shots(problem, max_shots), builtin_template(template_for(problem.category)));
}

// ---------------------------------------------------------------- evaluation

EvalReport evaluate(const std::vector<ProblemRecord>& problems, Provider& provider, const RetryPolicy& policy,
                    std::size_t repeats, const EvalOptions& options) {
    if (repeats < 1) throw std::invalid_argument("repeats must be at least 1");
    policy.validate();
    std::vector<std::string> prompts;
    prompts.reserve(problems.size());
    for (const auto& p : problems) prompts.push_back(prompt_for(p, options.max_shots));

    const std::size_t tasks = problems.size() * repeats;
    std::vector<RunRecord> runs(tasks);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::exception_ptr failure;
    std::mutex failure_mu;

    auto worker = [&] {
        while (!stop) {
            const std::size_t t = next++;
            if (t >= tasks) return;
            const ProblemRecord& p = problems[t / repeats];
            const std::size_t repeat = t % repeats;
            try {
                TryRequest req{p.id, p.statement, p.entry, repeat};
                Outcome o;
                if (options.transcript_dir) {
                    JsonlTranscript log(transcript_path(*options.transcript_dir, p.id, repeat));
                    o = multiple_try(req, provider, policy, prompts[t / repeats], log.sink(), options.engine);
                } else {
                    o = multiple_try(req, provider, policy, prompts[t / repeats], {}, options.engine);
                }
                RunRecord& r = runs[t];
                r.problem_id = p.id;
                r.repeat = repeat;
                r.answer = o.answer;
                r.attempts_used = o.attempts_used;
                r.correct = o.answer && answer_matches(*o.answer, p);
            } catch (...) {
                std::lock_guard lock(failure_mu);
                if (!failure) failure = std::current_exception();
                stop = true;
            }
        }
    };
    const std::size_t n_workers = std::max<std::size_t>(1, std::min(options.workers, tasks));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    EvalReport report;
    report.runs = std::move(runs);
    for (std::size_t i = 0; i < problems.size(); ++i) {
        const ProblemRecord& p = problems[i];
        ProblemResult res;
        res.id = p.id;
        res.category = p.category;
        res.total_runs = repeats;
        std::size_t attempts = 0;
        for (std::size_t r = 0; r < repeats; ++r) {
            const RunRecord& run = report.runs[i * repeats + r];
            attempts += run.attempts_used;
            if (run.correct) ++res.correct_runs;
        }
        res.mean_attempts = static_cast<double>(attempts) / static_cast<double>(repeats);
        if (options.sanity_lane && p.reference_program) {
            ExecResult direct = run_candidate(*p.reference_program, p.entry, policy.per_attempt_budget, options.engine);
            res.sanity = direct.status == ExecStatus::Ok && answer_matches(*direct.answer, p);
            if (!*res.sanity) {
                res.sanity_detail = std::string(exec_status_name(direct.status)) +
                                    (direct.answer ? " " + render_number(*direct.answer) : "") +
                                    (direct.detail.empty() ? "" : ": " + direct.detail);
            }
        }
        report.problems.push_back(std::move(res));
    }
    report.metadata["provider"] = provider.name();
    report.metadata["repeats"] = std::to_string(repeats);
    report.metadata["max_attempts"] = std::to_string(policy.max_attempts);
    report.metadata["temp_start"] = format_double(policy.temp_start);
    report.metadata["temp_end"] = format_double(policy.temp_end);
    report.metadata["max_steps"] = std::to_string(policy.per_attempt_budget.max_steps);
    report.metadata["wall_timeout_ms"] = std::to_string(policy.per_attempt_budget.wall_timeout.count());
    return report;
}

// ---------------------------------------------------------------- reports

namespace {

struct CategoryTotals {
    std::size_t correct = 0;
    std::size_t total = 0;
    double accuracy() const { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
};

std::map<std::string, CategoryTotals> category_totals(const EvalReport& report) {
    std::map<std::string, CategoryTotals> out;
    for (const auto& p : report.problems) {
        auto& c = out[category_name(p.category)];
        c.correct += p.correct_runs;
        c.total += p.total_runs;
    }
    return out;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string md_cell(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '|') out += "\\|";
        else if (c == '\n') out += ' ';
        else out += c;
    }
    return out;
}

}  // namespace

std::string emit_report(const EvalReport& report, ReportFormat format) {
    const auto cats = category_totals(report);
    switch (format) {
    case ReportFormat::Json: {
        nlohmann::ordered_json j;
        j["problems"] = nlohmann::ordered_json::array();
        for (const auto& p : report.problems) {
            nlohmann::ordered_json x;
            x["id"] = p.id;
            x["category"] = category_name(p.category);
            x["correct_runs"] = p.correct_runs;
            x["total_runs"] = p.total_runs;
            x["accuracy"] = p.accuracy();
            x["mean_attempts"] = p.mean_attempts;
            if (p.sanity) x["sanity"] = *p.sanity;
            if (!p.sanity_detail.empty()) x["sanity_detail"] = p.sanity_detail;
            j["problems"].push_back(std::move(x));
        }
        j["categories"] = nlohmann::ordered_json::object();
        for (const auto& [name, c] : cats) {
            j["categories"][name] = {{"correct_runs", c.correct}, {"total_runs", c.total}, {"accuracy", c.accuracy()}};
        }
        if (!report.metadata.empty()) {
            j["metadata"] = nlohmann::ordered_json::object();
            for (const auto& [k, v] : report.metadata) j["metadata"][k] = v;
        }
        return j.dump();
    }
    case ReportFormat::Csv: {
        std::string out = "scope,id,category,correct_runs,total_runs,accuracy,mean_attempts,sanity\n";
        for (const auto& p : report.problems) {
            out += "problem," + csv_field(p.id) + "," + category_name(p.category) + "," +
                   std::to_string(p.correct_runs) + "," + std::to_string(p.total_runs) + "," +
                   format_double(p.accuracy()) + "," + format_double(p.mean_attempts) + "," +
                   (p.sanity ? (*p.sanity ? "pass" : "fail") : "") + "\n";
        }
        for (const auto& [name, c] : cats) {
            out += "category,," + name + "," + std::to_string(c.correct) + "," + std::to_string(c.total) + "," +
                   format_double(c.accuracy()) + ",,\n";
        }
        return out;
    }
    case ReportFormat::Markdown: {
        std::string out = "# Evaluation report\n\n";
        for (const auto& [k, v] : report.metadata) out += "- " + k + ": " + md_cell(v) + "\n";
        if (!report.metadata.empty()) out += "\n";
        out += "## Accuracy by category\n\n| Category | Correct | Runs | Accuracy |\n|---|---:|---:|---:|\n";
        for (const auto& [name, c] : cats) {
            out += "| " + name + " | " + std::to_string(c.correct) + " | " + std::to_string(c.total) + " | " +
                   format_double(c.accuracy()) + " |\n";
        }
        out += "\n## Problems\n\n| Problem | Category | Correct | Runs | Accuracy | Mean attempts | Reference |\n"
               "|---|---|---:|---:|---:|---:|---|\n";
        for (const auto& p : report.problems) {
            out += "| " + md_cell(p.id) + " | " + category_name(p.category) + " | " + std::to_string(p.correct_runs) +
                   " | " + std::to_string(p.total_runs) + " | " + format_double(p.accuracy()) + " | " +
                   format_double(p.mean_attempts) + " | " + (p.sanity ? (*p.sanity ? "pass" : "fail") : "-") + " |\n";
        }
        return out;
    }
    }
    return {};
}

}  // namespace prolite
