// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "prolite/engine.hpp"
#include "prolite/harness.hpp"
#include "prolite/orchestrator.hpp"
#include "prolite/writer.hpp"

namespace prolite::cli {

namespace {

namespace fs = std::filesystem;

constexpr int kOk = 0;
constexpr int kNone = 1;
constexpr int kError = 2;

/// Settings shared by subcommands. Precedence: flag > config file > default.
struct Config {
    RetryPolicy policy;
    fd::LabelStrategy label = fd::LabelStrategy::Leftmost;
    LiveConfig live;
    std::size_t workers = 1;
    std::size_t max_shots = 5;
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fd::LabelStrategy parse_strategy(const std::string& s) {
    if (s == "leftmost") return fd::LabelStrategy::Leftmost;
    if (s == "ff" || s == "first_fail") return fd::LabelStrategy::FirstFail;
    throw std::invalid_argument("unknown labeling strategy " + s + " (expected leftmost or ff)");
}

void apply_config_file(const fs::path& path, Config& cfg) {
    nlohmann::json j = nlohmann::json::parse(read_file(path));
    if (j.contains("policy")) {
        const auto& p = j.at("policy");
        cfg.policy.max_attempts = p.value("max_attempts", cfg.policy.max_attempts);
        cfg.policy.temp_start = p.value("temp_start", cfg.policy.temp_start);
        cfg.policy.temp_end = p.value("temp_end", cfg.policy.temp_end);
        cfg.policy.per_attempt_budget.max_steps = p.value("max_steps", cfg.policy.per_attempt_budget.max_steps);
        cfg.policy.per_attempt_budget.wall_timeout =
            std::chrono::milliseconds(p.value("timeout_ms", cfg.policy.per_attempt_budget.wall_timeout.count()));
    }
    if (j.contains("label_strategy")) cfg.label = parse_strategy(j.at("label_strategy").get<std::string>());
    if (j.contains("live")) {
        const auto& l = j.at("live");
        if (l.contains("api_key") || l.contains("token")) {
            throw std::invalid_argument("credentials are read from the environment only; remove them from the config");
        }
        cfg.live.base_url = l.value("base_url", cfg.live.base_url);
        cfg.live.path = l.value("path", cfg.live.path);
        cfg.live.model = l.value("model", cfg.live.model);
        cfg.live.credential_env = l.value("credential_env", cfg.live.credential_env);
        cfg.live.timeout_seconds = l.value("timeout_seconds", cfg.live.timeout_seconds);
    }
    cfg.workers = j.value("workers", cfg.workers);
    cfg.max_shots = j.value("max_shots", cfg.max_shots);
}

std::vector<std::int64_t> parse_int_list(const std::string& text) {
    std::vector<std::int64_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        const auto b = item.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        item = item.substr(b);
        std::int64_t v = std::stoll(item, &used);
        if (item.find_first_not_of(" \t", used) != std::string::npos) {
            throw std::invalid_argument("not an integer: " + item);
        }
        out.push_back(v);
    }
    return out;
}

std::string render_exact(const Rational& r) { return write_term(Term::number(r)); }

// ---------------------------------------------------------------- run

struct RunArgs {
    std::string file;
    std::string query;
    std::uint64_t max_steps = 0;
    std::int64_t timeout_ms = 0;
    std::size_t limit = 0;
    bool occurs_check = false;
    std::string labeling;
    bool no_auto_label = false;
};

/// Prints the solutions of one query; returns the number printed or throws LogicError.
std::size_t print_solutions(const Database& db, const std::string& query, const Budget& budget,
                            const EngineOptions& opts, std::size_t limit, std::ostream& out) {
    Solver solver(db, query, budget, opts);
    std::size_t count = 0;
    std::size_t printed_output = 0;
    while ((limit == 0 || count < limit) && solver.next()) {
        ++count;
        const std::string& text = solver.output();
        if (text.size() > printed_output) {
            out << text.substr(printed_output);
            printed_output = text.size();
        }
        auto answers = solver.answer_text();
        if (answers.empty()) {
            out << "true\n";
            continue;
        }
        for (std::size_t i = 0; i < answers.size(); ++i) {
            out << (i ? ", " : "") << answers[i].first << " = " << answers[i].second;
        }
        out << "\n";
    }
    if (solver.output().size() > printed_output) out << solver.output().substr(printed_output);
    if (count == 0) out << "false\n";
    return count;
}

int cmd_run(const RunArgs& a, const Config& cfg, std::istream& in, std::ostream& out, std::ostream& err) {
    Budget budget = cfg.policy.per_attempt_budget;
    if (a.max_steps) budget.max_steps = a.max_steps;
    if (a.timeout_ms) budget.wall_timeout = std::chrono::milliseconds(a.timeout_ms);
    EngineOptions opts;
    opts.occurs_check = a.occurs_check;
    opts.label_strategy = a.labeling.empty() ? cfg.label : parse_strategy(a.labeling);
    opts.auto_label = !a.no_auto_label;

    Database db;
    try {
        db = consult(parse_program(read_file(a.file)));
    } catch (const LogicError& e) {
        err << "error: " << e.what() << "\n";
        return kError;
    }
    for (const auto& w : db.warnings()) err << "warning: " << w << "\n";

    std::vector<std::string> queries;
    if (!a.query.empty()) {
        queries.push_back(a.query);
    } else {
        std::string line;
        while (std::getline(in, line)) {
            while (!line.empty() && (line.back() == ' ' || line.back() == '\r')) line.pop_back();
            if (!line.empty() && line.back() == '.') line.pop_back();
            if (line.find_first_not_of(" \t") != std::string::npos) queries.push_back(line);
        }
    }
    bool any = false;
    bool failed = false;
    for (const auto& q : queries) {
        if (queries.size() > 1 || a.query.empty()) out << "?- " << q << ".\n";
        try {
            any = print_solutions(db, q, budget, opts, a.limit, out) > 0 || any;
        } catch (const LogicError& e) {
            err << "error: " << e.what() << "\n";
            failed = true;
        }
    }
    if (failed) return kError;
    return any ? kOk : kNone;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
    std::string dataset;
    bool with_fixtures = false;
    std::string provider;
    std::size_t repeats = 1;
    std::string out_dir;
    std::vector<std::string> formats;
    bool no_sanity = false;
};

std::vector<ProblemRecord> resolve_dataset(const EvalArgs& a) {
    if (a.dataset == "fixtures") return fixtures();
    if (a.dataset.rfind("navigate:", 0) == 0) {
        std::string rest = a.dataset.substr(9);
        std::replace(rest.begin(), rest.end(), ':', ',');
        auto parts = parse_int_list(rest);
        if (parts.size() != 2 || parts[0] < 0 || parts[1] < 1) {
            throw std::invalid_argument("navigate dataset must be navigate:SEED:N with N >= 1");
        }
        std::vector<ProblemRecord> out;
        for (auto& p : gen_navigate(static_cast<std::uint64_t>(parts[0]), static_cast<std::size_t>(parts[1]))) {
            out.push_back(std::move(p.record));
        }
        if (a.with_fixtures) out.insert(out.begin(), fixtures().begin(), fixtures().end());
        return out;
    }
    return load_problems(a.dataset, a.with_fixtures);
}

std::unique_ptr<Provider> resolve_provider(const std::string& spec, const std::vector<ProblemRecord>& problems,
                                           const Config& cfg, const fs::path& transcript_dir) {
    std::map<std::string, std::string> programs;
    for (const auto& p : problems) {
        if (p.reference_program) programs[p.id] = *p.reference_program;
    }
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (kind == "scripted") {
        if (arg == "reference") return std::make_unique<ReferenceProvider>(programs);
        if (arg == "prose") {
            return std::make_unique<ScriptedProvider>(
                std::vector<std::string>{"I could not turn this problem into a program."});
        }
        if (arg.empty()) throw std::invalid_argument("scripted provider needs reference, prose or a JSON file");
        auto j = nlohmann::json::parse(read_file(arg));
        return std::make_unique<ScriptedProvider>(j.get<std::vector<std::string>>());
    }
    if (kind == "stochastic") {
        std::istringstream ss(arg);
        std::string p_text, seed_text;
        std::getline(ss, p_text, ':');
        std::getline(ss, seed_text);
        if (p_text.empty()) throw std::invalid_argument("stochastic provider needs stochastic:P[:SEED]");
        const double p = std::stod(p_text);
        const std::uint64_t seed = seed_text.empty() ? 1 : std::stoull(seed_text);
        return std::make_unique<StochasticProvider>(programs, p, seed);
    }
    if (kind == "replay") {
        if (arg.empty()) throw std::invalid_argument("replay provider needs replay:DIR");
        std::error_code ec;
        if (fs::exists(transcript_dir) && fs::equivalent(arg, transcript_dir, ec)) {
            throw std::invalid_argument("replay directory must differ from the output transcript directory");
        }
        return std::make_unique<ReplayProvider>(arg);
    }
    if (kind == "live") {
        LiveConfig live = cfg.live;
        if (!arg.empty()) live.model = arg;
        return std::make_unique<LiveProvider>(live);
    }
    throw std::invalid_argument("unknown provider " + spec +
                                " (expected scripted:reference|prose|FILE, stochastic:P[:SEED], replay:DIR, live[:MODEL])");
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

int cmd_eval(const EvalArgs& a, const Config& cfg, std::ostream& out, std::ostream& err) {
    std::vector<ProblemRecord> problems;
    std::unique_ptr<Provider> provider;
    const fs::path out_dir = a.out_dir;
    const fs::path transcripts = out_dir / "transcripts";
    try {
        problems = resolve_dataset(a);
        provider = resolve_provider(a.provider, problems, cfg, transcripts);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kError;
    }
    fs::create_directories(transcripts);
    EvalOptions opts;
    opts.workers = cfg.workers;
    opts.transcript_dir = transcripts;
    opts.sanity_lane = !a.no_sanity;
    opts.engine.label_strategy = cfg.label;
    opts.max_shots = cfg.max_shots;
    EvalReport report;
    try {
        report = evaluate(problems, *provider, cfg.policy, a.repeats, opts);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << " (transcripts written so far are kept in " << transcripts.string() << ")\n";
        return kError;
    }
    std::vector<std::string> formats = a.formats.empty() ? std::vector<std::string>{"json", "csv", "md"} : a.formats;
    for (const auto& f : formats) {
        if (f == "json") write_text(out_dir / "report.json", emit_report(report, ReportFormat::Json) + "\n");
        else if (f == "csv") write_text(out_dir / "report.csv", emit_report(report, ReportFormat::Csv));
        else if (f == "md" || f == "markdown") write_text(out_dir / "report.md", emit_report(report, ReportFormat::Markdown));
        else {
            err << "error: unknown report format " << f << "\n";
            return kError;
        }
    }
    std::string runs;
    for (const auto& r : report.runs) {
        nlohmann::ordered_json j;
        j["problem_id"] = r.problem_id;
        j["repeat"] = r.repeat;
        if (r.answer) j["answer"] = render_number(*r.answer);
        j["attempts_used"] = r.attempts_used;
        j["correct"] = r.correct;
        runs += j.dump() + "\n";
    }
    write_text(out_dir / "runs.jsonl", runs);

    std::size_t correct = 0, total = 0;
    std::map<std::string, std::pair<std::size_t, std::size_t>> cats;
    for (const auto& p : report.problems) {
        correct += p.correct_runs;
        total += p.total_runs;
        auto& c = cats[category_name(p.category)];
        c.first += p.correct_runs;
        c.second += p.total_runs;
    }
    auto acc = [](std::size_t c, std::size_t t) { return format_double(t ? static_cast<double>(c) / t : 0.0); };
    out << "accuracy " << acc(correct, total) << " (" << correct << "/" << total << ")";
    for (const auto& [name, c] : cats) out << "; " << name << " " << acc(c.first, c.second);
    out << "\n";
    for (const auto& p : report.problems) {
        if (p.sanity && !*p.sanity) err << "warning: reference program for " << p.id << " failed: " << p.sanity_detail << "\n";
    }
    return kOk;
}

// ---------------------------------------------------------------- gen-navigate

int cmd_gen_navigate(std::uint64_t seed, std::size_t n, const std::string& out_dir, std::ostream& out) {
    std::vector<ProblemRecord> records;
    for (auto& p : gen_navigate(seed, n)) records.push_back(std::move(p.record));
    fs::create_directories(out_dir);
    const fs::path path = fs::path(out_dir) / "navigate.json";
    write_text(path, problems_to_json(records));
    out << "wrote " << records.size() << " problems to " << path.string() << "\n";
    return kOk;
}

// ---------------------------------------------------------------- oracle

struct OracleArgs {
    std::string instance;
    std::vector<std::string> equations;
    std::string squares;
    std::string waitlist;
    std::string rule = "plain";
    int rows = 0;
    int cols = 0;
    std::vector<std::string> seats;
    std::string instructions;
};

int cmd_oracle(const std::string& kind, const OracleArgs& a, std::ostream& out) {
    if (kind == "csp") {
        if (a.instance.empty()) throw std::invalid_argument("--instance is required");
        CspInstance inst = csp_instance_from_json(nlohmann::json::parse(read_file(a.instance)));
        if (inst.answer) {
            auto values = csp_answers(inst);
            for (auto v : values) out << v << "\n";
            return values.empty() ? kNone : kOk;
        }
        auto sols = csp_brute_oracle(inst);
        for (const auto& s : sols) {
            for (std::size_t i = 0; i < s.size(); ++i) out << (i ? ", " : "") << inst.vars[i].name << " = " << s[i];
            out << "\n";
        }
        return sols.empty() ? kNone : kOk;
    }
    if (kind == "linear") {
        std::vector<std::string> eqs = a.equations;
        if (!a.instance.empty()) {
            auto j = nlohmann::json::parse(read_file(a.instance));
            const auto& list = j.is_object() ? j.at("equations") : j;
            for (const auto& e : list) eqs.push_back(e.get<std::string>());
        }
        if (eqs.empty()) throw std::invalid_argument("give --equation or --instance");
        for (const auto& [name, value] : linear_gold_oracle(eqs)) out << name << " = " << render_exact(value) << "\n";
        return kOk;
    }
    if (kind == "sumitup") {
        auto rule = parse_sum_rule(a.rule);
        if (!rule) throw std::invalid_argument("unknown rule " + a.rule);
        out << sum_it_up_oracle(parse_int_list(a.squares), parse_int_list(a.waitlist), *rule) << "\n";
        return kOk;
    }
    if (kind == "cinema") {
        std::vector<std::pair<int, int>> seats;
        for (const auto& s : a.seats) {
            auto rc = parse_int_list(s);
            if (rc.size() != 2) throw std::invalid_argument("--seat expects ROW,COL");
            seats.emplace_back(static_cast<int>(rc[0]), static_cast<int>(rc[1]));
        }
        out << cinema_oracle(a.rows, a.cols, seats) << "\n";
        return kOk;
    }
    if (kind == "navigate") {
        out << render_number(navigate_oracle(parse_instructions(a.instructions))) << "\n";
        return kOk;
    }
    throw std::invalid_argument("unknown oracle " + kind);
}

}  // namespace

int main(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Logic engine with finite-domain and rational constraints, multiple-try runner and evaluation harness",
                 "prolite"};
    app.require_subcommand(1);
    app.fallthrough();  // subcommands accept the global --config
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file (policy, label_strategy, live, workers, max_shots)")
        ->check(CLI::ExistingFile);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Consult a program and print the solutions of a query");
    run_cmd->add_option("file", run.file, "Program file")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("-q,--query", run.query, "Query; read one query per line from stdin when omitted");
    run_cmd->add_option("--max-steps", run.max_steps, "Inference step budget");
    run_cmd->add_option("--timeout-ms", run.timeout_ms, "Wall-clock budget in milliseconds");
    run_cmd->add_option("--limit", run.limit, "Stop after this many solutions (0 = all)");
    run_cmd->add_flag("--occurs-check", run.occurs_check, "Unify with the occurs check");
    run_cmd->add_option("--labeling", run.labeling, "Labeling strategy: leftmost or ff");
    run_cmd->add_flag("--no-auto-label", run.no_auto_label, "Leave non-ground FD answers unlabeled");

    EvalArgs ev;
    std::size_t max_attempts = 0, workers = 0, max_shots = 0;
    std::optional<double> temp_start, temp_end;
    std::uint64_t eval_steps = 0;
    std::int64_t eval_timeout = 0;
    std::string model, base_url;
    auto* eval_cmd = app.add_subcommand("eval", "Run the multiple-try pipeline over a dataset and write reports");
    eval_cmd->add_option("--dataset", ev.dataset, "fixtures, navigate:SEED:N, or a problems JSON file")->required();
    eval_cmd->add_flag("--with-fixtures", ev.with_fixtures, "Merge the built-in fixtures into the dataset");
    eval_cmd->add_option("--provider", ev.provider,
                         "scripted:reference|prose|FILE, stochastic:P[:SEED], replay:DIR, live[:MODEL]")
        ->required();
    eval_cmd->add_option("--repeats", ev.repeats, "Independent runs per problem")->check(CLI::PositiveNumber);
    eval_cmd->add_option("--out", ev.out_dir, "Output directory")->required();
    eval_cmd->add_option("--format", ev.formats, "Report formats: json csv md (default all)");
    eval_cmd->add_option("--workers", workers, "Parallel workers")->check(CLI::PositiveNumber);
    eval_cmd->add_option("--max-attempts", max_attempts, "Attempts per run")->check(CLI::PositiveNumber);
    eval_cmd->add_option("--temp-start", temp_start, "First-attempt temperature");
    eval_cmd->add_option("--temp-end", temp_end, "Last-attempt temperature");
    eval_cmd->add_option("--max-steps", eval_steps, "Per-attempt inference step budget");
    eval_cmd->add_option("--timeout-ms", eval_timeout, "Per-attempt wall-clock budget in milliseconds");
    eval_cmd->add_option("--max-shots", max_shots, "Few-shot exemplars per prompt");
    eval_cmd->add_option("--model", model, "Model name for the live provider");
    eval_cmd->add_option("--base-url", base_url, "Endpoint base URL for the live provider");
    eval_cmd->add_flag("--no-sanity", ev.no_sanity, "Skip direct checks of reference programs");

    std::uint64_t seed = 1;
    std::size_t n = 0;
    std::string gen_out;
    auto* gen_cmd = app.add_subcommand("gen-navigate", "Generate Navigate problems with oracle golds");
    gen_cmd->add_option("--seed", seed, "Generator seed");
    gen_cmd->add_option("-n", n, "Number of problems")->required()->check(CLI::PositiveNumber);
    gen_cmd->add_option("--out", gen_out, "Output directory (writes navigate.json)")->required();

    OracleArgs oa;
    std::string oracle_kind;
    auto* oracle_cmd = app.add_subcommand("oracle", "Print the gold answer computed by an independent oracle");
    oracle_cmd->add_option("kind", oracle_kind, "csp, linear, sumitup, cinema or navigate")
        ->required()
        ->check(CLI::IsMember({"csp", "linear", "sumitup", "cinema", "navigate"}));
    oracle_cmd->add_option("--instance", oa.instance, "Instance JSON file (csp, linear)");
    oracle_cmd->add_option("--equation", oa.equations, "Equation such as \"x + y = 3\" (linear, repeatable)");
    oracle_cmd->add_option("--squares", oa.squares, "Comma-separated squares (sumitup)");
    oracle_cmd->add_option("--waitlist", oa.waitlist, "Comma-separated waitlist (sumitup)");
    oracle_cmd->add_option("--rule", oa.rule, "plain, prev_equal_clears or neighbor_sum_zeroes (sumitup)");
    oracle_cmd->add_option("--rows", oa.rows, "Rows (cinema)");
    oracle_cmd->add_option("--cols", oa.cols, "Columns (cinema)");
    oracle_cmd->add_option("--seat", oa.seats, "Pre-seated ROW,COL (cinema, repeatable)");
    oracle_cmd->add_option("--instructions", oa.instructions, "Instruction sentences (navigate)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        if (const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front()) {
            err << "run '" << sub->get_name() << " --help' for usage\n";
        }
        return kError;
    }

    try {
        Config cfg;
        if (!config_path.empty()) apply_config_file(config_path, cfg);
        if (max_attempts) cfg.policy.max_attempts = max_attempts;
        if (temp_start) cfg.policy.temp_start = *temp_start;
        if (temp_end) cfg.policy.temp_end = *temp_end;
        if (eval_steps) cfg.policy.per_attempt_budget.max_steps = eval_steps;
        if (eval_timeout) cfg.policy.per_attempt_budget.wall_timeout = std::chrono::milliseconds(eval_timeout);
        if (workers) cfg.workers = workers;
        if (max_shots) cfg.max_shots = max_shots;
        if (!model.empty()) cfg.live.model = model;
        if (!base_url.empty()) cfg.live.base_url = base_url;

        if (run_cmd->parsed()) return cmd_run(run, cfg, in, out, err);
        if (eval_cmd->parsed()) {
            cfg.policy.validate();
            return cmd_eval(ev, cfg, out, err);
        }
        if (gen_cmd->parsed()) return cmd_gen_navigate(seed, n, gen_out, out);
        if (oracle_cmd->parsed()) return cmd_oracle(oracle_kind, oa, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kError;
    }
    return kError;
}

}  // namespace prolite::cli
