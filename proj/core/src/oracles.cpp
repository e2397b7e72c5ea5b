// SPDX-License-Identifier: Apache-2.0
// Reference oracles. They share no solving code with the engine or its constraint stores.
#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "prolite/harness.hpp"
#include "prolite/reader.hpp"

namespace prolite {

// ---------------------------------------------------------------- navigate

namespace {

struct NavPattern {
    NavTemplate kind;
    const char* prefix;  // text before the count, or the whole sentence for turns
    const char* suffix;  // text after "step(s)"
};

constexpr NavPattern kNavPatterns[] = {
    {NavTemplate::TakeSteps, "Take", ""},          {NavTemplate::Forward, "Take", " forward"},
    {NavTemplate::Backward, "Take", " backward"},  {NavTemplate::Left, "Take", " left"},
    {NavTemplate::Right, "Take", " right"},        {NavTemplate::TurnLeft, "Turn left", nullptr},
    {NavTemplate::TurnRight, "Turn right", nullptr}, {NavTemplate::TurnAround, "Turn around", nullptr},
    {NavTemplate::AlwaysFaceForward, "Always face forward", nullptr},
};

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::string render_instruction(const NavStep& step) {
    for (const auto& p : kNavPatterns) {
        if (p.kind != step.kind) continue;
        if (!p.suffix) return std::string(p.prefix) + ".";
        return std::string(p.prefix) + " " + std::to_string(step.steps) + (step.steps == 1 ? " step" : " steps") +
               p.suffix + ".";
    }
    throw std::logic_error("unhandled instruction template");
}

NavStep parse_instruction(std::string_view raw) {
    std::string text = trim(raw);
    if (!text.empty() && text.back() == '.') text.pop_back();
    std::string lower;
    for (char c : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (lower == "turn left") return {NavTemplate::TurnLeft, 0};
    if (lower == "turn right") return {NavTemplate::TurnRight, 0};
    if (lower == "turn around") return {NavTemplate::TurnAround, 0};
    if (lower == "always face forward") return {NavTemplate::AlwaysFaceForward, 0};
    std::istringstream in(lower);
    std::string take, unit, dir;
    long long n = -1;
    if (!(in >> take >> n >> unit) || take != "take" || n < 0 || (unit != "steps" && unit != "step")) {
        throw UnknownInstruction(text);
    }
    in >> dir;
    std::string rest;
    if (in >> rest) throw UnknownInstruction(text);
    const int steps = static_cast<int>(n);
    if (dir.empty()) return {NavTemplate::TakeSteps, steps};
    if (dir == "forward") return {NavTemplate::Forward, steps};
    if (dir == "backward") return {NavTemplate::Backward, steps};
    if (dir == "left") return {NavTemplate::Left, steps};
    if (dir == "right") return {NavTemplate::Right, steps};
    throw UnknownInstruction(text);
}

std::vector<NavStep> parse_instructions(std::string_view text) {
    std::vector<NavStep> out;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('.', start);
        if (end == std::string_view::npos) end = text.size();
        std::string part = trim(text.substr(start, end - start));
        if (!part.empty()) out.push_back(parse_instruction(part));
        start = end + 1;
    }
    return out;
}

NavState apply_instruction(NavState s, const NavStep& step) {
    static constexpr std::int64_t dx[] = {0, 1, 0, -1};
    static constexpr std::int64_t dy[] = {1, 0, -1, 0};
    auto move = [&](int dir) {
        s.x += dx[dir] * step.steps;
        s.y += dy[dir] * step.steps;
    };
    switch (step.kind) {
    case NavTemplate::TakeSteps:
    case NavTemplate::Forward: move(s.heading); break;
    case NavTemplate::Backward: move((s.heading + 2) % 4); break;
    case NavTemplate::Left: move((s.heading + 3) % 4); break;
    case NavTemplate::Right: move((s.heading + 1) % 4); break;
    case NavTemplate::TurnLeft: s.heading = (s.heading + 3) % 4; break;
    case NavTemplate::TurnRight: s.heading = (s.heading + 1) % 4; break;
    case NavTemplate::TurnAround: s.heading = (s.heading + 2) % 4; break;
    case NavTemplate::AlwaysFaceForward: break;
    }
    return s;
}

Rational navigate_oracle(const std::vector<NavStep>& steps) {
    NavState s;
    for (const NavStep& step : steps) s = apply_instruction(s, step);
    const BigInt sq = BigInt(s.x) * s.x + BigInt(s.y) * s.y;
    if (auto root = exact_isqrt(sq)) return Rational(*root);
    return Rational::from_double(std::sqrt(Rational(sq).to_double()));
}

std::string navigate_program(const std::vector<NavStep>& steps) {
    std::string facts;
    for (const NavStep& s : steps) {
        if (!facts.empty()) facts += ", ";
        switch (s.kind) {
        case NavTemplate::TakeSteps:
        case NavTemplate::Forward: facts += "forward(" + std::to_string(s.steps) + ")"; break;
        case NavTemplate::Backward: facts += "backward(" + std::to_string(s.steps) + ")"; break;
        case NavTemplate::Left: facts += "left(" + std::to_string(s.steps) + ")"; break;
        case NavTemplate::Right: facts += "right(" + std::to_string(s.steps) + ")"; break;
        case NavTemplate::TurnLeft: facts += "turn(left)"; break;
        case NavTemplate::TurnRight: facts += "turn(right)"; break;
        case NavTemplate::TurnAround: facts += "turn(around)"; break;
        case NavTemplate::AlwaysFaceForward: facts += "face_forward"; break;
        }
    }
    return "% Heading is 0 north, 1 east, 2 south, 3 west; the agent starts at (0,0) facing north.\n"
           "instructions([" + facts + "]).\n"
           "problem(Distance) :-\n"
           "    instructions(Is),\n"
           "    walk(Is, 0, 0, 0, X, Y),\n"
           "    Distance is sqrt(X * X + Y * Y).\n"
           "walk([], X, Y, _, X, Y).\n"
           "walk([I|Is], X0, Y0, H0, X, Y) :-\n"
           "    step(I, X0, Y0, H0, X1, Y1, H1),\n"
           "    walk(Is, X1, Y1, H1, X, Y).\n"
           "% Turns change only the heading.\n"
           "step(turn(left), X, Y, H0, X, Y, H) :- H is (H0 + 3) mod 4.\n"
           "step(turn(right), X, Y, H0, X, Y, H) :- H is (H0 + 1) mod 4.\n"
           "step(turn(around), X, Y, H0, X, Y, H) :- H is (H0 + 2) mod 4.\n"
           "step(face_forward, X, Y, H, X, Y, H).\n"
           "% Sideways and backward steps keep the heading.\n"
           "step(forward(N), X0, Y0, H, X, Y, H) :- move(H, N, X0, Y0, X, Y).\n"
           "step(backward(N), X0, Y0, H, X, Y, H) :- D is (H + 2) mod 4, move(D, N, X0, Y0, X, Y).\n"
           "step(left(N), X0, Y0, H, X, Y, H) :- D is (H + 3) mod 4, move(D, N, X0, Y0, X, Y).\n"
           "step(right(N), X0, Y0, H, X, Y, H) :- D is (H + 1) mod 4, move(D, N, X0, Y0, X, Y).\n"
           "move(0, N, X, Y0, X, Y) :- Y is Y0 + N.\n"
           "move(1, N, X0, Y, X, Y) :- X is X0 + N.\n"
           "move(2, N, X, Y0, X, Y) :- Y is Y0 - N.\n"
           "move(3, N, X0, Y, X, Y) :- X is X0 - N.\n";
}

std::vector<NavigateProblem> gen_navigate(std::uint64_t seed, std::size_t n) {
    if (n < 1) throw std::invalid_argument("gen_navigate needs n >= 1");
    std::mt19937_64 rng(seed);  // output sequence is fixed by the standard
    std::vector<NavigateProblem> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        NavigateProblem p;
        const std::size_t count = 2 + rng() % 7;
        std::string text;
        for (std::size_t k = 0; k < count; ++k) {
            NavStep s;
            s.kind = static_cast<NavTemplate>(rng() % 9);
            const std::uint64_t steps = 1 + rng() % 10;
            s.steps = kNavPatterns[static_cast<int>(s.kind)].suffix ? static_cast<int>(steps) : 0;
            if (!text.empty()) text += " ";
            text += render_instruction(s);
            p.steps.push_back(s);
        }
        char id[64];
        std::snprintf(id, sizeof id, "navigate-s%llu-%04zu", static_cast<unsigned long long>(seed), i);
        p.record.id = id;
        p.record.category = Category::Navigate;
        p.record.statement = "You start at the origin facing north. " + text +
                             " How far are you from the starting point, measured in a straight line?";
        p.record.gold = navigate_oracle(p.steps);
        p.record.gold_is_float = !p.record.gold.is_integer();
        p.record.reference_program = navigate_program(p.steps);
        out.push_back(std::move(p));
    }
    return out;
}

// ---------------------------------------------------------------- sum it up

std::optional<SumRule> parse_sum_rule(std::string_view text) {
    if (text == "plain") return SumRule::Plain;
    if (text == "prev_equal_clears") return SumRule::PrevEqualClears;
    if (text == "neighbor_sum_zeroes") return SumRule::NeighborSumZeroes;
    return std::nullopt;
}

std::int64_t sum_it_up_oracle(const std::vector<std::int64_t>& initial, const std::vector<std::int64_t>& waitlist,
                              SumRule rule) {
    if (initial.size() != 10) throw std::invalid_argument("sum it up needs exactly 10 squares");
    std::vector<std::int64_t> sq = initial;
    for (std::int64_t w : waitlist) {
        auto zero = std::find(sq.begin(), sq.end(), 0);
        if (zero == sq.end()) throw NoZeroSquare();
        const std::size_t i = static_cast<std::size_t>(zero - sq.begin());
        // squares outside the board are absent: they never match and count as 0 in neighbour sums
        const bool has_prev = i > 0;
        const bool has_next = i + 1 < sq.size();
        if (rule == SumRule::PrevEqualClears && has_prev && sq[i - 1] == w) continue;
        if (rule == SumRule::NeighborSumZeroes) {
            const std::int64_t around = (has_prev ? sq[i - 1] : 0) + (has_next ? sq[i + 1] : 0);
            if (around == w) {
                if (has_prev) sq[i - 1] = 0;
                if (has_next) sq[i + 1] = 0;
                continue;
            }
        }
        sq[i] = w;
    }
    std::int64_t total = 0;
    for (std::int64_t v : sq) total += v;
    return total;
}

// ---------------------------------------------------------------- cinema

std::int64_t cinema_oracle(int rows, int cols, const std::vector<std::pair<int, int>>& pre_seated, FillOrder) {
    if (rows <= 0 || cols <= 0) throw std::invalid_argument("cinema dimensions must be positive");
    std::vector<std::vector<bool>> seat(static_cast<std::size_t>(rows) + 2,
                                        std::vector<bool>(static_cast<std::size_t>(cols) + 2, false));
    std::int64_t count = 0;
    for (auto [r, c] : pre_seated) {
        if (r < 1 || r > rows || c < 1 || c > cols) throw std::invalid_argument("pre-seated cell out of range");
        if (!seat[r][c]) ++count;
        seat[r][c] = true;
    }
    for (int r = 1; r <= rows; ++r) {
        for (int c = 1; c <= cols; ++c) {
            if (seat[r][c]) continue;
            if (seat[r - 1][c] || seat[r + 1][c] || seat[r][c - 1] || seat[r][c + 1]) continue;
            seat[r][c] = true;
            ++count;
        }
    }
    return count;
}

// ---------------------------------------------------------------- linear systems

namespace {

struct Affine {
    std::map<std::string, Rational> coeffs;
    Rational constant;
};

class AffineReader {
public:
    explicit AffineReader(const ParsedTerm& pt) {
        for (const auto& [name, id] : pt.var_names) names_[id] = name;
    }

    Affine read(const Term& t) const {
        switch (t.kind()) {
        case TermKind::Int:
        case TermKind::Rat: return {{}, t.number_value()};
        case TermKind::Var: {
            auto it = names_.find(t.var_id());
            std::string name = it == names_.end() ? "_" + std::to_string(t.var_id()) : it->second;
            return {{{name, Rational(1)}}, Rational(0)};
        }
        case TermKind::Atom: return {{{t.name(), Rational(1)}}, Rational(0)};
        case TermKind::Compound: break;
        default: throw std::invalid_argument("unsupported term in equation");
        }
        const std::string& f = t.name();
        if (t.arity() == 1 && f == "-") return scale(read(t.arg(0)), Rational(-1));
        if (t.arity() == 1 && f == "+") return read(t.arg(0));
        if (t.arity() != 2) throw std::invalid_argument("unsupported operator " + f);
        Affine a = read(t.arg(0));
        Affine b = read(t.arg(1));
        if (f == "+") return add(a, b, Rational(1));
        if (f == "-") return add(a, b, Rational(-1));
        if (f == "*") {
            if (a.coeffs.empty()) return scale(b, a.constant);
            if (b.coeffs.empty()) return scale(a, b.constant);
            throw std::invalid_argument("equation is not linear");
        }
        if (f == "/") {
            if (!b.coeffs.empty() || b.constant.is_zero()) throw std::invalid_argument("division by a non-constant");
            return scale(a, Rational(1) / b.constant);
        }
        throw std::invalid_argument("unsupported operator " + f);
    }

private:
    static Affine scale(Affine a, const Rational& k) {
        for (auto& [_, c] : a.coeffs) c *= k;
        a.constant *= k;
        return a;
    }
    static Affine add(Affine a, const Affine& b, const Rational& sign) {
        for (const auto& [v, c] : b.coeffs) a.coeffs[v] += c * sign;
        a.constant += b.constant * sign;
        return a;
    }

    std::map<VarId, std::string> names_;
};

}  // namespace

std::map<std::string, Rational> linear_gold_oracle(const std::vector<std::string>& equations) {
    if (equations.empty()) return {};
    std::string joined;
    for (const auto& e : equations) {
        if (!joined.empty()) joined += ", ";
        joined += "(" + e + ")";
    }
    ParsedTerm pt = read_term(joined);
    std::vector<Term> parts;
    flatten_conjunction(pt.term, parts);
    AffineReader reader(pt);

    std::vector<Affine> rows;
    std::set<std::string> names;
    for (const Term& eq : parts) {
        if (!eq.is_compound() || eq.arity() != 2 || (eq.name() != "=" && eq.name() != "=:=" && eq.name() != "#=")) {
            throw std::invalid_argument("expected an equation");
        }
        Affine l = reader.read(eq.arg(0));
        Affine r = reader.read(eq.arg(1));
        for (const auto& [v, c] : r.coeffs) l.coeffs[v] -= c;
        l.constant -= r.constant;  // row: sum coeffs*x + constant = 0
        for (const auto& [v, _] : l.coeffs) names.insert(v);
        rows.push_back(std::move(l));
    }
    const std::vector<std::string> vars(names.begin(), names.end());
    const std::size_t n = vars.size();
    const std::size_t m = rows.size();
    // augmented matrix [A | b] with A x = b
    std::vector<std::vector<Rational>> a(m, std::vector<Rational>(n + 1));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            auto it = rows[i].coeffs.find(vars[j]);
            if (it != rows[i].coeffs.end()) a[i][j] = it->second;
        }
        a[i][n] = -rows[i].constant;
    }
    std::size_t rank = 0;
    std::vector<std::size_t> pivot_col;
    for (std::size_t col = 0; col < n && rank < m; ++col) {
        std::size_t p = rank;
        while (p < m && a[p][col].is_zero()) ++p;
        if (p == m) continue;
        std::swap(a[p], a[rank]);
        const Rational inv = Rational(1) / a[rank][col];
        for (auto& x : a[rank]) x *= inv;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == rank || a[i][col].is_zero()) continue;
            const Rational f = a[i][col];
            for (std::size_t j = 0; j <= n; ++j) a[i][j] -= f * a[rank][j];
        }
        pivot_col.push_back(col);
        ++rank;
    }
    for (std::size_t i = rank; i < m; ++i) {
        if (!a[i][n].is_zero()) throw Inconsistent("system has no solution");
    }
    if (rank < n) throw Singular("system does not determine every variable");
    std::map<std::string, Rational> out;
    for (std::size_t i = 0; i < rank; ++i) out[vars[pivot_col[i]]] = a[i][n];
    return out;
}

// ---------------------------------------------------------------- brute-force CSP

namespace {

class CspEvaluator {
public:
    CspEvaluator(const CspInstance& inst, std::string text) : pt_(read_term(text)) {
        index_.assign(pt_.var_count, -1);
        for (const auto& [name, id] : pt_.var_names) {
            for (std::size_t i = 0; i < inst.vars.size(); ++i) {
                if (inst.vars[i].name == name) index_[id] = static_cast<int>(i);
            }
            if (index_[id] < 0) throw std::invalid_argument("constraint mentions undeclared variable " + name);
        }
    }

    const Term& term() const { return pt_.term; }

    bool holds(const Term& t, const std::vector<std::int64_t>& v) const {
        if (t.is_atom("true")) return true;
        if (t.is_atom("fail") || t.is_atom("false")) return false;
        if (!t.is_compound()) throw std::invalid_argument("not a constraint");
        const std::string& f = t.name();
        if (t.arity() == 1 && f == "\\+") return !holds(t.arg(0), v);
        if (t.arity() != 2) throw std::invalid_argument("unsupported constraint " + f);
        if (f == ",") return holds(t.arg(0), v) && holds(t.arg(1), v);
        if (f == ";") return holds(t.arg(0), v) || holds(t.arg(1), v);
        if (f == "in") {
            const Term& range = t.arg(1);
            if (!range.is_functor("..", 2)) throw std::invalid_argument("unsupported domain");
            const std::int64_t x = eval(t.arg(0), v);
            return x >= eval(range.arg(0), v) && x <= eval(range.arg(1), v);
        }
        const std::int64_t a = eval(t.arg(0), v);
        const std::int64_t b = eval(t.arg(1), v);
        if (f == "#=" || f == "=:=" || f == "=") return a == b;
        if (f == "#\\=" || f == "=\\=" || f == "\\=") return a != b;
        if (f == "#<" || f == "<") return a < b;
        if (f == "#>" || f == ">") return a > b;
        if (f == "#=<" || f == "=<") return a <= b;
        if (f == "#>=" || f == ">=") return a >= b;
        throw std::invalid_argument("unsupported constraint " + f);
    }

    std::int64_t eval(const Term& t, const std::vector<std::int64_t>& v) const {
        if (t.is_var()) return v[static_cast<std::size_t>(index_[t.var_id()])];
        if (t.is_int()) {
            auto x = to_int64(t.int_value());
            if (!x) throw std::invalid_argument("integer out of range");
            return *x;
        }
        if (!t.is_compound()) throw std::invalid_argument("unsupported expression");
        const std::string& f = t.name();
        if (t.arity() == 1) {
            const std::int64_t x = eval(t.arg(0), v);
            if (f == "-") return -x;
            if (f == "+") return x;
            if (f == "abs") return x < 0 ? -x : x;
            throw std::invalid_argument("unsupported function " + f);
        }
        if (t.arity() != 2) throw std::invalid_argument("unsupported function " + f);
        const std::int64_t x = eval(t.arg(0), v);
        const std::int64_t y = eval(t.arg(1), v);
        if (f == "+") return x + y;
        if (f == "-") return x - y;
        if (f == "*") return x * y;
        if (f == "min") return std::min(x, y);
        if (f == "max") return std::max(x, y);
        if (y == 0 && (f == "mod" || f == "rem" || f == "//")) throw DivByZero();
        if (f == "mod") return ((x % y) + y) % y;
        if (f == "rem") return x % y;
        if (f == "//") return x / y;  // truncating, as in clp(fd)
        throw std::invalid_argument("unsupported function " + f);
    }

    struct DivByZero {};

private:
    ParsedTerm pt_;
    std::vector<int> index_;
};

template <typename Fn>
void enumerate(const CspInstance& inst, Fn on_solution) {
    double space = 1;
    for (const auto& v : inst.vars) {
        if (v.hi < v.lo) return;
        space *= static_cast<double>(v.hi - v.lo + 1);
    }
    if (space > 1e7) throw SearchSpaceTooLarge("search space of " + format_double(space) + " tuples exceeds 10^7");
    std::string text = "true";
    for (const auto& c : inst.constraints) text += ", (" + c + ")";
    // one term so all parts share variable slots: '$csp'(v(Vars...), Constraints, Answer)
    std::string all = "v(";
    for (std::size_t i = 0; i < inst.vars.size(); ++i) all += (i ? "," : "") + inst.vars[i].name;
    all += inst.vars.empty() ? "x)" : ")";
    CspEvaluator ev(inst, "'$csp'(" + all + ", (" + text + "), (" + inst.answer.value_or("0") + "))");
    const Term& constraints = ev.term().arg(1);
    const Term* answer = inst.answer ? &ev.term().arg(2) : nullptr;

    if (inst.vars.empty()) {
        std::vector<std::int64_t> v;
        if (ev.holds(constraints, v)) on_solution(v, answer ? ev.eval(*answer, v) : 0);
        return;
    }
    std::vector<std::int64_t> v;
    for (const auto& x : inst.vars) v.push_back(x.lo);
    while (true) {
        bool ok;
        try {
            ok = ev.holds(constraints, v);
        } catch (const CspEvaluator::DivByZero&) {
            ok = false;
        }
        if (ok) on_solution(v, answer ? ev.eval(*answer, v) : 0);
        std::size_t i = inst.vars.size();
        while (i > 0) {
            --i;
            if (v[i] < inst.vars[i].hi) {
                ++v[i];
                break;
            }
            v[i] = inst.vars[i].lo;
            if (i == 0) return;
        }
    }
}

}  // namespace

std::vector<std::vector<std::int64_t>> csp_brute_oracle(const CspInstance& instance) {
    std::vector<std::vector<std::int64_t>> out;
    CspInstance plain = instance;
    plain.answer.reset();
    enumerate(plain, [&](const std::vector<std::int64_t>& v, std::int64_t) { out.push_back(v); });
    return out;
}

std::vector<std::int64_t> csp_answers(const CspInstance& instance) {
    if (!instance.answer) throw std::invalid_argument("instance has no answer expression");
    std::set<std::int64_t> values;
    enumerate(instance, [&](const std::vector<std::int64_t>&, std::int64_t a) { values.insert(a); });
    return {values.begin(), values.end()};
}

CspInstance csp_instance_from_json(const nlohmann::json& j) {
    CspInstance inst;
    for (const auto& v : j.at("vars")) {
        if (v.is_array()) {
            inst.vars.push_back({v.at(0).get<std::string>(), v.at(1).get<std::int64_t>(), v.at(2).get<std::int64_t>()});
        } else {
            inst.vars.push_back({v.at("name").get<std::string>(), v.at("lo").get<std::int64_t>(),
                                 v.at("hi").get<std::int64_t>()});
        }
    }
    for (const auto& c : j.at("constraints")) inst.constraints.push_back(c.get<std::string>());
    if (j.contains("answer")) inst.answer = j.at("answer").get<std::string>();
    return inst;
}

}  // namespace prolite
