// SPDX-License-Identifier: Apache-2.0
#include "prolite/reader.hpp"

#include <cctype>
#include <unordered_map>

namespace prolite {

namespace {

bool is_symbol_char(char c) {
    switch (c) {
    case '+': case '-': case '*': case '/': case '\\': case '^': case '<': case '>':
    case '=': case '~': case ':': case '.': case '?': case '@': case '#': case '&': case '$':
        return true;
    default:
        return false;
    }
}

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            bool layout = skip_layout();
            Token tok;
            tok.layout_before = layout || out.empty();
            tok.comments = std::move(pending_comments_);
            pending_comments_.clear();
            tok.pos = here();
            if (at_end()) {
                tok.kind = TokenKind::Eof;
                out.push_back(std::move(tok));
                return out;
            }
            lex_one(tok);
            if (tok.kind == TokenKind::Punct && tok.text == "(" && !tok.layout_before && !out.empty()) {
                const Token& prev = out.back();
                // `{}` and `[]` written as two punctuation tokens also take functional notation
                const bool empty_pair = out.size() >= 2 && prev.kind == TokenKind::Punct && !prev.layout_before &&
                                        out[out.size() - 2].kind == TokenKind::Punct &&
                                        ((prev.text == "}" && out[out.size() - 2].text == "{") ||
                                         (prev.text == "]" && out[out.size() - 2].text == "["));
                tok.open_ct = prev.kind == TokenKind::Atom || prev.kind == TokenKind::Symbol || empty_pair;
            }
            out.push_back(std::move(tok));
        }
    }

private:
    bool at_end() const { return i_ >= src_.size(); }
    char peek(std::size_t k = 0) const { return i_ + k < src_.size() ? src_[i_ + k] : '\0'; }
    SourcePos here() const { return {line_, col_}; }

    char advance() {
        char c = src_[i_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    [[noreturn]] void fail(SourcePos pos, const std::string& msg) const {
        throw SyntaxError(ErrorKind::Lex, pos, msg);
    }

    bool skip_layout() {
        bool any = false;
        while (!at_end()) {
            char c = peek();
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
                any = true;
            } else if (c == '%') {
                std::size_t start = i_ + 1;
                while (!at_end() && peek() != '\n') advance();
                pending_comments_.push_back(trim(src_.substr(start, i_ - start)));
                any = true;
            } else if (c == '/' && peek(1) == '*') {
                SourcePos pos = here();
                advance();
                advance();
                std::size_t start = i_;
                while (!at_end() && !(peek() == '*' && peek(1) == '/')) advance();
                if (at_end()) fail(pos, "unterminated block comment");
                pending_comments_.push_back(trim(src_.substr(start, i_ - start)));
                advance();
                advance();
                any = true;
            } else {
                break;
            }
        }
        return any;
    }

    void lex_one(Token& tok) {
        char c = peek();
        if (std::isdigit(static_cast<unsigned char>(c))) {
            lex_number(tok);
        } else if (c == '_' || std::isupper(static_cast<unsigned char>(c))) {
            std::size_t start = i_;
            while (!at_end() && is_alnum(peek())) advance();
            tok.kind = TokenKind::Variable;
            tok.text = std::string(src_.substr(start, i_ - start));
        } else if (std::islower(static_cast<unsigned char>(c))) {
            std::size_t start = i_;
            while (!at_end() && is_alnum(peek())) advance();
            tok.kind = TokenKind::Atom;
            tok.text = std::string(src_.substr(start, i_ - start));
        } else if (c == '\'') {
            tok.kind = TokenKind::Atom;
            tok.text = lex_quoted('\'');
        } else if (c == '"') {
            tok.kind = TokenKind::String;
            tok.text = lex_quoted('"');
        } else if (c == '(' || c == ')' || c == '[' || c == ']' || c == '{' || c == '}' || c == ',' || c == '|') {
            advance();
            tok.kind = TokenKind::Punct;
            tok.text = std::string(1, c);
            if (c == '|' && peek() == '|') {
                advance();
                tok.kind = TokenKind::Symbol;
                tok.text = "||";
            }
        } else if (c == '!' || c == ';') {
            advance();
            tok.kind = TokenKind::Atom;
            tok.text = std::string(1, c);
        } else if (is_symbol_char(c)) {
            if (c == '.' && (i_ + 1 >= src_.size() || std::isspace(static_cast<unsigned char>(peek(1))) ||
                             peek(1) == '%')) {
                advance();
                tok.kind = TokenKind::End;
                tok.text = ".";
                return;
            }
            std::size_t start = i_;
            while (!at_end() && is_symbol_char(peek())) advance();
            tok.kind = TokenKind::Symbol;
            tok.text = std::string(src_.substr(start, i_ - start));
        } else {
            fail(here(), std::string("illegal character '") + c + "'");
        }
    }

    void lex_number(Token& tok) {
        std::size_t start = i_;
        if (peek() == '0' && peek(1) == '\'' && i_ + 2 < src_.size()) {
            advance();
            advance();
            char ch = advance();
            if (ch == '\\') ch = escape(advance());
            tok.kind = TokenKind::Integer;
            tok.text = std::to_string(static_cast<unsigned char>(ch));
            return;
        }
        if (peek() == '0' && (peek(1) == 'x' || peek(1) == 'o' || peek(1) == 'b')) {
            char radix_ch = peek(1);
            int radix = radix_ch == 'x' ? 16 : (radix_ch == 'o' ? 8 : 2);
            auto valid = [radix](char d) {
                if (radix == 16) return std::isxdigit(static_cast<unsigned char>(d)) != 0;
                return d >= '0' && d < static_cast<char>('0' + radix);
            };
            if (valid(peek(2))) {
                advance();
                advance();
                BigInt value = 0;
                while (!at_end() && valid(peek())) {
                    char d = advance();
                    int digit = std::isdigit(static_cast<unsigned char>(d))
                                    ? d - '0'
                                    : std::tolower(static_cast<unsigned char>(d)) - 'a' + 10;
                    value = value * radix + digit;
                }
                tok.kind = TokenKind::Integer;
                tok.text = value.str();
                return;
            }
        }
        while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) advance();
        bool decimal = false;
        if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
            decimal = true;
            advance();
            while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) advance();
        }
        if ((peek() == 'e' || peek() == 'E') &&
            (std::isdigit(static_cast<unsigned char>(peek(1))) ||
             ((peek(1) == '+' || peek(1) == '-') && std::isdigit(static_cast<unsigned char>(peek(2)))))) {
            decimal = true;
            advance();
            if (peek() == '+' || peek() == '-') advance();
            while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) advance();
        }
        tok.kind = decimal ? TokenKind::Decimal : TokenKind::Integer;
        tok.text = std::string(src_.substr(start, i_ - start));
    }

    static char escape(char c) {
        switch (c) {
        case 'n': return '\n';
        case 't': return '\t';
        case '\\': return '\\';
        case '"': return '"';
        case '\'': return '\'';
        case '`': return '`';
        default: return c;
        }
    }

    std::string lex_quoted(char quote) {
        SourcePos pos = here();
        advance();
        std::string out;
        while (true) {
            if (at_end()) fail(pos, "unterminated quoted text");
            char c = advance();
            if (c == quote) {
                if (peek() == quote) {
                    advance();
                    out.push_back(quote);
                    continue;
                }
                return out;
            }
            if (c == '\\') {
                if (at_end()) fail(pos, "unterminated quoted text");
                char e = advance();
                if (e == '\n') continue;  // line continuation
                out.push_back(escape(e));
                continue;
            }
            out.push_back(c);
        }
    }

    std::string_view src_;
    std::size_t i_ = 0;
    int line_ = 1;
    int col_ = 1;
    std::vector<std::string> pending_comments_;
};

Rational parse_decimal(const std::string& text) {
    std::size_t epos = text.find_first_of("eE");
    std::string mant = text.substr(0, epos);
    long exponent = 0;
    if (epos != std::string::npos) exponent = std::stol(text.substr(epos + 1));
    std::size_t dot = mant.find('.');
    std::string digits = mant;
    if (dot != std::string::npos) {
        digits = mant.substr(0, dot) + mant.substr(dot + 1);
        exponent -= static_cast<long>(mant.size() - dot - 1);
    }
    BigInt num = parse_bigint(digits);
    BigInt scale = 1;
    for (long k = 0; k < (exponent < 0 ? -exponent : exponent); ++k) scale *= 10;
    if (exponent >= 0) return Rational(num * scale);
    return Rational::normalize(num, scale);
}

class Parser {
public:
    Parser(std::span<const Token> tokens, const OpTable& ops, std::size_t start)
        : toks_(tokens), ops_(ops), i_(start) {}

    ParsedTerm parse_top(int max_priority) {
        Term t = parse(max_priority).first;
        ParsedTerm out;
        out.term = std::move(t);
        out.var_names = std::move(names_);
        out.var_count = next_var_;
        return out;
    }

    std::size_t cursor() const { return i_; }
    const Token& peek(std::size_t k = 0) const {
        std::size_t j = i_ + k;
        return j < toks_.size() ? toks_[j] : toks_.back();
    }

private:
    [[noreturn]] void fail(const Token& tok, const std::string& expected) const {
        std::string found = tok.kind == TokenKind::Eof ? "end of input"
                            : tok.kind == TokenKind::End ? "'.'"
                                                         : "'" + tok.text + "'";
        throw SyntaxError(ErrorKind::Parse, tok.pos, "expected " + expected + ", found " + found);
    }

    const Token& next() {
        const Token& t = peek();
        if (i_ < toks_.size() - 1) ++i_;
        return t;
    }

    bool is_punct(const Token& t, const char* p) const { return t.kind == TokenKind::Punct && t.text == p; }

    void expect_punct(const char* p) {
        if (!is_punct(peek(), p)) fail(peek(), std::string("'") + p + "'");
        next();
    }

    static bool is_name(const Token& t) { return t.kind == TokenKind::Atom || t.kind == TokenKind::Symbol; }

    // A token that cannot begin a term means a preceding prefix operator is an atom.
    bool cannot_start_term(const Token& t) const {
        if (t.kind == TokenKind::End || t.kind == TokenKind::Eof) return true;
        if (t.kind == TokenKind::Punct) return t.text == ")" || t.text == "]" || t.text == "}" || t.text == "," ||
                                               t.text == "|";
        if (is_name(t)) {
            const Token& after = peek(1);
            bool functional = is_punct(after, "(") && after.open_ct;
            return ops_.infix(t.text).has_value() && !ops_.prefix(t.text).has_value() && !functional;
        }
        return false;
    }

    Term variable(const std::string& name) {
        if (name == "_") return Term::var(next_var_++);
        for (const auto& [n, id] : names_) {
            if (n == name) return Term::var(id);
        }
        VarId id = next_var_++;
        names_.emplace_back(name, id);
        return Term::var(id);
    }

    void check_hash_operator(const Token& tok) const {
        if (tok.kind == TokenKind::Symbol && tok.text.size() > 1 && tok.text[0] == '#' && !ops_.is_op(tok.text)) {
            throw SyntaxError(ErrorKind::Parse, tok.pos, "unknown operator '" + tok.text + "'");
        }
    }

    std::pair<Term, int> parse_primary(int max) {
        const Token& tok = peek();
        switch (tok.kind) {
        case TokenKind::Integer:
            next();
            return {Term::integer(parse_bigint(tok.text)), 0};
        case TokenKind::Decimal:
            next();
            return {Term::number(parse_decimal(tok.text)), 0};
        case TokenKind::Variable: {
            next();
            return {variable(tok.text), 0};
        }
        case TokenKind::String:
            next();
            return {Term::atom(tok.text), 0};
        case TokenKind::Punct:
            return parse_punct(tok);
        case TokenKind::Atom:
        case TokenKind::Symbol:
            return parse_name(max);
        case TokenKind::End:
        case TokenKind::Eof:
            break;
        }
        fail(tok, "a term");
    }

    std::pair<Term, int> parse_punct(const Token& tok) {
        if (tok.text == "(") {
            next();
            Term t = parse(1200).first;
            expect_punct(")");
            return {t, 0};
        }
        if (tok.text == "[") {
            next();
            if (is_punct(peek(), "]")) {
                next();
                if (is_punct(peek(), "(") && peek().open_ct) return {functional("[]"), 0};
                return {Term::nil(), 0};
            }
            std::vector<Term> items;
            items.push_back(parse(999).first);
            while (is_punct(peek(), ",")) {
                next();
                items.push_back(parse(999).first);
            }
            Term tail = Term::nil();
            if (is_punct(peek(), "|")) {
                next();
                tail = parse(999).first;
            }
            expect_punct("]");
            return {Term::list(items, tail), 0};
        }
        if (tok.text == "{") {
            next();
            if (is_punct(peek(), "}")) {
                next();
                if (is_punct(peek(), "(") && peek().open_ct) return {functional("{}"), 0};
                return {Term::atom("{}"), 0};
            }
            Term inner = parse(1200).first;
            expect_punct("}");
            return {Term::compound("{}", {inner}), 0};
        }
        fail(tok, "a term");
    }

    /// Arguments of name(...); the cursor is on the opening parenthesis.
    Term functional(const std::string& name) {
        next();
        std::vector<Term> args;
        args.push_back(parse(999).first);
        while (is_punct(peek(), ",")) {
            next();
            args.push_back(parse(999).first);
        }
        expect_punct(")");
        return Term::compound(name, std::move(args));
    }

    std::pair<Term, int> parse_name(int max) {
        const Token& tok = next();
        const std::string& name = tok.text;
        const Token& after = peek();

        if (name == "-" && !after.layout_before &&
            (after.kind == TokenKind::Integer || after.kind == TokenKind::Decimal)) {
            next();
            Rational v = after.kind == TokenKind::Integer ? Rational(parse_bigint(after.text)) : parse_decimal(after.text);
            return {Term::number(-v), 0};
        }
        if (is_punct(after, "(") && after.open_ct) return {functional(name), 0};
        check_hash_operator(tok);
        if (tok.kind != TokenKind::Atom || tok.text != "[]") {
            if (auto pre = ops_.prefix(name); pre && !cannot_start_term(after)) {
                int p = std::min(pre->priority, max);
                int arg_max = pre->type == OpType::fy ? p : p - 1;
                Term operand = parse(arg_max).first;
                return {Term::compound(name, {operand}), p};
            }
        }
        int prec = 0;
        if (ops_.is_op(name)) {
            // a bare operator atom
            prec = 0;
        }
        return {Term::atom(name), prec};
    }

    static Term make_infix(const std::string& name, Term left, Term right) {
        if (name == "rdiv" && left.is_int() && right.is_int()) {
            BigInt n = left.int_value();
            BigInt d = right.int_value();
            if (d > 1) {
                Rational r = Rational::normalize(n, d);
                if (r.den() == d) return Term::number(r);
            }
        }
        return Term::compound(name, {std::move(left), std::move(right)});
    }

    std::pair<Term, int> parse(int max) {
        auto [left, left_prec] = parse_primary(max);
        while (true) {
            const Token& tok = peek();
            std::string name;
            if (is_name(tok)) {
                name = tok.text;
            } else if (is_punct(tok, ",")) {
                name = ",";
            } else if (is_punct(tok, "|")) {
                name = "|";
            } else {
                break;
            }
            check_hash_operator(tok);
            if (auto inf = ops_.infix(name)) {
                int p = inf->priority;
                if (p > max) break;
                int left_max = inf->type == OpType::yfx ? p : p - 1;
                int right_max = inf->type == OpType::xfy ? p : p - 1;
                if (left_prec > left_max) {
                    throw SyntaxError(ErrorKind::OperatorClash, tok.pos,
                                      "operator priority clash at '" + name + "'");
                }
                next();
                Term right = parse(right_max).first;
                left = make_infix(name == "|" ? ";" : name, std::move(left), std::move(right));
                left_prec = p;
                continue;
            }
            if (auto post = ops_.postfix(name)) {
                int p = post->priority;
                if (p > max) break;
                int left_max = post->type == OpType::yf ? p : p - 1;
                if (left_prec > left_max) {
                    throw SyntaxError(ErrorKind::OperatorClash, tok.pos,
                                      "operator priority clash at '" + name + "'");
                }
                next();
                left = Term::compound(name, {std::move(left)});
                left_prec = p;
                continue;
            }
            break;
        }
        return {left, left_prec};
    }

    std::span<const Token> toks_;
    const OpTable& ops_;
    std::size_t i_;
    std::vector<std::pair<std::string, VarId>> names_;
    VarId next_var_ = 0;
};

}  // namespace

std::vector<Token> tokenize(std::string_view source) { return Lexer(source).run(); }

const OpTable& OpTable::standard() {
    static const OpTable table = [] {
        OpTable t;
        t.add(":-", 1200, OpType::xfx);
        t.add("-->", 1200, OpType::xfx);
        t.add(":-", 1200, OpType::fx);
        t.add("?-", 1200, OpType::fx);
        t.add("dynamic", 1150, OpType::fx);
        t.add("discontiguous", 1150, OpType::fx);
        t.add(";", 1100, OpType::xfy);
        t.add("|", 1100, OpType::xfy);
        t.add("->", 1050, OpType::xfy);
        t.add(",", 1000, OpType::xfy);
        t.add("\\+", 900, OpType::fy);
        for (const char* op : {"=", "\\=", "==", "\\==", "@<", "@>", "@=<", "@>=", "=..", "is", "=:=", "=\\=", "<",
                               ">", "=<", ">=", "#=", "#\\=", "#<", "#>", "#=<", "#>=", "in", "ins"}) {
            t.add(op, 700, OpType::xfx);
        }
        t.add(":", 200, OpType::xfy);
        t.add("..", 450, OpType::xfx);
        for (const char* op : {"+", "-", "/\\", "\\/", "xor"}) t.add(op, 500, OpType::yfx);
        for (const char* op : {"*", "/", "//", "mod", "rem", "div", "rdiv", "<<", ">>"}) t.add(op, 400, OpType::yfx);
        t.add("**", 200, OpType::xfx);
        t.add("^", 200, OpType::xfy);
        t.add("-", 200, OpType::fy);
        t.add("+", 200, OpType::fy);
        t.add("\\", 200, OpType::fy);
        return t;
    }();
    return table;
}

void OpTable::add(std::string name, int priority, OpType type) {
    switch (type) {
    case OpType::xfx:
    case OpType::xfy:
    case OpType::yfx:
        infix_[std::move(name)] = {priority, type};
        break;
    case OpType::fy:
    case OpType::fx:
        prefix_[std::move(name)] = {priority, type};
        break;
    case OpType::xf:
    case OpType::yf:
        postfix_[std::move(name)] = {priority, type};
        break;
    }
}

std::optional<OpDef> OpTable::infix(const std::string& name) const {
    auto it = infix_.find(name);
    if (it == infix_.end()) return std::nullopt;
    return it->second;
}

std::optional<OpDef> OpTable::prefix(const std::string& name) const {
    auto it = prefix_.find(name);
    if (it == prefix_.end()) return std::nullopt;
    return it->second;
}

std::optional<OpDef> OpTable::postfix(const std::string& name) const {
    auto it = postfix_.find(name);
    if (it == postfix_.end()) return std::nullopt;
    return it->second;
}

bool OpTable::is_op(const std::string& name) const {
    return infix_.count(name) || prefix_.count(name) || postfix_.count(name);
}

ParsedTerm parse_term(std::span<const Token> tokens, const OpTable& ops, int max_priority, std::size_t* cursor) {
    if (tokens.empty()) throw SyntaxError(ErrorKind::Parse, {}, "expected a term, found end of input");
    Parser p(tokens, ops, cursor ? *cursor : 0);
    ParsedTerm out = p.parse_top(max_priority);
    if (cursor) *cursor = p.cursor();
    return out;
}

ParsedTerm read_term(std::string_view text, const OpTable& ops) {
    auto tokens = tokenize(text);
    std::size_t cursor = 0;
    ParsedTerm out = parse_term(tokens, ops, 1200, &cursor);
    const Token* tok = &tokens[cursor];
    if (tok->kind == TokenKind::End) tok = &tokens[++cursor];
    if (tok->kind != TokenKind::Eof) {
        throw SyntaxError(ErrorKind::Parse, tok->pos, "expected end of term, found '" + tok->text + "'");
    }
    return out;
}

void flatten_conjunction(const Term& body, std::vector<Term>& out) {
    const Term* cur = &body;
    while (cur->is_functor(",", 2)) {
        flatten_conjunction(cur->arg(0), out);
        cur = &cur->arg(1);
    }
    out.push_back(*cur);
}

Program parse_program(std::string_view source, const OpTable& ops) {
    auto tokens = tokenize(source);
    Program program;
    std::size_t cursor = 0;
    while (tokens[cursor].kind != TokenKind::Eof) {
        for (const auto& c : tokens[cursor].comments) program.comments.push_back(c);
        const Token& start = tokens[cursor];
        ParsedTerm pt = parse_term(tokens, ops, 1200, &cursor);
        const Token& end = tokens[cursor];
        if (end.kind != TokenKind::End) {
            std::string found = end.kind == TokenKind::Eof ? "end of input" : "'" + end.text + "'";
            throw SyntaxError(ErrorKind::Parse, end.pos, "expected '.' after clause, found " + found);
        }
        ++cursor;
        const Term& t = pt.term;
        if (t.is_functor(":-", 1) || t.is_functor("?-", 1)) {
            program.directives.push_back(t.arg(0));
            continue;
        }
        Clause clause;
        clause.var_count = pt.var_count;
        if (t.is_functor(":-", 2)) {
            clause.head = t.arg(0);
            flatten_conjunction(t.arg(1), clause.body);
        } else {
            clause.head = t;
        }
        if (!clause.head.is_callable()) {
            throw SyntaxError(ErrorKind::Parse, start.pos, "clause head is not callable");
        }
        program.clauses.push_back(std::move(clause));
    }
    for (const auto& c : tokens[cursor].comments) program.comments.push_back(c);
    return program;
}

}  // namespace prolite
