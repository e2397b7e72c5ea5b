// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "prolite/errors.hpp"
#include "prolite/term.hpp"

namespace prolite {

enum class TokenKind {
    Atom,      // letter-digit name or quoted name
    Variable,
    Integer,
    Decimal,
    Punct,     // ( ) [ ] { } , |
    Symbol,    // run of symbol characters such as #\= or :-
    String,    // double-quoted text, read as an atom
    End,       // clause-terminating '.'
    Eof,
};

struct Token {
    TokenKind kind;
    std::string text;       // for quoted atoms and strings: the unescaped value
    SourcePos pos;
    bool layout_before = false;     // whitespace or comment precedes the token
    bool open_ct = false;           // '(' immediately following a name (functional notation)
    std::vector<std::string> comments;  // comments seen since the previous token
};

/// Splits source text into tokens. The list always ends with an Eof token.
/// Throws SyntaxError(Lex) on an unterminated comment/quote or an illegal character.
std::vector<Token> tokenize(std::string_view source);

enum class OpType { xfx, xfy, yfx, fy, fx, xf, yf };

struct OpDef {
    int priority;
    OpType type;
};

class OpTable {
public:
    /// Standard Prolog operators plus the finite-domain and rational constraint family.
    static const OpTable& standard();

    void add(std::string name, int priority, OpType type);
    std::optional<OpDef> infix(const std::string& name) const;
    std::optional<OpDef> prefix(const std::string& name) const;
    std::optional<OpDef> postfix(const std::string& name) const;
    bool is_op(const std::string& name) const;

private:
    std::map<std::string, OpDef> infix_;
    std::map<std::string, OpDef> prefix_;
    std::map<std::string, OpDef> postfix_;
};

/// A term read from source with its variable dictionary. Variables are numbered
/// 0..var_count-1 in order of first occurrence.
struct ParsedTerm {
    Term term;
    std::vector<std::pair<std::string, VarId>> var_names;
    std::uint32_t var_count = 0;
};

/// Parses one term from `tokens` starting at `*cursor` (advanced past the term).
/// The term is terminated by an End or Eof token or by any token that cannot continue it.
ParsedTerm parse_term(std::span<const Token> tokens, const OpTable& ops, int max_priority,
                      std::size_t* cursor = nullptr);

/// Reads a single term from text; a trailing '.' is optional.
ParsedTerm read_term(std::string_view text, const OpTable& ops = OpTable::standard());

struct Program {
    std::vector<Clause> clauses;
    std::vector<Term> directives;
    std::vector<std::string> comments;  // side channel, never semantic
};

/// Parses a whole program. The first syntax error aborts with its position.
Program parse_program(std::string_view source, const OpTable& ops = OpTable::standard());

/// Splits a ','/2 conjunction into its goals.
void flatten_conjunction(const Term& body, std::vector<Term>& out);

}  // namespace prolite
