// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace prolite {

/// Error classes raised while reading or running a program. None of them are
/// catchable from inside a program; they abort the query.
enum class ErrorKind {
    Lex,
    Parse,
    OperatorClash,
    BuiltinRedefinition,
    Existence,
    Instantiation,
    Type,
    Evaluation,  // zero divisor, undefined arithmetic
    Representation,
    BudgetSteps,
    BudgetTime,
    NonLinearUnsupported,
    UnboundedDomain,
    TypeMix,
    IneqCapExceeded,
};

const char* error_kind_name(ErrorKind kind);

class LogicError : public std::runtime_error {
public:
    LogicError(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }
    bool is_budget() const { return kind_ == ErrorKind::BudgetSteps || kind_ == ErrorKind::BudgetTime; }

private:
    ErrorKind kind_;
};

struct SourcePos {
    int line = 1;
    int column = 1;
};

/// Lexical and syntax errors carry the source position.
class SyntaxError : public LogicError {
public:
    SyntaxError(ErrorKind kind, SourcePos pos, const std::string& message)
        : LogicError(kind, "line " + std::to_string(pos.line) + ", column " + std::to_string(pos.column) + ": " +
                               message),
          pos_(pos) {}

    SourcePos pos() const { return pos_; }

private:
    SourcePos pos_;
};

}  // namespace prolite
