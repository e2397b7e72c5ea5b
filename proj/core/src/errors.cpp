// SPDX-License-Identifier: Apache-2.0
#include "prolite/errors.hpp"

namespace prolite {

const char* error_kind_name(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Lex: return "lex-error";
    case ErrorKind::Parse: return "parse-error";
    case ErrorKind::OperatorClash: return "operator-clash";
    case ErrorKind::BuiltinRedefinition: return "builtin-redefinition";
    case ErrorKind::Existence: return "existence-error";
    case ErrorKind::Instantiation: return "instantiation-error";
    case ErrorKind::Type: return "type-error";
    case ErrorKind::Evaluation: return "evaluation-error";
    case ErrorKind::Representation: return "representation-error";
    case ErrorKind::BudgetSteps: return "budget-exceeded(steps)";
    case ErrorKind::BudgetTime: return "budget-exceeded(time)";
    case ErrorKind::NonLinearUnsupported: return "nonlinear-unsupported";
    case ErrorKind::UnboundedDomain: return "unbounded-domain";
    case ErrorKind::TypeMix: return "type-mix";
    case ErrorKind::IneqCapExceeded: return "inequality-cap-exceeded";
    }
    return "error";
}

}  // namespace prolite
