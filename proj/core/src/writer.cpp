// SPDX-License-Identifier: Apache-2.0
#include "prolite/writer.hpp"

#include <cctype>

namespace prolite {

namespace {

bool symbol_char(char c) {
    switch (c) {
    case '+': case '-': case '*': case '/': case '\\': case '^': case '<': case '>':
    case '=': case '~': case ':': case '.': case '?': case '@': case '#': case '&': case '$':
        return true;
    default:
        return false;
    }
}

bool is_alpha_name(const std::string& s) {
    if (s.empty() || !std::islower(static_cast<unsigned char>(s[0]))) return false;
    for (char c : s) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    }
    return true;
}

bool is_symbol_name(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!symbol_char(c)) return false;
    }
    // "." alone ends a clause; a leading "/*" opens a comment
    if (s == ".") return false;
    if (s.size() >= 2 && s[0] == '/' && s[1] == '*') return false;
    return true;
}

class Writer {
public:
    explicit Writer(const WriteOptions& o) : opt_(o), ops_(o.ops ? *o.ops : OpTable::standard()) {}

    void write(const Term& raw, int max, std::string& out) {
        const Term& t = opt_.bindings ? deref(raw, *opt_.bindings) : raw;
        switch (t.kind()) {
        case TermKind::Unbound:
            out += "<unbound>";
            return;
        case TermKind::Var:
            write_var(t.var_id(), out);
            return;
        case TermKind::Int:
            out += t.is_small_int() ? std::to_string(t.small_int()) : t.int_value().str();
            return;
        case TermKind::Rat: {
            Rational r = t.number_value();
            bool paren = 400 > max;
            if (paren) out += "(";
            out += r.num().str();
            out += " rdiv ";
            out += r.den().str();
            if (paren) out += ")";
            return;
        }
        case TermKind::Atom:
            write_atom(t.name(), max, out);
            return;
        case TermKind::Compound:
            write_compound(t, max, out);
            return;
        }
    }

private:
    void write_var(VarId id, std::string& out) {
        if (opt_.var_names) {
            for (const auto& [name, v] : *opt_.var_names) {
                if (v == id) {
                    out += name;
                    return;
                }
            }
        }
        out += "_G" + std::to_string(id);
    }

    void write_atom(const std::string& name, int /*max*/, std::string& out) { out += quote_atom_if_needed(name); }

    const Term& view(const Term& t) { return opt_.bindings ? deref(t, *opt_.bindings) : t; }

    void write_compound(const Term& t, int max, std::string& out) {
        const std::string& name = t.name();
        if (name == "." && t.arity() == 2) {
            write_list(t, out);
            return;
        }
        if (name == "{}" && t.arity() == 1) {
            out += "{";
            write(t.arg(0), 1200, out);
            out += "}";
            return;
        }
        if (t.arity() == 2) {
            if (auto inf = ops_.infix(name)) {
                int p = inf->priority;
                int lmax = inf->type == OpType::yfx ? p : p - 1;
                int rmax = inf->type == OpType::xfy ? p : p - 1;
                bool paren = p > max;
                if (paren) out += "(";
                write_operand(t.arg(0), lmax, out);
                if (name == ",") {
                    out += ",";
                } else {
                    out += " ";
                    out += quote_atom_if_needed(name);
                    out += " ";
                }
                write_operand(t.arg(1), rmax, out);
                if (paren) out += ")";
                return;
            }
        }
        if (t.arity() == 1) {
            if (auto pre = ops_.prefix(name)) {
                int p = pre->priority;
                int amax = pre->type == OpType::fy ? p : p - 1;
                bool paren = p > max;
                if (paren) out += "(";
                out += quote_atom_if_needed(name);
                out += " ";
                write_operand(t.arg(0), amax, out);
                if (paren) out += ")";
                return;
            }
            if (auto post = ops_.postfix(name)) {
                int p = post->priority;
                int amax = post->type == OpType::yf ? p : p - 1;
                bool paren = p > max;
                if (paren) out += "(";
                write_operand(t.arg(0), amax, out);
                out += " ";
                out += quote_atom_if_needed(name);
                if (paren) out += ")";
                return;
            }
        }
        out += quote_atom_if_needed(name);
        out += "(";
        bool first = true;
        for (const Term& a : t.args()) {
            if (!first) out += ",";
            first = false;
            write(a, 999, out);
        }
        out += ")";
    }

    // Operator atoms as operands are always bracketed.
    void write_operand(const Term& raw, int max, std::string& out) {
        const Term& t = view(raw);
        if (t.is_atom() && ops_.is_op(t.name())) {
            out += "(";
            out += quote_atom_if_needed(t.name());
            out += ")";
            return;
        }
        write(t, max, out);
    }

    void write_list(const Term& t, std::string& out) {
        out += "[";
        const Term* cur = &t;
        bool first = true;
        while (true) {
            const Term& c = view(*cur);
            if (c.is_functor(".", 2)) {
                if (!first) out += ",";
                first = false;
                write(c.arg(0), 999, out);
                cur = &c.arg(1);
                continue;
            }
            if (!c.is_nil()) {
                out += "|";
                write(c, 999, out);
            }
            break;
        }
        out += "]";
    }

    const WriteOptions& opt_;
    const OpTable& ops_;
};

}  // namespace

std::string quote_atom_if_needed(const std::string& name) {
    if (name == "[]" || name == "!" || name == ";" || name == "{}") return name;
    if (is_alpha_name(name) || is_symbol_name(name)) return name;
    std::string out = "'";
    for (char c : name) {
        switch (c) {
        case '\'': out += "\\'"; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        default: out.push_back(c);
        }
    }
    out += "'";
    return out;
}

std::string write_term(const Term& t, const WriteOptions& options) {
    std::string out;
    Writer w(options);
    w.write(t, 1200, out);
    return out;
}

}  // namespace prolite
