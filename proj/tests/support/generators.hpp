// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "prolite/engine.hpp"
#include "prolite/harness.hpp"
#include "prolite/numeric.hpp"
#include "prolite/reader.hpp"

namespace prolite::testing {

inline std::int64_t uniform(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

/// Renders sum(c_i * name_i) with explicit signs, e.g. "3*A - B + 2*C".
inline std::string render_linear(const std::vector<std::pair<std::int64_t, std::string>>& terms) {
    std::string out;
    for (const auto& [c, name] : terms) {
        const std::int64_t mag = c < 0 ? -c : c;
        if (out.empty()) {
            if (c < 0) out += "-";
        } else {
            out += c < 0 ? " - " : " + ";
        }
        if (mag != 1) out += std::to_string(mag) + "*";
        out += name;
    }
    return out;
}

struct RandomCsp {
    CspInstance instance;
    bool has_disjunction = false;
    /// Program defining csp(V1, ..., Vn) with explicit labeling.
    std::string program() const {
        std::string args;
        for (const auto& v : instance.vars) args += (args.empty() ? "" : ", ") + v.name;
        std::string body;
        for (const auto& v : instance.vars) {
            body += "    " + v.name + " in " + std::to_string(v.lo) + ".." + std::to_string(v.hi) + ",\n";
        }
        for (const auto& c : instance.constraints) body += "    " + c + ",\n";
        return "csp(" + args + ") :-\n" + body + "    label([" + args + "]).\n";
    }
    std::string query() const {
        std::string args;
        for (const auto& v : instance.vars) args += (args.empty() ? "" : ", ") + v.name;
        return "csp(" + args + ")";
    }
};

/// At most 5 variables over subranges of 0..9 and at most 6 constraints drawn from
/// linear relations, disequality, mod, abs and two-way disjunctions.
inline RandomCsp random_csp(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    RandomCsp out;
    const auto n = uniform(rng, 1, 5);
    for (std::int64_t i = 0; i < n; ++i) {
        const auto lo = uniform(rng, 0, 5);
        out.instance.vars.push_back({"V" + std::to_string(i + 1), lo, uniform(rng, lo, 9)});
    }
    auto var = [&]() -> const CspVar& { return out.instance.vars[static_cast<std::size_t>(uniform(rng, 0, n - 1))]; };
    static const char* const rels[] = {"#=", "#\\=", "#<", "#>", "#=<", "#>="};
    auto linear = [&]() {
        std::vector<std::pair<std::int64_t, std::string>> terms;
        std::set<std::string> used;
        const auto k = uniform(rng, 1, std::min<std::int64_t>(3, n));
        std::int64_t at_witness = 0;
        for (std::int64_t i = 0; i < k; ++i) {
            const CspVar& v = var();
            if (!used.insert(v.name).second) continue;
            std::int64_t c = 0;
            while (c == 0) c = uniform(rng, -3, 3);
            terms.emplace_back(c, v.name);
            at_witness += c * uniform(rng, v.lo, v.hi);
        }
        return render_linear(terms) + " " + rels[uniform(rng, 0, 5)] + " " + std::to_string(at_witness + uniform(rng, -2, 2));
    };
    const auto m = uniform(rng, 0, 6);
    for (std::int64_t i = 0; i < m; ++i) {
        switch (uniform(rng, 0, 4)) {
        case 0: out.instance.constraints.push_back(linear()); break;
        case 1: {
            const CspVar& a = var();
            const CspVar& b = var();
            out.instance.constraints.push_back(a.name == b.name ? a.name + " #\\= " + std::to_string(uniform(rng, 0, 9))
                                                                : a.name + " #\\= " + b.name);
            break;
        }
        case 2: {
            const auto mod = uniform(rng, 2, 4);
            out.instance.constraints.push_back(var().name + " mod " + std::to_string(mod) +
                                               (uniform(rng, 0, 1) ? " #= " : " #\\= ") +
                                               std::to_string(uniform(rng, 0, mod - 1)));
            break;
        }
        case 3: {
            const CspVar& a = var();
            const CspVar& b = var();
            out.instance.constraints.push_back("abs(" + a.name + " - " + b.name + ") " + rels[uniform(rng, 0, 5)] +
                                               " " + std::to_string(uniform(rng, 0, 5)));
            break;
        }
        default:
            out.instance.constraints.push_back("(" + linear() + " ; " + linear() + ")");
            out.has_disjunction = true;
            break;
        }
    }
    return out;
}

/// Engine solutions of csp(...) in SLD order; overlapping disjunction branches may repeat one.
inline std::vector<std::vector<std::int64_t>> engine_csp_solutions(const RandomCsp& csp, bool occurs_check = true,
                                                                   fd::LabelStrategy strategy = fd::LabelStrategy::Leftmost) {
    Database db = consult(parse_program(csp.program()));
    EngineOptions opts;
    opts.occurs_check = occurs_check;
    opts.label_strategy = strategy;
    Solver solver(db, csp.query(), Budget{}, opts);
    std::vector<std::vector<std::int64_t>> out;
    while (solver.next()) {
        std::vector<std::int64_t> row;
        for (std::size_t i = 0; i < csp.instance.vars.size(); ++i) {
            row.push_back(static_cast<std::int64_t>(solver.value(static_cast<VarId>(i)).small_int()));
        }
        out.push_back(std::move(row));
    }
    return out;
}

struct RandomSystem {
    std::vector<std::string> names;
    std::vector<std::string> equations;
};

/// n x n integer system with coefficients and right-hand sides in -9..9; may be singular.
inline RandomSystem random_system(std::uint64_t seed, std::size_t max_n = 6) {
    std::mt19937_64 rng(seed);
    RandomSystem s;
    const auto n = static_cast<std::size_t>(uniform(rng, 1, static_cast<std::int64_t>(max_n)));
    for (std::size_t i = 0; i < n; ++i) s.names.push_back("X" + std::to_string(i + 1));
    for (std::size_t r = 0; r < n; ++r) {
        std::vector<std::pair<std::int64_t, std::string>> terms;
        for (std::size_t c = 0; c < n; ++c) {
            const auto k = uniform(rng, -9, 9);
            if (k != 0) terms.emplace_back(k, s.names[c]);
        }
        if (terms.empty()) terms.emplace_back(uniform(rng, 1, 9), s.names[r]);
        s.equations.push_back(render_linear(terms) + " = " + std::to_string(uniform(rng, -9, 9)));
    }
    return s;
}

/// Solves the system with the engine's rational solver; values keyed by variable name.
inline std::map<std::string, Rational> engine_system_solution(const RandomSystem& s) {
    std::string block;
    for (const auto& e : s.equations) block += (block.empty() ? "" : ", ") + e;
    std::string args;
    for (const auto& n : s.names) args += (args.empty() ? "" : ", ") + n;
    Database db = consult(parse_program("sys(" + args + ") :- {" + block + "}.\n"));
    Solver solver(db, "sys(" + args + ")");
    std::map<std::string, Rational> out;
    if (!solver.next()) return out;
    for (std::size_t i = 0; i < s.names.size(); ++i) {
        Term t = solver.value(static_cast<VarId>(i));
        if (t.is_number()) out[s.names[i]] = t.number_value();
    }
    return out;
}

}  // namespace prolite::testing
