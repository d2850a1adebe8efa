#pragma once

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "spdec/instance.hpp"

namespace spdec {

struct ParseError : std::runtime_error {
    int line;
    ParseError(int line_, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line_) + ": " + msg),
          line(line_) {}
};

// Standard DIMACS CNF. Comment lines are ignored; a '%' line ends the file
// (SATLIB convention).
inline Instance parse_dimacs(std::istream& in) {
    std::string line;
    int lineno = 0;
    long n = -1, m = -1;

    Instance inst;
    std::vector<Literal> clause;
    long clauses_seen = 0;
    int clause_open_line = 0;

    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == 'c') continue;
        if (line[0] == '%') break;
        std::istringstream ls(line);
        if (line[0] == 'p') {
            if (n >= 0) throw ParseError(lineno, "duplicate header");
            std::string p, cnf;
            ls >> p >> cnf >> n >> m;
            if (!ls || p != "p" || cnf != "cnf" || n < 0 || m < 0)
                throw ParseError(lineno, "malformed header, expected 'p cnf N M'");
            inst.n_vars = uint32_t(n);
            continue;
        }
        if (n < 0) throw ParseError(lineno, "clause before 'p cnf' header");
        long lit;
        while (ls >> lit) {
            if (lit == 0) {
                if (clause.empty())
                    throw ParseError(lineno, "empty clause");
                ++clauses_seen;
                if (clauses_seen > m)
                    throw ParseError(lineno, "more clauses than header declares");
                try {
                    detail::check_clause(inst.n_vars, {clause.data(), clause.size()});
                } catch (const std::invalid_argument& e) {
                    throw ParseError(lineno, e.what());
                }
                inst.lits.insert(inst.lits.end(), clause.begin(), clause.end());
                inst.clause_start.push_back(uint32_t(inst.lits.size()));
                clause.clear();
                continue;
            }
            const long v = lit > 0 ? lit : -lit;
            if (v > n) throw ParseError(lineno, "literal out of range");
            clause.push_back({uint32_t(v - 1), lit < 0});
            clause_open_line = lineno;
        }
        if (!ls.eof()) throw ParseError(lineno, "expected integer literal");
    }
    if (n < 0) throw ParseError(lineno, "missing 'p cnf' header");
    if (!clause.empty())
        throw ParseError(clause_open_line, "unterminated clause at end of input");
    if (clauses_seen != m)
        throw ParseError(lineno, "clause count mismatch: header says " +
                                     std::to_string(m) + ", got " +
                                     std::to_string(clauses_seen));
    inst.orig_ids.resize(inst.n_vars);
    std::iota(inst.orig_ids.begin(), inst.orig_ids.end(), 0u);
    return inst;
}

inline Instance parse_dimacs_string(const std::string& text) {
    std::istringstream ss(text);
    return parse_dimacs(ss);
}

inline Instance parse_dimacs_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return parse_dimacs(in);
}

inline void write_dimacs(const Instance& inst, std::ostream& out) {
    out << "p cnf " << inst.n_vars << ' ' << inst.n_clauses() << '\n';
    for (size_t c = 0; c < inst.n_clauses(); ++c) {
        for (const Literal& l : inst.clause(c))
            out << (l.negated ? -long(l.var) - 1 : long(l.var) + 1) << ' ';
        out << "0\n";
    }
}

inline std::string write_dimacs_string(const Instance& inst) {
    std::ostringstream ss;
    write_dimacs(inst, ss);
    return ss.str();
}

}  // namespace spdec
