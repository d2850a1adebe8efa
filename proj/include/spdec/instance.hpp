#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spdec/rng.hpp"

namespace spdec {

struct Literal {
    uint32_t var = 0;
    // false: the clause is satisfied when the variable is true
    bool negated = false;

    bool operator==(const Literal&) const = default;
};

enum class Value : uint8_t { False = 0, True = 1, Unset = 2 };

struct Assignment {
    std::vector<Value> values;

    static Assignment all_unset(size_t n) {
        return Assignment{std::vector<Value>(n, Value::Unset)};
    }
    bool fully_set() const {
        for (Value v : values)
            if (v == Value::Unset) return false;
        return true;
    }
    void set(uint32_t var, bool b) {
        values[var] = b ? Value::True : Value::False;
    }
    bool get(uint32_t var) const { return values[var] == Value::True; }
    size_t size() const { return values.size(); }
};

// CNF instance over dense variable indices [0, n_vars). Clauses live in one
// clause-major literal array; clause c is lits[clause_start[c]..clause_start[c+1]).
// orig_ids maps current indices back to the ids of the instance the pipeline
// started from, so traces keep stable names across simplification.
struct Instance {
    uint32_t n_vars = 0;
    std::vector<Literal> lits;
    std::vector<uint32_t> clause_start{0};
    std::vector<uint32_t> orig_ids;

    size_t n_clauses() const { return clause_start.size() - 1; }
    std::span<const Literal> clause(size_t c) const {
        return {lits.data() + clause_start[c],
                lits.data() + clause_start[c + 1]};
    }
    size_t clause_size(size_t c) const {
        return clause_start[c + 1] - clause_start[c];
    }
    double alpha() const {
        return n_vars ? double(n_clauses()) / double(n_vars) : 0.0;
    }
    uint32_t orig_id(uint32_t var) const {
        return orig_ids.empty() ? var : orig_ids[var];
    }

    bool operator==(const Instance& o) const {
        return n_vars == o.n_vars && lits == o.lits &&
               clause_start == o.clause_start;
    }
};

namespace detail {
inline void check_clause(uint32_t n_vars, std::span<const Literal> c) {
    if (c.empty()) throw std::invalid_argument("empty clause");
    for (size_t a = 0; a < c.size(); ++a) {
        if (c[a].var >= n_vars)
            throw std::invalid_argument("literal variable out of range");
        for (size_t b = a + 1; b < c.size(); ++b)
            if (c[a].var == c[b].var)
                throw std::invalid_argument("repeated variable in clause");
    }
}
}  // namespace detail

// Validating constructor used by generators, parsers and tests.
inline Instance make_instance(uint32_t n_vars,
                              const std::vector<std::vector<Literal>>& clauses) {
    Instance inst;
    inst.n_vars = n_vars;
    inst.clause_start.reserve(clauses.size() + 1);
    for (const auto& c : clauses) {
        detail::check_clause(n_vars, {c.data(), c.size()});
        inst.lits.insert(inst.lits.end(), c.begin(), c.end());
        inst.clause_start.push_back(uint32_t(inst.lits.size()));
    }
    inst.orig_ids.resize(n_vars);
    std::iota(inst.orig_ids.begin(), inst.orig_ids.end(), 0u);
    return inst;
}

// Random K-SAT: round(alpha*n) clauses, each over k distinct variables drawn
// uniformly without replacement, each sign a fair coin.
inline Instance generate_random(uint32_t n, double alpha, uint32_t k,
                                uint64_t seed) {
    if (k < 1 || k > n) throw std::invalid_argument("need n >= k >= 1");
    if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
    const uint64_t m = uint64_t(std::llround(alpha * double(n)));

    Rng rng(mix_seed(seed, /*tag=*/0x11));
    Instance inst;
    inst.n_vars = n;
    inst.lits.reserve(m * k);
    inst.clause_start.reserve(m + 1);

    std::vector<uint32_t> picked(k);
    for (uint64_t c = 0; c < m; ++c) {
        for (uint32_t j = 0; j < k; ++j) {
            uint32_t v;
            bool dup;
            do {
                v = uint32_t(rng.next_below(n));
                dup = false;
                for (uint32_t a = 0; a < j; ++a) dup |= (picked[a] == v);
            } while (dup);
            picked[j] = v;
        }
        for (uint32_t j = 0; j < k; ++j)
            inst.lits.push_back({picked[j], rng.next_bool()});
        inst.clause_start.push_back(uint32_t(inst.lits.size()));
    }
    inst.orig_ids.resize(n);
    std::iota(inst.orig_ids.begin(), inst.orig_ids.end(), 0u);
    return inst;
}

inline bool literal_satisfied(const Literal& l, bool value) {
    return value != l.negated;
}

// true iff every clause has a satisfied literal; a must be fully set.
inline bool verify_assignment(const Instance& inst, const Assignment& a) {
    if (a.size() != inst.n_vars)
        throw std::invalid_argument("assignment size mismatch");
    if (!a.fully_set())
        throw std::invalid_argument("assignment has unset variables");
    for (size_t c = 0; c < inst.n_clauses(); ++c) {
        bool sat = false;
        for (const Literal& l : inst.clause(c))
            sat |= literal_satisfied(l, a.get(l.var));
        if (!sat) return false;
    }
    return true;
}

// Result of fixing a variable and running unit propagation to fixpoint.
// On contradiction (an empty clause was produced) only `forced` is
// meaningful; it lists what had been fixed up to that point.
struct SimplifyResult {
    bool contradiction = false;
    Instance reduced;
    // (original id, value) for every variable fixed by this call
    std::vector<std::pair<uint32_t, bool>> forced;
    std::vector<int32_t> var_map;     // old index -> new index, -1 if fixed
    std::vector<int32_t> clause_map;  // old index -> new index, -1 if deleted
};

// Fix `var` to `value`; delete satisfied clauses, shrink falsified literals
// away, and propagate any resulting unit clauses.
inline SimplifyResult fix_variable(const Instance& inst, uint32_t var,
                                   bool value) {
    if (var >= inst.n_vars) throw std::invalid_argument("variable out of range");
    const size_t m = inst.n_clauses();

    // occurrence lists
    std::vector<uint32_t> occ_cnt(inst.n_vars, 0);
    for (const Literal& l : inst.lits) occ_cnt[l.var]++;
    std::vector<uint32_t> occ_start(inst.n_vars + 1, 0);
    for (uint32_t v = 0; v < inst.n_vars; ++v)
        occ_start[v + 1] = occ_start[v] + occ_cnt[v];
    std::vector<uint32_t> occ(inst.lits.size());
    {
        std::vector<uint32_t> fill(occ_start.begin(), occ_start.end() - 1);
        for (size_t c = 0; c < m; ++c)
            for (const Literal& l : inst.clause(c)) occ[fill[l.var]++] = uint32_t(c);
    }

    SimplifyResult res;
    std::vector<Value> fixed(inst.n_vars, Value::Unset);
    std::vector<uint32_t> live(m);
    std::vector<uint8_t> satisfied(m, 0);
    for (size_t c = 0; c < m; ++c) live[c] = uint32_t(inst.clause_size(c));

    std::vector<std::pair<uint32_t, bool>> queue{{var, value}};
    size_t head = 0;
    while (head < queue.size()) {
        auto [v, val] = queue[head++];
        if (fixed[v] != Value::Unset) {
            if ((fixed[v] == Value::True) != val) {
                res.contradiction = true;
                return res;
            }
            continue;
        }
        fixed[v] = val ? Value::True : Value::False;
        res.forced.emplace_back(inst.orig_id(v), val);
        for (uint32_t oi = occ_start[v]; oi < occ_start[v + 1]; ++oi) {
            const uint32_t c = occ[oi];
            if (satisfied[c]) continue;
            // find this var's sign in c
            bool neg = false;
            for (const Literal& l : inst.clause(c))
                if (l.var == v) { neg = l.negated; break; }
            if (literal_satisfied({v, neg}, val)) {
                satisfied[c] = 1;
            } else if (--live[c] == 0) {
                res.contradiction = true;
                return res;
            } else if (live[c] == 1) {
                // queued-but-unprocessed duplicates are resolved at pop
                for (const Literal& l : inst.clause(c)) {
                    if (fixed[l.var] == Value::Unset) {
                        queue.emplace_back(l.var, !l.negated);
                        break;
                    }
                }
            }
        }
    }

    // compact variables and clauses
    res.var_map.assign(inst.n_vars, -1);
    uint32_t new_n = 0;
    for (uint32_t v = 0; v < inst.n_vars; ++v)
        if (fixed[v] == Value::Unset) res.var_map[v] = int32_t(new_n++);

    Instance& out = res.reduced;
    out.n_vars = new_n;
    out.orig_ids.resize(new_n);
    for (uint32_t v = 0; v < inst.n_vars; ++v)
        if (res.var_map[v] >= 0) out.orig_ids[res.var_map[v]] = inst.orig_id(v);

    res.clause_map.assign(m, -1);
    out.clause_start.reserve(m + 1);
    for (size_t c = 0; c < m; ++c) {
        if (satisfied[c]) continue;
        res.clause_map[c] = int32_t(out.n_clauses());
        for (const Literal& l : inst.clause(c))
            if (fixed[l.var] == Value::Unset)
                out.lits.push_back({uint32_t(res.var_map[l.var]), l.negated});
        out.clause_start.push_back(uint32_t(out.lits.size()));
    }
    return res;
}

// Composes fix_variable calls so that var/clause maps always refer back to
// the instance the chain started from. Used for batched decimation steps.
class ChainedSimplify {
public:
    explicit ChainedSimplify(Instance start) : current_(std::move(start)) {
        var_map_.resize(current_.n_vars);
        std::iota(var_map_.begin(), var_map_.end(), 0);
        clause_map_.resize(current_.n_clauses());
        std::iota(clause_map_.begin(), clause_map_.end(), 0);
    }

    // var given in the coordinates of the chain's *current* instance.
    // Returns false on contradiction.
    bool fix(uint32_t var, bool value) {
        SimplifyResult step = fix_variable(current_, var, value);
        forced_.insert(forced_.end(), step.forced.begin(), step.forced.end());
        if (step.contradiction) {
            contradiction_ = true;
            return false;
        }
        for (auto& mv : var_map_)
            if (mv >= 0) mv = step.var_map[mv];
        for (auto& mc : clause_map_)
            if (mc >= 0) mc = step.clause_map[mc];
        current_ = std::move(step.reduced);
        return true;
    }

    bool contradiction() const { return contradiction_; }
    const Instance& current() const { return current_; }
    Instance take() { return std::move(current_); }
    // maps from the chain's starting instance to the current one
    const std::vector<int32_t>& var_map() const { return var_map_; }
    const std::vector<int32_t>& clause_map() const { return clause_map_; }
    const std::vector<std::pair<uint32_t, bool>>& forced() const {
        return forced_;
    }

private:
    Instance current_;
    std::vector<int32_t> var_map_, clause_map_;
    std::vector<std::pair<uint32_t, bool>> forced_;
    bool contradiction_ = false;
};

// Eliminate any unit clauses present in the input (DIMACS files may carry
// them; survey propagation assumes clause size >= 2).
inline ChainedSimplify propagate_units(Instance inst) {
    ChainedSimplify chain(std::move(inst));
    for (;;) {
        const Instance& cur = chain.current();
        int32_t unit = -1;
        for (size_t c = 0; c < cur.n_clauses(); ++c)
            if (cur.clause_size(c) == 1) { unit = int32_t(c); break; }
        if (unit < 0) break;
        const Literal l = cur.clause(size_t(unit))[0];
        if (!chain.fix(l.var, !l.negated)) break;
    }
    return chain;
}

}  // namespace spdec
