#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "spdec/instance.hpp"
#include "spdec/rng.hpp"

namespace spdec {

struct WalkSatConfig {
    uint64_t max_flips = 10'000'000;  // per restart
    double noise = 0.5;
    int restarts = 10;
    uint64_t seed = 0;
};

// Standard WalkSAT: pick a random unsatisfied clause; with probability
// `noise` flip a random member, otherwise flip the member that breaks the
// fewest clauses. Returns a verified satisfying assignment or nullopt.
inline std::optional<Assignment> solve_easy(const Instance& inst,
                                            const WalkSatConfig& cfg) {
    const uint32_t n = inst.n_vars;
    const size_t m = inst.n_clauses();

    // occurrence lists
    std::vector<uint32_t> occ_start(n + 1, 0);
    for (const Literal& l : inst.lits) occ_start[l.var + 1]++;
    for (uint32_t v = 0; v < n; ++v) occ_start[v + 1] += occ_start[v];
    std::vector<uint32_t> occ(inst.lits.size());
    {
        std::vector<uint32_t> fill(occ_start.begin(), occ_start.end() - 1);
        for (size_t c = 0; c < m; ++c)
            for (const Literal& l : inst.clause(c)) occ[fill[l.var]++] = uint32_t(c);
    }

    Rng rng(mix_seed(cfg.seed, /*tag=*/0x31));
    std::vector<uint8_t> val(n, 0);
    std::vector<uint32_t> numtrue(m, 0);
    std::vector<uint32_t> unsat;           // stack of unsatisfied clause ids
    std::vector<uint32_t> unsat_pos(m, 0); // clause id -> position in unsat

    auto clause_sat_count = [&](uint32_t c) {
        uint32_t k = 0;
        for (const Literal& l : inst.clause(c))
            k += literal_satisfied(l, val[l.var] != 0);
        return k;
    };

    for (int restart = 0; restart < cfg.restarts; ++restart) {
        for (uint32_t v = 0; v < n; ++v) val[v] = rng.next_bool();
        unsat.clear();
        for (uint32_t c = 0; c < uint32_t(m); ++c) {
            numtrue[c] = clause_sat_count(c);
            if (numtrue[c] == 0) {
                unsat_pos[c] = uint32_t(unsat.size());
                unsat.push_back(c);
            }
        }

        auto flip = [&](uint32_t v) {
            val[v] ^= 1;
            for (uint32_t oi = occ_start[v]; oi < occ_start[v + 1]; ++oi) {
                const uint32_t c = occ[oi];
                bool neg = false;
                for (const Literal& l : inst.clause(c))
                    if (l.var == v) { neg = l.negated; break; }
                if (literal_satisfied({v, neg}, val[v] != 0)) {
                    if (numtrue[c]++ == 0) {
                        // remove from unsat stack
                        const uint32_t pos = unsat_pos[c];
                        unsat[pos] = unsat.back();
                        unsat_pos[unsat[pos]] = pos;
                        unsat.pop_back();
                    }
                } else {
                    if (--numtrue[c] == 0) {
                        unsat_pos[c] = uint32_t(unsat.size());
                        unsat.push_back(c);
                    }
                }
            }
        };

        // clauses this variable is currently the sole satisfier of
        auto break_count = [&](uint32_t v) {
            uint32_t b = 0;
            for (uint32_t oi = occ_start[v]; oi < occ_start[v + 1]; ++oi) {
                const uint32_t c = occ[oi];
                if (numtrue[c] != 1) continue;
                for (const Literal& l : inst.clause(c))
                    if (l.var == v) {
                        b += literal_satisfied(l, val[v] != 0);
                        break;
                    }
            }
            return b;
        };

        for (uint64_t it = 0; it < cfg.max_flips && !unsat.empty(); ++it) {
            const uint32_t c = unsat[rng.next_below(unsat.size())];
            auto lits = inst.clause(c);
            uint32_t pick;
            if (rng.next_double() < cfg.noise) {
                pick = lits[rng.next_below(lits.size())].var;
            } else {
                uint32_t best = 0, best_break = UINT32_MAX, ties = 0;
                for (const Literal& l : lits) {
                    const uint32_t b = break_count(l.var);
                    if (b < best_break) {
                        best_break = b;
                        best = l.var;
                        ties = 1;
                    } else if (b == best_break && rng.next_below(++ties) == 0) {
                        best = l.var;
                    }
                }
                pick = best;
            }
            flip(pick);
        }

        if (unsat.empty()) {
            Assignment a = Assignment::all_unset(n);
            for (uint32_t v = 0; v < n; ++v) a.set(v, val[v] != 0);
            if (verify_assignment(inst, a)) return a;
            return std::nullopt;  // bookkeeping bug guard; never expected
        }
    }
    return std::nullopt;
}

}  // namespace spdec
