#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "spdec/factor_graph.hpp"
#include "spdec/rng.hpp"
#include "spdec/survey.hpp"

namespace spdec {

enum class SPStatus {
    ConvergedNontrivial,
    ConvergedTrivial,
    NoConvergence,
    Contradiction,
    UnsatCertificate,
};

inline const char* to_string(SPStatus s) {
    switch (s) {
        case SPStatus::ConvergedNontrivial: return "CONVERGED_NONTRIVIAL";
        case SPStatus::ConvergedTrivial: return "CONVERGED_TRIVIAL";
        case SPStatus::NoConvergence: return "NO_CONVERGENCE";
        case SPStatus::Contradiction: return "CONTRADICTION";
        case SPStatus::UnsatCertificate: return "UNSAT_CERTIFICATE";
    }
    return "?";
}

inline bool converged(SPStatus s) {
    return s == SPStatus::ConvergedNontrivial || s == SPStatus::ConvergedTrivial;
}

enum class InitMode { Random, TrivialPerturbed };

struct SPConfig {
    double tol = 1e-3;       // max componentwise message change per sweep
    int max_sweeps = 1000;
    double damping = 0.0;    // weight of the old message, in [0, 1)
    InitMode init = InitMode::Random;
    double trivial_threshold = 1e-8;  // max(s_T, s_F) below this = trivial
};

// Per-directed-edge message storage, indexed by the factor graph's edge ids.
// s[e]: cavity survey from the node of e toward its clause; u[e]: message
// from the clause of e toward its node.
struct MessageState {
    std::vector<Survey> s;
    std::vector<Survey> u;
    uint64_t seed = 0;
    int sweeps = 0;
};

struct SPResult {
    SPStatus status = SPStatus::NoConvergence;
    int sweeps = 0;
    double residual = 0.0;
    std::optional<double> sigma;  // total complexity, present iff converged
};

// u(i,c): product over the other members of c of their flipped F-mass gives
// the probability f that every one of them is pinned against the clause.
inline Survey clause_message(const FactorGraph& g, const MessageState& st,
                             uint32_t clause, uint32_t target_node) {
    double f = 1.0;
    for (uint32_t e = g.clause_offset[clause]; e < g.clause_offset[clause + 1]; ++e) {
        if (g.edge_node[e] == target_node) continue;
        const Survey& s = st.s[e];
        f *= g.edge_negated[e] ? s.t : s.f;
    }
    bool neg = false;
    for (uint32_t e = g.clause_offset[clause]; e < g.clause_offset[clause + 1]; ++e)
        if (g.edge_node[e] == target_node) { neg = g.edge_negated[e]; break; }
    return literal_flip(Survey{f, 1.0 - f, 0.0}, neg);
}

// Product of incoming u over incident clauses except `excluded_clause`;
// empty product is the identity. nullopt on contradiction.
inline std::optional<Survey> cavity_survey(const FactorGraph& g,
                                           const MessageState& st,
                                           uint32_t node,
                                           uint32_t excluded_clause) {
    LogProduct prod;
    for (uint32_t ne = g.node_offset[node]; ne < g.node_offset[node + 1]; ++ne) {
        const uint32_t e = g.node_edges[ne];
        if (g.edge_clause[e] == excluded_clause) continue;
        prod.multiply(st.u[e].vec());
    }
    return prod.normalized();
}

inline std::optional<Survey> node_survey(const FactorGraph& g,
                                         const MessageState& st,
                                         uint32_t node) {
    LogProduct prod;
    for (uint32_t ne = g.node_offset[node]; ne < g.node_offset[node + 1]; ++ne)
        prod.multiply(st.u[g.node_edges[ne]].vec());
    return prod.normalized();
}

enum class TermStatus { Ok, Contradiction, UnsatCertificate };

struct TermValue {
    TermStatus status = TermStatus::Ok;
    double value = 0.0;
};

// ln(1 - prod of flipped F components of the member cavity surveys).
// A product of exactly 1 certifies that every member is surely pinned
// against the clause: no warning solution satisfies it.
inline TermValue complexity_clause(const FactorGraph& g, const MessageState& st,
                                   uint32_t clause) {
    double p = 1.0;
    for (uint32_t e = g.clause_offset[clause]; e < g.clause_offset[clause + 1]; ++e) {
        const Survey& s = st.s[e];
        p *= g.edge_negated[e] ? s.t : s.f;
    }
    if (p >= 1.0)
        return {TermStatus::UnsatCertificate,
                -std::numeric_limits<double>::infinity()};
    return {TermStatus::Ok, std::log1p(-p)};
}

// ln of the norm of the product of all incoming u; 0 for isolated nodes.
inline TermValue complexity_node(const FactorGraph& g, const MessageState& st,
                                 uint32_t node) {
    LogProduct prod;
    for (uint32_t ne = g.node_offset[node]; ne < g.node_offset[node + 1]; ++ne)
        prod.multiply(st.u[g.node_edges[ne]].vec());
    auto ln = prod.log_norm();
    if (!ln) return {TermStatus::Contradiction, 0.0};
    return {TermStatus::Ok, *ln};
}

// Sigma = sum_i Sigma_N(i) - sum_c (K(c)-1) Sigma_C(c)
inline TermValue complexity_total(const FactorGraph& g, const MessageState& st) {
    double total = 0.0;
    for (uint32_t i = 0; i < g.n_nodes; ++i) {
        TermValue t = complexity_node(g, st, i);
        if (t.status != TermStatus::Ok) return t;
        total += t.value;
    }
    for (uint32_t c = 0; c < g.n_clauses; ++c) {
        TermValue t = complexity_clause(g, st, c);
        if (t.status != TermStatus::Ok) return t;
        total -= double(g.clause_size(c) - 1) * t.value;
    }
    return {TermStatus::Ok, total};
}

struct DeltaEstimate {
    double delta = 0.0;  // -ln(1 - min(s_T, s_F)), >= 0
    bool direction = true;
};

// Predicted complexity loss when fixing the node along its majority
// direction. nullopt if the node survey is contradictory.
inline std::optional<DeltaEstimate> delta_estimate(const FactorGraph& g,
                                                   const MessageState& st,
                                                   uint32_t node) {
    auto s = node_survey(g, st, node);
    if (!s) return std::nullopt;
    const double lost = std::min(s->t, s->f);
    return DeltaEstimate{-std::log1p(-lost), s->t >= s->f};
}

struct SolveOutput {
    MessageState state;
    SPResult result;
};

namespace detail {

// the F component each edge contributes to its clause's pinning products
inline double flipped_f(const FactorGraph& g, const Survey& s, uint32_t e) {
    return g.edge_negated[e] ? s.t : s.f;
}

inline void recompute_u_sync(const FactorGraph& g, MessageState& st) {
    for (uint32_t c = 0; c < g.n_clauses; ++c) {
        const uint32_t lo = g.clause_offset[c], hi = g.clause_offset[c + 1];
        for (uint32_t e = lo; e < hi; ++e) {
            double f = 1.0;
            for (uint32_t o = lo; o < hi; ++o) {
                if (o == e) continue;
                f *= flipped_f(g, st.s[o], o);
            }
            st.u[e] = literal_flip(Survey{f, 1.0 - f, 0.0}, g.edge_negated[e] != 0);
        }
    }
}

// Accumulates products of u messages, which always have a zero component:
// (f, 1-f, 0) toward a positive occurrence, (0, 1-f, f) toward a negated one.
struct UProduct {
    double t = 0.0, i = 1.0, f = 0.0;
    double log_scale = 0.0;
    int count = 0;

    void multiply(const Survey& u, bool negated) {
        if (!negated) {
            t += i * u.t;
            i *= u.i;
            f *= u.i;
        } else {
            f += i * u.f;
            i *= u.i;
            t *= u.i;
        }
        if ((++count & 15) == 0) {
            const double n = t + i + f;
            if (n > 0.0) {
                log_scale += std::log(n);
                t /= n;
                i /= n;
                f /= n;
            }
        }
    }

    std::optional<Survey> normalized() const {
        const double n = t + i + f;
        if (!(n > 0.0)) return std::nullopt;
        return Survey{t / n, i / n, f / n};
    }
};

inline MessageState init_state(const FactorGraph& g, const SPConfig& cfg,
                               uint64_t seed) {
    MessageState st;
    st.seed = seed;
    st.s.resize(g.n_edges());
    st.u.resize(g.n_edges());
    Rng rng(mix_seed(seed, /*tag=*/0x21));
    for (auto& s : st.s) {
        if (cfg.init == InitMode::Random) {
            // uniform on the simplex
            double a = rng.next_double(), b = rng.next_double();
            if (a > b) std::swap(a, b);
            s = Survey{a, b - a, 1.0 - b};
        } else {
            const double t = 1e-4 * rng.next_double();
            const double f = 1e-4 * rng.next_double();
            s = Survey{t, 1.0 - t - f, f};
        }
    }
    recompute_u_sync(g, st);
    return st;
}

}  // namespace detail

// Iterate the survey equations to a fixed point. One sweep visits every
// directed node->clause edge in a fresh seed-derived random order; at each
// edge all u into the node's cavity are recomputed and then the edge's
// cavity survey. Runs are exactly reproducible from (graph, cfg, seed).
inline SolveOutput solve(const FactorGraph& g, const SPConfig& cfg,
                         uint64_t seed,
                         std::optional<MessageState> warm = std::nullopt) {
    SolveOutput out;
    MessageState& st = out.state;
    SPResult& res = out.result;

    if (warm) {
        st = std::move(*warm);
        st.seed = seed;
        detail::recompute_u_sync(g, st);
    } else {
        st = detail::init_state(g, cfg, seed);
    }

    const size_t e_total = g.n_edges();
    if (e_total == 0) {
        st.sweeps += 1;
        res = {SPStatus::ConvergedTrivial, 1, 0.0, 0.0};
        return out;
    }

    Rng sweep_rng(mix_seed(seed, /*tag=*/0x22));
    std::vector<uint32_t> perm(e_total);
    std::iota(perm.begin(), perm.end(), 0u);

    // residual of a synchronous recomputation of every cavity survey;
    // nullopt on contradiction
    auto sync_residual = [&]() -> std::optional<double> {
        detail::recompute_u_sync(g, st);
        double r = 0.0;
        for (size_t e = 0; e < e_total; ++e) {
            const uint32_t i = g.edge_node[e];
            detail::UProduct prod;
            for (uint32_t ne = g.node_offset[i]; ne < g.node_offset[i + 1]; ++ne) {
                const uint32_t de = g.node_edges[ne];
                if (de != e) prod.multiply(st.u[de], g.edge_negated[de] != 0);
            }
            auto s = prod.normalized();
            if (!s) return std::nullopt;
            r = std::max({r, std::abs(s->t - st.s[e].t),
                          std::abs(s->i - st.s[e].i),
                          std::abs(s->f - st.s[e].f)});
        }
        return r;
    };

    // cached flipped F components keep the inner products branch-free
    std::vector<double> sf(e_total);
    for (size_t e = 0; e < e_total; ++e) sf[e] = detail::flipped_f(g, st.s[e], e);

    double prev_amp = std::numeric_limits<double>::infinity();
    int sweeps = 0;
    double max_change = 0.0;
    enum { Running, Trivial, Nontrivial, Failed } state = Running;

    while (sweeps < cfg.max_sweeps) {
        sweep_rng.shuffle(perm);
        max_change = 0.0;
        double amp = 0.0;

        for (uint32_t eid : perm) {
            const uint32_t i = g.edge_node[eid];
            const uint32_t lo = g.node_offset[i], hi = g.node_offset[i + 1];
            // refresh all u into this node's cavity
            for (uint32_t ne = lo; ne < hi; ++ne) {
                const uint32_t de = g.node_edges[ne];
                const uint32_t dc = g.edge_clause[de];
                double f = 1.0;
                for (uint32_t o = g.clause_offset[dc]; o < g.clause_offset[dc + 1]; ++o)
                    if (o != de) f *= sf[o];
                st.u[de] = g.edge_negated[de] ? Survey{0.0, 1.0 - f, f}
                                              : Survey{f, 1.0 - f, 0.0};
            }
            detail::UProduct prod;
            for (uint32_t ne = lo; ne < hi; ++ne) {
                const uint32_t de = g.node_edges[ne];
                if (de != eid) prod.multiply(st.u[de], g.edge_negated[de] != 0);
            }
            auto snew = prod.normalized();
            if (!snew) {
                st.sweeps += sweeps + 1;
                res = {SPStatus::Contradiction, sweeps + 1, max_change,
                       std::nullopt};
                return out;
            }
            Survey blended = *snew;
            if (cfg.damping > 0.0) {
                const double l = cfg.damping;
                blended = Survey{(1 - l) * snew->t + l * st.s[eid].t,
                                 (1 - l) * snew->i + l * st.s[eid].i,
                                 (1 - l) * snew->f + l * st.s[eid].f};
            }
            const Survey old = st.s[eid];
            max_change = std::max({max_change, std::abs(blended.t - old.t),
                                   std::abs(blended.i - old.i),
                                   std::abs(blended.f - old.f)});
            st.s[eid] = blended;
            sf[eid] = detail::flipped_f(g, blended, eid);
            amp = std::max({amp, blended.t, blended.f});
        }
        ++sweeps;

        if (max_change < cfg.tol) {
            if (amp < cfg.trivial_threshold) {
                state = Trivial;
                break;
            }
            // a small, still rapidly shrinking amplitude is the approach to
            // the trivial point, not a fixed point of its own: keep sweeping
            if (amp < 1e-2 && amp <= 0.25 * prev_amp) {
                prev_amp = amp;
                continue;
            }
            auto r = sync_residual();
            if (!r) {
                st.sweeps += sweeps;
                res = {SPStatus::Contradiction, sweeps, max_change, std::nullopt};
                return out;
            }
            if (*r < cfg.tol) {
                state = Nontrivial;
                max_change = *r;
                break;
            }
            // the sequential sweep settled but the synchronous recomputation
            // still moves: not a fixed point yet
        }
        prev_amp = amp;
    }

    if (state == Running && max_change < cfg.tol) {
        // ran out of sweeps while sliding toward the trivial point
        double amp = 0.0;
        for (const Survey& s : st.s) amp = std::max({amp, s.t, s.f});
        state = amp < cfg.trivial_threshold ? Trivial : Failed;
    } else if (state == Running) {
        state = Failed;
    }

    st.sweeps += sweeps;
    res.sweeps = sweeps;
    res.residual = max_change;

    if (state == Failed) {
        res.status = SPStatus::NoConvergence;
        return out;
    }
    if (state == Trivial) {
        // snap to the exact trivial point the state collapsed onto
        for (Survey& s : st.s) s = identity_survey();
        detail::recompute_u_sync(g, st);
        res.status = SPStatus::ConvergedTrivial;
        res.sigma = 0.0;
        return out;
    }

    // Sigma reported off the synchronous u recomputation done by the
    // residual check
    res.status = SPStatus::ConvergedNontrivial;
    TermValue sigma = complexity_total(g, st);
    switch (sigma.status) {
        case TermStatus::Ok:
            res.sigma = sigma.value;
            break;
        case TermStatus::Contradiction:
            res.status = SPStatus::Contradiction;
            res.sigma = std::nullopt;
            break;
        case TermStatus::UnsatCertificate:
            res.status = SPStatus::UnsatCertificate;
            res.sigma = std::nullopt;
            break;
    }
    return out;
}

}  // namespace spdec
