#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "spdec/factor_graph.hpp"
#include "spdec/instance.hpp"
#include "spdec/sp.hpp"

namespace spdec {

// Brute-force ground truth at tiny scale. Everything here is exponential in
// the instance size and guarded accordingly.

inline constexpr uint32_t kMaxExhaustiveVars = 26;
inline constexpr uint32_t kMaxWarningEdges = 12;

// All satisfying assignments, in ascending order of the bit mask with
// variable i on bit i.
inline std::vector<Assignment> exhaustive_solutions(const Instance& inst) {
    if (inst.n_vars > kMaxExhaustiveVars)
        throw std::invalid_argument("instance too large for exhaustive sweep");
    std::vector<Assignment> sols;
    const uint64_t lim = uint64_t(1) << inst.n_vars;
    for (uint64_t mask = 0; mask < lim; ++mask) {
        bool ok = true;
        for (size_t c = 0; c < inst.n_clauses() && ok; ++c) {
            bool sat = false;
            for (const Literal& l : inst.clause(c))
                sat |= literal_satisfied(l, (mask >> l.var) & 1);
            ok = sat;
        }
        if (!ok) continue;
        Assignment a = Assignment::all_unset(inst.n_vars);
        for (uint32_t v = 0; v < inst.n_vars; ++v) a.set(v, (mask >> v) & 1);
        sols.push_back(std::move(a));
    }
    return sols;
}

enum class Warning : uint8_t { True, False, Unknown };

inline char to_char(Warning w) {
    return w == Warning::True ? 'T' : (w == Warning::False ? 'F' : 'U');
}

struct Cluster {
    std::vector<uint32_t> members;  // indices into the solution list
    std::vector<Warning> warning;   // per variable
};

struct ClusterSet {
    std::vector<Cluster> clusters;
};

// Connected components of the Hamming-distance-1 adjacency graph over the
// solutions; per cluster, a variable's warning is True/False when it takes
// that value in every member, Unknown otherwise.
inline ClusterSet cluster_solutions(const std::vector<Assignment>& sols) {
    if (sols.empty()) throw std::invalid_argument("no solutions to cluster");
    const uint32_t n = uint32_t(sols[0].size());

    std::vector<uint32_t> mask(sols.size());
    std::unordered_map<uint32_t, uint32_t> index;
    index.reserve(sols.size() * 2);
    for (uint32_t i = 0; i < sols.size(); ++i) {
        uint32_t m = 0;
        for (uint32_t v = 0; v < n; ++v) m |= uint32_t(sols[i].get(v)) << v;
        mask[i] = m;
        index.emplace(m, i);
    }

    std::vector<uint32_t> parent(sols.size());
    for (uint32_t i = 0; i < parent.size(); ++i) parent[i] = i;
    auto find = [&](uint32_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (uint32_t i = 0; i < sols.size(); ++i)
        for (uint32_t v = 0; v < n; ++v) {
            auto it = index.find(mask[i] ^ (uint32_t(1) << v));
            if (it != index.end()) parent[find(i)] = find(it->second);
        }

    std::unordered_map<uint32_t, uint32_t> root_to_cluster;
    ClusterSet cs;
    for (uint32_t i = 0; i < sols.size(); ++i) {
        const uint32_t r = find(i);
        auto [it, fresh] = root_to_cluster.emplace(r, uint32_t(cs.clusters.size()));
        if (fresh) cs.clusters.push_back({});
        cs.clusters[it->second].members.push_back(i);
    }
    for (Cluster& cl : cs.clusters) {
        cl.warning.assign(n, Warning::Unknown);
        for (uint32_t v = 0; v < n; ++v) {
            bool all_true = true, all_false = true;
            for (uint32_t mi : cl.members) {
                all_true &= sols[mi].get(v);
                all_false &= !sols[mi].get(v);
            }
            cl.warning[v] = all_true ? Warning::True
                          : all_false ? Warning::False
                                      : Warning::Unknown;
        }
    }
    return cs;
}

namespace detail {
inline Survey pure_survey(Warning w) {
    switch (w) {
        case Warning::True: return {1.0, 0.0, 0.0};
        case Warning::False: return {0.0, 0.0, 1.0};
        default: return {0.0, 1.0, 0.0};
    }
}
inline std::optional<Warning> pure_warning(const Survey& s) {
    if (s.t == 1.0) return Warning::True;
    if (s.f == 1.0) return Warning::False;
    if (s.i == 1.0) return Warning::Unknown;
    return std::nullopt;
}
}  // namespace detail

struct WarningFixedPoint {
    std::vector<Warning> edges;  // per directed node->clause edge id
    bool trivial = false;        // the all-Unknown point
    // warning per node from the full product; nullopt when contradictory
    std::optional<std::vector<Warning>> node_values;
};

// Sweep all 3^E assignments of {T,I,F} to the directed node->clause edges
// and keep the fixed points of the survey equations restricted to the pure
// vectors; assignments whose cavity product annihilates are excluded.
inline std::vector<WarningFixedPoint> enumerate_warning_fixed_points(
    const Instance& inst) {
    FactorGraph g(inst);
    const size_t e = g.n_edges();
    if (e > kMaxWarningEdges)
        throw std::invalid_argument("too many edges for 3^E sweep");

    std::vector<WarningFixedPoint> found;
    std::vector<uint8_t> digits(e, 0);
    MessageState st;
    st.s.resize(e);
    st.u.resize(e);

    for (;;) {
        for (size_t k = 0; k < e; ++k)
            st.s[k] = detail::pure_survey(Warning(digits[k]));
        for (size_t k = 0; k < e; ++k)
            st.u[k] = clause_message(g, st, g.edge_clause[k], g.edge_node[k]);

        bool fixed = true, excluded = false;
        for (size_t k = 0; k < e && fixed && !excluded; ++k) {
            auto expect = cavity_survey(g, st, g.edge_node[k], g.edge_clause[k]);
            if (!expect) {
                excluded = true;
                break;
            }
            fixed = expect->t == st.s[k].t && expect->i == st.s[k].i &&
                    expect->f == st.s[k].f;
        }

        if (fixed && !excluded) {
            WarningFixedPoint fp;
            fp.edges.resize(e);
            fp.trivial = true;
            for (size_t k = 0; k < e; ++k) {
                fp.edges[k] = Warning(digits[k]);
                fp.trivial &= fp.edges[k] == Warning::Unknown;
            }
            std::vector<Warning> nodes(g.n_nodes, Warning::Unknown);
            bool ok = true;
            for (uint32_t i = 0; i < g.n_nodes && ok; ++i) {
                auto s = node_survey(g, st, i);
                if (!s) { ok = false; break; }
                auto w = detail::pure_warning(*s);
                ok = w.has_value();
                if (ok) nodes[i] = *w;
            }
            if (ok) fp.node_values = std::move(nodes);
            found.push_back(std::move(fp));
        }

        // next base-3 assignment
        size_t k = 0;
        while (k < e && ++digits[k] == 3) digits[k++] = 0;
        if (k == e) break;
    }
    return found;
}

// Marks fixed points whose node projection equals some cluster's warnings.
inline std::vector<bool> match_fixed_points_to_clusters(
    const std::vector<WarningFixedPoint>& fps, const ClusterSet& cs) {
    std::vector<bool> matched(fps.size(), false);
    for (size_t k = 0; k < fps.size(); ++k) {
        if (!fps[k].node_values) continue;
        for (const Cluster& cl : cs.clusters)
            if (cl.warning == *fps[k].node_values) {
                matched[k] = true;
                break;
            }
    }
    return matched;
}

// Exact two-pass evaluation of the survey recursion on a forest; nullopt if
// a product annihilates. Throws on cyclic factor graphs.
inline std::optional<MessageState> tree_exact_sp(const Instance& inst) {
    FactorGraph g(inst);
    const uint32_t n = g.n_nodes, m = g.n_clauses;

    {  // cycle check: union-find over variables and clauses
        std::vector<uint32_t> parent(n + m);
        for (uint32_t i = 0; i < parent.size(); ++i) parent[i] = i;
        auto find = [&](uint32_t x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        for (size_t e = 0; e < g.n_edges(); ++e) {
            const uint32_t a = find(g.edge_node[e]);
            const uint32_t b = find(n + g.edge_clause[e]);
            if (a == b) throw std::invalid_argument("factor graph is cyclic");
            parent[a] = b;
        }
    }

    MessageState st;
    st.s.assign(g.n_edges(), identity_survey());
    st.u.assign(g.n_edges(), identity_survey());

    std::vector<int64_t> parent_clause(n, -1);  // toward the root
    std::vector<int64_t> parent_var(m, -1);
    std::vector<uint8_t> var_seen(n, 0);
    std::vector<uint32_t> order;  // clauses in BFS order
    order.reserve(m);

    for (uint32_t root = 0; root < n; ++root) {
        if (var_seen[root]) continue;
        var_seen[root] = 1;
        const size_t level_start = order.size();
        for (uint32_t ne = g.node_offset[root]; ne < g.node_offset[root + 1]; ++ne) {
            const uint32_t c = g.edge_clause[g.node_edges[ne]];
            parent_var[c] = root;
            order.push_back(c);
        }
        for (size_t q = level_start; q < order.size(); ++q) {
            const uint32_t c = order[q];
            for (uint32_t e = g.clause_offset[c]; e < g.clause_offset[c + 1]; ++e) {
                const uint32_t a = g.edge_node[e];
                if (a == parent_var[c]) continue;
                var_seen[a] = 1;
                parent_clause[a] = c;
                for (uint32_t ne = g.node_offset[a]; ne < g.node_offset[a + 1]; ++ne) {
                    const uint32_t d = g.edge_clause[g.node_edges[ne]];
                    if (d == c) continue;
                    parent_var[d] = a;
                    order.push_back(d);
                }
            }
        }
    }

    // upward: deepest clauses first
    for (size_t q = order.size(); q-- > 0;) {
        const uint32_t c = order[q];
        const uint32_t p = uint32_t(parent_var[c]);
        uint32_t parent_edge = 0;
        for (uint32_t e = g.clause_offset[c]; e < g.clause_offset[c + 1]; ++e) {
            const uint32_t a = g.edge_node[e];
            if (a == p) { parent_edge = e; continue; }
            auto s = cavity_survey(g, st, a, c);
            if (!s) return std::nullopt;
            st.s[e] = *s;
        }
        st.u[parent_edge] = clause_message(g, st, c, p);
    }

    // downward: shallowest clauses first
    for (const uint32_t c : order) {
        const uint32_t p = uint32_t(parent_var[c]);
        uint32_t parent_edge = 0;
        for (uint32_t e = g.clause_offset[c]; e < g.clause_offset[c + 1]; ++e)
            if (g.edge_node[e] == p) { parent_edge = e; break; }
        auto s = cavity_survey(g, st, p, c);
        if (!s) return std::nullopt;
        st.s[parent_edge] = *s;
        for (uint32_t e = g.clause_offset[c]; e < g.clause_offset[c + 1]; ++e) {
            const uint32_t a = g.edge_node[e];
            if (a == p) continue;
            st.u[e] = clause_message(g, st, c, a);
        }
    }

    return st;
}

struct OracleCounts {
    uint64_t n_solutions = 0;
    uint64_t n_clusters = 0;
    uint64_t n_warning_fixed_points = 0;
};

inline OracleCounts oracle_counts(const Instance& inst) {
    OracleCounts oc;
    auto sols = exhaustive_solutions(inst);
    oc.n_solutions = sols.size();
    if (!sols.empty())
        oc.n_clusters = cluster_solutions(sols).clusters.size();
    oc.n_warning_fixed_points = enumerate_warning_fixed_points(inst).size();
    return oc;
}

}  // namespace spdec
