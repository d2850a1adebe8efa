#pragma once

#include <cstdint>
#include <vector>

#include "spdec/instance.hpp"

namespace spdec {

// Bipartite variable/clause graph with a dense id per (node, clause)
// incidence. Edge ids coincide with positions in the instance's clause-major
// literal array, so clause c owns the contiguous id range
// [clause_offset[c], clause_offset[c+1]). Immutable after construction.
struct FactorGraph {
    uint32_t n_nodes = 0;
    uint32_t n_clauses = 0;

    std::vector<uint32_t> clause_offset;  // size n_clauses + 1
    std::vector<uint32_t> edge_node;      // size E
    std::vector<uint8_t> edge_negated;    // size E
    std::vector<uint32_t> edge_clause;    // size E

    std::vector<uint32_t> node_offset;  // size n_nodes + 1
    std::vector<uint32_t> node_edges;   // size E, edge ids grouped by node

    FactorGraph() = default;

    explicit FactorGraph(const Instance& inst) {
        n_nodes = inst.n_vars;
        n_clauses = uint32_t(inst.n_clauses());
        clause_offset = inst.clause_start;
        const size_t e = inst.lits.size();
        edge_node.resize(e);
        edge_negated.resize(e);
        edge_clause.resize(e);
        for (uint32_t c = 0; c < n_clauses; ++c)
            for (uint32_t eid = clause_offset[c]; eid < clause_offset[c + 1]; ++eid) {
                edge_node[eid] = inst.lits[eid].var;
                edge_negated[eid] = inst.lits[eid].negated;
                edge_clause[eid] = c;
            }
        node_offset.assign(n_nodes + 1, 0);
        for (uint32_t n : edge_node) node_offset[n + 1]++;
        for (uint32_t v = 0; v < n_nodes; ++v) node_offset[v + 1] += node_offset[v];
        node_edges.resize(e);
        std::vector<uint32_t> fill(node_offset.begin(), node_offset.end() - 1);
        for (uint32_t eid = 0; eid < e; ++eid)
            node_edges[fill[edge_node[eid]]++] = eid;
    }

    size_t n_edges() const { return edge_node.size(); }
    uint32_t clause_size(uint32_t c) const {
        return clause_offset[c + 1] - clause_offset[c];
    }
    uint32_t degree(uint32_t node) const {
        return node_offset[node + 1] - node_offset[node];
    }
};

}  // namespace spdec
