#pragma once

#include <vector>

#include "spdec/instance.hpp"
#include "spdec/rng.hpp"

namespace spdec::testing {

// Random forest-shaped instance: every clause joins variables from distinct
// components, so the factor graph stays acyclic. Unit clauses (which never
// close a cycle) appear with the given probability and give the recursion
// nontrivial messages.
inline Instance make_random_forest(Rng& rng, uint32_t max_vars,
                                   double unit_prob = 0.15) {
    const uint32_t n = 2 + uint32_t(rng.next_below(max_vars - 1));
    std::vector<uint32_t> parent(n);
    for (uint32_t v = 0; v < n; ++v) parent[v] = v;
    auto find = [&](uint32_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };

    std::vector<std::vector<Literal>> clauses;
    const uint32_t attempts = 2 * n;
    for (uint32_t a = 0; a < attempts; ++a) {
        if (rng.next_double() < unit_prob) {
            clauses.push_back({{uint32_t(rng.next_below(n)), rng.next_bool()}});
            continue;
        }
        const uint32_t k = 2 + uint32_t(rng.next_below(2));
        std::vector<uint32_t> picked;
        bool ok = true;
        for (uint32_t j = 0; j < k && ok; ++j) {
            const uint32_t v = uint32_t(rng.next_below(n));
            const uint32_t root = find(v);
            for (uint32_t p : picked) ok &= find(p) != root;
            if (ok) picked.push_back(v);
        }
        if (!ok || picked.size() < k) continue;
        std::vector<Literal> clause;
        for (uint32_t v : picked) clause.push_back({v, rng.next_bool()});
        for (size_t j = 1; j < picked.size(); ++j)
            parent[find(picked[j])] = find(picked[0]);
        clauses.push_back(std::move(clause));
    }
    return make_instance(n, clauses);
}

}  // namespace spdec::testing
