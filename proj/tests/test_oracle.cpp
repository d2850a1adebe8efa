#include <bit>
#include <fstream>
#include <sstream>

#include "catch2/catch_amalgamated.hpp"
#include "helpers.hpp"
#include "spdec/dimacs.hpp"
#include "spdec/oracle.hpp"

using namespace spdec;
using Catch::Matchers::WithinAbs;

namespace {

// Independent solution counter: evaluates 64 assignments per word.
uint64_t bit_parallel_count(const Instance& inst) {
    const uint32_t n = inst.n_vars;
    uint64_t count = 0;
    const uint64_t hi_limit = n > 6 ? (uint64_t(1) << (n - 6)) : 1;
    const uint64_t lane_mask =
        n >= 6 ? ~uint64_t(0) : (uint64_t(1) << (uint64_t(1) << n)) - 1;
    constexpr uint64_t lane_pattern[6] = {
        0xaaaaaaaaaaaaaaaaULL, 0xccccccccccccccccULL, 0xf0f0f0f0f0f0f0f0ULL,
        0xff00ff00ff00ff00ULL, 0xffff0000ffff0000ULL, 0xffffffff00000000ULL};
    for (uint64_t hi = 0; hi < hi_limit; ++hi) {
        uint64_t all_sat = lane_mask;
        for (size_t c = 0; c < inst.n_clauses() && all_sat; ++c) {
            uint64_t sat = 0;
            for (const Literal& l : inst.clause(c)) {
                uint64_t pat = l.var < 6 ? lane_pattern[l.var]
                               : ((hi >> (l.var - 6)) & 1) ? ~uint64_t(0)
                                                           : 0;
                sat |= l.negated ? ~pat : pat;
            }
            all_sat &= sat;
        }
        count += std::popcount(all_sat);
    }
    return count;
}

std::vector<Assignment> assignments_of(const std::vector<uint32_t>& masks,
                                       uint32_t n) {
    std::vector<Assignment> out;
    for (uint32_t m : masks) {
        Assignment a = Assignment::all_unset(n);
        for (uint32_t v = 0; v < n; ++v) a.set(v, (m >> v) & 1);
        out.push_back(std::move(a));
    }
    return out;
}

}  // namespace

TEST_CASE("exhaustive_solutions: small cases and the size guard") {
    Instance empty;
    empty.n_vars = 2;
    REQUIRE(exhaustive_solutions(empty).size() == 4);

    const Instance unit = make_instance(1, {{{0, false}}});
    auto sols = exhaustive_solutions(unit);
    REQUIRE(sols.size() == 1);
    REQUIRE(sols[0].get(0));

    Instance big;
    big.n_vars = 27;
    REQUIRE_THROWS_AS(exhaustive_solutions(big), std::invalid_argument);
}

TEST_CASE("exhaustive_solutions agrees with a bit-parallel recount") {
    Rng rng(61);
    for (int t = 0; t < 10; ++t) {
        const Instance inst = generate_random(20, 4.2, 3, rng.next_u64());
        REQUIRE(exhaustive_solutions(inst).size() == bit_parallel_count(inst));
    }
}

TEST_CASE("cluster_solutions: worked examples") {
    // {TT, TF}: one cluster, x0 always true, x1 varies
    auto cs = cluster_solutions(assignments_of({0b11, 0b01}, 2));
    REQUIRE(cs.clusters.size() == 1);
    REQUIRE(cs.clusters[0].warning ==
            std::vector<Warning>{Warning::True, Warning::Unknown});

    // {TT, FF}: two singletons at Hamming distance 2
    cs = cluster_solutions(assignments_of({0b11, 0b00}, 2));
    REQUIRE(cs.clusters.size() == 2);
    REQUIRE(cs.clusters[0].warning ==
            std::vector<Warning>{Warning::True, Warning::True});
    REQUIRE(cs.clusters[1].warning ==
            std::vector<Warning>{Warning::False, Warning::False});

    // the full cube is one all-unknown cluster
    cs = cluster_solutions(assignments_of({0, 1, 2, 3}, 2));
    REQUIRE(cs.clusters.size() == 1);
    REQUIRE(cs.clusters[0].warning ==
            std::vector<Warning>{Warning::Unknown, Warning::Unknown});

    REQUIRE_THROWS_AS(cluster_solutions({}), std::invalid_argument);
}

TEST_CASE("cluster warnings satisfy the all/none/mixed rules exactly") {
    Rng rng(62);
    for (int t = 0; t < 50; ++t) {
        const uint32_t n = 4 + uint32_t(rng.next_below(9));
        const Instance inst =
            generate_random(n, 1.0 + 2.0 * rng.next_double(), 3, rng.next_u64());
        auto sols = exhaustive_solutions(inst);
        if (sols.empty()) continue;
        auto cs = cluster_solutions(sols);
        size_t total = 0;
        for (const Cluster& cl : cs.clusters) {
            total += cl.members.size();
            for (uint32_t v = 0; v < n; ++v) {
                size_t trues = 0;
                for (uint32_t mi : cl.members) trues += sols[mi].get(v);
                const Warning expect = trues == cl.members.size() ? Warning::True
                                       : trues == 0 ? Warning::False
                                                    : Warning::Unknown;
                REQUIRE(cl.warning[v] == expect);
            }
        }
        REQUIRE(total == sols.size());  // clusters partition the legal set
    }
}

TEST_CASE("warning fixed points: degenerate and worked instances") {
    // no clauses: only the empty/trivial point
    Instance empty;
    empty.n_vars = 2;
    auto fps = enumerate_warning_fixed_points(empty);
    REQUIRE(fps.size() == 1);
    REQUIRE(fps[0].trivial);

    // one positive 3-clause: the all-indifferent point is a fixed point
    const Instance one = make_instance(3, {{{0, false}, {1, false}, {2, false}}});
    fps = enumerate_warning_fixed_points(one);
    bool has_trivial = false;
    for (const auto& fp : fps) has_trivial |= fp.trivial;
    REQUIRE(has_trivial);

    // guard
    const Instance wide = generate_random(20, 1.0, 3, 3);  // 20 clauses, E=60
    REQUIRE_THROWS_AS(enumerate_warning_fixed_points(wide), std::invalid_argument);
}

TEST_CASE("warning fixed points: two-clause loop has two polarized points") {
    // (x0 v x1) and (-x0 v -x1): legal sets {TF} and {FT}
    const Instance loop =
        make_instance(2, {{{0, false}, {1, false}}, {{0, true}, {1, true}}});
    auto fps = enumerate_warning_fixed_points(loop);
    REQUIRE(fps.size() == 4);

    auto sols = exhaustive_solutions(loop);
    REQUIRE(sols.size() == 2);
    auto cs = cluster_solutions(sols);
    REQUIRE(cs.clusters.size() == 2);

    auto matched = match_fixed_points_to_clusters(fps, cs);
    size_t n_matched = 0, n_trivial = 0, n_contradictory = 0;
    for (size_t i = 0; i < fps.size(); ++i) {
        n_matched += matched[i];
        n_trivial += fps[i].trivial;
        n_contradictory += !fps[i].node_values.has_value();
    }
    // the two cluster warnings appear; the trivial point and one fixed point
    // with a contradictory node projection do not correspond to clusters
    REQUIRE(n_matched == 2);
    REQUIRE(n_trivial == 1);
    REQUIRE(n_contradictory == 1);
}

TEST_CASE("golden instances keep their enumerated counts") {
    const std::string dir = std::string(SPDEC_TESTS_DIR) + "/golden";
    std::ifstream golden(dir + "/golden.csv");
    REQUIRE(golden.good());
    std::string line;
    std::getline(golden, line);
    REQUIRE(line == "instance_id,n_solutions,n_clusters,n_warning_fixed_points");
    size_t rows = 0;
    while (std::getline(golden, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string id, ns, nc, nw;
        std::getline(ss, id, ',');
        std::getline(ss, ns, ',');
        std::getline(ss, nc, ',');
        std::getline(ss, nw, ',');
        const Instance inst = parse_dimacs_file(dir + "/" + id + ".cnf");
        const OracleCounts oc = oracle_counts(inst);
        REQUIRE(oc.n_solutions == std::stoull(ns));
        REQUIRE(oc.n_clusters == std::stoull(nc));
        REQUIRE(oc.n_warning_fixed_points == std::stoull(nw));
        ++rows;
    }
    REQUIRE(rows == 2);
}

TEST_CASE("tree_exact_sp: cyclic graphs are rejected") {
    const Instance loop =
        make_instance(2, {{{0, false}, {1, false}}, {{0, true}, {1, true}}});
    REQUIRE_THROWS_AS(tree_exact_sp(loop), std::invalid_argument);
}

TEST_CASE("tree_exact_sp: forced chain matches the hand computation") {
    const Instance inst = make_instance(2, {{{0, false}}, {{0, true}, {1, false}}});
    auto st = tree_exact_sp(inst);
    REQUIRE(st);
    REQUIRE(st->s[0].i == 1.0);
    REQUIRE(st->s[1].t == 1.0);
    REQUIRE(st->s[2].i == 1.0);
    REQUIRE(st->u[0].t == 1.0);
    REQUIRE(st->u[1].i == 1.0);
    REQUIRE(st->u[2].t == 1.0);
}

TEST_CASE("tree_exact_sp: empty and single-clause instances") {
    Instance empty;
    empty.n_vars = 3;
    auto st = tree_exact_sp(empty);
    REQUIRE(st);
    REQUIRE(st->s.empty());

    const Instance one = make_instance(3, {{{0, false}, {1, true}, {2, false}}});
    st = tree_exact_sp(one);
    REQUIRE(st);
    for (const Survey& s : st->s) REQUIRE(s.i == 1.0);
    for (const Survey& u : st->u) REQUIRE(u.i == 1.0);
}

TEST_CASE("tree_exact_sp agrees with iterated solve on random forests") {
    Rng rng(63);
    SPConfig cfg;
    cfg.tol = 1e-12;
    cfg.max_sweeps = 2000;
    int compared = 0;
    for (int t = 0; t < 40; ++t) {
        const Instance inst = testing::make_random_forest(rng, 30);
        auto exact = tree_exact_sp(inst);
        FactorGraph g(inst);
        auto [st, res] = solve(g, cfg, rng.next_u64());
        if (!exact) {
            REQUIRE(res.status == SPStatus::Contradiction);
            continue;
        }
        REQUIRE(converged(res.status));
        for (size_t e = 0; e < g.n_edges(); ++e) {
            REQUIRE_THAT(st.s[e].t, WithinAbs(exact->s[e].t, 1e-10));
            REQUIRE_THAT(st.s[e].i, WithinAbs(exact->s[e].i, 1e-10));
            REQUIRE_THAT(st.s[e].f, WithinAbs(exact->s[e].f, 1e-10));
            REQUIRE_THAT(st.u[e].t, WithinAbs(exact->u[e].t, 1e-10));
            REQUIRE_THAT(st.u[e].f, WithinAbs(exact->u[e].f, 1e-10));
        }
        ++compared;
    }
    REQUIRE(compared >= 20);
}

TEST_CASE("oracle summary on a tiny instance reports without asserting") {
    const Instance inst = generate_random(8, 0.45, 3, 91);  // E <= 12
    const OracleCounts oc = oracle_counts(inst);
    if (oc.n_solutions > 0) REQUIRE(oc.n_clusters >= 1);
    REQUIRE(oc.n_warning_fixed_points >= 1);

    FactorGraph g(inst);
    SPConfig cfg;
    cfg.tol = 1e-10;
    auto [st, res] = solve(g, cfg, 91);
    if (res.sigma) {
        INFO("exp(sigma)=" << std::exp(*res.sigma)
                           << " clusters=" << oc.n_clusters
                           << " warning_fps=" << oc.n_warning_fixed_points);
        REQUIRE(std::isfinite(*res.sigma));
    }
}
