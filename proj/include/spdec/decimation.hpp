#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "spdec/instance.hpp"
#include "spdec/sp.hpp"

namespace spdec {

enum class SelectionRule { Certitude, Polarization };

inline const char* to_string(SelectionRule r) {
    return r == SelectionRule::Certitude ? "certitude" : "polarization";
}

struct DecimationConfig {
    SelectionRule rule = SelectionRule::Certitude;
    // fraction of the run's starting variable count fixed per step, >= 1 var
    double batch_fraction = 1e-4;
    SPConfig sp;
    bool abort_on_negative_sigma = true;
};

struct RankedVar {
    uint32_t node = 0;
    double score = 0.0;
    bool direction = true;  // majority component
};

// Descending by certitude or polarization of the node surveys; ties broken
// by lower node id. Requires a convergent nontrivial state.
inline std::vector<RankedVar> rank_variables(const FactorGraph& g,
                                             const MessageState& st,
                                             SelectionRule rule) {
    std::vector<RankedVar> ranked;
    ranked.reserve(g.n_nodes);
    for (uint32_t i = 0; i < g.n_nodes; ++i) {
        auto s = node_survey(g, st, i);
        if (!s) throw std::logic_error("contradictory node survey in ranking");
        const double score =
            rule == SelectionRule::Certitude ? certitude(*s) : polarization(*s);
        ranked.push_back({i, score, s->t >= s->f});
    }
    std::sort(ranked.begin(), ranked.end(),
              [](const RankedVar& a, const RankedVar& b) {
                  if (a.score != b.score) return a.score > b.score;
                  return a.node < b.node;
              });
    return ranked;
}

struct ChosenVar {
    uint32_t orig_id = 0;
    double s_t = 0.0, s_i = 1.0, s_f = 0.0;  // node survey at fixing time
    double certitude = 0.0;
    double polarization = 0.0;
    double delta_pred = 0.0;
    bool direction = true;
};

struct StepRecord {
    double f = 0.0;              // cumulative fraction of starting vars fixed
    double sigma_total = 0.0;    // NaN when SP did not converge
    double sigma_density = 0.0;  // sigma_total / max(1, clauses remaining)
    std::vector<ChosenVar> chosen;        // empty on the initial record
    double delta_measured = 0.0;          // sigma(prev) - sigma(now)
    SPStatus sp_status = SPStatus::NoConvergence;
    int sweeps = 0;
    uint64_t n_free = 0;
    uint64_t m_clauses = 0;
};

enum class DecimationStatus {
    EasyResidual,
    NegativeComplexity,
    SpFailure,
    Contradiction,
};

inline const char* to_string(DecimationStatus s) {
    switch (s) {
        case DecimationStatus::EasyResidual: return "EASY_RESIDUAL";
        case DecimationStatus::NegativeComplexity: return "NEGATIVE_COMPLEXITY";
        case DecimationStatus::SpFailure: return "SP_FAILURE";
        case DecimationStatus::Contradiction: return "CONTRADICTION";
    }
    return "?";
}

struct DecimationOutcome {
    DecimationStatus status = DecimationStatus::Contradiction;
    std::vector<StepRecord> trace;
    Instance residual;  // remaining problem at termination
    Assignment fixed;   // indexed by original ids; Unset where still free
};

namespace detail {

// Surviving edges keep their clause-major order under simplification, so the
// transfer is a single aligned walk over the old literal array.
inline MessageState transfer_messages(const Instance& old_inst,
                                      const MessageState& old_st,
                                      const std::vector<int32_t>& var_map,
                                      const std::vector<int32_t>& clause_map,
                                      size_t new_edge_count) {
    MessageState warm;
    warm.s.resize(new_edge_count);
    warm.u.resize(new_edge_count);
    warm.sweeps = old_st.sweeps;
    size_t new_eid = 0;
    for (size_t c = 0; c < old_inst.n_clauses(); ++c) {
        if (clause_map[c] < 0) continue;
        for (uint32_t e = old_inst.clause_start[c]; e < old_inst.clause_start[c + 1]; ++e) {
            if (var_map[old_inst.lits[e].var] < 0) continue;
            warm.s[new_eid++] = old_st.s[e];
        }
    }
    return warm;
}

}  // namespace detail

// Decimation loop: solve SP, fix the top-ranked batch along majority
// directions (skipping anything unit propagation already forced), re-solve
// warm-started, and stop on the first terminal condition.
inline DecimationOutcome run(const Instance& original,
                             const DecimationConfig& cfg, uint64_t seed) {
    DecimationOutcome out;
    const double start_n = std::max<double>(1.0, original.n_vars);

    uint32_t id_space = original.n_vars;
    for (uint32_t id : original.orig_ids) id_space = std::max(id_space, id + 1);
    out.fixed = Assignment::all_unset(id_space);

    // K=1 clauses are removed before SP ever runs
    ChainedSimplify pre = propagate_units(original);
    for (auto [oid, val] : pre.forced()) out.fixed.set(oid, val);
    size_t fixed_count = pre.forced().size();
    if (pre.contradiction()) {
        out.status = DecimationStatus::Contradiction;
        out.residual = pre.take();
        return out;
    }
    Instance work = pre.take();

    const uint64_t batch =
        std::max<uint64_t>(1, uint64_t(std::llround(cfg.batch_fraction * start_n)));

    FactorGraph graph(work);
    uint64_t step = 0;
    SolveOutput sol = solve(graph, cfg.sp, mix_seed(seed, 1000));

    const double nan = std::numeric_limits<double>::quiet_NaN();
    auto push_record = [&](std::vector<ChosenVar> chosen, double delta_measured,
                           const SPResult& r) {
        StepRecord rec;
        rec.f = double(fixed_count) / start_n;
        rec.sigma_total = r.sigma ? *r.sigma : nan;
        rec.sigma_density =
            rec.sigma_total / double(std::max<size_t>(1, work.n_clauses()));
        rec.chosen = std::move(chosen);
        rec.delta_measured = delta_measured;
        rec.sp_status = r.status;
        rec.sweeps = r.sweeps;
        rec.n_free = work.n_vars;
        rec.m_clauses = work.n_clauses();
        out.trace.push_back(std::move(rec));
    };

    push_record({}, 0.0, sol.result);

    for (;;) {
        const SPStatus status = sol.result.status;
        if (status == SPStatus::ConvergedTrivial) {
            out.status = DecimationStatus::EasyResidual;
            break;
        }
        if (status == SPStatus::Contradiction ||
            status == SPStatus::UnsatCertificate) {
            out.status = DecimationStatus::Contradiction;
            break;
        }
        if (status == SPStatus::NoConvergence) {
            out.status = DecimationStatus::SpFailure;
            break;
        }
        if (cfg.abort_on_negative_sigma && out.trace.back().sigma_density < 0.0) {
            out.status = DecimationStatus::NegativeComplexity;
            break;
        }

        const double prev_sigma = *sol.result.sigma;
        std::vector<RankedVar> ranked = rank_variables(graph, sol.state, cfg.rule);

        ChainedSimplify chain(work);
        std::vector<ChosenVar> chosen;
        bool contradiction = false;
        for (const RankedVar& rv : ranked) {
            if (chosen.size() >= batch) break;
            const int32_t cur = chain.var_map()[rv.node];
            if (cur < 0) continue;  // already forced earlier in this batch
            auto s = node_survey(graph, sol.state, rv.node);
            chosen.push_back({work.orig_id(rv.node), s->t, s->i, s->f,
                              certitude(*s), polarization(*s),
                              -std::log1p(-std::min(s->t, s->f)), rv.direction});
            if (!chain.fix(uint32_t(cur), rv.direction)) {
                contradiction = true;
                break;
            }
        }
        for (auto [oid, val] : chain.forced()) out.fixed.set(oid, val);
        fixed_count += chain.forced().size();

        if (contradiction) {
            SPResult dummy;
            dummy.status = SPStatus::Contradiction;
            Instance reduced = chain.take();
            std::swap(work, reduced);
            push_record(std::move(chosen), nan, dummy);
            out.status = DecimationStatus::Contradiction;
            break;
        }

        Instance reduced = chain.take();
        FactorGraph new_graph(reduced);
        MessageState warm = detail::transfer_messages(
            work, sol.state, chain.var_map(), chain.clause_map(),
            new_graph.n_edges());
        work = std::move(reduced);
        graph = std::move(new_graph);

        ++step;
        sol = solve(graph, cfg.sp, mix_seed(seed, 1000 + step), std::move(warm));

        const double new_sigma = sol.result.sigma ? *sol.result.sigma : nan;
        push_record(std::move(chosen), prev_sigma - new_sigma, sol.result);
    }

    out.residual = std::move(work);
    return out;
}

}  // namespace spdec
