#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "spdec/csv.hpp"
#include "spdec/decimation.hpp"
#include "spdec/dimacs.hpp"
#include "spdec/walksat.hpp"

namespace spdec {

enum class RunMode { Solve, Trace, AlphaScan, DeltaCorr, Critical };

struct RunSpec {
    RunMode mode = RunMode::Solve;
    uint64_t n = 10000;
    double alpha = 4.2;
    std::vector<double> alpha_grid;  // falls back to {alpha} when empty
    uint32_t k = 3;
    uint64_t seed = 1;
    uint32_t seeds = 1;  // consecutive seeds starting at `seed`
    SelectionRule rule = SelectionRule::Certitude;
    double batch_fraction = 1e-4;
    SPConfig sp;
    WalkSatConfig walksat;
    std::string out_path;
    std::string dimacs_path;
    bool deterministic = true;
    unsigned threads = 0;  // 0: SPDEC_THREADS env or hardware concurrency
};

inline unsigned worker_count(unsigned requested) {
    if (requested) return requested;
    if (const char* env = std::getenv("SPDEC_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return unsigned(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

// Runs fn(0..n_tasks) on a fixed-size pool; results land in task order, so
// downstream output is independent of scheduling.
template <class R>
std::vector<R> run_parallel(size_t n_tasks, unsigned threads,
                            const std::function<R(size_t)>& fn) {
    std::vector<R> results(n_tasks);
    if (n_tasks == 0) return results;
    const unsigned nt = std::min<size_t>(worker_count(threads), n_tasks);
    if (nt <= 1) {
        for (size_t t = 0; t < n_tasks; ++t) results[t] = fn(t);
        return results;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (unsigned w = 0; w < nt; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const size_t t = next.fetch_add(1);
                if (t >= n_tasks) return;
                results[t] = fn(t);
            }
        });
    for (auto& th : pool) th.join();
    return results;
}

struct PipelineResult {
    DecimationOutcome dec;
    std::optional<Assignment> assignment;  // verified on the input instance
    bool residual_unsolved = false;
};

// Decimate; if the residual is easy, finish it with WalkSAT and merge the
// two partial assignments. Success is only reported after verification
// against the input instance.
inline PipelineResult run_pipeline(const Instance& inst,
                                   const DecimationConfig& dcfg,
                                   const WalkSatConfig& wcfg, uint64_t seed) {
    PipelineResult out;
    out.dec = run(inst, dcfg, mix_seed(seed, 0x41));
    if (out.dec.status != DecimationStatus::EasyResidual) return out;

    WalkSatConfig w = wcfg;
    w.seed = mix_seed(seed, 0x42);
    auto residual_sol = solve_easy(out.dec.residual, w);
    if (!residual_sol) {
        out.residual_unsolved = true;
        return out;
    }
    Assignment full = out.dec.fixed;
    for (uint32_t v = 0; v < out.dec.residual.n_vars; ++v)
        full.set(out.dec.residual.orig_id(v), residual_sol->get(v));
    for (auto& val : full.values)
        if (val == Value::Unset) val = Value::True;  // defensive; all covered
    if (!verify_assignment(inst, full)) {
        out.residual_unsolved = true;
        return out;
    }
    out.assignment = std::move(full);
    return out;
}

struct GridTask {
    double alpha = 0.0;
    uint64_t seed = 0;
};

inline std::vector<GridTask> make_grid(const RunSpec& spec) {
    std::vector<double> alphas =
        spec.alpha_grid.empty() ? std::vector<double>{spec.alpha} : spec.alpha_grid;
    std::vector<GridTask> tasks;
    for (double a : alphas)
        for (uint32_t s = 0; s < std::max(1u, spec.seeds); ++s)
            tasks.push_back({a, spec.seed + s});
    return tasks;
}

inline DecimationConfig decimation_config(const RunSpec& spec) {
    DecimationConfig d;
    d.rule = spec.rule;
    d.batch_fraction = spec.batch_fraction;
    d.sp = spec.sp;
    return d;
}

// Aggregates disjoint windows of decimation steps; rows without a finite
// measured delta (terminal non-convergent steps) are skipped.
struct WindowPoint {
    size_t end_step = 0;
    double mean_pred = 0.0;
    double mean_measured = 0.0;
};

inline std::vector<WindowPoint> window_means(const std::vector<StepRecord>& trace,
                                             size_t window) {
    std::vector<WindowPoint> points;
    double sum_pred = 0, sum_meas = 0;
    size_t in_window = 0, step = 0;
    for (const StepRecord& rec : trace) {
        if (rec.chosen.empty() || std::isnan(rec.delta_measured)) continue;
        ++step;
        sum_pred += rec.chosen[0].delta_pred;
        sum_meas += rec.delta_measured;
        if (++in_window == window) {
            points.push_back({step, sum_pred / window, sum_meas / window});
            sum_pred = sum_meas = 0;
            in_window = 0;
        }
    }
    return points;
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    size_t points = 0;
    double zero_crossing() const { return -intercept / slope; }
};

inline std::optional<LinearFit> linear_fit(
    const std::vector<std::pair<double, double>>& xy) {
    if (xy.size() < 2) return std::nullopt;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto [x, y] : xy) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = double(xy.size());
    const double det = n * sxx - sx * sx;
    if (det == 0.0) return std::nullopt;
    LinearFit fit;
    fit.slope = (n * sxy - sx * sy) / det;
    fit.intercept = (sy * sxx - sx * sxy) / det;
    fit.points = xy.size();
    return fit;
}

namespace detail {

inline std::string alpha_tag(double a) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", a);
    return buf;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file " + path);
    return out;
}

// status column: RUNNING while the loop continues, terminal outcome on the
// last row
inline std::string row_status(const DecimationOutcome& dec, size_t idx) {
    return idx + 1 == dec.trace.size() ? to_string(dec.status)
                                       : std::string("RUNNING");
}

}  // namespace detail

// ---- solve --------------------------------------------------------------

inline int cmd_solve(const RunSpec& spec, std::ostream& log = std::cout) {
    Instance inst;
    if (!spec.dimacs_path.empty()) {
        inst = parse_dimacs_file(spec.dimacs_path);
        log << "c instance " << spec.dimacs_path << " n=" << inst.n_vars
            << " m=" << inst.n_clauses() << "\n";
    } else {
        inst = generate_random(uint32_t(spec.n), spec.alpha, spec.k, spec.seed);
        log << "c random instance n=" << inst.n_vars << " m=" << inst.n_clauses()
            << " k=" << spec.k << " seed=" << spec.seed << "\n";
    }

    PipelineResult pr =
        run_pipeline(inst, decimation_config(spec), spec.walksat, spec.seed);

    if (pr.assignment) {
        log << "s SATISFIABLE\n";
        std::string vline = "v";
        for (uint32_t v = 0; v < inst.n_vars; ++v) {
            vline += pr.assignment->get(v) ? " " + std::to_string(v + 1)
                                           : " -" + std::to_string(v + 1);
            if (vline.size() > 72) {
                log << vline << "\n";
                vline = "v";
            }
        }
        log << vline << " 0\n";
        if (!spec.out_path.empty()) {
            auto f = detail::open_out(spec.out_path);
            f << "s SATISFIABLE\n";
            for (uint32_t v = 0; v < inst.n_vars; ++v)
                f << (pr.assignment->get(v) ? "v " : "v -") << (v + 1) << "\n";
        }
        return 10;
    }
    const std::string why = pr.residual_unsolved
                                ? "RESIDUAL_UNSOLVED"
                                : to_string(pr.dec.status);
    log << "c status " << why << "\n";
    log << "s UNKNOWN\n";
    return 20;
}

// ---- trace ----------------------------------------------------------------

inline void write_trace_csv(const RunSpec& spec, const GridTask& task,
                            const DecimationOutcome& dec, std::ostream& out) {
    CsvWriter w(out);
    w.field("n").field("alpha").field("seed").field("selection_rule")
        .field("step").field("f").field("sigma_density")
        .field("chosen_certitude").field("chosen_polarization")
        .field("delta_pred").field("delta_measured").field("status");
    w.endrow();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (size_t i = 0; i < dec.trace.size(); ++i) {
        const StepRecord& rec = dec.trace[i];
        const bool has = !rec.chosen.empty();
        w.field(spec.n).field(task.alpha).field(task.seed)
            .field(to_string(spec.rule)).field(i).field(rec.f)
            .field(rec.sigma_density)
            .field(has ? rec.chosen[0].certitude : nan)
            .field(has ? rec.chosen[0].polarization : nan)
            .field(has ? rec.chosen[0].delta_pred : nan)
            .field(i == 0 ? nan : rec.delta_measured)
            .field(detail::row_status(dec, i));
        w.endrow();
    }
}

inline int cmd_trace(const RunSpec& spec, std::ostream& log = std::cout) {
    const auto tasks = make_grid(spec);
    const std::string dir = spec.out_path.empty() ? "." : spec.out_path;
    std::filesystem::create_directories(dir);

    std::vector<DecimationOutcome> runs = run_parallel<DecimationOutcome>(
        tasks.size(), spec.threads, [&](size_t t) {
            Instance inst = generate_random(uint32_t(spec.n), tasks[t].alpha,
                                            spec.k, tasks[t].seed);
            return run(inst, decimation_config(spec),
                       mix_seed(tasks[t].seed, 0x41));
        });

    for (size_t t = 0; t < tasks.size(); ++t) {
        const std::string path = dir + "/trace_n" + std::to_string(spec.n) +
                                 "_a" + detail::alpha_tag(tasks[t].alpha) +
                                 "_s" + std::to_string(tasks[t].seed) + ".csv";
        auto out = detail::open_out(path);
        write_trace_csv(spec, tasks[t], runs[t], out);
        log << "c wrote " << path << " (" << runs[t].trace.size() << " rows, "
            << to_string(runs[t].status) << ")\n";
    }
    return 0;
}

// ---- alpha-scan -----------------------------------------------------------

struct ScanPoint {
    double initial_density = 0.0;
    double final_density = 0.0;
    SPStatus initial_status = SPStatus::NoConvergence;
    DecimationStatus outcome = DecimationStatus::Contradiction;
    bool has_final = false;
};

inline ScanPoint scan_point(const DecimationOutcome& dec) {
    ScanPoint p;
    p.outcome = dec.status;
    p.initial_status = dec.trace.front().sp_status;
    p.initial_density = converged(p.initial_status)
                            ? dec.trace.front().sigma_density
                            : std::numeric_limits<double>::quiet_NaN();
    // last nontrivial complexity seen before termination
    p.final_density = 0.0;
    for (auto it = dec.trace.rbegin(); it != dec.trace.rend(); ++it)
        if (it->sp_status == SPStatus::ConvergedNontrivial) {
            p.final_density = it->sigma_density;
            p.has_final = true;
            break;
        }
    return p;
}

inline int cmd_alpha_scan(const RunSpec& spec, std::ostream& log = std::cout) {
    const auto tasks = make_grid(spec);
    if (spec.alpha_grid.size() < 3)
        throw std::invalid_argument("alpha-scan needs a grid of at least 3 points");

    std::vector<ScanPoint> points = run_parallel<ScanPoint>(
        tasks.size(), spec.threads, [&](size_t t) {
            Instance inst = generate_random(uint32_t(spec.n), tasks[t].alpha,
                                            spec.k, tasks[t].seed);
            return scan_point(run(inst, decimation_config(spec),
                                  mix_seed(tasks[t].seed, 0x41)));
        });

    const std::string path =
        spec.out_path.empty() ? "alpha_scan.csv" : spec.out_path;
    auto out = detail::open_out(path);
    CsvWriter w(out);
    w.field("row_type").field("n").field("alpha").field("seed")
        .field("selection_rule").field("initial_sigma_density")
        .field("final_sigma_density").field("initial_sp_status")
        .field("outcome").field("curve").field("slope").field("intercept")
        .field("zero_crossing").field("alpha_lo").field("alpha_hi");
    w.endrow();
    for (size_t t = 0; t < tasks.size(); ++t) {
        const ScanPoint& p = points[t];
        w.field("point").field(spec.n).field(tasks[t].alpha)
            .field(tasks[t].seed).field(to_string(spec.rule))
            .field(p.initial_density).field(p.final_density)
            .field(to_string(p.initial_status)).field(to_string(p.outcome))
            .field("").field("").field("").field("").field("").field("");
        w.endrow();
    }

    // seed-averaged fit per curve over the grid range
    const double lo = *std::min_element(spec.alpha_grid.begin(), spec.alpha_grid.end());
    const double hi = *std::max_element(spec.alpha_grid.begin(), spec.alpha_grid.end());
    for (int curve = 0; curve < 2; ++curve) {
        std::vector<std::pair<double, double>> xy;
        for (double a : spec.alpha_grid) {
            double sum = 0;
            size_t cnt = 0;
            for (size_t t = 0; t < tasks.size(); ++t) {
                if (tasks[t].alpha != a) continue;
                const ScanPoint& p = points[t];
                if (curve == 0) {
                    if (p.initial_status == SPStatus::ConvergedNontrivial) {
                        sum += p.initial_density;
                        ++cnt;
                    }
                } else if (p.has_final) {
                    sum += p.final_density;
                    ++cnt;
                }
            }
            if (cnt) xy.push_back({a, sum / double(cnt)});
        }
        const char* name = curve == 0 ? "initial" : "final";
        auto fit = linear_fit(xy);
        if (!fit) {
            log << "c warning: " << name
                << " fit omitted, fewer than 2 convergent grid points\n";
            continue;
        }
        w.field("fit").field(spec.n).field("").field("")
            .field(to_string(spec.rule)).field("").field("").field("")
            .field("").field(name).field(fit->slope).field(fit->intercept)
            .field(fit->zero_crossing()).field(lo).field(hi);
        w.endrow();
    }
    log << "c wrote " << path << "\n";
    return 0;
}

// ---- delta-corr -----------------------------------------------------------

inline int cmd_delta_corr(const RunSpec& spec, std::ostream& log = std::cout) {
    RunSpec single = spec;
    single.batch_fraction = 0.0;  // one variable per step
    const auto tasks = make_grid(single);

    std::vector<DecimationOutcome> runs = run_parallel<DecimationOutcome>(
        tasks.size(), single.threads, [&](size_t t) {
            Instance inst = generate_random(uint32_t(single.n), tasks[t].alpha,
                                            single.k, tasks[t].seed);
            return run(inst, decimation_config(single),
                       mix_seed(tasks[t].seed, 0x41));
        });

    const std::string path =
        spec.out_path.empty() ? "delta_corr.csv" : spec.out_path;
    auto out = detail::open_out(path);
    CsvWriter w(out);
    w.field("n").field("alpha").field("seed").field("selection_rule")
        .field("step").field("f").field("delta_pred").field("delta_measured")
        .field("certitude").field("s_t").field("s_i").field("s_f")
        .field("window_pred").field("window_measured").field("status");
    w.endrow();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (size_t t = 0; t < tasks.size(); ++t) {
        const DecimationOutcome& dec = runs[t];
        auto windows = window_means(dec.trace, 10);
        size_t wi = 0, step = 0;
        for (size_t i = 0; i < dec.trace.size(); ++i) {
            const StepRecord& rec = dec.trace[i];
            const bool has = !rec.chosen.empty();
            if (has) ++step;
            double wp = nan, wm = nan;
            if (wi < windows.size() && has && windows[wi].end_step == step) {
                wp = windows[wi].mean_pred;
                wm = windows[wi].mean_measured;
                ++wi;
            }
            const ChosenVar cv = has ? rec.chosen[0] : ChosenVar{};
            w.field(spec.n).field(tasks[t].alpha).field(tasks[t].seed)
                .field(to_string(spec.rule)).field(i).field(rec.f)
                .field(has ? cv.delta_pred : nan)
                .field(i == 0 ? nan : rec.delta_measured)
                .field(has ? cv.certitude : nan)
                .field(has ? cv.s_t : nan).field(has ? cv.s_i : nan)
                .field(has ? cv.s_f : nan).field(wp).field(wm)
                .field(detail::row_status(dec, i));
            w.endrow();
        }
    }
    log << "c wrote " << path << "\n";
    return 0;
}

// ---- critical ---------------------------------------------------------------

inline int cmd_critical(const RunSpec& spec, std::ostream& log = std::cout) {
    const auto tasks = make_grid(spec);

    std::vector<DecimationOutcome> runs = run_parallel<DecimationOutcome>(
        tasks.size(), spec.threads, [&](size_t t) {
            Instance inst = generate_random(uint32_t(spec.n), tasks[t].alpha,
                                            spec.k, tasks[t].seed);
            return run(inst, decimation_config(spec),
                       mix_seed(tasks[t].seed, 0x41));
        });

    const std::string path =
        spec.out_path.empty() ? "critical.csv" : spec.out_path;
    auto out = detail::open_out(path);
    CsvWriter w(out);
    w.field("n").field("alpha").field("seed").field("selection_rule")
        .field("f_jump").field("residual_clauses").field("residual_vars")
        .field("outcome");
    w.endrow();
    for (size_t t = 0; t < tasks.size(); ++t) {
        const StepRecord& last = runs[t].trace.back();
        w.field(spec.n).field(tasks[t].alpha).field(tasks[t].seed)
            .field(to_string(spec.rule)).field(last.f).field(last.m_clauses)
            .field(last.n_free).field(to_string(runs[t].status));
        w.endrow();
    }
    log << "c wrote " << path << "\n";
    return 0;
}

}  // namespace spdec
