// spdec: survey propagation + decimation for random K-SAT.
//
// Subcommands: solve, trace, alpha-scan, delta-corr, critical. Each emits
// CSV (or a DIMACS-style solution) suitable for plotting; see README.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "spdec/experiments.hpp"

namespace {

void add_common_flags(CLI::App* cmd, spdec::RunSpec& spec,
                      std::string& rule_name, std::string& grid_str) {
    cmd->add_option("--n", spec.n, "number of variables");
    cmd->add_option("--alpha", spec.alpha, "clause/variable ratio");
    cmd->add_option("--alpha-grid", grid_str,
                    "comma-separated list of alpha values");
    cmd->add_option("--k", spec.k, "clause size");
    cmd->add_option("--seed", spec.seed, "base seed");
    cmd->add_option("--seeds", spec.seeds, "number of consecutive seeds");
    cmd->add_option("--select", rule_name, "certitude|polarization")
        ->check(CLI::IsMember({"certitude", "polarization"}));
    cmd->add_option("--batch-fraction", spec.batch_fraction,
                    "fraction of starting variables fixed per step");
    cmd->add_option("--tol", spec.sp.tol, "SP convergence tolerance");
    cmd->add_option("--max-sweeps", spec.sp.max_sweeps, "SP sweep limit");
    cmd->add_option("--damping", spec.sp.damping, "SP damping in [0,1)");
    cmd->add_option("--out", spec.out_path, "output file (or directory for trace)");
    cmd->add_option("--dimacs", spec.dimacs_path, "input DIMACS CNF file");
    cmd->add_flag("--deterministic", spec.deterministic,
                  "reproducible output (default; kept for compatibility)");
    cmd->add_option("--threads", spec.threads,
                    "worker pool size (default: SPDEC_THREADS or hardware)");
    cmd->set_config("--config", "", "declarative config file; flags win");
}

std::vector<double> parse_grid(const std::string& grid_str) {
    std::vector<double> grid;
    size_t pos = 0;
    while (pos < grid_str.size()) {
        size_t comma = grid_str.find(',', pos);
        if (comma == std::string::npos) comma = grid_str.size();
        grid.push_back(std::stod(grid_str.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    return grid;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"survey propagation solver and decimation experiments"};
    app.require_subcommand(1);

    spdec::RunSpec spec;
    std::string rule_name = "certitude";
    std::string grid_str;

    auto* solve = app.add_subcommand("solve", "solve one instance end to end");
    auto* trace = app.add_subcommand("trace", "complexity along decimation");
    auto* scan = app.add_subcommand("alpha-scan",
                                    "initial/final complexity over an alpha grid");
    auto* corr = app.add_subcommand("delta-corr",
                                    "predicted vs measured complexity drop");
    auto* critical = app.add_subcommand("critical",
                                        "jump location near the convergence boundary");
    for (auto* cmd : {solve, trace, scan, corr, critical})
        add_common_flags(cmd, spec, rule_name, grid_str);

    CLI11_PARSE(app, argc, argv);

    spec.rule = rule_name == "polarization" ? spdec::SelectionRule::Polarization
                                            : spdec::SelectionRule::Certitude;
    try {
        if (!grid_str.empty()) spec.alpha_grid = parse_grid(grid_str);

        if (solve->parsed()) {
            spec.mode = spdec::RunMode::Solve;
            return spdec::cmd_solve(spec);
        }
        if (trace->parsed()) {
            spec.mode = spdec::RunMode::Trace;
            return spdec::cmd_trace(spec);
        }
        if (scan->parsed()) {
            spec.mode = spdec::RunMode::AlphaScan;
            return spdec::cmd_alpha_scan(spec);
        }
        if (corr->parsed()) {
            spec.mode = spdec::RunMode::DeltaCorr;
            return spdec::cmd_delta_corr(spec);
        }
        spec.mode = spdec::RunMode::Critical;
        return spdec::cmd_critical(spec);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
