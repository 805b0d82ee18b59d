// Command-line front end: run a case, a convergence study or the barrier comparison.

#include "biot/drivers.hpp"
#include "biot/errors.hpp"
#include "biot/tpsa.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <optional>
#include <sstream>

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kSolver = 3, kIo = 4 };

struct Common {
    std::string config;
    std::string out;
    std::optional<double> rtol;
    std::optional<int> max_iter;
    std::string log_level = "info";
    std::string dump_matrix;
};

biot::app::CaseConfig load(const Common& c)
{
    auto cfg = biot::app::parse_config(c.config);
    if (c.rtol)
        cfg.solver.rtol = *c.rtol;
    if (c.max_iter)
        cfg.solver.max_iter = *c.max_iter;
    if (!c.out.empty())
        cfg.output.directory = c.out;
    return cfg;
}

void dump_matrix(const biot::app::CaseConfig& cfg, const std::string& path)
{
    const auto sim = biot::app::build_simulation(cfg);
    const auto sys = biot::tpsa::assemble_tpsa(*sim.mesh, sim.problem.elastic);
    biot::linalg::write_matrix_market(sys.matrix, path);
    spdlog::info("wrote {} x {} TPSA matrix to {}", sys.size(), sys.size(), path);
}

std::vector<std::string> split(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty())
            out.push_back(item);
    return out;
}

void add_common(CLI::App* cmd, Common& c)
{
    cmd->add_option("config", c.config, "Case file (YAML)")->required();
    cmd->add_option("--out", c.out, "Output directory (overrides the case file)");
    cmd->add_option("--rtol", c.rtol, "Relative tolerance of the mechanics Krylov solver");
    cmd->add_option("--max-iter", c.max_iter, "Iteration cap of the mechanics Krylov solver");
    cmd->add_option("--log-level", c.log_level, "trace, debug, info, warn, error or off");
    cmd->add_option("--dump-matrix", c.dump_matrix, "Write the TPSA matrix in MatrixMarket format");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Biot poroelasticity with two-point flux and two-point stress finite volumes"};
    app.require_subcommand(1);

    Common run_opts, conv_opts, barrier_opts;
    std::string grids = "1/8,1/12,1/16";
    std::string schemes = "lagged,fixed,anderson";

    auto* run = app.add_subcommand("run", "Simulate a case and write its outputs");
    add_common(run, run_opts);
    auto* conv = app.add_subcommand("convergence", "Manufactured-solution convergence study");
    add_common(conv, conv_opts);
    conv->add_option("--grids", grids, "Comma-separated mesh sizes, e.g. 1/8,1/12,1/16");
    auto* bar = app.add_subcommand("barrier", "Compare coupling schemes on a sealing-barrier case");
    add_common(bar, barrier_opts);
    bar->add_option("--schemes", schemes, "Comma-separated list of lagged, fixed, anderson");

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    const Common& opts = run->parsed() ? run_opts : conv->parsed() ? conv_opts : barrier_opts;
    spdlog::set_level(spdlog::level::from_str(opts.log_level));

    try {
        const auto cfg = load(opts);
        const std::filesystem::path out = cfg.output.directory;
        if (!opts.dump_matrix.empty())
            dump_matrix(cfg, opts.dump_matrix);

        if (run->parsed()) {
            const auto result = biot::app::run_case(cfg, out);
            if (!result.report.converged)
                spdlog::warn("coupling iteration did not reach the tolerance");
            std::printf("%s: %d iteration(s), outputs in %s\n", result.report.scheme.c_str(),
                        result.report.iterations, out.string().c_str());
        }
        else if (conv->parsed()) {
            const auto study =
                biot::app::run_convergence_study(cfg, biot::app::parse_grid_list(grids), &out);
            std::printf("%-10s %-12s %-12s %-12s %-12s %s\n", "h", "err_dp", "err_u", "err_r",
                        "err_p_hat", "bicgstab_its");
            for (const auto& g : study.grids)
                std::printf("1/%-8d %-12.4e %-12.4e %-12.4e %-12.4e %d\n", g.cells_per_side,
                            g.errors[0], g.errors[1], g.errors[2], g.errors[3], g.probe_iterations);
            std::printf("%-10s %-12.3f %-12.3f %-12.3f %-12.3f\n", "order", study.orders[0],
                        study.orders[1], study.orders[2], study.orders[3]);
        }
        else {
            const auto report = biot::app::run_barrier_case(cfg, split(schemes), &out);
            std::printf("%-10s %-16s %-16s %-12s %s\n", "scheme", "omega1_final", "omega2_final",
                        "mass_resid", "iterations");
            for (const auto& r : report.runs)
                std::printf("%-10s %-16.6e %-16.6e %-12.3e %d\n", r.scheme.c_str(),
                            r.avg_omega1.back(), r.avg_omega2.back(), r.mass_residual,
                            r.result.report.iterations);
        }
    }
    catch (const biot::ConfigError& e) {
        spdlog::error("configuration error: {}", e.what());
        return kConfig;
    }
    catch (const biot::GeometryError& e) {
        spdlog::error("configuration error: {}", e.what());
        return kConfig;
    }
    catch (const biot::SolverError& e) {
        spdlog::error("solver failure: {}", e.what());
        return kSolver;
    }
    catch (const biot::IoError& e) {
        spdlog::error("I/O error: {}", e.what());
        return kIo;
    }
    catch (const std::filesystem::filesystem_error& e) {
        spdlog::error("I/O error: {}", e.what());
        return kIo;
    }
    return kOk;
}
