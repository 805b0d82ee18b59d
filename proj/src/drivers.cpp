#include "biot/drivers.hpp"

#include "biot/errors.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace biot::app {

namespace {

int boundary_side(const Mesh& mesh, int face)
{
    const Vec3& n = mesh.face(face).normal;
    for (std::size_t a = 0; a < 3; ++a) {
        if (n[a] > 0.5)
            return static_cast<int>(2 * a + 1);
        if (n[a] < -0.5)
            return static_cast<int>(2 * a);
    }
    throw GeometryError(fmt::format("boundary face {} is not axis aligned", face));
}

std::unique_ptr<Mesh> make_mesh(const MeshSpec& spec)
{
    if (spec.barrier)
        return std::make_unique<Mesh>(build_barrier_mesh(spec.cells, spec.lengths, *spec.barrier));
    return std::make_unique<Mesh>(build_cartesian(spec.cells, spec.lengths));
}

CsvTable trajectory_table(const Simulation& sim, const coupling::Trajectory& traj,
                          const std::optional<BarrierPlane>& barrier)
{
    const Mesh& mesh = *sim.mesh;
    CsvTable t;
    t.header = {"step", "time", "mean_dp"};
    std::vector<char> mask;
    if (barrier) {
        mask = omega1_mask(mesh, *barrier);
        t.header.push_back("avg_dp_omega1");
        t.header.push_back("avg_dp_omega2");
    }
    const std::vector<char> all(static_cast<std::size_t>(mesh.num_cells()), 1);
    for (int s = 0; s <= traj.time.steps; ++s) {
        const auto& p = traj.pressure[static_cast<std::size_t>(s)];
        std::vector<double> row{static_cast<double>(s), traj.time.time(s),
                                subdomain_average(mesh, p, all, 1)};
        if (barrier) {
            row.push_back(subdomain_average(mesh, p, mask, 1));
            row.push_back(subdomain_average(mesh, p, mask, 0));
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

CsvTable residual_table(const coupling::CouplingReport& report)
{
    CsvTable t;
    t.header = {"iteration", "residual"};
    for (std::size_t i = 0; i < report.residuals.size(); ++i)
        t.rows.push_back({static_cast<double>(i + 1), report.residuals[i]});
    return t;
}

} // namespace

Simulation build_simulation(const CaseConfig& config)
{
    Simulation sim;
    sim.mesh = make_mesh(config.mesh);
    const Mesh& mesh = *sim.mesh;
    const int n = mesh.num_cells();
    const auto& mat = config.material;

    auto& problem = sim.problem;
    problem.mesh = sim.mesh.get();
    problem.elastic =
        tpsa::ElasticProperties::uniform(mesh, mat.mu, mat.lambda, mat.alpha, tpsa::FixedBoundary{});
    for (int k : mesh.boundary_faces())
        problem.elastic.boundary[static_cast<std::size_t>(k)] =
            config.boundary.sides[static_cast<std::size_t>(boundary_side(mesh, k))];

    problem.flow = tpfa::FlowProperties::uniform(n, mat.permeability, mat.viscosity, mat.c0, 0.0);
    problem.flow.density = mat.density;
    problem.flow.gravity = mat.gravity;
    problem.flow.reference_pressure =
        tpfa::hydrostatic_pressure(mesh, mat.density, mat.gravity, mat.reference_pressure);
    problem.flow = coupling::coupled_flow_properties(problem.flow, problem.elastic);

    const auto& layout = *mesh.layout();
    for (const auto& w : config.wells)
        problem.sources.wells.push_back(
            {layout.cell_index(w.cell[0], w.cell[1], w.cell[2]), w.rate, w.start, w.stop});

    problem.time = {config.time.t0, config.time.dt, config.time.steps};

    sim.mechanics.rtol = config.solver.rtol;
    sim.mechanics.max_iter = config.solver.max_iter;
    sim.mechanics.direct_limit = config.solver.direct_limit;

    if (config.kind == CaseKind::Manufactured) {
        ManufacturedSolution::Parameters p;
        p.mu = mat.mu;
        p.lambda = mat.lambda;
        p.alpha = mat.alpha;
        p.mobility = mat.permeability / mat.viscosity;
        sim.exact.emplace(p);
        const auto un = static_cast<std::size_t>(n);
        problem.elastic.body_force.resize(un);
        problem.sources.volumetric.resize(un);
        problem.initial_pressure.resize(un);
        for (int i = 0; i < n; ++i) {
            const Vec3& x = mesh.cell(i).center;
            const auto ui = static_cast<std::size_t>(i);
            problem.elastic.body_force[ui] = sim.exact->body_force(x);
            problem.sources.volumetric[ui] = sim.exact->flow_source(x);
            problem.initial_pressure[ui] = sim.exact->pressure(x);
        }
    }
    return sim;
}

std::string scheme_name(const SchemeSpec& spec)
{
    if (spec.kind == SchemeKind::Lagged)
        return "lagged";
    return spec.anderson > 0 ? "anderson" : "fixed";
}

coupling::CoupledResult run_scheme(const Simulation& sim, const std::string& scheme,
                                   const SchemeSpec& spec, coupling::MechanicsSolver& mechanics)
{
    if (scheme == "lagged")
        return coupling::run_lagged(sim.problem, mechanics);
    coupling::FixedStressOptions opts;
    opts.tol = spec.tol;
    opts.max_iter = spec.max_iter;
    if (scheme == "anderson")
        opts.anderson_window = spec.anderson > 0 ? spec.anderson : 5;
    else if (scheme != "fixed")
        throw ConfigError(fmt::format("unknown scheme '{}' (lagged, fixed or anderson)", scheme));
    opts.on_iteration = [&scheme](int it, double r) {
        spdlog::info("{} iteration {:3d}: residual {:.3e}", scheme, it, r);
    };
    return coupling::run_fixed_stress(sim.problem, mechanics, opts);
}

coupling::CoupledResult run_case(const CaseConfig& config, const std::filesystem::path& out_dir)
{
    const Simulation sim = build_simulation(config);
    coupling::MechanicsSolver mech(*sim.mesh, sim.problem.elastic, sim.mechanics);
    const std::string scheme = scheme_name(config.scheme);
    spdlog::info("running {} cells, {} steps, scheme {}, {} mechanics solver",
                 sim.mesh->num_cells(), config.time.steps, scheme,
                 mech.uses_direct() ? "direct" : "iterative");
    auto result = run_scheme(sim, scheme, config.scheme, mech);

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        throw IoError(fmt::format("cannot create output directory {}: {}", out_dir.string(),
                                  ec.message()));
    const auto& traj = result.trajectory;
    if (config.output.csv) {
        write_csv(trajectory_table(sim, traj, config.mesh.barrier), out_dir / "pressure.csv");
        if (!result.report.residuals.empty())
            write_csv(residual_table(result.report), out_dir / "residuals.csv");
        if (sim.exact) {
            const auto e = relative_errors(*sim.mesh, *sim.exact, traj.pressure.back(),
                                           traj.mechanics.back());
            CsvTable t;
            for (const char* name : kErrorNames)
                t.header.push_back(fmt::format("err_{}", name));
            t.rows.push_back({e[0], e[1], e[2], e[3]});
            write_csv(t, out_dir / "errors.csv");
        }
    }
    if (config.output.vtk)
        write_vtk(*sim.mesh, traj.pressure.back(), traj.mechanics.back(), out_dir / "final.vtk");
    if (config.output.source_history)
        coupling::write_source_history(traj.psi, out_dir / "psi.csv");
    return result;
}

std::array<double, 4> relative_errors(const Mesh& mesh, const ManufacturedSolution& exact,
                                      std::span<const double> pressure,
                                      const tpsa::MechState& mechanics)
{
    std::array<double, 4> num{}, den{};
    for (int i = 0; i < mesh.num_cells(); ++i) {
        const auto ui = static_cast<std::size_t>(i);
        const Vec3& x = mesh.cell(i).center;
        const double v = mesh.cell(i).volume;
        const double pe = exact.pressure(x);
        const Vec3 ue = exact.displacement(x);
        const Vec3 re = exact.rotation(x);
        const double qe = exact.effective_pressure(x);
        num[0] += v * (pressure[ui] - pe) * (pressure[ui] - pe);
        den[0] += v * pe * pe;
        const Vec3 du = mechanics.u[ui] - ue;
        num[1] += v * dot(du, du);
        den[1] += v * dot(ue, ue);
        const Vec3 dr = mechanics.r[ui] - re;
        num[2] += v * dot(dr, dr);
        den[2] += v * dot(re, re);
        num[3] += v * (mechanics.p[ui] - qe) * (mechanics.p[ui] - qe);
        den[3] += v * qe * qe;
    }
    std::array<double, 4> e{};
    for (std::size_t k = 0; k < 4; ++k)
        e[k] = den[k] > 0.0 ? std::sqrt(num[k] / den[k]) : std::sqrt(num[k]);
    return e;
}

double fitted_order(std::span<const double> h, std::span<const double> e)
{
    if (h.size() != e.size() || h.size() < 2)
        throw std::invalid_argument("fitted_order needs matching lists of at least two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double x = std::log(h[i]);
        const double y = std::log(e[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<double> parse_grid_list(const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            const auto slash = item.find('/');
            std::size_t used = 0;
            double v = 0.0;
            if (slash == std::string::npos) {
                v = std::stod(item, &used);
                if (used != item.size())
                    throw std::invalid_argument(item);
            }
            else {
                const std::string a = item.substr(0, slash), b = item.substr(slash + 1);
                std::size_t ua = 0, ub = 0;
                v = std::stod(a, &ua) / std::stod(b, &ub);
                if (ua != a.size() || ub != b.size())
                    throw std::invalid_argument(item);
            }
            if (!(v > 0.0) || !std::isfinite(v))
                throw std::invalid_argument(item);
            out.push_back(v);
        }
        catch (const std::exception&) {
            throw ConfigError(fmt::format("invalid grid size '{}'", item));
        }
    }
    return out;
}

namespace {

void write_study(const ConvergenceStudy& study, const std::filesystem::path& dir, bool with_orders)
{
    std::filesystem::create_directories(dir);
    CsvTable conv;
    conv.header = {"h", "cells_per_side"};
    for (const char* name : kErrorNames)
        conv.header.push_back(fmt::format("err_{}", name));
    conv.header.push_back("probe_iterations");
    for (const auto& g : study.grids)
        conv.rows.push_back({g.h, static_cast<double>(g.cells_per_side), g.errors[0], g.errors[1],
                             g.errors[2], g.errors[3], static_cast<double>(g.probe_iterations)});
    write_csv(conv, dir / "convergence.csv");

    if (with_orders) {
        CsvTable orders;
        for (const char* name : kErrorNames)
            orders.header.push_back(fmt::format("order_{}", name));
        orders.rows.push_back({study.orders[0], study.orders[1], study.orders[2], study.orders[3]});
        write_csv(orders, dir / "orders.csv");
    }

    CsvTable trace;
    trace.header = {"h", "iteration", "relative_residual"};
    for (const auto& g : study.grids)
        for (std::size_t i = 0; i < g.probe_residuals.size(); ++i)
            trace.rows.push_back({g.h, static_cast<double>(i), g.probe_residuals[i]});
    write_csv(trace, dir / "solver_trace.csv");
}

} // namespace

ConvergenceStudy run_convergence_study(const CaseConfig& config, const std::vector<double>& h,
                                       const std::filesystem::path* out_dir)
{
    if (config.kind != CaseKind::Manufactured)
        throw ConfigError("the convergence study needs a manufactured case");
    if (h.size() < 3)
        throw ConfigError(fmt::format("need >= 3 grids, got {}", h.size()));

    std::vector<int> per_side;
    for (double hh : h) {
        const double inv = 1.0 / hh;
        const int cells = static_cast<int>(std::lround(inv));
        if (!(hh > 0.0) || cells < 1 || std::abs(inv - cells) > 1e-9 * inv)
            throw ConfigError(fmt::format("grid size {} is not the inverse of an integer", hh));
        per_side.push_back(cells);
    }

    ConvergenceStudy study;
    for (const int cells : per_side) {
        const auto t0 = std::chrono::steady_clock::now();
        CaseConfig c = config;
        c.mesh.cells = {cells, cells, cells};
        c.mesh.lengths = {1.0, 1.0, 1.0};
        const Simulation sim = build_simulation(c);
        coupling::MechanicsSolver mech(*sim.mesh, sim.problem.elastic, sim.mechanics);
        spdlog::info("convergence: h = 1/{} ({} cells, {} mechanics)", cells, sim.mesh->num_cells(),
                     mech.uses_direct() ? "direct" : "iterative");
        coupling::CoupledResult result;
        try {
            result = run_scheme(sim, scheme_name(c.scheme), c.scheme, mech);
        }
        catch (const SolverError&) {
            // Keep the grids that finished before aborting.
            if (out_dir)
                write_study(study, *out_dir, false);
            throw;
        }

        ErrorReport rep;
        rep.h = 1.0 / cells;
        rep.cells_per_side = cells;
        const auto& traj = result.trajectory;
        rep.errors = relative_errors(*sim.mesh, *sim.exact, traj.pressure.back(), traj.mechanics.back());
        const auto b = mech.assemble_rhs(
            coupling::mech_rhs_from_pressure(traj.pressure.back(), sim.problem.elastic));
        const auto probe = mech.probe(b, {1e-5, c.solver.max_iter});
        rep.probe_iterations = probe.iterations;
        rep.probe_residuals = probe.residuals;
        rep.coupling = result.report;
        rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        spdlog::info("  errors dp {:.3e} u {:.3e} r {:.3e} p_hat {:.3e}; probe {} iterations; {:.1f} s",
                     rep.errors[0], rep.errors[1], rep.errors[2], rep.errors[3],
                     rep.probe_iterations, rep.seconds);
        study.grids.push_back(std::move(rep));
    }

    std::vector<double> hs;
    for (const auto& g : study.grids)
        hs.push_back(g.h);
    for (std::size_t k = 0; k < 4; ++k) {
        std::vector<double> es;
        for (const auto& g : study.grids)
            es.push_back(g.errors[k]);
        study.orders[k] = fitted_order(hs, es);
    }

    if (out_dir)
        write_study(study, *out_dir, true);
    return study;
}

std::vector<char> omega1_mask(const Mesh& mesh, const BarrierPlane& plane)
{
    const auto& layout = mesh.layout();
    if (!layout)
        throw std::invalid_argument("compartments need a structured mesh");
    const auto a = static_cast<std::size_t>(plane.axis);
    const double position = layout->lengths[a] * plane.index / layout->cells[a];
    std::vector<char> mask(static_cast<std::size_t>(mesh.num_cells()));
    for (int i = 0; i < mesh.num_cells(); ++i)
        mask[static_cast<std::size_t>(i)] = mesh.cell(i).center[a] < position ? 1 : 0;
    return mask;
}

double subdomain_average(const Mesh& mesh, std::span<const double> values,
                         std::span<const char> mask, char want)
{
    double acc = 0.0, vol = 0.0;
    for (int i = 0; i < mesh.num_cells(); ++i) {
        const auto ui = static_cast<std::size_t>(i);
        if (mask[ui] != want)
            continue;
        acc += mesh.cell(i).volume * values[ui];
        vol += mesh.cell(i).volume;
    }
    return vol > 0.0 ? acc / vol : 0.0;
}

BarrierReport run_barrier_case(const CaseConfig& config, const std::vector<std::string>& schemes,
                               const std::filesystem::path* out_dir)
{
    if (!config.mesh.barrier)
        throw ConfigError("the barrier driver needs a mesh with a barrier plane");
    const Simulation sim = build_simulation(config);
    coupling::MechanicsSolver mech(*sim.mesh, sim.problem.elastic, sim.mechanics);
    const auto mask = omega1_mask(*sim.mesh, *config.mesh.barrier);

    BarrierReport report;
    for (const auto& scheme : schemes) {
        spdlog::info("barrier: scheme {}", scheme);
        BarrierRun run;
        run.scheme = scheme;
        run.result = run_scheme(sim, scheme, config.scheme, mech);
        for (const auto& p : run.result.trajectory.pressure) {
            run.avg_omega1.push_back(subdomain_average(*sim.mesh, p, mask, 1));
            run.avg_omega2.push_back(subdomain_average(*sim.mesh, p, mask, 0));
        }
        run.mass_residual = coupling::global_mass_check(sim.problem, run.result.trajectory);
        spdlog::info("  final averages: omega1 {:.6e} Pa, omega2 {:.6e} Pa; mass residual {:.3e}",
                     run.avg_omega1.back(), run.avg_omega2.back(), run.mass_residual);

        if (out_dir) {
            std::filesystem::create_directories(*out_dir);
            CsvTable t;
            t.header = {"step", "time", "avg_dp_omega1", "avg_dp_omega2"};
            const auto& time = run.result.trajectory.time;
            for (int s = 0; s <= time.steps; ++s)
                t.rows.push_back({static_cast<double>(s), time.time(s),
                                  run.avg_omega1[static_cast<std::size_t>(s)],
                                  run.avg_omega2[static_cast<std::size_t>(s)]});
            write_csv(t, *out_dir / fmt::format("barrier_{}.csv", scheme));
            if (!run.result.report.residuals.empty())
                write_csv(residual_table(run.result.report),
                          *out_dir / fmt::format("residuals_{}.csv", scheme));
        }
        report.runs.push_back(std::move(run));
    }
    return report;
}

} // namespace biot::app
