#include "biot/coupling.hpp"

#include "biot/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace biot::coupling {

void TimeGrid::validate() const
{
    if (!(dt > 0.0))
        throw ConfigError(fmt::format("time step must be positive, got {}", dt));
    if (steps < 1)
        throw ConfigError(fmt::format("number of time steps must be >= 1, got {}", steps));
}

SourceHistory SourceHistory::zero(int steps, int num_cells)
{
    return {steps, num_cells,
            Vector(static_cast<std::size_t>(steps) * static_cast<std::size_t>(num_cells), 0.0)};
}

std::span<const double> SourceHistory::step(int s) const
{
    return std::span<const double>(psi).subspan(static_cast<std::size_t>(s - 1) * num_cells,
                                                static_cast<std::size_t>(num_cells));
}

std::span<double> SourceHistory::step(int s)
{
    return std::span<double>(psi).subspan(static_cast<std::size_t>(s - 1) * num_cells,
                                          static_cast<std::size_t>(num_cells));
}

Vector mech_rhs_from_pressure(std::span<const double> dp, const tpsa::ElasticProperties& props)
{
    Vector out(dp.size());
    for (std::size_t i = 0; i < dp.size(); ++i) {
        if (!(props.lambda[i] > 0.0))
            throw ConfigError(fmt::format("Lame parameter lambda must be > 0 (cell {})", i));
        out[i] = -props.alpha[i] / props.lambda[i] * dp[i];
    }
    return out;
}

Vector flow_source_from_mech(std::span<const double> p_hat_prev,
                             std::span<const double> p_hat_now, double dt,
                             const tpsa::ElasticProperties& props)
{
    if (!(dt > 0.0))
        throw ConfigError(fmt::format("time step must be positive, got {}", dt));
    Vector out(p_hat_now.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = -props.alpha[i] / props.lambda[i] * (p_hat_now[i] - p_hat_prev[i]) / dt;
    return out;
}

tpfa::FlowProperties coupled_flow_properties(const tpfa::FlowProperties& flow,
                                             const tpsa::ElasticProperties& elastic)
{
    tpfa::FlowProperties out = flow;
    out.biot_compressibility.resize(elastic.alpha.size());
    for (std::size_t i = 0; i < elastic.alpha.size(); ++i)
        out.biot_compressibility[i] = elastic.alpha[i] * elastic.alpha[i] / elastic.lambda[i];
    return out;
}

double space_time_dot(const Mesh& mesh, const TimeGrid& time, std::span<const double> a,
                      std::span<const double> b)
{
    const auto n = static_cast<std::size_t>(mesh.num_cells());
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        acc += mesh.cell(static_cast<int>(k % n)).volume * a[k] * b[k];
    return acc * time.dt;
}

double space_time_norm(const Mesh& mesh, const TimeGrid& time, std::span<const double> a)
{
    return std::sqrt(space_time_dot(mesh, time, a, a));
}

std::vector<double> anderson_weights(
    const std::vector<Vector>& residuals,
    const std::function<double(std::span<const double>, std::span<const double>)>& inner)
{
    const int m = static_cast<int>(residuals.size());
    if (m == 0)
        throw std::invalid_argument("anderson_weights needs at least one residual");
    std::vector<double> beta(static_cast<std::size_t>(m), 0.0);
    beta[0] = 1.0;
    if (m == 1)
        return beta;

    // r(gamma) = r_0 - sum_j gamma_j (r_0 - r_j), j = 1..m-1
    const Vector& r0 = residuals[0];
    std::vector<Vector> d(static_cast<std::size_t>(m - 1), Vector(r0.size()));
    for (int j = 1; j < m; ++j)
        for (std::size_t k = 0; k < r0.size(); ++k)
            d[static_cast<std::size_t>(j - 1)][k] = r0[k] - residuals[static_cast<std::size_t>(j)][k];

    Eigen::MatrixXd g(m - 1, m - 1);
    Eigen::VectorXd rhs(m - 1);
    for (int a = 0; a < m - 1; ++a) {
        rhs[a] = inner(d[static_cast<std::size_t>(a)], r0);
        for (int b = 0; b <= a; ++b)
            g(a, b) = g(b, a) = inner(d[static_cast<std::size_t>(a)], d[static_cast<std::size_t>(b)]);
    }
    const double scale = g.diagonal().maxCoeff();
    if (!(scale > 0.0) || !std::isfinite(scale))
        return beta;
    g.diagonal().array() += 1e-12 * scale;
    const Eigen::VectorXd gamma = g.ldlt().solve(rhs);
    if (!gamma.allFinite())
        return beta;

    double sum = 0.0;
    for (int j = 1; j < m; ++j) {
        beta[static_cast<std::size_t>(j)] = gamma[j - 1];
        sum += gamma[j - 1];
    }
    beta[0] = 1.0 - sum;
    return beta;
}

AndersonState::AndersonState(int window) : window_(window)
{
    if (window < 1)
        throw ConfigError(fmt::format("Anderson window must be >= 1, got {}", window));
}

void AndersonState::push(Vector psi, Vector image)
{
    psi_.insert(psi_.begin(), std::move(psi));
    image_.insert(image_.begin(), std::move(image));
    if (static_cast<int>(psi_.size()) > window_) {
        psi_.pop_back();
        image_.pop_back();
    }
}

Vector AndersonState::next(
    const std::function<double(std::span<const double>, std::span<const double>)>& inner)
{
    if (psi_.empty())
        throw std::logic_error("Anderson step needs at least one stored pair");
    std::vector<Vector> res(psi_.size());
    for (std::size_t i = 0; i < psi_.size(); ++i) {
        res[i].resize(psi_[i].size());
        for (std::size_t k = 0; k < res[i].size(); ++k)
            res[i][k] = image_[i][k] - psi_[i][k];
    }
    beta_ = anderson_weights(res, inner);
    Vector out(image_[0].size(), 0.0);
    for (std::size_t i = 0; i < image_.size(); ++i)
        linalg::axpy(beta_[i], image_[i], out);
    return out;
}

namespace {

void check_case(const BiotCase& problem)
{
    if (!problem.mesh)
        throw ConfigError("case has no mesh");
    problem.time.validate();
    problem.elastic.validate(*problem.mesh);
    if (!problem.initial_pressure.empty() &&
        problem.initial_pressure.size() != static_cast<std::size_t>(problem.mesh->num_cells()))
        throw ConfigError("initial pressure must have one entry per cell");
}

Vector initial_pressure(const BiotCase& problem)
{
    if (problem.initial_pressure.empty())
        return Vector(static_cast<std::size_t>(problem.mesh->num_cells()), 0.0);
    return problem.initial_pressure;
}

tpsa::MechState solve_mechanics(MechanicsSolver& mech, const tpsa::ElasticProperties& props,
                                std::span<const double> dp, const tpsa::MechState* guess,
                                std::vector<int>* iterations, int step)
{
    try {
        auto state = mech.solve(mech_rhs_from_pressure(dp, props), guess);
        if (iterations && !mech.uses_direct())
            iterations->push_back(mech.last_iterations());
        return state;
    }
    catch (const SolverError& e) {
        throw SolverError(fmt::format("time step {}: {}", step, e.what()));
    }
}

} // namespace

Trajectory evaluate_fixed_point_map(const BiotCase& problem, MechanicsSolver& mechanics,
                                    const SourceHistory& psi, const tpsa::MechState& initial_mech,
                                    const Trajectory* warm_start, SourceHistory& image,
                                    std::vector<int>* linear_iterations)
{
    const Mesh& mesh = *problem.mesh;
    const int n = mesh.num_cells();
    const int steps = problem.time.steps;
    const auto flow_props = coupled_flow_properties(problem.flow, problem.elastic);
    const tpfa::FlowStepper stepper(mesh, flow_props, problem.time.dt);

    Trajectory traj;
    traj.time = problem.time;
    traj.psi = psi;
    traj.pressure.reserve(static_cast<std::size_t>(steps) + 1);
    traj.mechanics.reserve(static_cast<std::size_t>(steps) + 1);

    tpfa::FlowState state{initial_pressure(problem), problem.time.t0};
    traj.pressure.push_back(state.pressure_deviation);
    traj.mechanics.push_back(initial_mech);

    tpfa::FlowSources sources = problem.sources;
    for (int s = 1; s <= steps; ++s) {
        auto src = psi.step(s);
        sources.mechanical.assign(src.begin(), src.end());
        state = stepper.step(state, sources);
        traj.pressure.push_back(state.pressure_deviation);
    }

    image = SourceHistory::zero(steps, n);
    for (int s = 1; s <= steps; ++s) {
        const tpsa::MechState* guess =
            warm_start ? &warm_start->mechanics[static_cast<std::size_t>(s)]
                       : &traj.mechanics.back();
        traj.mechanics.push_back(solve_mechanics(mechanics, problem.elastic,
                                                 traj.pressure[static_cast<std::size_t>(s)],
                                                 guess, linear_iterations, s));
        const auto f = flow_source_from_mech(traj.mechanics[static_cast<std::size_t>(s - 1)].p,
                                             traj.mechanics[static_cast<std::size_t>(s)].p,
                                             problem.time.dt, problem.elastic);
        std::copy(f.begin(), f.end(), image.step(s).begin());
    }
    return traj;
}

CoupledResult run_lagged(const BiotCase& problem, MechanicsSolver& mechanics)
{
    check_case(problem);
    const Mesh& mesh = *problem.mesh;
    const int n = mesh.num_cells();
    const int steps = problem.time.steps;
    const auto flow_props = coupled_flow_properties(problem.flow, problem.elastic);
    const tpfa::FlowStepper stepper(mesh, flow_props, problem.time.dt);

    CoupledResult out;
    out.report.scheme = "lagged";
    Trajectory& traj = out.trajectory;
    traj.time = problem.time;
    traj.psi = SourceHistory::zero(steps, n);

    tpfa::FlowState state{initial_pressure(problem), problem.time.t0};
    traj.pressure.push_back(state.pressure_deviation);
    traj.mechanics.push_back(solve_mechanics(mechanics, problem.elastic, state.pressure_deviation,
                                             nullptr, &out.report.linear_iterations, 0));

    tpfa::FlowSources sources = problem.sources;
    for (int s = 1; s <= steps; ++s) {
        // p_hat(t_{-1}) = p_hat(t_0), so psi vanishes in the first step
        if (s > 1) {
            const auto psi = flow_source_from_mech(traj.mechanics[static_cast<std::size_t>(s - 2)].p,
                                                   traj.mechanics[static_cast<std::size_t>(s - 1)].p,
                                                   problem.time.dt, problem.elastic);
            std::copy(psi.begin(), psi.end(), traj.psi.step(s).begin());
        }
        auto src = traj.psi.step(s);
        sources.mechanical.assign(src.begin(), src.end());
        state = stepper.step(state, sources);
        traj.pressure.push_back(state.pressure_deviation);
        traj.mechanics.push_back(solve_mechanics(mechanics, problem.elastic,
                                                 state.pressure_deviation, &traj.mechanics.back(),
                                                 &out.report.linear_iterations, s));
    }
    out.report.iterations = 1;
    out.report.converged = true;
    return out;
}

CoupledResult run_fixed_stress(const BiotCase& problem, MechanicsSolver& mechanics,
                               const FixedStressOptions& options)
{
    check_case(problem);
    if (!(options.tol > 0.0))
        throw ConfigError("fixed-stress tolerance must be positive");
    if (options.max_iter < 1)
        throw ConfigError("fixed-stress max_iter must be >= 1");
    const Mesh& mesh = *problem.mesh;
    const int n = mesh.num_cells();
    const int steps = problem.time.steps;

    CoupledResult out;
    out.report.scheme = options.anderson_window > 0 ? "anderson" : "fixed_stress";

    SourceHistory psi = SourceHistory::zero(steps, n);
    if (!options.initial_psi.psi.empty()) {
        if (options.initial_psi.steps != steps || options.initial_psi.num_cells != n)
            throw ConfigError(fmt::format(
                "source history has {} steps x {} cells, case needs {} x {}",
                options.initial_psi.steps, options.initial_psi.num_cells, steps, n));
        psi = options.initial_psi;
    }

    const auto initial_mech =
        solve_mechanics(mechanics, problem.elastic, initial_pressure(problem), nullptr,
                        &out.report.linear_iterations, 0);

    const auto inner = [&](std::span<const double> a, std::span<const double> b) {
        return space_time_dot(mesh, problem.time, a, b);
    };
    std::optional<AndersonState> anderson;
    if (options.anderson_window > 0)
        anderson.emplace(options.anderson_window);

    std::optional<Trajectory> previous;
    for (int it = 1; it <= options.max_iter; ++it) {
        SourceHistory image;
        Trajectory traj = evaluate_fixed_point_map(problem, mechanics, psi, initial_mech,
                                                   previous ? &*previous : nullptr, image,
                                                   &out.report.linear_iterations);
        Vector diff(image.psi.size());
        for (std::size_t k = 0; k < diff.size(); ++k)
            diff[k] = image.psi[k] - psi.psi[k];
        const double num = space_time_norm(mesh, problem.time, diff);
        const double den = space_time_norm(mesh, problem.time, image.psi);
        const double residual = den > 0.0 ? num / den : num;
        out.report.residuals.push_back(residual);
        out.report.iterations = it;
        spdlog::debug("{} iteration {}: residual {:.3e}", out.report.scheme, it, residual);
        if (options.on_iteration)
            options.on_iteration(it, residual);

        previous = std::move(traj);
        if (residual <= options.tol) {
            out.report.converged = true;
            break;
        }
        if (anderson) {
            anderson->push(psi.psi, image.psi);
            psi.psi = anderson->next(inner);
        }
        else {
            psi = std::move(image);
        }
    }
    out.trajectory = std::move(*previous);
    if (!out.report.converged)
        spdlog::warn("{} did not converge in {} iterations (residual {:.3e})", out.report.scheme,
                     options.max_iter, out.report.residuals.back());
    return out;
}

double global_mass_check(const BiotCase& problem, const Trajectory& trajectory)
{
    const Mesh& mesh = *problem.mesh;
    const auto& p0 = trajectory.pressure.front();
    const auto& pt = trajectory.pressure.back();
    double stored = 0.0;
    for (int i = 0; i < mesh.num_cells(); ++i) {
        const auto ui = static_cast<std::size_t>(i);
        stored += problem.flow.storativity[ui] * mesh.cell(i).volume * (pt[ui] - p0[ui]);
    }
    double injected = 0.0;
    for (int s = 1; s <= trajectory.time.steps; ++s)
        injected += problem.sources.injected_volume(mesh, trajectory.time.time(s - 1),
                                                    trajectory.time.time(s));
    const double gap = std::abs(stored - injected);
    return injected != 0.0 ? gap / std::abs(injected) : gap;
}

void write_source_history(const SourceHistory& history, const std::filesystem::path& path)
{
    std::FILE* f = std::fopen(path.string().c_str(), "w");
    if (!f)
        throw IoError(fmt::format("cannot write source history to {}", path.string()));
    std::fprintf(f, "step,cell,psi\n");
    for (int s = 1; s <= history.steps; ++s) {
        const auto row = history.step(s);
        for (int i = 0; i < history.num_cells; ++i)
            std::fprintf(f, "%d,%d,%.17g\n", s, i, row[static_cast<std::size_t>(i)]);
    }
    if (std::fclose(f) != 0)
        throw IoError(fmt::format("error while writing {}", path.string()));
}

SourceHistory read_source_history(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError(fmt::format("cannot read source history from {}", path.string()));
    std::string line;
    if (!std::getline(in, line) || line != "step,cell,psi")
        throw IoError(fmt::format("{}: expected header 'step,cell,psi'", path.string()));

    struct Row {
        int step, cell;
        double value;
    };
    std::vector<Row> rows;
    int max_step = 0;
    int max_cell = -1;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        Row r{};
        char c1 = 0, c2 = 0;
        std::istringstream ss(line);
        if (!(ss >> r.step >> c1 >> r.cell >> c2 >> r.value) || c1 != ',' || c2 != ',' || r.step < 1 ||
            r.cell < 0)
            throw IoError(fmt::format("{}:{}: malformed row '{}'", path.string(), lineno, line));
        max_step = std::max(max_step, r.step);
        max_cell = std::max(max_cell, r.cell);
        rows.push_back(r);
    }
    SourceHistory h = SourceHistory::zero(max_step, max_cell + 1);
    if (rows.size() != h.psi.size())
        throw IoError(fmt::format("{}: expected {} rows, found {}", path.string(), h.psi.size(),
                                  rows.size()));
    for (const auto& r : rows)
        h.step(r.step)[static_cast<std::size_t>(r.cell)] = r.value;
    return h;
}

} // namespace biot::coupling
