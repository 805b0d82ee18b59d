#include "biot/mechanics_solver.hpp"

#include "biot/errors.hpp"

#include <fmt/format.h>

namespace biot::coupling {

MechanicsSolver::MechanicsSolver(const Mesh& mesh, const tpsa::ElasticProperties& props,
                                 const MechanicsSolverOptions& options)
    : mesh_(&mesh),
      options_(options),
      system_(tpsa::assemble_tpsa(mesh, props)),
      rescaled_(linalg::rescale(system_, tpsa::mean_shear_modulus(mesh, props)))
{
    if (system_.size() <= options_.direct_limit)
        direct_ = std::make_unique<linalg::DirectSolver>(rescaled_.system.matrix);
}

const linalg::BlockTriangularPreconditioner& MechanicsSolver::preconditioner()
{
    if (!precond_)
        precond_ = std::make_unique<linalg::BlockTriangularPreconditioner>(rescaled_.system,
                                                                            options_.amg);
    return *precond_;
}

linalg::Vector MechanicsSolver::solve_full(std::span<const double> b, std::span<const double> guess)
{
    const linalg::Vector bs = rescaled_.scale_rhs(b);
    ++solves_;
    if (direct_) {
        last_iterations_ = 0;
        return rescaled_.unscale(direct_->solve(bs));
    }

    const auto& pc = preconditioner();
    const linalg::LinearOperator op = linalg::as_operator(rescaled_.system.matrix);
    const linalg::LinearOperator pre = [&pc](std::span<const double> r, std::span<double> y) {
        pc.apply(r, y);
    };
    linalg::Vector x0;
    if (!guess.empty())
        x0 = rescaled_.to_scaled(guess);
    auto res = linalg::bicgstab(op, bs, &pre, {options_.rtol, options_.max_iter}, x0);
    last_iterations_ = res.iterations;
    total_iterations_ += res.iterations;
    if (!res.converged())
        throw SolverError(fmt::format("mechanics solve failed after {} iterations: {}",
                                      res.iterations, res.message));
    return rescaled_.unscale(res.x);
}

linalg::Vector MechanicsSolver::assemble_rhs(std::span<const double> pressure_source) const
{
    const int n = system_.num_cells;
    if (pressure_source.size() != static_cast<std::size_t>(n))
        throw std::invalid_argument("pressure source must have one entry per cell");
    linalg::Vector b = system_.rhs;
    for (int i = 0; i < n; ++i)
        b[static_cast<std::size_t>(system_.dof(6, i))] =
            mesh_->cell(i).volume * pressure_source[static_cast<std::size_t>(i)];
    return b;
}

tpsa::MechState MechanicsSolver::solve(std::span<const double> pressure_source,
                                       const tpsa::MechState* guess)
{
    linalg::Vector g;
    if (guess)
        g = guess->pack();
    return tpsa::MechState::unpack(solve_full(assemble_rhs(pressure_source), g), system_.num_cells);
}

linalg::KrylovResult MechanicsSolver::probe(std::span<const double> b,
                                            const linalg::BicgstabOptions& options)
{
    const auto& pc = preconditioner();
    const linalg::LinearOperator op = linalg::as_operator(rescaled_.system.matrix);
    const linalg::LinearOperator pre = [&pc](std::span<const double> r, std::span<double> y) {
        pc.apply(r, y);
    };
    auto res = linalg::bicgstab(op, rescaled_.scale_rhs(b), &pre, options);
    res.x = rescaled_.unscale(res.x);
    return res;
}

} // namespace biot::coupling
