#pragma once

#include "biot/linalg/amg.hpp"
#include "biot/linalg/bicgstab.hpp"
#include "biot/linalg/block_preconditioner.hpp"
#include "biot/linalg/direct.hpp"
#include "biot/linalg/rescale.hpp"
#include "biot/tpsa.hpp"

#include <memory>
#include <optional>
#include <span>

namespace biot::coupling {

struct MechanicsSolverOptions {
    double rtol = 1e-5;
    int max_iter = 500;
    /// Systems with at most this many unknowns are factorized once and solved directly.
    int direct_limit = 30000;
    linalg::AmgOptions amg;
};

/// Repeated TPSA solves with a fixed matrix and varying pressure-row data.
///
/// The system is rescaled once. Small systems use a sparse LU factorization;
/// larger ones use BiCGStab with the block-triangular AMG preconditioner,
/// optionally warm-started.
class MechanicsSolver {
public:
    MechanicsSolver(const Mesh& mesh, const tpsa::ElasticProperties& props,
                    const MechanicsSolverOptions& options = {});

    /// Solves with displacement-row body force and pressure-row data
    /// `pressure_source` (per cell, multiplied by the cell volume).
    tpsa::MechState solve(std::span<const double> pressure_source,
                          const tpsa::MechState* guess = nullptr);

    /// Full right-hand side: body force rows plus volume-weighted pressure-row data.
    linalg::Vector assemble_rhs(std::span<const double> pressure_source) const;

    /// Solves M x = b for a full right-hand side; throws SolverError on failure.
    linalg::Vector solve_full(std::span<const double> b, std::span<const double> guess = {});

    /// Iterative solve from a zero guess regardless of size, for solver studies.
    linalg::KrylovResult probe(std::span<const double> b, const linalg::BicgstabOptions& options);

    bool uses_direct() const { return direct_ != nullptr; }
    const linalg::SparseBlockSystem& system() const { return system_; }
    const linalg::RescaledSystem& rescaled() const { return rescaled_; }
    int last_iterations() const { return last_iterations_; }
    long total_iterations() const { return total_iterations_; }
    int solves() const { return solves_; }

private:
    const linalg::BlockTriangularPreconditioner& preconditioner();

    const Mesh* mesh_;
    MechanicsSolverOptions options_;
    linalg::SparseBlockSystem system_;
    linalg::RescaledSystem rescaled_;
    std::unique_ptr<linalg::DirectSolver> direct_;
    std::unique_ptr<linalg::BlockTriangularPreconditioner> precond_;
    int last_iterations_ = 0;
    long total_iterations_ = 0;
    int solves_ = 0;
};

} // namespace biot::coupling
