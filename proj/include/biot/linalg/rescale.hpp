#pragma once

#include "biot/linalg/block_system.hpp"

#include <span>

namespace biot::linalg {

/// Symmetric diagonal rescaling M~ = L M L, b~ = L b with
/// L = diag(mu0^-1/2 on displacement, mu0^1/2 on rotation and pressure).
/// Removes the modulus scaling from the diagonal blocks.
struct RescaledSystem {
    double mu0 = 1.0;
    SparseBlockSystem system; ///< scaled matrix and rhs

    Vector scaling() const;
    /// b~ = L b
    Vector scale_rhs(std::span<const double> b) const;
    /// x = L x~
    Vector unscale(std::span<const double> x_scaled) const;
    /// x~ = L^-1 x, e.g. for warm starts.
    Vector to_scaled(std::span<const double> x) const;
};

RescaledSystem rescale(const SparseBlockSystem& system, double mu0);

/// Scaling vector L for a system with n cells.
Vector rescaling_vector(int num_cells, double mu0);

} // namespace biot::linalg
