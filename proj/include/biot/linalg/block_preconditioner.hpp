#pragma once

#include "biot/linalg/amg.hpp"
#include "biot/linalg/block_system.hpp"

#include <array>
#include <span>

namespace biot::linalg {

/// Lower block-triangular preconditioner for the elasticity system,
///
///     [ AMG(M11)             ]^-1
///     [ M21       M22        ]
///     [ M31            AMG(M33)]
///
/// applied matrix-free by forward substitution. Each displacement component
/// block of M11 gets its own hierarchy.
class BlockTriangularPreconditioner {
public:
    explicit BlockTriangularPreconditioner(const SparseBlockSystem& system,
                                           const AmgOptions& options = {});

    void apply(std::span<const double> r, std::span<double> y) const;
    Vector apply(std::span<const double> r) const;

    const AmgHierarchy& displacement_hierarchy(int c) const { return u_amg_[static_cast<std::size_t>(c)]; }
    const AmgHierarchy& pressure_hierarchy() const { return p_amg_; }

private:
    int n_;
    std::array<AmgHierarchy, 3> u_amg_;
    AmgHierarchy p_amg_;
    CsrMatrix m21_;
    CsrMatrix m31_;
    Vector inv_m22_;
};

} // namespace biot::linalg
