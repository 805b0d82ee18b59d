#pragma once

#include "biot/linalg/sparse.hpp"

namespace biot::linalg {

/// Field-major layout of the 7-dof-per-cell elasticity system:
/// [u_x | u_y | u_z | r_x | r_y | r_z | p], each block of length n.
///
/// Diagonal blocks: M11 (3n x 3n, three decoupled n x n component blocks),
/// M22 (3n x 3n, diagonal), M33 (n x n). Couplings used by the
/// preconditioner: M21 (rotation rows, displacement columns) and M31.
struct SparseBlockSystem {
    CsrMatrix matrix;
    Vector rhs;
    int num_cells = 0;

    static constexpr int kFields = 7;

    int size() const { return kFields * num_cells; }
    int dof(int field, int cell) const { return field * num_cells + cell; }

    CsrMatrix m11_component(int c) const;
    CsrMatrix m21() const;
    Vector m22_diagonal() const;
    CsrMatrix m31() const;
    CsrMatrix m33() const;
};

} // namespace biot::linalg
