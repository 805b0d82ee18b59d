#include "biot/linalg/block_system.hpp"

namespace biot::linalg {

CsrMatrix SparseBlockSystem::m11_component(int c) const
{
    const int n = num_cells;
    return matrix.block(c * n, (c + 1) * n, c * n, (c + 1) * n);
}

CsrMatrix SparseBlockSystem::m21() const
{
    const int n = num_cells;
    return matrix.block(3 * n, 6 * n, 0, 3 * n);
}

Vector SparseBlockSystem::m22_diagonal() const
{
    const int n = num_cells;
    Vector d(static_cast<std::size_t>(3 * n));
    for (int i = 0; i < 3 * n; ++i)
        d[static_cast<std::size_t>(i)] = matrix.at(3 * n + i, 3 * n + i);
    return d;
}

CsrMatrix SparseBlockSystem::m31() const
{
    const int n = num_cells;
    return matrix.block(6 * n, 7 * n, 0, 3 * n);
}

CsrMatrix SparseBlockSystem::m33() const
{
    const int n = num_cells;
    return matrix.block(6 * n, 7 * n, 6 * n, 7 * n);
}

} // namespace biot::linalg
