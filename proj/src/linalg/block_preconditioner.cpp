#include "biot/linalg/block_preconditioner.hpp"

#include "biot/errors.hpp"

#include <fmt/format.h>

namespace biot::linalg {

BlockTriangularPreconditioner::BlockTriangularPreconditioner(const SparseBlockSystem& system,
                                                             const AmgOptions& options)
    : n_(system.num_cells),
      u_amg_{AmgHierarchy(system.m11_component(0), options),
             AmgHierarchy(system.m11_component(1), options),
             AmgHierarchy(system.m11_component(2), options)},
      p_amg_(system.m33(), options),
      m21_(system.m21()),
      m31_(system.m31())
{
    const auto d = system.m22_diagonal();
    inv_m22_.resize(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d[i] == 0.0)
            throw ConfigError(fmt::format(
                "zero diagonal in rotation block at dof {} (non-positive shear modulus?)", i));
        inv_m22_[i] = 1.0 / d[i];
    }
}

void BlockTriangularPreconditioner::apply(std::span<const double> r, std::span<double> y) const
{
    const auto n = static_cast<std::size_t>(n_);
    for (std::size_t c = 0; c < 3; ++c)
        u_amg_[c].vcycle(r.subspan(c * n, n), y.subspan(c * n, n));

    auto y1 = std::span<const double>(y.data(), 3 * n);

    Vector tmp(3 * n);
    m21_.multiply(y1, tmp);
    for (std::size_t i = 0; i < 3 * n; ++i)
        y[3 * n + i] = inv_m22_[i] * (r[3 * n + i] - tmp[i]);

    Vector rp(n);
    m31_.multiply(y1, rp);
    for (std::size_t i = 0; i < n; ++i)
        rp[i] = r[6 * n + i] - rp[i];
    p_amg_.vcycle(rp, y.subspan(6 * n, n));
}

Vector BlockTriangularPreconditioner::apply(std::span<const double> r) const
{
    Vector y(r.size());
    apply(r, y);
    return y;
}

} // namespace biot::linalg
