#include "biot/linalg/rescale.hpp"

#include "biot/errors.hpp"

#include <cmath>

#include <fmt/format.h>

namespace biot::linalg {

Vector rescaling_vector(int num_cells, double mu0)
{
    if (!(mu0 > 0.0))
        throw ConfigError(fmt::format("rescaling modulus must be positive, got {}", mu0));
    const auto n = static_cast<std::size_t>(num_cells);
    Vector s(7 * n, std::sqrt(mu0));
    const double su = 1.0 / std::sqrt(mu0);
    for (std::size_t i = 0; i < 3 * n; ++i)
        s[i] = su;
    return s;
}

RescaledSystem rescale(const SparseBlockSystem& system, double mu0)
{
    RescaledSystem out;
    out.mu0 = mu0;
    const auto s = rescaling_vector(system.num_cells, mu0);
    out.system.num_cells = system.num_cells;
    out.system.matrix = system.matrix;
    out.system.matrix.scale(s, s);
    if (!system.rhs.empty())
        out.system.rhs = out.scale_rhs(system.rhs);
    return out;
}

Vector RescaledSystem::scaling() const { return rescaling_vector(system.num_cells, mu0); }

Vector RescaledSystem::scale_rhs(std::span<const double> b) const
{
    auto s = scaling();
    for (std::size_t i = 0; i < s.size(); ++i)
        s[i] *= b[i];
    return s;
}

Vector RescaledSystem::unscale(std::span<const double> x_scaled) const
{
    auto s = scaling();
    for (std::size_t i = 0; i < s.size(); ++i)
        s[i] *= x_scaled[i];
    return s;
}

Vector RescaledSystem::to_scaled(std::span<const double> x) const
{
    auto s = scaling();
    for (std::size_t i = 0; i < s.size(); ++i)
        s[i] = x[i] / s[i];
    return s;
}

} // namespace biot::linalg
