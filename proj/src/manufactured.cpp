#include "biot/manufactured.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace biot::app {

namespace {

/// k-th derivative of sin^2(pi t).
double sin2_derivative(double t, int k)
{
    constexpr double pi = std::numbers::pi;
    const double s = std::sin(2.0 * pi * t);
    const double c = std::cos(2.0 * pi * t);
    switch (k) {
    case 0: {
        const double h = std::sin(pi * t);
        return h * h;
    }
    case 1: return pi * s;
    case 2: return 2.0 * pi * pi * c;
    case 3: return -4.0 * pi * pi * pi * s;
    default: throw std::invalid_argument("derivative order above 3");
    }
}

} // namespace

double ManufacturedSolution::derivative(const Vec3& x, int a, int b, int c) const
{
    return sin2_derivative(x[0], a) * sin2_derivative(x[1], b) * sin2_derivative(x[2], c);
}

double ManufacturedSolution::phi(const Vec3& x) const { return derivative(x, 0, 0, 0); }

Vec3 ManufacturedSolution::grad_phi(const Vec3& x) const
{
    return {derivative(x, 1, 0, 0), derivative(x, 0, 1, 0), derivative(x, 0, 0, 1)};
}

Mat3 ManufacturedSolution::hessian_phi(const Vec3& x) const
{
    Mat3 h{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            std::array<int, 3> o{0, 0, 0};
            ++o[static_cast<std::size_t>(i)];
            ++o[static_cast<std::size_t>(j)];
            h[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = derivative(x, o[0], o[1], o[2]);
        }
    return h;
}

double ManufacturedSolution::laplacian_phi(const Vec3& x) const
{
    return derivative(x, 2, 0, 0) + derivative(x, 0, 2, 0) + derivative(x, 0, 0, 2);
}

Vec3 ManufacturedSolution::grad_laplacian_phi(const Vec3& x) const
{
    return {derivative(x, 3, 0, 0) + derivative(x, 1, 2, 0) + derivative(x, 1, 0, 2),
            derivative(x, 2, 1, 0) + derivative(x, 0, 3, 0) + derivative(x, 0, 1, 2),
            derivative(x, 2, 0, 1) + derivative(x, 0, 2, 1) + derivative(x, 0, 0, 3)};
}

Vec3 ManufacturedSolution::displacement(const Vec3& x) const
{
    const Vec3 g = grad_phi(x);
    return {g[1] - g[2], g[2] - g[0], g[0] - g[1]};
}

double ManufacturedSolution::divergence_u(const Vec3& x) const
{
    const Mat3 h = hessian_phi(x);
    return (h[0][1] - h[0][2]) + (h[1][2] - h[1][0]) + (h[2][0] - h[2][1]);
}

Vec3 ManufacturedSolution::curl_u(const Vec3& x) const
{
    // curl curl (phi 1) = grad(div(phi 1)) - lap(phi) 1
    const Mat3 h = hessian_phi(x);
    const double lap = laplacian_phi(x);
    Vec3 c;
    for (std::size_t i = 0; i < 3; ++i)
        c[i] = h[i][0] + h[i][1] + h[i][2] - lap;
    return c;
}

Vec3 ManufacturedSolution::rotation(const Vec3& x) const { return -p_.mu * curl_u(x); }

double ManufacturedSolution::effective_pressure(const Vec3& x) const
{
    return -p_.alpha * phi(x);
}

Vec3 ManufacturedSolution::body_force(const Vec3& x) const
{
    // lap(u) = curl(lap(phi) 1); div u = 0
    const Vec3 gl = grad_laplacian_phi(x);
    const Vec3 lap_u{gl[1] - gl[2], gl[2] - gl[0], gl[0] - gl[1]};
    return -p_.mu * lap_u + p_.alpha * grad_phi(x);
}

double ManufacturedSolution::flow_source(const Vec3& x) const
{
    return -p_.mobility * laplacian_phi(x);
}

} // namespace biot::app
