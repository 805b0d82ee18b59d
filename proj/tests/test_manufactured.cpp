#include "biot/manufactured.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

using namespace biot;
using namespace biot::app;

namespace {

constexpr double kH = 1e-5;

double phi_ref(const Vec3& x)
{
    double v = 1.0;
    for (std::size_t i = 0; i < 3; ++i) {
        const double s = std::sin(M_PI * x[i]);
        v *= s * s;
    }
    return v;
}

Vec3 shifted(Vec3 x, std::size_t axis, double d)
{
    x[axis] += d;
    return x;
}

double fd(const std::function<double(const Vec3&)>& f, const Vec3& x, std::size_t axis, double h = kH)
{
    return (f(shifted(x, axis, h)) - f(shifted(x, axis, -h))) / (2.0 * h);
}

Vec3 fd_grad(const std::function<double(const Vec3&)>& f, const Vec3& x)
{
    return {fd(f, x, 0), fd(f, x, 1), fd(f, x, 2)};
}

// curl of (g, g, g)
Vec3 fd_curl_of_diagonal(const std::function<double(const Vec3&)>& g, const Vec3& x)
{
    const Vec3 d = fd_grad(g, x);
    return {d[1] - d[2], d[2] - d[0], d[0] - d[1]};
}

std::vector<Vec3> sample_points()
{
    std::mt19937 gen(17);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    std::vector<Vec3> pts;
    for (int i = 0; i < 25; ++i)
        pts.push_back({u(gen), u(gen), u(gen)});
    return pts;
}

void expect_close(const Vec3& a, const Vec3& b, double scale)
{
    for (std::size_t i = 0; i < 3; ++i)
        EXPECT_NEAR(a[i], b[i], 1e-6 * scale) << "component " << i;
}

const ManufacturedSolution kExact({0.01, 1.0, 0.9, 2.5});

} // namespace

TEST(Manufactured, PhiMatchesDirectEvaluation)
{
    for (const auto& x : sample_points())
        EXPECT_NEAR(kExact.phi(x), phi_ref(x), 1e-15);
}

TEST(Manufactured, DerivativesMatchFiniteDifferences)
{
    const auto grad_x = [](const Vec3& x) { return kExact.grad_phi(x)[0]; };
    const auto lap = [](const Vec3& x) { return kExact.laplacian_phi(x); };
    for (const auto& x : sample_points()) {
        // Scale: derivatives of order k are O(pi^k).
        expect_close(kExact.grad_phi(x), fd_grad(phi_ref, x), M_PI);
        const Mat3 h = kExact.hessian_phi(x);
        const Vec3 hx = fd_grad(grad_x, x);
        for (std::size_t j = 0; j < 3; ++j) {
            EXPECT_NEAR(h[0][j], hx[j], 1e-6 * M_PI * M_PI);
            EXPECT_EQ(h[0][j], h[j][0]);
        }
        expect_close(kExact.grad_laplacian_phi(x), fd_grad(lap, x), std::pow(M_PI, 3));
        double lap_fd = 0.0;
        for (std::size_t a = 0; a < 3; ++a) {
            const double h2 = 1e-4;
            lap_fd += (phi_ref(shifted(x, a, h2)) - 2.0 * phi_ref(x) + phi_ref(shifted(x, a, -h2))) / (h2 * h2);
        }
        EXPECT_NEAR(kExact.laplacian_phi(x), lap_fd, 1e-6 * M_PI * M_PI);
    }
}

TEST(Manufactured, DisplacementIsCurlOfPhi)
{
    for (const auto& x : sample_points())
        expect_close(kExact.displacement(x), fd_curl_of_diagonal(phi_ref, x), M_PI);
}

TEST(Manufactured, DisplacementIsDivergenceFree)
{
    for (const auto& x : sample_points()) {
        double div = 0.0;
        for (std::size_t a = 0; a < 3; ++a)
            div += fd([a](const Vec3& y) { return kExact.displacement(y)[a]; }, x, a);
        EXPECT_NEAR(div, 0.0, 1e-6 * M_PI * M_PI);
        EXPECT_NEAR(kExact.divergence_u(x), 0.0, 1e-12);
    }
}

TEST(Manufactured, RotationAndCurl)
{
    for (const auto& x : sample_points()) {
        const auto uc = [](std::size_t c) {
            return [c](const Vec3& y) { return kExact.displacement(y)[c]; };
        };
        const Vec3 curl{fd(uc(2), x, 1) - fd(uc(1), x, 2), fd(uc(0), x, 2) - fd(uc(2), x, 0),
                        fd(uc(1), x, 0) - fd(uc(0), x, 1)};
        expect_close(kExact.curl_u(x), curl, M_PI * M_PI);
        expect_close(kExact.rotation(x), -0.01 * kExact.curl_u(x), 1e-10);
        EXPECT_NEAR(kExact.effective_pressure(x), -0.9 * phi_ref(x), 1e-15);
    }
}

TEST(Manufactured, SourcesMatchFiniteDifferences)
{
    const auto lap = [](const Vec3& x) { return kExact.laplacian_phi(x); };
    for (const auto& x : sample_points()) {
        // div u = 0, so f_u = -mu lap(u) + alpha grad(phi) with lap(u) = curl(lap(phi) 1).
        const Vec3 ref = -0.01 * fd_curl_of_diagonal(lap, x) + 0.9 * fd_grad(phi_ref, x);
        expect_close(kExact.body_force(x), ref, std::pow(M_PI, 3));
        EXPECT_NEAR(kExact.flow_source(x), -2.5 * kExact.laplacian_phi(x), 1e-12);
    }
}

TEST(Manufactured, CentreValues)
{
    const Vec3 c{0.5, 0.5, 0.5};
    EXPECT_NEAR(kExact.phi(c), 1.0, 1e-15);
    EXPECT_LT(norm(kExact.grad_phi(c)), 1e-14);
    EXPECT_LT(norm(kExact.displacement(c)), 1e-14);
}

TEST(Manufactured, BoundaryValues)
{
    std::mt19937 gen(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 30; ++t) {
        Vec3 x{u(gen), u(gen), u(gen)};
        const auto axis = static_cast<std::size_t>(t % 3);
        x[axis] = (t % 2) ? 1.0 : 0.0;
        EXPECT_LT(norm(kExact.displacement(x)), 1e-14);
        EXPECT_NEAR(kExact.grad_phi(x)[axis], 0.0, 1e-14);
    }
}
