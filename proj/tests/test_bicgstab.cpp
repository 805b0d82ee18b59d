#include "biot/linalg/bicgstab.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace biot::linalg;
using biot::testing::dense;
using biot::testing::random_vector;
using biot::testing::to_eigen;

namespace {

CsrMatrix random_nonsymmetric(int n, unsigned seed)
{
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Triplet> t;
    for (int i = 0; i < n; ++i) {
        t.push_back({i, i, 4.0 + u(gen)});
        for (int k = 0; k < 4; ++k)
            t.push_back({i, static_cast<int>((i + 1 + 7 * k + seed) % static_cast<unsigned>(n)),
                         0.7 * u(gen)});
    }
    return CsrMatrix::from_triplets(n, n, t);
}

double relative_error(const Vector& x, const Eigen::VectorXd& ref)
{
    return (to_eigen(x) - ref).norm() / ref.norm();
}

} // namespace

TEST(Bicgstab, IdentityConvergesInOneIteration)
{
    const Vector one(10, 1.0);
    const auto a = CsrMatrix::diagonal(one);
    const auto b = random_vector(10, 1);
    const auto res = bicgstab(as_operator(a), b, nullptr, {1e-12, 10});
    EXPECT_TRUE(res.converged());
    EXPECT_EQ(res.iterations, 1);
    EXPECT_NEAR(relative_error(res.x, to_eigen(b)), 0.0, 1e-14);
    EXPECT_EQ(res.residuals.size(), 2u);
    EXPECT_DOUBLE_EQ(res.residuals.front(), 1.0);
}

TEST(Bicgstab, ExactPreconditionerConvergesInOneIteration)
{
    const Vector rm{4.0, 1.0, 1.0, 3.0};
    const auto a = CsrMatrix::from_dense(2, 2, rm);
    const Eigen::Matrix2d inv = dense(a).inverse();
    const LinearOperator pre = [&inv](std::span<const double> r, std::span<double> y) {
        const Eigen::Vector2d z = inv * Eigen::Vector2d(r[0], r[1]);
        y[0] = z(0);
        y[1] = z(1);
    };
    const Vector b{1.0, 2.0};
    const auto res = bicgstab(as_operator(a), b, &pre, {1e-12, 10});
    EXPECT_TRUE(res.converged());
    EXPECT_EQ(res.iterations, 1);
    EXPECT_NEAR(relative_error(res.x, inv * Eigen::Vector2d(1.0, 2.0)), 0.0, 1e-14);
}

TEST(Bicgstab, MatchesDenseSolveOnSmallSystems)
{
    for (unsigned seed : {1u, 2u, 3u}) {
        const int n = 150;
        const auto a = random_nonsymmetric(n, seed);
        const auto b = random_vector(static_cast<std::size_t>(n), seed + 10);
        const double rtol = 1e-9;
        const auto res = bicgstab(as_operator(a), b, nullptr, {rtol, 500});
        ASSERT_TRUE(res.converged());
        const Eigen::VectorXd ref = dense(a).partialPivLu().solve(to_eigen(b));
        EXPECT_LE(relative_error(res.x, ref), 10 * rtol);
        // True residual honours the tolerance.
        const Eigen::VectorXd r = to_eigen(b) - dense(a) * to_eigen(res.x);
        EXPECT_LE(r.norm() / to_eigen(b).norm(), rtol);
    }
}

TEST(Bicgstab, ResidualTraceMatchesTrueResidual)
{
    const auto a = random_nonsymmetric(60, 4);
    const auto b = random_vector(60, 5);
    const auto res = bicgstab(as_operator(a), b, nullptr, {1e-10, 300});
    ASSERT_TRUE(res.converged());
    EXPECT_EQ(static_cast<int>(res.residuals.size()), res.iterations + 1);
    const Eigen::VectorXd r = to_eigen(b) - dense(a) * to_eigen(res.x);
    EXPECT_NEAR(res.residuals.back(), r.norm() / to_eigen(b).norm(), 1e-12);
}

TEST(Bicgstab, WarmStartFromSolutionNeedsNoIterations)
{
    const auto a = random_nonsymmetric(40, 6);
    const auto b = random_vector(40, 7);
    const Eigen::VectorXd ref = dense(a).partialPivLu().solve(to_eigen(b));
    const auto x0 = biot::testing::to_std(ref);
    const auto res = bicgstab(as_operator(a), b, nullptr, {1e-8, 100}, x0);
    EXPECT_TRUE(res.converged());
    EXPECT_EQ(res.iterations, 0);
}

TEST(Bicgstab, ZeroRightHandSide)
{
    const auto a = random_nonsymmetric(10, 8);
    const auto res = bicgstab(as_operator(a), Vector(10, 0.0), nullptr, {1e-8, 100});
    EXPECT_TRUE(res.converged());
    EXPECT_EQ(norm2(res.x), 0.0);
}

TEST(Bicgstab, IterationCapReported)
{
    const auto a = random_nonsymmetric(200, 9);
    const auto b = random_vector(200, 10);
    const auto res = bicgstab(as_operator(a), b, nullptr, {1e-14, 2});
    EXPECT_FALSE(res.converged());
    EXPECT_EQ(res.status, KrylovStatus::MaxIterations);
    EXPECT_EQ(res.iterations, 2);
    EXPECT_EQ(res.residuals.size(), 3u);
    EXPECT_FALSE(res.message.empty());
}
