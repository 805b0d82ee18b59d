#include "biot/errors.hpp"
#include "biot/tpsa.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace biot;
using namespace biot::tpsa;
using biot::testing::dense;
using biot::testing::random_vector;
using biot::testing::to_eigen;

namespace {

// Test-side evaluation of the face duals straight from the formulas, using
// cross products instead of the skew matrix.
struct CellDofs {
    Vec3 u, r;
    double p = 0.0;
};

struct Coefficients {
    double area, grad, xt_i, xt_j, xi_i, xi_j, stab;
    Vec3 n;
};

FaceDual oracle_dual(const Coefficients& c, const CellDofs& i, const CellDofs& j)
{
    const Vec3 xt_r = c.xt_i * i.r + c.xt_j * j.r;
    const double xt_p = c.xt_i * i.p + c.xt_j * j.p;
    const Vec3 xi_u = c.xi_i * i.u + c.xi_j * j.u;
    FaceDual d;
    d.sigma = c.area * (c.grad * (j.u - i.u) - cross(c.n, xt_r) + xt_p * c.n);
    d.tau = -c.area * cross(c.n, xi_u);
    d.v = c.area * (dot(c.n, xi_u) + c.stab * (j.p - i.p));
    return d;
}

// Coefficients derived by hand from the weights w = delta / mu.
Coefficients hand_coefficients(const Mesh& m, int k, const ElasticProperties& p)
{
    const auto& fc = m.face_cells(k);
    const double wi = normal_distance(m, fc.positive, k) / p.mu[static_cast<std::size_t>(fc.positive)];
    double wj = 0.0;
    if (!m.is_boundary(k))
        wj = normal_distance(m, fc.negative, k) / p.mu[static_cast<std::size_t>(fc.negative)];
    else if (const auto* rb = std::get_if<RobinBoundary>(&*p.boundary[static_cast<std::size_t>(k)]))
        wj = rb->distance / rb->modulus;
    const double s = wi + wj;
    return {m.face(k).area, 2.0 / s, wi / s, wj / s, wj / s, wi / s, 0.5 * wi * wj / s,
            m.face(k).normal};
}

// Brute-force global matrix: apply the residual map to every unit vector.
Eigen::MatrixXd oracle_matrix(const Mesh& m, const ElasticProperties& p)
{
    const int n = m.num_cells();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(7 * n, 7 * n);
    for (int col = 0; col < 7 * n; ++col) {
        Vector x(static_cast<std::size_t>(7 * n), 0.0);
        x[static_cast<std::size_t>(col)] = 1.0;
        const auto st = MechState::unpack(x, n);
        auto dofs = [&](int c) {
            if (c == kNoCell)
                return CellDofs{};
            const auto uc = static_cast<std::size_t>(c);
            return CellDofs{st.u[uc], st.r[uc], st.p[uc]};
        };
        for (int k = 0; k < m.num_faces(); ++k) {
            const auto& fc = m.face_cells(k);
            const auto d = oracle_dual(hand_coefficients(m, k, p), dofs(fc.positive), dofs(fc.negative));
            for (int c : {fc.positive, fc.negative}) {
                if (c == kNoCell)
                    continue;
                const double eps = m.incidence(c, k);
                for (int q = 0; q < 3; ++q) {
                    a(q * n + c, col) -= eps * d.sigma[static_cast<std::size_t>(q)];
                    a((3 + q) * n + c, col) -= eps * d.tau[static_cast<std::size_t>(q)];
                }
                a(6 * n + c, col) -= eps * d.v;
            }
        }
        for (int c = 0; c < n; ++c) {
            const auto uc = static_cast<std::size_t>(c);
            for (int q = 3; q < 6; ++q)
                a(q * n + c, col) += m.cell(c).volume / p.mu[uc] * x[static_cast<std::size_t>(q * n + c)];
            a(6 * n + c, col) += m.cell(c).volume / p.lambda[uc] * x[static_cast<std::size_t>(6 * n + c)];
        }
    }
    return a;
}

int interior_face(const Mesh& m)
{
    for (int k = 0; k < m.num_faces(); ++k)
        if (!m.is_boundary(k))
            return k;
    return -1;
}

double max_rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
{
    return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff();
}

} // namespace

TEST(Skew, Examples)
{
    const Mat3 z = skew({0, 0, 0});
    for (const auto& row : z)
        for (double v : row)
            EXPECT_EQ(v, 0.0);
    const Mat3 e3 = skew({0, 0, 1});
    const Mat3 ref{{{0, -1, 0}, {1, 0, 0}, {0, 0, 0}}};
    EXPECT_EQ(e3, ref);
}

TEST(Skew, MatchesCrossProduct)
{
    for (unsigned s = 0; s < 20; ++s) {
        const auto r = random_vector(6, s);
        const Vec3 a{r[0], r[1], r[2]}, b{r[3], r[4], r[5]};
        const Mat3 m = skew(a);
        EXPECT_LT(norm(m * b - cross(a, b)), 1e-15);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j)
                EXPECT_EQ(m[i][j], -m[j][i]);
    }
}

TEST(Stencil, SymmetricFace)
{
    const auto m = build_cartesian({2, 1, 1}, {1, 1, 1});
    const auto p = ElasticProperties::uniform(m, 2.0, 1.0, 0.0, FixedBoundary{});
    const auto s = face_stencil(m, interior_face(m), p);
    EXPECT_DOUBLE_EQ(s.xi_tilde[0], 0.5);
    EXPECT_DOUBLE_EQ(s.xi_tilde[1], 0.5);
    EXPECT_DOUBLE_EQ(s.xi[0], 0.5);
    EXPECT_DOUBLE_EQ(s.mu_bar, 2.0);
}

TEST(Stencil, HarmonicModulus)
{
    const auto m = build_cartesian({2, 1, 1}, {2, 1, 1});
    auto p = ElasticProperties::uniform(m, 1.0, 1.0, 0.0, FixedBoundary{});
    p.mu = {1.0, 3.0};
    const auto s = face_stencil(m, interior_face(m), p);
    EXPECT_DOUBLE_EQ(s.w_i, 0.5);
    EXPECT_NEAR(s.w_j, 1.0 / 6.0, 1e-15);
    EXPECT_NEAR(s.mu_bar, 1.5, 1e-15);
    EXPECT_NEAR(s.delta_mu, 0.5 * s.w_i * s.w_j * s.mu_bar, 1e-15);
    EXPECT_NEAR(s.xi_tilde[0] + s.xi_tilde[1], 1.0, 1e-15);
    EXPECT_NEAR(s.xi[0] + s.xi[1], 1.0, 1e-15);
    EXPECT_NEAR(s.grad, 2.0 * s.mu_bar / s.delta, 1e-15);
    EXPECT_NEAR(s.stab, s.delta_mu / s.delta, 1e-15);
}

TEST(Stencil, FixedBoundaryAverages)
{
    const auto m = build_cartesian({1, 1, 1}, {1, 1, 1});
    const auto p = ElasticProperties::uniform(m, 4.0, 1.0, 0.0, FixedBoundary{});
    const auto s = face_stencil(m, 0, p);
    // Xi u = u_j = 0 outside, Xi~ u = u_i.
    EXPECT_EQ(s.xi[0], 0.0);
    EXPECT_EQ(s.xi[1], 1.0);
    EXPECT_EQ(s.xi_tilde[0], 1.0);
    EXPECT_EQ(s.xi_tilde[1], 0.0);
    EXPECT_EQ(s.w_j, 0.0);
    EXPECT_EQ(s.delta_mu, 0.0);
}

TEST(Stencil, FreeBoundaryLimit)
{
    const auto m = build_cartesian({1, 1, 1}, {1, 1, 1});
    const auto p = ElasticProperties::uniform(m, 4.0, 1.0, 0.0, FreeBoundary{});
    const auto s = face_stencil(m, 0, p);
    EXPECT_TRUE(std::isinf(s.w_j));
    EXPECT_EQ(s.grad, 0.0);
    EXPECT_EQ(s.xi[0], 1.0);
    EXPECT_EQ(s.xi_tilde[1], 1.0);
    EXPECT_DOUBLE_EQ(s.stab, 0.5 * 0.5 / 4.0);
}

TEST(Stencil, StabilizationQuartersWithHalvedSpacing)
{
    const auto coarse = build_cartesian({2, 2, 2}, {1, 1, 1});
    const auto fine = build_cartesian({4, 4, 4}, {1, 1, 1});
    const auto pc = ElasticProperties::uniform(coarse, 3.0, 1.0, 0.0, FixedBoundary{});
    const auto pf = ElasticProperties::uniform(fine, 3.0, 1.0, 0.0, FixedBoundary{});
    const double dc = face_stencil(coarse, interior_face(coarse), pc).delta_mu;
    const double df = face_stencil(fine, interior_face(fine), pf).delta_mu;
    EXPECT_NEAR(dc / df, 4.0, 1e-12);
    EXPECT_NEAR(dc, 0.5 * 0.5 / (8.0 * 3.0), 1e-15); // h^2 / (8 mu)
}

TEST(Stencil, MissingBoundaryCondition)
{
    const auto m = build_cartesian({2, 1, 1}, {1, 1, 1});
    auto p = ElasticProperties::uniform(m, 1.0, 1.0, 0.0, FixedBoundary{});
    const int k = m.boundary_faces()[3];
    p.boundary[static_cast<std::size_t>(k)].reset();
    EXPECT_THROW(face_stencil(m, k, p), ConfigError);
    EXPECT_THROW(assemble_tpsa(m, p), ConfigError);
}

TEST(Stencil, PropertyValidation)
{
    const auto m = build_cartesian({2, 1, 1}, {1, 1, 1});
    EXPECT_THROW(assemble_tpsa(m, ElasticProperties::uniform(m, 0.0, 1.0, 0.0, FixedBoundary{})),
                 ConfigError);
    EXPECT_THROW(assemble_tpsa(m, ElasticProperties::uniform(m, 1.0, -1.0, 0.0, FixedBoundary{})),
                 ConfigError);
    EXPECT_THROW(assemble_tpsa(m, ElasticProperties::uniform(m, 1.0, 1.0, 1.5, FixedBoundary{})),
                 ConfigError);
    EXPECT_THROW(
        assemble_tpsa(m, ElasticProperties::uniform(m, 1.0, 1.0, 0.5, RobinBoundary{0.0, 1.0})),
        ConfigError);
}

TEST(LocalOperator, MatchesFormulas)
{
    for (unsigned seed = 0; seed < 10; ++seed) {
        const auto r = random_vector(32, seed);
        FaceStencil s;
        s.area = 1.0 + std::abs(r[0]);
        const Vec3 n{r[1], r[2], r[3]};
        s.normal = (1.0 / norm(n)) * n;
        s.grad = std::abs(r[4]);
        const double t = 0.5 + 0.5 * r[5];
        s.xi_tilde = {t, 1.0 - t};
        s.xi = {1.0 - t, t};
        s.stab = std::abs(r[6]);
        const CellDofs i{{r[7], r[8], r[9]}, {r[10], r[11], r[12]}, r[13]};
        const CellDofs j{{r[14], r[15], r[16]}, {r[17], r[18], r[19]}, r[20]};
        const auto ref =
            oracle_dual({s.area, s.grad, s.xi_tilde[0], s.xi_tilde[1], s.xi[0], s.xi[1], s.stab, s.normal}, i, j);

        std::array<double, 14> x{};
        for (std::size_t q = 0; q < 3; ++q) {
            x[q] = i.u[q];
            x[3 + q] = i.r[q];
            x[7 + q] = j.u[q];
            x[10 + q] = j.r[q];
        }
        x[6] = i.p;
        x[13] = j.p;
        const auto lo = local_face_operator(s);
        std::array<double, 7> y{};
        for (std::size_t a = 0; a < 7; ++a)
            for (std::size_t b = 0; b < 14; ++b)
                y[a] += lo[a][b] * x[b];
        for (std::size_t q = 0; q < 3; ++q) {
            EXPECT_NEAR(y[q], ref.sigma[q], 1e-14);
            EXPECT_NEAR(y[3 + q], ref.tau[q], 1e-14);
        }
        EXPECT_NEAR(y[6], ref.v, 1e-14);
    }
}

TEST(LocalOperator, UniformTranslation)
{
    FaceStencil s;
    s.area = 2.0;
    s.normal = {0, 1, 0};
    s.grad = 3.0;
    s.xi_tilde = {0.3, 0.7};
    s.xi = {0.7, 0.3};
    s.stab = 0.1;
    const Vec3 c{1.0, -2.0, 0.5};
    std::array<double, 14> x{};
    for (std::size_t q = 0; q < 3; ++q)
        x[q] = x[7 + q] = c[q];
    const auto lo = local_face_operator(s);
    std::array<double, 7> y{};
    for (std::size_t a = 0; a < 7; ++a)
        for (std::size_t b = 0; b < 14; ++b)
            y[a] += lo[a][b] * x[b];
    const Vec3 tau = -2.0 * (skew(s.normal) * c);
    for (std::size_t q = 0; q < 3; ++q) {
        EXPECT_NEAR(y[q], 0.0, 1e-15);
        EXPECT_NEAR(y[3 + q], tau[q], 1e-15);
    }
    EXPECT_NEAR(y[6], 2.0 * dot(s.normal, c), 1e-15);
}

TEST(LocalOperator, PressureJumpColumns)
{
    FaceStencil s;
    s.area = 1.5;
    s.normal = {0, 0, 1};
    s.grad = 1.0;
    s.xi_tilde = {0.25, 0.75};
    s.xi = {0.75, 0.25};
    s.stab = 0.2;
    const auto lo = local_face_operator(s);
    // p_i = 1, p_j = 3, everything else zero
    std::array<double, 7> y{};
    for (std::size_t a = 0; a < 7; ++a)
        y[a] = lo[a][6] * 1.0 + lo[a][13] * 3.0;
    EXPECT_NEAR(y[2], 1.5 * (0.25 + 0.75 * 3.0), 1e-15);
    EXPECT_EQ(y[0], 0.0);
    EXPECT_EQ(y[3], 0.0);
    EXPECT_NEAR(y[6], 1.5 * 0.2 * 2.0, 1e-15);
    const LocalOperator zero = local_face_operator(FaceStencil{});
    for (const auto& row : zero)
        for (double v : row)
            EXPECT_EQ(v, 0.0);
}

TEST(Assembly, TwoCellMatchesHandAssembly)
{
    const auto m = build_cartesian({2, 1, 1}, {1, 1, 1});
    const auto p = ElasticProperties::uniform(m, 1.0, 1.0, 0.0, FixedBoundary{});
    const auto sys = assemble_tpsa(m, p);
    ASSERT_EQ(sys.size(), 14);
    EXPECT_LT((dense(sys.matrix) - oracle_matrix(m, p)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(biot::linalg::norm2(sys.rhs), 0.0);
}

TEST(Assembly, HeterogeneousMixedBoundariesMatchHandAssembly)
{
    const auto m = build_cartesian({3, 2, 2}, {1.5, 1.0, 0.7});
    auto p = ElasticProperties::uniform(m, 1.0, 1.0, 0.0, FixedBoundary{});
    const auto r = random_vector(static_cast<std::size_t>(2 * m.num_cells()), 4);
    for (int i = 0; i < m.num_cells(); ++i) {
        p.mu[static_cast<std::size_t>(i)] = 1.0 + std::abs(r[static_cast<std::size_t>(i)]);
        p.lambda[static_cast<std::size_t>(i)] = 2.0 + r[static_cast<std::size_t>(m.num_cells() + i)];
    }
    int f = 0;
    for (int k : m.boundary_faces())
        p.boundary[static_cast<std::size_t>(k)] =
            (f++ % 2) ? BoundaryCondition{RobinBoundary{0.3, 2.0}} : BoundaryCondition{FixedBoundary{}};
    EXPECT_LT(max_rel_diff(dense(assemble_tpsa(m, p).matrix), oracle_matrix(m, p)), 1e-12);
}

TEST(Assembly, BodyForceRhs)
{
    const auto m = build_cartesian({2, 1, 1}, {2, 1, 1});
    auto p = ElasticProperties::uniform(m, 1.0, 1.0, 0.0, FixedBoundary{});
    p.body_force = {{1, 2, 3}, {4, 5, 6}};
    const auto sys = assemble_tpsa(m, p);
    EXPECT_DOUBLE_EQ(sys.rhs[static_cast<std::size_t>(sys.dof(1, 1))], 5.0);
    EXPECT_DOUBLE_EQ(sys.rhs[static_cast<std::size_t>(sys.dof(2, 0))], 3.0);
    for (int c = 3; c < 7; ++c)
        EXPECT_EQ(sys.rhs[static_cast<std::size_t>(sys.dof(c, 0))], 0.0);
}

TEST(Assembly, SparsityPerRowBlock)
{
    const auto m = build_cartesian({3, 3, 3}, {1, 1, 1});
    const auto sys = assemble_tpsa(m, ElasticProperties::uniform(m, 1.0, 1.0, 0.0, FixedBoundary{}));
    for (int i = 0; i < m.num_cells(); ++i) {
        int neighbours = 0;
        for (int k : m.cell_faces(i))
            neighbours += m.is_boundary(k) ? 0 : 1;
        for (int f = 0; f < 7; ++f) {
            const int row = sys.dof(f, i);
            EXPECT_LE(sys.matrix.row_ptr()[row + 1] - sys.matrix.row_ptr()[row], 7 * (1 + neighbours));
        }
    }
}

TEST(Assembly, SingleCellAllFree)
{
    const auto m = build_cartesian({1, 1, 1}, {1, 1, 1});
    const double mu = 2.0, lambda = 5.0;
    const auto sys = assemble_tpsa(m, ElasticProperties::uniform(m, mu, lambda, 0.0, FreeBoundary{}));
    const Eigen::MatrixXd a = dense(sys.matrix);
    // Momentum rows vanish identically.
    EXPECT_EQ(a.topRows(3).cwiseAbs().maxCoeff(), 0.0);
    // Rotation rows reduce to |w| r / mu.
    for (int q = 3; q < 6; ++q)
        for (int c = 0; c < 7; ++c)
            EXPECT_NEAR(a(q, c), c == q ? 1.0 / mu : 0.0, 1e-15);
    // Pressure row: |w| p / lambda plus the free-face stabilization limit
    // sum_k |face| w_i / 2 with w_i = 0.5 / mu on each of the six faces.
    for (int c = 0; c < 6; ++c)
        EXPECT_NEAR(a(6, c), 0.0, 1e-15);
    EXPECT_NEAR(a(6, 6), 1.0 / lambda + 6.0 * 0.5 * (0.5 / mu), 1e-14);
}

TEST(Assembly, TranslationKernel)
{
    for (auto n : {std::array<int, 3>{1, 1, 1}, {3, 2, 4}, {5, 5, 5}}) {
        const auto m = build_cartesian(n, {1.0, 2.0, 0.5});
        auto p = ElasticProperties::uniform(m, 1.0, 1.0, 0.0, FreeBoundary{});
        const auto r = random_vector(static_cast<std::size_t>(m.num_cells()), 8);
        for (std::size_t i = 0; i < r.size(); ++i)
            p.mu[i] = 1.0 + std::abs(r[i]);
        const auto sys = assemble_tpsa(m, p);
        auto st = MechState::zero(m.num_cells());
        for (auto& u : st.u)
            u = {0.3, -1.2, 2.0};
        const auto x = st.pack();
        const auto y = sys.matrix * x;
        EXPECT_LE(biot::linalg::norm2(y), 1e-12 * dense(sys.matrix).norm() * biot::linalg::norm2(x));
    }
}

TEST(Assembly, RecoveredDualsReproduceFluxPart)
{
    const auto m = build_cartesian({3, 2, 2}, {1, 1, 1});
    auto p = ElasticProperties::uniform(m, 1.5, 2.5, 0.0, RobinBoundary{0.2, 1.0});
    const int n = m.num_cells();
    const auto x = random_vector(static_cast<std::size_t>(7 * n), 11);
    const auto st = MechState::unpack(x, n);
    const auto duals = recover_duals(m, p, st);
    const auto y = assemble_tpsa(m, p).matrix * x;

    Vector z(x.size(), 0.0);
    for (int k = 0; k < m.num_faces(); ++k) {
        const auto& d = duals[static_cast<std::size_t>(k)];
        for (int c : {m.face_cells(k).positive, m.face_cells(k).negative}) {
            if (c == kNoCell)
                continue;
            const double eps = m.incidence(c, k);
            for (int q = 0; q < 3; ++q) {
                z[static_cast<std::size_t>(q * n + c)] -= eps * d.sigma[static_cast<std::size_t>(q)];
                z[static_cast<std::size_t>((3 + q) * n + c)] -= eps * d.tau[static_cast<std::size_t>(q)];
            }
            z[static_cast<std::size_t>(6 * n + c)] -= eps * d.v;
        }
    }
    for (int c = 0; c < n; ++c) {
        for (int q = 3; q < 6; ++q)
            z[static_cast<std::size_t>(q * n + c)] += m.cell(c).volume / 1.5 * x[static_cast<std::size_t>(q * n + c)];
        z[static_cast<std::size_t>(6 * n + c)] += m.cell(c).volume / 2.5 * x[static_cast<std::size_t>(6 * n + c)];
    }
    EXPECT_LE((to_eigen(z) - to_eigen(y)).norm(), 1e-12 * to_eigen(y).norm());

    for (const auto& d : recover_duals(m, p, MechState::zero(n))) {
        EXPECT_EQ(norm(d.sigma), 0.0);
        EXPECT_EQ(d.v, 0.0);
    }
}

TEST(Assembly, TranslationDualsCloseOnEveryCell)
{
    const auto m = build_cartesian({3, 3, 2}, {1, 1, 1});
    const auto p = ElasticProperties::uniform(m, 1.0, 1.0, 0.0, FreeBoundary{});
    auto st = MechState::zero(m.num_cells());
    for (auto& u : st.u)
        u = {1.0, 2.0, 3.0};
    const auto duals = recover_duals(m, p, st);
    for (int i = 0; i < m.num_cells(); ++i) {
        Vec3 s;
        const auto faces = m.cell_faces(i);
        const auto signs = m.cell_face_signs(i);
        for (std::size_t f = 0; f < faces.size(); ++f)
            s += signs[f] * duals[static_cast<std::size_t>(faces[f])].sigma;
        EXPECT_LT(norm(s), 1e-14);
    }
}

TEST(Assembly, ScalingCovariance)
{
    const auto m = build_cartesian({3, 2, 2}, {1, 1, 1});
    auto p = ElasticProperties::uniform(m, 1.0, 3.0, 0.0, FixedBoundary{});
    const auto r = random_vector(static_cast<std::size_t>(3 * m.num_cells()), 21);
    for (int i = 0; i < m.num_cells(); ++i)
        p.body_force.push_back({r[static_cast<std::size_t>(3 * i)], r[static_cast<std::size_t>(3 * i + 1)],
                                r[static_cast<std::size_t>(3 * i + 2)]});
    auto solve = [&m](const ElasticProperties& props) {
        const auto sys = assemble_tpsa(m, props);
        return MechState::unpack(
            biot::testing::to_std(dense(sys.matrix).partialPivLu().solve(to_eigen(sys.rhs))),
            m.num_cells());
    };
    const double s = 7.5e3;
    auto q = p;
    for (auto& v : q.mu) v *= s;
    for (auto& v : q.lambda) v *= s;
    for (auto& f : q.body_force) f *= s;
    const auto a = solve(p), b = solve(q);
    for (int i = 0; i < m.num_cells(); ++i) {
        const auto ui = static_cast<std::size_t>(i);
        EXPECT_LT(norm(a.u[ui] - b.u[ui]), 1e-10 * (1.0 + norm(a.u[ui])));
        EXPECT_LT(norm(s * a.r[ui] - b.r[ui]), 1e-10 * s * (1.0 + norm(a.r[ui])));
        EXPECT_NEAR(s * a.p[ui], b.p[ui], 1e-10 * s * (1.0 + std::abs(a.p[ui])));
    }
}

TEST(Assembly, RobinLimits)
{
    const auto m = build_cartesian({2, 2, 1}, {1, 1, 1});
    const double dik = 0.25; // smallest half-width
    auto fixed = ElasticProperties::uniform(m, 2.0, 3.0, 0.0, FixedBoundary{});
    auto near = ElasticProperties::uniform(m, 2.0, 3.0, 0.0, RobinBoundary{1e-8 * dik, 2.0});
    auto free = ElasticProperties::uniform(m, 2.0, 3.0, 0.0, FreeBoundary{});
    auto far = ElasticProperties::uniform(m, 2.0, 3.0, 0.0, RobinBoundary{1e12, 2.0});
    EXPECT_LE(max_rel_diff(dense(assemble_tpsa(m, near).matrix), dense(assemble_tpsa(m, fixed).matrix)),
              1e-6);
    EXPECT_LE(max_rel_diff(dense(assemble_tpsa(m, far).matrix), dense(assemble_tpsa(m, free).matrix)),
              1e-6);
}

TEST(MechStateLayout, PackUnpackRoundTrip)
{
    const auto x = random_vector(21, 2);
    const auto st = MechState::unpack(x, 3);
    EXPECT_EQ(st.pack(), x);
    EXPECT_EQ(st.u[1][2], x[2 * 3 + 1]);
    EXPECT_EQ(st.r[2][0], x[3 * 3 + 2]);
    EXPECT_EQ(st.p[0], x[18]);
    EXPECT_THROW(MechState::unpack(x, 2), std::invalid_argument);
}

TEST(MeanModulus, VolumeWeighted)
{
    const auto m = build_cartesian({2, 1, 1}, {1, 1, 1});
    auto p = ElasticProperties::uniform(m, 1.0, 1.0, 0.0, FixedBoundary{});
    p.mu = {1.0, 3.0};
    EXPECT_DOUBLE_EQ(mean_shear_modulus(m, p), 2.0);
}
