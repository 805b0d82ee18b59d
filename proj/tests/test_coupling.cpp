#include "biot/coupling.hpp"
#include "biot/errors.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace biot;
using namespace biot::coupling;
using biot::testing::random_vector;

namespace {

struct SmallCase {
    Mesh mesh;
    BiotCase problem;
};

// Clamped box with one injecting well, active for the first half of the run.
std::unique_ptr<SmallCase> small_case(double alpha, std::array<int, 3> n = {4, 3, 2}, int steps = 6)
{
    auto sc = std::make_unique<SmallCase>(SmallCase{build_cartesian(n, {40.0, 30.0, 20.0}), {}});
    const Mesh& m = sc->mesh;
    auto& p = sc->problem;
    p.mesh = &m;
    p.elastic = tpsa::ElasticProperties::uniform(m, 3.5e9, 4e9, alpha, tpsa::FixedBoundary{});
    p.flow = tpfa::FlowProperties::uniform(m.num_cells(), 1e-13, 1e-3, 1e-9, 0.0);
    p.time = {0.0, 86400.0, steps};
    p.sources.wells.push_back({0, 1e-4, 0.0, p.time.time(steps / 2)});
    return sc;
}

double max_abs_diff(const Vector& a, const Vector& b)
{
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

} // namespace

TEST(CouplingTerms, MechanicsRhsFromPressure)
{
    const auto m = build_cartesian({2, 1, 1}, {1, 1, 1});
    auto e = tpsa::ElasticProperties::uniform(m, 3.5e9, 4.0e9, 0.87, tpsa::FixedBoundary{});
    const auto rhs = mech_rhs_from_pressure(Vector{1e6, 0.0}, e);
    EXPECT_NEAR(rhs[0], -2.175e-4, 1e-18);
    EXPECT_EQ(rhs[1], 0.0);
    e.alpha.assign(2, 0.0);
    for (double v : mech_rhs_from_pressure(Vector{1e6, -3e5}, e))
        EXPECT_EQ(v, 0.0);
}

TEST(CouplingTerms, FlowSourceFromMechanics)
{
    const auto m = build_cartesian({2, 1, 1}, {1, 1, 1});
    const auto e = tpsa::ElasticProperties::uniform(m, 1.0, 2.0, 0.5, tpsa::FixedBoundary{});
    const double dt = 10.0;
    const Vector prev{1.0, -3.0};
    for (double v : flow_source_from_mech(prev, prev, dt, e))
        EXPECT_EQ(v, 0.0);
    const Vector now{1.0 + 2.0 / 0.5, -3.0 + 2.0 / 0.5}; // rise by lambda / alpha
    for (double v : flow_source_from_mech(prev, now, dt, e))
        EXPECT_NEAR(v, -1.0 / dt, 1e-15);
}

TEST(CouplingTerms, CoupledStorage)
{
    const auto m = build_cartesian({1, 1, 1}, {1, 1, 1});
    const auto e = tpsa::ElasticProperties::uniform(m, 1.0, 4.0, 0.5, tpsa::FixedBoundary{});
    auto f = tpfa::FlowProperties::uniform(1, 1.0, 1.0, 0.1, 99.0);
    const auto c = coupled_flow_properties(f, e);
    EXPECT_DOUBLE_EQ(c.biot_compressibility[0], 0.0625);
    EXPECT_DOUBLE_EQ(c.storage(0), 0.1625);
}

TEST(SpaceTime, WeightedNorm)
{
    const auto m = build_cartesian({2, 1, 1}, {2, 1, 1});
    const TimeGrid t{0.0, 3.0, 2};
    const Vector a{1, 2, 3, 4};
    EXPECT_DOUBLE_EQ(space_time_dot(m, t, a, a), 3.0 * (1 + 4 + 9 + 16));
    EXPECT_DOUBLE_EQ(space_time_norm(m, t, a), std::sqrt(90.0));
}

TEST(SourceHistoryLayout, StepIndexing)
{
    auto h = SourceHistory::zero(3, 2);
    EXPECT_EQ(h.psi.size(), 6u);
    h.step(2)[1] = 5.0;
    EXPECT_EQ(h.psi[3], 5.0);
    EXPECT_EQ(h.step(2).size(), 2u);
}

TEST(SourceHistoryLayout, CsvRoundTrip)
{
    SourceHistory h = SourceHistory::zero(4, 3);
    h.psi = random_vector(12, 3);
    h.psi[5] = 1.0 / 3.0;
    const auto path = biot::testing::scratch_dir("coupling") / "psi.csv";
    write_source_history(h, path);
    const auto back = read_source_history(path);
    EXPECT_EQ(back.steps, 4);
    EXPECT_EQ(back.num_cells, 3);
    EXPECT_EQ(back.psi, h.psi);
    EXPECT_THROW(read_source_history(path.parent_path() / "missing.csv"), IoError);
}

TEST(Anderson, SingleResidual)
{
    const auto inner = [](std::span<const double> a, std::span<const double> b) {
        return linalg::dot(a, b);
    };
    const auto beta = anderson_weights({Vector{2.0, 1.0}}, inner);
    ASSERT_EQ(beta.size(), 1u);
    EXPECT_EQ(beta[0], 1.0);
}

TEST(Anderson, ScalarClosedForm)
{
    const auto inner = [](std::span<const double> a, std::span<const double> b) {
        return linalg::dot(a, b);
    };
    const auto beta = anderson_weights({Vector{2.0}, Vector{-1.0}}, inner);
    ASSERT_EQ(beta.size(), 2u);
    EXPECT_NEAR(beta[0], 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(beta[1], 2.0 / 3.0, 1e-12);
    // The relative 1e-12 diagonal shift leaves a residual of that order.
    EXPECT_NEAR(beta[0] * 2.0 - beta[1] * 1.0, 0.0, 1e-11);
}

TEST(Anderson, IdenticalResidualsStayFinite)
{
    const auto inner = [](std::span<const double> a, std::span<const double> b) {
        return linalg::dot(a, b);
    };
    const auto beta = anderson_weights({Vector{1.0, -2.0}, Vector{1.0, -2.0}, Vector{1.0, -2.0}}, inner);
    double sum = 0.0;
    for (double b : beta) {
        EXPECT_TRUE(std::isfinite(b));
        sum += b;
    }
    EXPECT_NEAR(sum, 1.0, 1e-15);
}

TEST(Anderson, WeightsMinimizeCombinedResidual)
{
    const auto inner = [](std::span<const double> a, std::span<const double> b) {
        return linalg::dot(a, b);
    };
    std::vector<Vector> r;
    for (unsigned s = 0; s < 4; ++s)
        r.push_back(random_vector(10, s));
    const auto beta = anderson_weights(r, inner);
    ASSERT_EQ(beta.size(), 4u);
    auto combined = [&](const std::vector<double>& b) {
        Vector c(10, 0.0);
        for (std::size_t i = 0; i < r.size(); ++i)
            linalg::axpy(b[i], r[i], c);
        return linalg::norm2(c);
    };
    const double best = combined(beta);
    double sum = 0.0;
    for (double b : beta)
        sum += b;
    EXPECT_NEAR(sum, 1.0, 1e-14);
    // Any perturbation within the affine constraint does no better.
    for (unsigned s = 0; s < 20; ++s) {
        const auto d = random_vector(3, 50 + s);
        auto b = beta;
        b[1] += 0.01 * d[0];
        b[2] += 0.01 * d[1];
        b[3] += 0.01 * d[2];
        b[0] -= 0.01 * (d[0] + d[1] + d[2]);
        EXPECT_GE(combined(b), best - 1e-12);
    }
}

TEST(Anderson, WindowSlides)
{
    const auto inner = [](std::span<const double> a, std::span<const double> b) {
        return linalg::dot(a, b);
    };
    AndersonState st(2);
    st.push(Vector{0.0}, Vector{2.0});
    EXPECT_EQ(st.next(inner), (Vector{2.0}));
    // residuals newest first: 3 - 2 = 1 ... and 2 - 0 = 2
    st.push(Vector{2.0}, Vector{3.0});
    st.push(Vector{3.0}, Vector{3.5});
    EXPECT_EQ(st.size(), 2);
    const auto next = st.next(inner);
    const auto& b = st.last_weights();
    ASSERT_EQ(b.size(), 2u);
    EXPECT_NEAR(b[0] * 0.5 + b[1] * 1.0, 0.0, 1e-12);
    EXPECT_NEAR(next[0], b[0] * 3.5 + b[1] * 3.0, 1e-12);
}

TEST(Lagged, EquilibriumIsStationary)
{
    auto sc = small_case(0.87);
    sc->problem.sources = {};
    MechanicsSolver mech(sc->mesh, sc->problem.elastic);
    const auto res = run_lagged(sc->problem, mech);
    ASSERT_EQ(res.trajectory.pressure.size(), 7u);
    for (const auto& p : res.trajectory.pressure)
        EXPECT_EQ(linalg::norm2(p), 0.0);
    for (const auto& s : res.trajectory.mechanics)
        EXPECT_EQ(linalg::norm2(s.pack()), 0.0);
}

TEST(Lagged, UncoupledMatchesFlowOnly)
{
    auto sc = small_case(0.0);
    MechanicsSolver mech(sc->mesh, sc->problem.elastic);
    const auto res = run_lagged(sc->problem, mech);
    const tpfa::FlowStepper flow(sc->mesh, sc->problem.flow, sc->problem.time.dt);
    tpfa::FlowState s{Vector(static_cast<std::size_t>(sc->mesh.num_cells()), 0.0), 0.0};
    for (int n = 1; n <= sc->problem.time.steps; ++n) {
        s = flow.step(s, sc->problem.sources);
        EXPECT_EQ(res.trajectory.pressure[static_cast<std::size_t>(n)], s.pressure_deviation);
    }
}

TEST(Lagged, FirstStepHasNoMechanicalSource)
{
    auto sc = small_case(0.87);
    MechanicsSolver mech(sc->mesh, sc->problem.elastic);
    const auto res = run_lagged(sc->problem, mech);
    for (double v : res.trajectory.psi.step(1))
        EXPECT_EQ(v, 0.0);
    // Later steps use psi from the previous two mechanics states.
    const auto& traj = res.trajectory;
    const auto expect = flow_source_from_mech(traj.mechanics[1].p, traj.mechanics[2].p,
                                              sc->problem.time.dt, sc->problem.elastic);
    double scale = 0.0;
    for (double v : expect)
        scale = std::max(scale, std::abs(v));
    ASSERT_GT(scale, 0.0);
    EXPECT_LE(max_abs_diff(expect, Vector(traj.psi.step(3).begin(), traj.psi.step(3).end())),
              1e-14 * scale);
}

TEST(FixedStress, UncoupledConvergesImmediately)
{
    auto sc = small_case(0.0);
    MechanicsSolver mech(sc->mesh, sc->problem.elastic);
    const auto res = run_fixed_stress(sc->problem, mech, {});
    EXPECT_TRUE(res.report.converged);
    EXPECT_EQ(res.report.iterations, 1);
    EXPECT_EQ(res.report.residuals.front(), 0.0);
}

TEST(FixedStress, ConvergedSolutionSatisfiesMassIdentity)
{
    auto sc = small_case(0.87);
    MechanicsSolver mech(sc->mesh, sc->problem.elastic);
    FixedStressOptions opts;
    opts.tol = 1e-11;
    opts.max_iter = 60;
    const auto res = run_fixed_stress(sc->problem, mech, opts);
    ASSERT_TRUE(res.report.converged);
    EXPECT_LE(global_mass_check(sc->problem, res.trajectory), 1e-8);
    for (std::size_t i = 1; i < res.report.residuals.size(); ++i)
        EXPECT_LT(res.report.residuals[i], res.report.residuals[i - 1]);
}

TEST(FixedStress, AndersonMatchesPlainForTwoIterations)
{
    auto sc = small_case(0.87);
    MechanicsSolver mech(sc->mesh, sc->problem.elastic);
    FixedStressOptions plain;
    plain.tol = 1e-12;
    plain.max_iter = 4;
    auto acc = plain;
    acc.anderson_window = 5;
    const auto a = run_fixed_stress(sc->problem, mech, plain);
    const auto b = run_fixed_stress(sc->problem, mech, acc);
    ASSERT_GE(b.report.residuals.size(), 3u);
    EXPECT_NEAR(a.report.residuals[0], b.report.residuals[0], 1e-14);
    EXPECT_NEAR(a.report.residuals[1], b.report.residuals[1], 1e-14 * a.report.residuals[0]);
    EXPECT_LE(b.report.residuals[2], a.report.residuals[2]);
    EXPECT_EQ(b.report.scheme, "anderson");
}

TEST(FixedStress, FixedPointMapIsConsistent)
{
    auto sc = small_case(0.87);
    MechanicsSolver mech(sc->mesh, sc->problem.elastic);
    FixedStressOptions opts;
    opts.tol = 1e-12;
    opts.max_iter = 60;
    const auto res = run_fixed_stress(sc->problem, mech, opts);
    ASSERT_TRUE(res.report.converged);
    // At the fixed point, psi reproduces itself from the p_hat history.
    const auto& t = res.trajectory;
    double scale = 0.0, gap = 0.0;
    for (int s = 1; s <= t.time.steps; ++s) {
        const auto psi = flow_source_from_mech(t.mechanics[static_cast<std::size_t>(s - 1)].p,
                                               t.mechanics[static_cast<std::size_t>(s)].p, t.time.dt,
                                               sc->problem.elastic);
        const auto used = t.psi.step(s);
        for (std::size_t i = 0; i < psi.size(); ++i) {
            scale = std::max(scale, std::abs(psi[i]));
            gap = std::max(gap, std::abs(psi[i] - used[i]));
        }
    }
    EXPECT_LE(gap, 1e-9 * scale);
}

TEST(FixedStress, InitialGuessShapeChecked)
{
    auto sc = small_case(0.5);
    MechanicsSolver mech(sc->mesh, sc->problem.elastic);
    FixedStressOptions opts;
    opts.initial_psi = SourceHistory::zero(2, 3);
    EXPECT_THROW(run_fixed_stress(sc->problem, mech, opts), ConfigError);
    opts = {};
    opts.tol = 0.0;
    EXPECT_THROW(run_fixed_stress(sc->problem, mech, opts), ConfigError);
}

TEST(MassCheck, SingleSealedCell)
{
    auto sc = small_case(0.6, {1, 1, 1}, 4);
    MechanicsSolver mech(sc->mesh, sc->problem.elastic);
    FixedStressOptions opts;
    opts.tol = 1e-13;
    opts.max_iter = 60;
    const auto res = run_fixed_stress(sc->problem, mech, opts);
    // One clamped cell cannot change volume, so all injected fluid is stored by c0.
    const double v = sc->mesh.cell(0).volume;
    const double injected = 1e-4 * sc->problem.time.time(2);
    EXPECT_NEAR(res.trajectory.pressure.back()[0], injected / (1e-9 * v), 1e-9 * injected / (1e-9 * v));
    EXPECT_LE(global_mass_check(sc->problem, res.trajectory), 1e-10);
}

TEST(MassCheck, NoInjectionGivesZero)
{
    auto sc = small_case(0.6);
    sc->problem.sources = {};
    MechanicsSolver mech(sc->mesh, sc->problem.elastic);
    const auto res = run_lagged(sc->problem, mech);
    EXPECT_EQ(global_mass_check(sc->problem, res.trajectory), 0.0);
}

TEST(TimeGridCheck, Validation)
{
    EXPECT_THROW((TimeGrid{0.0, 0.0, 3}.validate()), ConfigError);
    EXPECT_THROW((TimeGrid{0.0, 1.0, 0}.validate()), ConfigError);
    EXPECT_NO_THROW((TimeGrid{0.0, 1.0, 1}.validate()));
    EXPECT_DOUBLE_EQ((TimeGrid{2.0, 0.5, 4}.end()), 4.0);
}
