#include "biot/tpsa.hpp"

#include "biot/errors.hpp"

#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace biot::tpsa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

} // namespace

ElasticProperties ElasticProperties::uniform(const Mesh& mesh, double mu, double lambda,
                                             double alpha, const BoundaryCondition& bc)
{
    const auto n = static_cast<std::size_t>(mesh.num_cells());
    ElasticProperties p;
    p.mu.assign(n, mu);
    p.lambda.assign(n, lambda);
    p.alpha.assign(n, alpha);
    p.boundary.assign(static_cast<std::size_t>(mesh.num_faces()), std::nullopt);
    for (int k : mesh.boundary_faces())
        p.boundary[static_cast<std::size_t>(k)] = bc;
    return p;
}

void ElasticProperties::validate(const Mesh& mesh) const
{
    const auto n = static_cast<std::size_t>(mesh.num_cells());
    if (mu.size() != n || lambda.size() != n || alpha.size() != n)
        throw ConfigError(fmt::format("elastic properties must have one entry per cell ({})", n));
    if (!body_force.empty() && body_force.size() != n)
        throw ConfigError("body force must be empty or have one entry per cell");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(mu[i] > 0.0))
            throw ConfigError(fmt::format("shear modulus mu must be > 0 (cell {}: {})", i, mu[i]));
        if (!(lambda[i] > 0.0))
            throw ConfigError(
                fmt::format("Lame parameter lambda must be > 0 (cell {}: {})", i, lambda[i]));
        if (!(alpha[i] >= 0.0 && alpha[i] <= 1.0))
            throw ConfigError(fmt::format("Biot coefficient must lie in [0, 1] (cell {}: {})", i,
                                          alpha[i]));
    }
    for (int k : mesh.boundary_faces()) {
        const auto uk = static_cast<std::size_t>(k);
        if (uk >= boundary.size() || !boundary[uk])
            throw ConfigError(fmt::format("boundary face {} has no boundary condition", k));
        if (const auto* rb = std::get_if<RobinBoundary>(&*boundary[uk]))
            if (!(rb->distance > 0.0) || !(rb->modulus > 0.0))
                throw ConfigError(fmt::format(
                    "Robin boundary on face {} needs positive distance and modulus", k));
    }
}

MechState MechState::zero(int num_cells)
{
    const auto n = static_cast<std::size_t>(num_cells);
    return {std::vector<Vec3>(n), std::vector<Vec3>(n), Vector(n, 0.0)};
}

MechState MechState::unpack(std::span<const double> x, int num_cells)
{
    const auto n = static_cast<std::size_t>(num_cells);
    if (x.size() != 7 * n)
        throw std::invalid_argument("mechanics vector has the wrong length");
    MechState s = zero(num_cells);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < 3; ++c) {
            s.u[i][c] = x[c * n + i];
            s.r[i][c] = x[(3 + c) * n + i];
        }
        s.p[i] = x[6 * n + i];
    }
    return s;
}

Vector MechState::pack() const
{
    const auto n = p.size();
    Vector x(7 * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < 3; ++c) {
            x[c * n + i] = u[i][c];
            x[(3 + c) * n + i] = r[i][c];
        }
        x[6 * n + i] = p[i];
    }
    return x;
}

FaceStencil face_stencil(const Mesh& mesh, int face, const ElasticProperties& props)
{
    const auto& fc = mesh.face_cells(face);
    const auto& fg = mesh.face(face);
    FaceStencil s;
    s.face = face;
    s.cell_i = fc.positive;
    s.cell_j = fc.negative;
    s.area = fg.area;
    s.normal = fg.normal;

    const double dik = normal_distance(mesh, fc.positive, face);
    s.w_i = dik / props.mu[static_cast<std::size_t>(fc.positive)];

    auto finite = [&](double djk, double wj) {
        s.w_j = wj;
        s.delta = dik + djk;
        const double wsum = s.w_i + s.w_j;
        s.mu_bar = s.delta / wsum;
        s.delta_mu = 0.5 * s.w_i * s.w_j * s.mu_bar;
        s.grad = 2.0 / wsum;
        s.xi_tilde = {s.w_i / wsum, s.w_j / wsum};
        s.xi = {s.w_j / wsum, s.w_i / wsum};
        s.stab = 0.5 * s.w_i * s.w_j / wsum;
    };

    if (!mesh.is_boundary(face)) {
        const double djk = normal_distance(mesh, fc.negative, face);
        finite(djk, djk / props.mu[static_cast<std::size_t>(fc.negative)]);
        return s;
    }

    const auto uk = static_cast<std::size_t>(face);
    if (uk >= props.boundary.size() || !props.boundary[uk])
        throw ConfigError(fmt::format("boundary face {} has no boundary condition", face));

    std::visit(Overloaded{
                   [&](const FixedBoundary&) { finite(0.0, 0.0); },
                   [&](const RobinBoundary& rb) { finite(rb.distance, rb.distance / rb.modulus); },
                   [&](const FreeBoundary&) {
                       s.w_j = kInf;
                       s.delta = kInf;
                       s.mu_bar = 0.0;
                       s.delta_mu = kInf;
                       s.grad = 0.0;
                       s.xi_tilde = {0.0, 1.0};
                       s.xi = {1.0, 0.0};
                       s.stab = 0.5 * s.w_i;
                   },
               },
               *props.boundary[uk]);
    return s;
}

LocalOperator local_face_operator(const FaceStencil& s)
{
    LocalOperator m{};
    const double a = s.area;
    const Mat3 sn = skew(s.normal);
    // column offsets of the two cells
    constexpr std::array<std::size_t, 2> off{0, 7};
    const std::array<double, 2> grad_sign{-1.0, 1.0}; // d(u_j - u_i)

    for (std::size_t side = 0; side < 2; ++side) {
        const std::size_t o = off[side];
        for (std::size_t r = 0; r < 3; ++r) {
            // sigma = a (grad (u_j - u_i) - S*n Xi~ r + n Xi~ p)
            m[r][o + r] += a * s.grad * grad_sign[side];
            for (std::size_t c = 0; c < 3; ++c)
                m[r][o + 3 + c] -= a * sn[r][c] * s.xi_tilde[side];
            m[r][o + 6] += a * s.normal[r] * s.xi_tilde[side];

            // tau = -a S*n Xi u
            for (std::size_t c = 0; c < 3; ++c)
                m[3 + r][o + c] -= a * sn[r][c] * s.xi[side];

            // v = a (n . Xi u + stab (p_j - p_i))
            m[6][o + r] += a * s.normal[r] * s.xi[side];
        }
        m[6][o + 6] += a * s.stab * grad_sign[side];
    }
    return m;
}

SparseBlockSystem assemble_tpsa(const Mesh& mesh, const ElasticProperties& props)
{
    props.validate(mesh);
    const int n = mesh.num_cells();
    SparseBlockSystem sys;
    sys.num_cells = n;

    std::vector<linalg::Triplet> t;
    t.reserve(static_cast<std::size_t>(mesh.num_faces()) * 60 + 7 * static_cast<std::size_t>(n));

    for (int k = 0; k < mesh.num_faces(); ++k) {
        const FaceStencil s = face_stencil(mesh, k, props);
        const LocalOperator m = local_face_operator(s);
        const std::array<int, 2> cells{s.cell_i, s.cell_j};
        // row block of cell i gets -dual, cell j gets +dual (incidence -1)
        const std::array<double, 2> row_sign{-1.0, 1.0};
        for (std::size_t rs = 0; rs < 2; ++rs) {
            if (cells[rs] == kNoCell)
                continue;
            for (std::size_t row = 0; row < 7; ++row)
                for (std::size_t cs = 0; cs < 2; ++cs) {
                    if (cells[cs] == kNoCell)
                        continue; // outside values are zero
                    for (std::size_t col = 0; col < 7; ++col) {
                        const double v = m[row][7 * cs + col];
                        if (v == 0.0)
                            continue;
                        t.push_back({sys.dof(static_cast<int>(row), cells[rs]),
                                     sys.dof(static_cast<int>(col), cells[cs]),
                                     row_sign[rs] * v});
                    }
                }
        }
    }

    for (int i = 0; i < n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        const double vol = mesh.cell(i).volume;
        for (int c = 0; c < 3; ++c) {
            t.push_back({sys.dof(c, i), sys.dof(c, i), 0.0});
            t.push_back({sys.dof(3 + c, i), sys.dof(3 + c, i), vol / props.mu[ui]});
        }
        t.push_back({sys.dof(6, i), sys.dof(6, i), vol / props.lambda[ui]});
    }
    sys.matrix = linalg::CsrMatrix::from_triplets(sys.size(), sys.size(), t);

    sys.rhs.assign(static_cast<std::size_t>(sys.size()), 0.0);
    if (!props.body_force.empty())
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < 3; ++c)
                sys.rhs[static_cast<std::size_t>(sys.dof(c, i))] =
                    mesh.cell(i).volume * props.body_force[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
    return sys;
}

std::vector<FaceDual> recover_duals(const Mesh& mesh, const ElasticProperties& props,
                                    const MechState& state)
{
    props.validate(mesh);
    std::vector<FaceDual> duals(static_cast<std::size_t>(mesh.num_faces()));
    for (int k = 0; k < mesh.num_faces(); ++k) {
        const FaceStencil s = face_stencil(mesh, k, props);
        const LocalOperator m = local_face_operator(s);
        std::array<double, 14> x{};
        const std::array<int, 2> cells{s.cell_i, s.cell_j};
        for (std::size_t side = 0; side < 2; ++side) {
            if (cells[side] == kNoCell)
                continue;
            const auto c = static_cast<std::size_t>(cells[side]);
            for (std::size_t d = 0; d < 3; ++d) {
                x[7 * side + d] = state.u[c][d];
                x[7 * side + 3 + d] = state.r[c][d];
            }
            x[7 * side + 6] = state.p[c];
        }
        std::array<double, 7> y{};
        for (std::size_t row = 0; row < 7; ++row)
            for (std::size_t col = 0; col < 14; ++col)
                y[row] += m[row][col] * x[col];
        auto& d = duals[static_cast<std::size_t>(k)];
        d.sigma = {y[0], y[1], y[2]};
        d.tau = {y[3], y[4], y[5]};
        d.v = y[6];
    }
    return duals;
}

double mean_shear_modulus(const Mesh& mesh, const ElasticProperties& props)
{
    double acc = 0.0;
    for (int i = 0; i < mesh.num_cells(); ++i)
        acc += mesh.cell(i).volume * props.mu[static_cast<std::size_t>(i)];
    return acc / mesh.total_volume();
}

} // namespace biot::tpsa
