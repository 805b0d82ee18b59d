#include "biot/tpfa.hpp"

#include "biot/errors.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

namespace biot::tpfa {

FlowProperties FlowProperties::uniform(int n, double permeability, double viscosity,
                                       double storativity, double biot_compressibility)
{
    const auto un = static_cast<std::size_t>(n);
    FlowProperties p;
    p.permeability.assign(un, permeability);
    p.viscosity.assign(un, viscosity);
    p.storativity.assign(un, storativity);
    p.biot_compressibility.assign(un, biot_compressibility);
    p.reference_pressure.assign(un, 0.0);
    return p;
}

void FlowProperties::validate(const Mesh& mesh) const
{
    const auto n = static_cast<std::size_t>(mesh.num_cells());
    auto check_size = [&](const Vector& v, const char* name) {
        if (v.size() != n)
            throw ConfigError(fmt::format("flow property '{}' has {} entries for {} cells", name,
                                          v.size(), n));
    };
    check_size(permeability, "permeability");
    check_size(viscosity, "viscosity");
    check_size(storativity, "storativity");
    check_size(biot_compressibility, "biot_compressibility");
    check_size(reference_pressure, "reference_pressure");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(permeability[i] >= 0.0))
            throw ConfigError(fmt::format("permeability must be >= 0 (cell {})", i));
        if (!(viscosity[i] > 0.0))
            throw ConfigError(fmt::format("viscosity must be > 0 (cell {})", i));
        if (!(storativity[i] >= 0.0))
            throw ConfigError(fmt::format("storativity must be >= 0 (cell {})", i));
        if (!(biot_compressibility[i] >= 0.0))
            throw ConfigError(fmt::format("biot compressibility must be >= 0 (cell {})", i));
    }
}

Vector hydrostatic_pressure(const Mesh& mesh, double density, const Vec3& gravity,
                            double reference_value, const Vec3& reference_point)
{
    Vector p(static_cast<std::size_t>(mesh.num_cells()));
    for (int i = 0; i < mesh.num_cells(); ++i)
        p[static_cast<std::size_t>(i)] =
            reference_value + density * dot(gravity, mesh.cell(i).center - reference_point);
    return p;
}

Vector FlowSources::cell_rates(const Mesh& mesh, double t0, double t1) const
{
    const auto n = static_cast<std::size_t>(mesh.num_cells());
    Vector q(n, 0.0);
    if (!volumetric.empty())
        for (std::size_t i = 0; i < n; ++i)
            q[i] += mesh.cell(static_cast<int>(i)).volume * volumetric[i];
    const double span = t1 - t0;
    for (const auto& w : wells) {
        if (w.cell < 0 || w.cell >= mesh.num_cells())
            throw ConfigError(fmt::format("well cell {} does not exist", w.cell));
        const double overlap = std::max(0.0, std::min(t1, w.stop) - std::max(t0, w.start));
        if (overlap > 0.0 && span > 0.0)
            q[static_cast<std::size_t>(w.cell)] += w.rate * overlap / span;
    }
    return q;
}

double FlowSources::injected_volume(const Mesh& mesh, double t0, double t1) const
{
    double v = 0.0;
    for (double q : cell_rates(mesh, t0, t1))
        v += q;
    return v * (t1 - t0);
}

double effective_conductivity(const Mesh& mesh, int face, const FlowProperties& props)
{
    if (mesh.is_boundary(face))
        throw std::logic_error(fmt::format("face {} is a boundary face", face));
    if (mesh.is_barrier(face))
        return 0.0;
    const auto& fc = mesh.face_cells(face);
    const auto i = static_cast<std::size_t>(fc.positive);
    const auto j = static_cast<std::size_t>(fc.negative);
    if (props.permeability[i] == 0.0 || props.permeability[j] == 0.0)
        return 0.0;
    const double dik = normal_distance(mesh, fc.positive, face);
    const double djk = normal_distance(mesh, fc.negative, face);
    return (dik + djk) / (dik * props.viscosity[i] / props.permeability[i] +
                          djk * props.viscosity[j] / props.permeability[j]);
}

double transmissibility(const Mesh& mesh, int face, const FlowProperties& props)
{
    const double kappa = effective_conductivity(mesh, face, props);
    if (kappa == 0.0)
        return 0.0;
    const auto& fc = mesh.face_cells(face);
    const double dk =
        normal_distance(mesh, fc.positive, face) + normal_distance(mesh, fc.negative, face);
    return mesh.face(face).area * kappa / dk;
}

CsrMatrix assemble_flow(const Mesh& mesh, const FlowProperties& props)
{
    props.validate(mesh);
    std::vector<linalg::Triplet> t;
    for (int k = 0; k < mesh.num_faces(); ++k) {
        if (mesh.is_boundary(k))
            continue; // no-flow
        const double tk = transmissibility(mesh, k, props);
        if (tk == 0.0)
            continue;
        const auto& fc = mesh.face_cells(k);
        t.push_back({fc.positive, fc.positive, tk});
        t.push_back({fc.positive, fc.negative, -tk});
        t.push_back({fc.negative, fc.negative, tk});
        t.push_back({fc.negative, fc.positive, -tk});
    }
    // Keep the diagonal structurally present.
    for (int i = 0; i < mesh.num_cells(); ++i)
        t.push_back({i, i, 0.0});
    return CsrMatrix::from_triplets(mesh.num_cells(), mesh.num_cells(), t);
}

namespace {

linalg::DirectSolver factorize_step_matrix(const Mesh& mesh, const CsrMatrix& flux,
                                           const Vector& accumulation)
{
    std::vector<double> component_storage(static_cast<std::size_t>(mesh.num_flow_components()), 0.0);
    for (int i = 0; i < mesh.num_cells(); ++i)
        component_storage[static_cast<std::size_t>(mesh.flow_component()[static_cast<std::size_t>(i)])] +=
            accumulation[static_cast<std::size_t>(i)];
    for (std::size_t c = 0; c < component_storage.size(); ++c)
        if (component_storage[c] == 0.0)
            throw SolverError(fmt::format(
                "singular flow system: flow component {} has zero storage (c0 + alpha^2/lambda = 0) "
                "and no-flow boundaries, so constant pressure is in the nullspace",
                c));

    std::vector<linalg::Triplet> t;
    auto rp = flux.row_ptr();
    auto ci = flux.col_idx();
    auto va = flux.values();
    for (int i = 0; i < flux.rows(); ++i)
        for (int p = rp[static_cast<std::size_t>(i)]; p < rp[static_cast<std::size_t>(i) + 1]; ++p)
            t.push_back({i, ci[static_cast<std::size_t>(p)], va[static_cast<std::size_t>(p)]});
    for (int i = 0; i < flux.rows(); ++i)
        t.push_back({i, i, accumulation[static_cast<std::size_t>(i)]});
    return linalg::DirectSolver(CsrMatrix::from_triplets(flux.rows(), flux.cols(), t),
                                linalg::DirectSolver::Kind::SymmetricLDLT);
}

Vector accumulation_terms(const Mesh& mesh, const FlowProperties& props, double dt)
{
    if (!(dt > 0.0))
        throw ConfigError(fmt::format("time step must be positive, got {}", dt));
    Vector a(static_cast<std::size_t>(mesh.num_cells()));
    for (int i = 0; i < mesh.num_cells(); ++i)
        a[static_cast<std::size_t>(i)] = props.storage(i) * mesh.cell(i).volume / dt;
    return a;
}

} // namespace

FlowStepper::FlowStepper(const Mesh& mesh, const FlowProperties& props, double dt)
    : mesh_(&mesh),
      dt_(dt),
      flux_(assemble_flow(mesh, props)),
      accumulation_(accumulation_terms(mesh, props, dt)),
      solver_(factorize_step_matrix(mesh, flux_, accumulation_))
{
}

FlowState FlowStepper::step(const FlowState& state, const FlowSources& sources) const
{
    const auto n = static_cast<std::size_t>(mesh_->num_cells());
    if (state.pressure_deviation.size() != n)
        throw std::invalid_argument("flow state size does not match the mesh");
    Vector rhs = sources.cell_rates(*mesh_, state.time, state.time + dt_);
    for (std::size_t i = 0; i < n; ++i) {
        rhs[i] += accumulation_[i] * state.pressure_deviation[i];
        if (!sources.mechanical.empty())
            rhs[i] += mesh_->cell(static_cast<int>(i)).volume * sources.mechanical[i];
    }
    FlowState next;
    next.pressure_deviation = solver_.solve(rhs);
    next.time = state.time + dt_;
    return next;
}

FlowState step_flow(const Mesh& mesh, const FlowState& state, double dt,
                    const FlowSources& sources, const FlowProperties& props)
{
    return FlowStepper(mesh, props, dt).step(state, sources);
}

} // namespace biot::tpfa
