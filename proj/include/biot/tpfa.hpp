#pragma once

#include "biot/linalg/direct.hpp"
#include "biot/linalg/sparse.hpp"
#include "biot/mesh.hpp"

#include <vector>

namespace biot::tpfa {

using linalg::CsrMatrix;
using linalg::Vector;

/// Per-cell single-phase flow coefficients (SI units).
///
/// Gravity is absorbed into the hydrostatic reference pressure, so density and
/// gravity only enter through `reference_pressure`; the primary unknown is the
/// deviation from it.
struct FlowProperties {
    Vector permeability;         ///< K [m^2]
    Vector viscosity;            ///< mu_w [Pa s]
    Vector storativity;          ///< c0 [1/Pa]
    Vector biot_compressibility; ///< alpha^2 / lambda [1/Pa]
    Vector reference_pressure;   ///< p0 [Pa]
    double density = 1000.0;     ///< rho [kg/m^3]
    Vec3 gravity{0.0, 0.0, 0.0}; ///< g [m/s^2]

    /// Uniform properties on n cells; reference pressure starts at zero.
    static FlowProperties uniform(int n, double permeability, double viscosity,
                                  double storativity, double biot_compressibility);

    double storage(int i) const
    {
        return storativity[static_cast<std::size_t>(i)] +
               biot_compressibility[static_cast<std::size_t>(i)];
    }

    void validate(const Mesh& mesh) const;
};

/// p0(x) = p_ref + rho g . (x - x_ref) evaluated at cell centres.
Vector hydrostatic_pressure(const Mesh& mesh, double density, const Vec3& gravity,
                            double reference_value, const Vec3& reference_point = {});

struct FlowState {
    Vector pressure_deviation; ///< Delta p_f [Pa]
    double time = 0.0;         ///< [s]
};

/// Fixed-rate volumetric point source; positive rate injects.
struct Well {
    int cell = 0;
    double rate = 0.0;  ///< [m^3/s]
    double start = 0.0; ///< [s]
    double stop = 0.0;  ///< [s]

    friend bool operator==(const Well&, const Well&) = default;
};

struct FlowSources {
    Vector volumetric; ///< f_p per cell [1/s]; empty means zero
    std::vector<Well> wells;
    Vector mechanical; ///< psi per cell [1/s]; empty means zero

    /// Volume injected per unit time in each cell, averaged over [t0, t1] [m^3/s].
    Vector cell_rates(const Mesh& mesh, double t0, double t1) const;
    /// Total injected volume over [t0, t1] from f_p and wells, excluding psi [m^3].
    double injected_volume(const Mesh& mesh, double t0, double t1) const;
};

/// Distance-weighted harmonic average delta_k / sum(delta_ik mu_w,i / K_i);
/// zero if either permeability vanishes or the face is a barrier.
double effective_conductivity(const Mesh& mesh, int face, const FlowProperties& props);

/// Face transmissibility |face| * conductivity / delta_k.
double transmissibility(const Mesh& mesh, int face, const FlowProperties& props);

/// Symmetric positive semidefinite two-point flux operator (no-flow boundaries).
CsrMatrix assemble_flow(const Mesh& mesh, const FlowProperties& props);

/// Backward-Euler stepper for the storage-augmented flow equation. The system
/// matrix is factorized once per time-step size and reused.
class FlowStepper {
public:
    FlowStepper(const Mesh& mesh, const FlowProperties& props, double dt);

    FlowState step(const FlowState& state, const FlowSources& sources) const;
    double dt() const { return dt_; }
    const CsrMatrix& flux_operator() const { return flux_; }

private:
    const Mesh* mesh_;
    double dt_;
    CsrMatrix flux_;
    Vector accumulation_; ///< storage |omega| / dt per cell
    linalg::DirectSolver solver_;
};

/// One backward-Euler step; convenience wrapper around FlowStepper.
FlowState step_flow(const Mesh& mesh, const FlowState& state, double dt,
                    const FlowSources& sources, const FlowProperties& props);

} // namespace biot::tpfa
