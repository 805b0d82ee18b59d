#pragma once

#include "biot/mesh.hpp"
#include "biot/tpsa.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace biot::app {

enum class CaseKind { Standard, Manufactured };
enum class SchemeKind { Lagged, FixedStress };

struct MeshSpec {
    std::array<int, 3> cells{1, 1, 1};
    std::array<double, 3> lengths{1.0, 1.0, 1.0}; ///< [m]
    std::optional<BarrierPlane> barrier;

    friend bool operator==(const MeshSpec& a, const MeshSpec& b)
    {
        auto same_plane = [](const std::optional<BarrierPlane>& x, const std::optional<BarrierPlane>& y) {
            if (x.has_value() != y.has_value())
                return false;
            return !x || (x->axis == y->axis && x->index == y->index);
        };
        return a.cells == b.cells && a.lengths == b.lengths && same_plane(a.barrier, b.barrier);
    }
};

/// Uniform material parameters, all in SI units.
struct MaterialSpec {
    double mu = 0.0;                 ///< [Pa]
    double lambda = 0.0;             ///< [Pa]
    double alpha = 0.0;              ///< [-]
    double c0 = 0.0;                 ///< [1/Pa]
    double permeability = 0.0;       ///< [m^2]
    double viscosity = 0.0;          ///< [Pa s]
    double density = 1000.0;         ///< [kg/m^3]
    Vec3 gravity{0.0, 0.0, 0.0};     ///< [m/s^2]
    double reference_pressure = 0.0; ///< [Pa]

    friend bool operator==(const MaterialSpec&, const MaterialSpec&) = default;
};

/// Boundary conditions per side, ordered xmin, xmax, ymin, ymax, zmin, zmax.
struct BoundarySpec {
    std::array<tpsa::BoundaryCondition, 6> sides{};

    friend bool operator==(const BoundarySpec&, const BoundarySpec&) = default;
};

struct WellSpec {
    std::array<int, 3> cell{};
    double rate = 0.0;  ///< [m^3/s], positive injects
    double start = 0.0; ///< [s]
    double stop = 0.0;  ///< [s]

    friend bool operator==(const WellSpec&, const WellSpec&) = default;
};

struct TimeSpec {
    double t0 = 0.0;
    double dt = 0.0; ///< [s]
    int steps = 0;

    friend bool operator==(const TimeSpec&, const TimeSpec&) = default;
};

struct SchemeSpec {
    SchemeKind kind = SchemeKind::FixedStress;
    double tol = 1e-6;
    int max_iter = 25;
    int anderson = 0; ///< window m0; 0 disables acceleration

    friend bool operator==(const SchemeSpec&, const SchemeSpec&) = default;
};

struct SolverSpec {
    double rtol = 1e-5;
    int max_iter = 500;
    int direct_limit = 30000;

    friend bool operator==(const SolverSpec&, const SolverSpec&) = default;
};

struct OutputSpec {
    std::string directory = "output";
    bool vtk = true;
    bool csv = true;
    bool source_history = false;

    friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

struct CaseConfig {
    CaseKind kind = CaseKind::Standard;
    MeshSpec mesh;
    MaterialSpec material;
    BoundarySpec boundary;
    std::vector<WellSpec> wells;
    TimeSpec time;
    SchemeSpec scheme;
    SolverSpec solver;
    OutputSpec output;

    friend bool operator==(const CaseConfig&, const CaseConfig&) = default;
};

/// Parses and validates a YAML case file. Quantities may be plain numbers in
/// SI units or `{value: x, unit: u}` maps. Throws ConfigError naming the key
/// and line on any problem.
CaseConfig parse_config(const std::filesystem::path& path);
CaseConfig parse_config_string(const std::string& text);

/// YAML text in SI units that parses back to an equal config.
std::string serialize_config(const CaseConfig& config);

/// Converts `value` given in `unit` to SI for a quantity of the given kind
/// (length, pressure, permeability, viscosity, time, rate, compressibility,
/// density, acceleration). Throws ConfigError for unknown or mismatched units.
double to_si(double value, const std::string& unit, const std::string& kind);

} // namespace biot::app
