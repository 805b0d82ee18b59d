#pragma once

#include "biot/linalg/block_system.hpp"
#include "biot/mesh.hpp"

#include <array>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace biot::tpsa {

using linalg::SparseBlockSystem;
using linalg::Vector;

/// Zero displacement on the face.
struct FixedBoundary {
    friend bool operator==(const FixedBoundary&, const FixedBoundary&) = default;
};

/// Elastic spring: a virtual outside cell at normal distance `distance` with
/// shear modulus `modulus`, all outside values zero.
struct RobinBoundary {
    double distance = 0.0; ///< delta_jk [m]
    double modulus = 0.0;  ///< mu_j [Pa]
    friend bool operator==(const RobinBoundary&, const RobinBoundary&) = default;
};

/// Traction-free face, taken as the limit of a Robin face with infinite distance.
struct FreeBoundary {
    friend bool operator==(const FreeBoundary&, const FreeBoundary&) = default;
};

using BoundaryCondition = std::variant<FixedBoundary, RobinBoundary, FreeBoundary>;

struct ElasticProperties {
    Vector mu;                   ///< shear modulus [Pa]
    Vector lambda;               ///< Lame parameter [Pa]
    Vector alpha;                ///< Biot-Willis coefficient [-]
    std::vector<Vec3> body_force; ///< f_u [N/m^3]; empty means zero
    /// Indexed by face id; only boundary entries are read.
    std::vector<std::optional<BoundaryCondition>> boundary;

    static ElasticProperties uniform(const Mesh& mesh, double mu, double lambda, double alpha,
                                     const BoundaryCondition& bc);

    void validate(const Mesh& mesh) const;
};

/// Per-cell displacement [m], rotation [Pa] and solid (or effective) pressure [Pa].
struct MechState {
    std::vector<Vec3> u;
    std::vector<Vec3> r;
    Vector p;

    static MechState zero(int num_cells);
    /// Field-major [ux|uy|uz|rx|ry|rz|p] vector.
    static MechState unpack(std::span<const double> x, int num_cells);
    Vector pack() const;
};

/// Face coefficients. The normal is the canonical one (out of cell_i). The
/// `grad`, `xi_tilde`, `xi` and `stab` members are finite for every closure and
/// are what assembly uses; for free faces w_j, delta and delta_mu are infinite
/// and mu_bar is undefined (reported as 0).
struct FaceStencil {
    int face = 0;
    int cell_i = kNoCell;
    int cell_j = kNoCell; ///< kNoCell on the boundary
    double area = 0.0;
    Vec3 normal;

    double w_i = 0.0;
    double w_j = 0.0;
    double delta = 0.0;    ///< delta_ik + delta_jk
    double mu_bar = 0.0;   ///< delta / (w_i + w_j)
    double delta_mu = 0.0; ///< w_i w_j mu_bar / 2

    double grad = 0.0;                  ///< 2 mu_bar / delta = 2 / (w_i + w_j)
    std::array<double, 2> xi_tilde{};   ///< (w_i, w_j) / (w_i + w_j)
    std::array<double, 2> xi{};         ///< (w_j, w_i) / (w_i + w_j)
    double stab = 0.0;                  ///< delta_mu / delta
};

FaceStencil face_stencil(const Mesh& mesh, int face, const ElasticProperties& props);

/// Rows (sigma, tau, v); columns (u_i, r_i, p_i, u_j, r_j, p_j).
using LocalOperator = std::array<std::array<double, 14>, 7>;

LocalOperator local_face_operator(const FaceStencil& s);

/// Cell-local TPSA system with body-force rhs in the displacement rows and a
/// zero pressure-row rhs.
SparseBlockSystem assemble_tpsa(const Mesh& mesh, const ElasticProperties& props);

struct FaceDual {
    Vec3 sigma;
    Vec3 tau;
    double v = 0.0;
};

std::vector<FaceDual> recover_duals(const Mesh& mesh, const ElasticProperties& props,
                                    const MechState& state);

/// Volume-weighted mean shear modulus, used as the rescaling reference.
double mean_shear_modulus(const Mesh& mesh, const ElasticProperties& props);

} // namespace biot::tpsa
