#pragma once

#include "biot/vec3.hpp"

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace biot {

struct CellGeometry {
    Vec3 center;   // [m]
    double volume; // [m^3]
};

struct FaceGeometry {
    Vec3 center;  // [m]
    Vec3 normal;  // unit, canonical orientation of the face
    double area;  // [m^2]
};

inline constexpr int kNoCell = -1;

/// Cells adjacent to a face. The canonical normal points out of `positive`
/// (incidence +1) and into `negative` (incidence -1). Boundary faces have
/// negative == kNoCell, so their normal is always outward.
struct FaceCells {
    int positive = kNoCell;
    int negative = kNoCell;
};

enum class Axis { X = 0, Y = 1, Z = 2 };

/// Structured origin of a mesh, kept for output and cell indexing.
struct CartesianLayout {
    std::array<int, 3> cells{};
    std::array<double, 3> lengths{};

    int cell_index(int i, int j, int k) const { return i + cells[0] * (j + cells[1] * k); }
};

/// Node coordinates and hexahedral connectivity (VTK ordering), when known.
struct HexTopology {
    std::vector<Vec3> points;
    std::vector<std::array<int, 8>> cells;
};

/// Immutable cell-centred polyhedral mesh.
///
/// Each face stores one canonical normal; the orientation seen by a cell is
/// carried only by the incidence sign. Cells may have any number of faces.
class Mesh {
public:
    Mesh(std::vector<CellGeometry> cells, std::vector<FaceGeometry> faces,
         std::vector<FaceCells> face_cells, std::vector<int> barrier_faces = {},
         std::optional<CartesianLayout> layout = std::nullopt,
         std::optional<HexTopology> topology = std::nullopt);

    int num_cells() const { return static_cast<int>(cells_.size()); }
    int num_faces() const { return static_cast<int>(faces_.size()); }

    const CellGeometry& cell(int i) const { return cells_[static_cast<std::size_t>(i)]; }
    const FaceGeometry& face(int k) const { return faces_[static_cast<std::size_t>(k)]; }
    const FaceCells& face_cells(int k) const { return face_cells_[static_cast<std::size_t>(k)]; }

    bool is_boundary(int k) const { return face_cells(k).negative == kNoCell; }
    bool is_barrier(int k) const { return barrier_flag_[static_cast<std::size_t>(k)] != 0; }

    std::span<const int> cell_faces(int i) const;
    /// Incidence signs matching cell_faces(i) entry by entry.
    std::span<const int> cell_face_signs(int i) const;

    /// Incidence of face k seen from cell i; throws std::logic_error if not adjacent.
    int incidence(int i, int k) const;
    /// The cell across face k from cell i, or kNoCell on the boundary.
    int neighbor(int k, int i) const;

    std::span<const int> boundary_faces() const { return boundary_faces_; }
    std::span<const int> barrier_faces() const { return barrier_faces_; }

    /// Connected components of the flow graph (interior faces minus barrier faces).
    std::span<const int> flow_component() const { return flow_component_; }
    int num_flow_components() const { return num_flow_components_; }

    double total_volume() const;

    const std::optional<CartesianLayout>& layout() const { return layout_; }
    const std::optional<HexTopology>& topology() const { return topology_; }

private:
    void build_connectivity();
    void validate() const;
    void label_flow_components();

    std::vector<CellGeometry> cells_;
    std::vector<FaceGeometry> faces_;
    std::vector<FaceCells> face_cells_;
    std::vector<char> barrier_flag_;
    std::vector<int> barrier_faces_;
    std::vector<int> boundary_faces_;

    std::vector<int> cell_face_offsets_;
    std::vector<int> cell_face_ids_;
    std::vector<int> cell_face_signs_;

    std::vector<int> flow_component_;
    int num_flow_components_ = 0;

    std::optional<CartesianLayout> layout_;
    std::optional<HexTopology> topology_;
};

/// delta_ik = n_i . (x_k - x_i), n_i the normal of face k oriented out of cell i.
double normal_distance(const Mesh& mesh, int cell, int face);

Mesh build_cartesian(std::array<int, 3> counts, std::array<double, 3> lengths);

struct BarrierPlane {
    Axis axis = Axis::X;
    int index = 0; ///< grid plane index, strictly between 0 and the cell count
};

/// Cartesian mesh whose faces on one interior grid plane are flagged as flow-sealing.
Mesh build_barrier_mesh(std::array<int, 3> counts, std::array<double, 3> lengths,
                        BarrierPlane plane);

} // namespace biot
