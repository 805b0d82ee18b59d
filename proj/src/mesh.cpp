#include "biot/mesh.hpp"

#include "biot/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace biot {

Mesh::Mesh(std::vector<CellGeometry> cells, std::vector<FaceGeometry> faces,
           std::vector<FaceCells> face_cells, std::vector<int> barrier_faces,
           std::optional<CartesianLayout> layout, std::optional<HexTopology> topology)
    : cells_(std::move(cells)),
      faces_(std::move(faces)),
      face_cells_(std::move(face_cells)),
      barrier_flag_(faces_.size(), 0),
      barrier_faces_(std::move(barrier_faces)),
      layout_(std::move(layout)),
      topology_(std::move(topology))
{
    if (face_cells_.size() != faces_.size())
        throw GeometryError(fmt::format("face/cell adjacency has {} entries for {} faces",
                                        face_cells_.size(), faces_.size()));
    std::sort(barrier_faces_.begin(), barrier_faces_.end());
    barrier_faces_.erase(std::unique(barrier_faces_.begin(), barrier_faces_.end()),
                         barrier_faces_.end());
    for (int k : barrier_faces_) {
        if (k < 0 || k >= num_faces())
            throw GeometryError(fmt::format("barrier face {} out of range", k));
        barrier_flag_[static_cast<std::size_t>(k)] = 1;
    }
    build_connectivity();
    validate();
    label_flow_components();
}

void Mesh::build_connectivity()
{
    const int nc = num_cells();
    std::vector<int> count(static_cast<std::size_t>(nc) + 1, 0);
    for (int k = 0; k < num_faces(); ++k) {
        const auto& fc = face_cells(k);
        for (int c : {fc.positive, fc.negative}) {
            if (c == kNoCell)
                continue;
            if (c < 0 || c >= nc)
                throw GeometryError(fmt::format("face {} references cell {} out of range", k, c));
            ++count[static_cast<std::size_t>(c) + 1];
        }
        if (fc.positive == kNoCell)
            throw GeometryError(fmt::format("face {} has no positive-side cell", k));
        if (fc.positive == fc.negative)
            throw GeometryError(fmt::format("face {} has the same cell on both sides", k));
        if (fc.negative == kNoCell)
            boundary_faces_.push_back(k);
    }
    std::partial_sum(count.begin(), count.end(), count.begin());
    cell_face_offsets_ = count;
    cell_face_ids_.assign(static_cast<std::size_t>(count.back()), 0);
    cell_face_signs_.assign(static_cast<std::size_t>(count.back()), 0);
    std::vector<int> fill(cell_face_offsets_.begin(), cell_face_offsets_.end() - 1);
    for (int k = 0; k < num_faces(); ++k) {
        const auto& fc = face_cells(k);
        auto put = [&](int c, int sign) {
            auto& pos = fill[static_cast<std::size_t>(c)];
            cell_face_ids_[static_cast<std::size_t>(pos)] = k;
            cell_face_signs_[static_cast<std::size_t>(pos)] = sign;
            ++pos;
        };
        put(fc.positive, +1);
        if (fc.negative != kNoCell)
            put(fc.negative, -1);
    }
}

void Mesh::validate() const
{
    for (int i = 0; i < num_cells(); ++i)
        if (!(cell(i).volume > 0.0))
            throw GeometryError(fmt::format("cell {} has non-positive volume {}", i, cell(i).volume));
    for (int k = 0; k < num_faces(); ++k) {
        if (!(face(k).area > 0.0))
            throw GeometryError(fmt::format("face {} has non-positive area {}", k, face(k).area));
        if (std::abs(norm(face(k).normal) - 1.0) > 1e-12)
            throw GeometryError(fmt::format("face {} normal is not unit length", k));
    }
    for (int k : barrier_faces_)
        if (is_boundary(k))
            throw GeometryError(fmt::format("barrier face {} lies on the boundary", k));

    for (int i = 0; i < num_cells(); ++i) {
        Vec3 sum;
        double scale = 0.0;
        auto ids = cell_faces(i);
        auto signs = cell_face_signs(i);
        for (std::size_t f = 0; f < ids.size(); ++f) {
            const auto& fg = face(ids[f]);
            sum += (signs[f] * fg.area) * fg.normal;
            scale += fg.area;
        }
        if (ids.empty() || norm(sum) > 1e-12 * scale)
            throw GeometryError(fmt::format("cell {} surface is not closed (|sum eps A n| = {})", i,
                                            norm(sum)));
    }
}

void Mesh::label_flow_components()
{
    std::vector<int> parent(static_cast<std::size_t>(num_cells()));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            auto& p = parent[static_cast<std::size_t>(x)];
            p = parent[static_cast<std::size_t>(p)];
            x = p;
        }
        return x;
    };
    for (int k = 0; k < num_faces(); ++k) {
        if (is_boundary(k) || is_barrier(k))
            continue;
        int a = find(face_cells(k).positive);
        int b = find(face_cells(k).negative);
        if (a != b)
            parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
    }
    // Number components in order of their smallest cell id.
    flow_component_.assign(static_cast<std::size_t>(num_cells()), -1);
    std::vector<int> label(static_cast<std::size_t>(num_cells()), -1);
    num_flow_components_ = 0;
    for (int i = 0; i < num_cells(); ++i) {
        int root = find(i);
        auto& l = label[static_cast<std::size_t>(root)];
        if (l < 0)
            l = num_flow_components_++;
        flow_component_[static_cast<std::size_t>(i)] = l;
    }
}

std::span<const int> Mesh::cell_faces(int i) const
{
    auto b = static_cast<std::size_t>(cell_face_offsets_[static_cast<std::size_t>(i)]);
    auto e = static_cast<std::size_t>(cell_face_offsets_[static_cast<std::size_t>(i) + 1]);
    return std::span<const int>(cell_face_ids_).subspan(b, e - b);
}

std::span<const int> Mesh::cell_face_signs(int i) const
{
    auto b = static_cast<std::size_t>(cell_face_offsets_[static_cast<std::size_t>(i)]);
    auto e = static_cast<std::size_t>(cell_face_offsets_[static_cast<std::size_t>(i) + 1]);
    return std::span<const int>(cell_face_signs_).subspan(b, e - b);
}

int Mesh::incidence(int i, int k) const
{
    const auto& fc = face_cells(k);
    if (fc.positive == i)
        return +1;
    if (fc.negative == i && i != kNoCell)
        return -1;
    throw std::logic_error(fmt::format("face {} is not adjacent to cell {}", k, i));
}

int Mesh::neighbor(int k, int i) const
{
    return incidence(i, k) > 0 ? face_cells(k).negative : face_cells(k).positive;
}

double Mesh::total_volume() const
{
    double v = 0.0;
    for (const auto& c : cells_)
        v += c.volume;
    return v;
}

double normal_distance(const Mesh& mesh, int cell, int face)
{
    const int eps = mesh.incidence(cell, face);
    const auto& f = mesh.face(face);
    const double d = eps * dot(f.normal, f.center - mesh.cell(cell).center);
    if (!(d > 0.0))
        throw GeometryError(fmt::format("non-positive normal distance {} between cell {} and face {}",
                                        d, cell, face));
    return d;
}

namespace {

void check_counts(std::array<int, 3> counts, std::array<double, 3> lengths)
{
    for (int a = 0; a < 3; ++a) {
        if (counts[static_cast<std::size_t>(a)] < 1)
            throw ConfigError(fmt::format("cell count along axis {} must be >= 1, got {}", a,
                                          counts[static_cast<std::size_t>(a)]));
        if (!(lengths[static_cast<std::size_t>(a)] > 0.0))
            throw ConfigError(fmt::format("domain length along axis {} must be > 0, got {}", a,
                                          lengths[static_cast<std::size_t>(a)]));
    }
}

struct CartesianParts {
    std::vector<CellGeometry> cells;
    std::vector<FaceGeometry> faces;
    std::vector<FaceCells> face_cells;
    std::vector<std::array<int, 2>> face_plane; // (axis, plane index) per face
    HexTopology topology;
};

CartesianParts cartesian_parts(std::array<int, 3> n, std::array<double, 3> len)
{
    check_counts(n, len);
    const Vec3 h{len[0] / n[0], len[1] / n[1], len[2] / n[2]};
    const CartesianLayout layout{n, len};
    CartesianParts parts;

    parts.cells.reserve(static_cast<std::size_t>(n[0]) * n[1] * n[2]);
    for (int k = 0; k < n[2]; ++k)
        for (int j = 0; j < n[1]; ++j)
            for (int i = 0; i < n[0]; ++i)
                parts.cells.push_back({{(i + 0.5) * h[0], (j + 0.5) * h[1], (k + 0.5) * h[2]},
                                       h[0] * h[1] * h[2]});

    for (int a = 0; a < 3; ++a) {
        const int b = (a + 1) % 3;
        const int c = (a + 2) % 3;
        const auto ua = static_cast<std::size_t>(a);
        const auto ub = static_cast<std::size_t>(b);
        const auto uc = static_cast<std::size_t>(c);
        for (int p = 0; p <= n[ua]; ++p) {
            for (int ic = 0; ic < n[uc]; ++ic) {
                for (int ib = 0; ib < n[ub]; ++ib) {
                    std::array<int, 3> idx{};
                    idx[ub] = ib;
                    idx[uc] = ic;
                    Vec3 center;
                    center[ua] = p * h[ua];
                    center[ub] = (ib + 0.5) * h[ub];
                    center[uc] = (ic + 0.5) * h[uc];
                    Vec3 normal;
                    FaceCells fc;
                    if (p == 0) {
                        idx[ua] = 0;
                        fc.positive = layout.cell_index(idx[0], idx[1], idx[2]);
                        normal[ua] = -1.0;
                    }
                    else {
                        idx[ua] = p - 1;
                        fc.positive = layout.cell_index(idx[0], idx[1], idx[2]);
                        normal[ua] = 1.0;
                        if (p < n[ua]) {
                            idx[ua] = p;
                            fc.negative = layout.cell_index(idx[0], idx[1], idx[2]);
                        }
                    }
                    parts.faces.push_back({center, normal, h[ub] * h[uc]});
                    parts.face_cells.push_back(fc);
                    parts.face_plane.push_back({a, p});
                }
            }
        }
    }

    auto node = [&](int i, int j, int k) { return i + (n[0] + 1) * (j + (n[1] + 1) * k); };
    for (int k = 0; k <= n[2]; ++k)
        for (int j = 0; j <= n[1]; ++j)
            for (int i = 0; i <= n[0]; ++i)
                parts.topology.points.push_back({i * h[0], j * h[1], k * h[2]});
    for (int k = 0; k < n[2]; ++k)
        for (int j = 0; j < n[1]; ++j)
            for (int i = 0; i < n[0]; ++i)
                parts.topology.cells.push_back({node(i, j, k), node(i + 1, j, k),
                                                node(i + 1, j + 1, k), node(i, j + 1, k),
                                                node(i, j, k + 1), node(i + 1, j, k + 1),
                                                node(i + 1, j + 1, k + 1), node(i, j + 1, k + 1)});
    return parts;
}

} // namespace

Mesh build_cartesian(std::array<int, 3> counts, std::array<double, 3> lengths)
{
    auto parts = cartesian_parts(counts, lengths);
    return Mesh(std::move(parts.cells), std::move(parts.faces), std::move(parts.face_cells), {},
                CartesianLayout{counts, lengths}, std::move(parts.topology));
}

Mesh build_barrier_mesh(std::array<int, 3> counts, std::array<double, 3> lengths,
                        BarrierPlane plane)
{
    check_counts(counts, lengths);
    const int a = static_cast<int>(plane.axis);
    if (plane.index <= 0 || plane.index >= counts[static_cast<std::size_t>(a)])
        throw ConfigError(fmt::format("barrier plane index {} must lie strictly between 0 and {}",
                                      plane.index, counts[static_cast<std::size_t>(a)]));
    auto parts = cartesian_parts(counts, lengths);
    std::vector<int> barrier;
    for (std::size_t k = 0; k < parts.face_plane.size(); ++k)
        if (parts.face_plane[k][0] == a && parts.face_plane[k][1] == plane.index)
            barrier.push_back(static_cast<int>(k));
    return Mesh(std::move(parts.cells), std::move(parts.faces), std::move(parts.face_cells),
                std::move(barrier), CartesianLayout{counts, lengths}, std::move(parts.topology));
}

} // namespace biot
