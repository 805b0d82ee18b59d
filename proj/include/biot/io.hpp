#pragma once

#include "biot/mesh.hpp"
#include "biot/tpsa.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace biot::app {

/// Column-oriented numeric table with a header row.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const;
};

/// Comma-separated, '.' decimal, full double precision.
void write_csv(const CsvTable& table, const std::filesystem::path& path);
CsvTable read_csv(const std::filesystem::path& path);

/// Legacy ASCII VTK (v3.0) unstructured grid of hexahedra with cell data
/// pressure_deviation, displacement, rotation and effective_pressure. Needs a
/// mesh with hexahedral topology.
void write_vtk(const Mesh& mesh, std::span<const double> pressure_deviation,
               const tpsa::MechState& mechanics, const std::filesystem::path& path);

} // namespace biot::app
