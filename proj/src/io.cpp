#include "biot/io.hpp"

#include "biot/errors.hpp"

#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include <fmt/format.h>

namespace biot::app {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const
    {
        if (f)
            std::fclose(f);
    }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

File open_for_write(const std::filesystem::path& path)
{
    File f(std::fopen(path.string().c_str(), "w"));
    if (!f)
        throw IoError(fmt::format("cannot write {}", path.string()));
    return f;
}

void finish(File f, const std::filesystem::path& path)
{
    std::FILE* raw = f.release();
    if (std::ferror(raw) || std::fclose(raw) != 0)
        throw IoError(fmt::format("error while writing {}", path.string()));
}

} // namespace

std::size_t CsvTable::column(const std::string& name) const
{
    for (std::size_t c = 0; c < header.size(); ++c)
        if (header[c] == name)
            return c;
    throw std::out_of_range(fmt::format("no column named '{}'", name));
}

void write_csv(const CsvTable& table, const std::filesystem::path& path)
{
    auto f = open_for_write(path);
    for (std::size_t c = 0; c < table.header.size(); ++c)
        std::fprintf(f.get(), "%s%s", c ? "," : "", table.header[c].c_str());
    std::fprintf(f.get(), "\n");
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size())
            throw std::invalid_argument("CSV row width does not match the header");
        for (std::size_t c = 0; c < row.size(); ++c)
            std::fprintf(f.get(), "%s%.17g", c ? "," : "", row[c]);
        std::fprintf(f.get(), "\n");
    }
    finish(std::move(f), path);
}

CsvTable read_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError(fmt::format("cannot read {}", path.string()));
    CsvTable t;
    std::string line;
    if (!std::getline(in, line))
        throw IoError(fmt::format("{}: empty file", path.string()));
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            t.header.push_back(cell);
    }
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
                if (used != cell.size())
                    throw std::invalid_argument(cell);
            }
            catch (const std::exception&) {
                throw IoError(fmt::format("{}:{}: not a number: '{}'", path.string(), lineno, cell));
            }
        }
        if (row.size() != t.header.size())
            throw IoError(fmt::format("{}:{}: expected {} columns, found {}", path.string(), lineno,
                                      t.header.size(), row.size()));
        t.rows.push_back(std::move(row));
    }
    return t;
}

void write_vtk(const Mesh& mesh, std::span<const double> pressure_deviation,
               const tpsa::MechState& mechanics, const std::filesystem::path& path)
{
    const auto& topo = mesh.topology();
    if (!topo)
        throw std::invalid_argument("VTK output needs a mesh with hexahedral topology");
    const auto n = static_cast<std::size_t>(mesh.num_cells());
    if (pressure_deviation.size() != n || mechanics.u.size() != n || mechanics.r.size() != n ||
        mechanics.p.size() != n)
        throw std::invalid_argument("VTK fields must have one entry per cell");

    auto f = open_for_write(path);
    std::FILE* o = f.get();
    std::fprintf(o, "# vtk DataFile Version 3.0\nbiot poroelasticity\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    std::fprintf(o, "POINTS %zu double\n", topo->points.size());
    for (const auto& p : topo->points)
        std::fprintf(o, "%.17g %.17g %.17g\n", p[0], p[1], p[2]);
    std::fprintf(o, "CELLS %zu %zu\n", topo->cells.size(), 9 * topo->cells.size());
    for (const auto& c : topo->cells)
        std::fprintf(o, "8 %d %d %d %d %d %d %d %d\n", c[0], c[1], c[2], c[3], c[4], c[5], c[6], c[7]);
    std::fprintf(o, "CELL_TYPES %zu\n", topo->cells.size());
    for (std::size_t i = 0; i < topo->cells.size(); ++i)
        std::fprintf(o, "12\n");

    std::fprintf(o, "CELL_DATA %zu\n", n);
    auto scalars = [&](const char* name, std::span<const double> v) {
        std::fprintf(o, "SCALARS %s double 1\nLOOKUP_TABLE default\n", name);
        for (double x : v)
            std::fprintf(o, "%.17g\n", x);
    };
    auto vectors = [&](const char* name, const std::vector<Vec3>& v) {
        std::fprintf(o, "VECTORS %s double\n", name);
        for (const auto& x : v)
            std::fprintf(o, "%.17g %.17g %.17g\n", x[0], x[1], x[2]);
    };
    scalars("pressure_deviation", pressure_deviation);
    vectors("displacement", mechanics.u);
    vectors("rotation", mechanics.r);
    scalars("effective_pressure", mechanics.p);
    finish(std::move(f), path);
}

} // namespace biot::app
