#include "biot/config.hpp"

#include "biot/errors.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

namespace biot::app {

namespace {

struct UnitInfo {
    std::string kind;
    double factor;
};

const std::map<std::string, UnitInfo>& unit_table()
{
    static const std::map<std::string, UnitInfo> table = {
        {"m", {"length", 1.0}},
        {"cm", {"length", 0.01}},
        {"km", {"length", 1000.0}},
        {"ft", {"length", 0.3048}},
        {"Pa", {"pressure", 1.0}},
        {"kPa", {"pressure", 1e3}},
        {"MPa", {"pressure", 1e6}},
        {"GPa", {"pressure", 1e9}},
        {"bar", {"pressure", 1e5}},
        {"m2", {"permeability", 1.0}},
        {"darcy", {"permeability", 9.869233e-13}},
        {"D", {"permeability", 9.869233e-13}},
        {"md", {"permeability", 9.869233e-16}},
        {"mD", {"permeability", 9.869233e-16}},
        {"Pa.s", {"viscosity", 1.0}},
        {"Pa*s", {"viscosity", 1.0}},
        {"cP", {"viscosity", 1e-3}},
        {"mPa.s", {"viscosity", 1e-3}},
        {"s", {"time", 1.0}},
        {"min", {"time", 60.0}},
        {"h", {"time", 3600.0}},
        {"day", {"time", 86400.0}},
        {"days", {"time", 86400.0}},
        {"year", {"time", 365.25 * 86400.0}},
        {"m3/s", {"rate", 1.0}},
        {"m3/day", {"rate", 1.0 / 86400.0}},
        {"1/Pa", {"compressibility", 1.0}},
        {"1/kPa", {"compressibility", 1e-3}},
        {"1/MPa", {"compressibility", 1e-6}},
        {"1/GPa", {"compressibility", 1e-9}},
        {"1/bar", {"compressibility", 1e-5}},
        {"kg/m3", {"density", 1.0}},
        {"m/s2", {"acceleration", 1.0}},
    };
    return table;
}

const std::array<const char*, 6> kSides{"xmin", "xmax", "ymin", "ymax", "zmin", "zmax"};

[[noreturn]] void fail(const YAML::Node& node, const std::string& message)
{
    const auto mark = node.Mark();
    if (mark.line >= 0)
        throw ConfigError(fmt::format("line {}: {}", mark.line + 1, message));
    throw ConfigError(message);
}

void check_keys(const YAML::Node& map, const std::string& section,
                std::initializer_list<const char*> allowed)
{
    if (!map.IsMap())
        fail(map, fmt::format("'{}' must be a mapping", section));
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& kv : map) {
        const auto key = kv.first.as<std::string>();
        if (!ok.count(key))
            fail(kv.first, fmt::format("unknown key '{}' in '{}'", key, section));
    }
}

template <class T>
T scalar_as(const YAML::Node& node, const std::string& key)
{
    if (!node.IsScalar())
        fail(node, fmt::format("'{}' must be a scalar", key));
    try {
        return node.as<T>();
    }
    catch (const YAML::Exception&) {
        fail(node, fmt::format("'{}' has invalid value '{}'", key, node.Scalar()));
    }
}

double quantity(const YAML::Node& node, const std::string& key, const std::string& kind)
{
    if (node.IsMap()) {
        check_keys(node, key, {"value", "unit"});
        if (!node["value"] || !node["unit"])
            fail(node, fmt::format("'{}' needs both 'value' and 'unit'", key));
        const double v = scalar_as<double>(node["value"], key);
        const auto unit = scalar_as<std::string>(node["unit"], key);
        try {
            return to_si(v, unit, kind);
        }
        catch (const ConfigError& e) {
            fail(node["unit"], fmt::format("'{}': {}", key, e.what()));
        }
    }
    return scalar_as<double>(node, key);
}

std::array<int, 3> int_triple(const YAML::Node& node, const std::string& key)
{
    if (!node.IsSequence() || node.size() != 3)
        fail(node, fmt::format("'{}' must be a list of three integers", key));
    return {scalar_as<int>(node[0], key), scalar_as<int>(node[1], key),
            scalar_as<int>(node[2], key)};
}

std::array<double, 3> quantity_triple(const YAML::Node& node, const std::string& key,
                                      const std::string& kind)
{
    if (!node.IsSequence() || node.size() != 3)
        fail(node, fmt::format("'{}' must be a list of three values", key));
    return {quantity(node[0], key, kind), quantity(node[1], key, kind),
            quantity(node[2], key, kind)};
}

YAML::Node required(const YAML::Node& map, const char* key, const std::string& what)
{
    const YAML::Node n = map[key];
    if (!n)
        fail(map, fmt::format("missing required {} {}", what, key));
    return n;
}

tpsa::BoundaryCondition parse_bc(const YAML::Node& node, const std::string& key)
{
    if (node.IsScalar()) {
        const auto s = node.as<std::string>();
        if (s == "fixed")
            return tpsa::FixedBoundary{};
        if (s == "free")
            return tpsa::FreeBoundary{};
        fail(node, fmt::format("'{}': unknown boundary type '{}' (fixed, free or robin)", key, s));
    }
    check_keys(node, key, {"robin"});
    const YAML::Node r = node["robin"];
    check_keys(r, key + ".robin", {"distance", "modulus"});
    tpsa::RobinBoundary rb;
    rb.distance = quantity(required(r, "distance", "robin parameter"), "distance", "length");
    rb.modulus = quantity(required(r, "modulus", "robin parameter"), "modulus", "pressure");
    if (!(rb.distance > 0.0) || !(rb.modulus > 0.0))
        fail(r, fmt::format("'{}': robin distance and modulus must be positive", key));
    return rb;
}

bool on_time_grid(double t, const TimeSpec& time)
{
    const double k = (t - time.t0) / time.dt;
    return std::abs(k - std::round(k)) <= 1e-9 * std::max(1.0, std::abs(k));
}

void validate(const CaseConfig& c, const YAML::Node& root)
{
    for (int a = 0; a < 3; ++a) {
        if (c.mesh.cells[static_cast<std::size_t>(a)] < 1)
            fail(root["mesh"], "mesh cell counts must be >= 1");
        if (!(c.mesh.lengths[static_cast<std::size_t>(a)] > 0.0))
            fail(root["mesh"], "mesh lengths must be positive");
    }
    if (c.mesh.barrier) {
        const int a = static_cast<int>(c.mesh.barrier->axis);
        if (c.mesh.barrier->index <= 0 || c.mesh.barrier->index >= c.mesh.cells[static_cast<std::size_t>(a)])
            fail(root["mesh"]["barrier"], "barrier index must lie strictly inside the mesh");
    }
    const auto& m = c.material;
    const YAML::Node props = root["properties"];
    if (!(m.mu > 0.0))
        fail(props["mu"], "property mu must be positive");
    if (!(m.lambda > 0.0))
        fail(props["lambda"], "property lambda must be positive");
    if (!(m.alpha >= 0.0 && m.alpha <= 1.0))
        fail(props["alpha"], "property alpha must lie in [0, 1]");
    if (!(m.c0 >= 0.0))
        fail(props["c0"], "property c0 must be non-negative");
    if (!(m.permeability >= 0.0))
        fail(props["permeability"], "property permeability must be non-negative");
    if (!(m.viscosity > 0.0))
        fail(props["viscosity"], "property viscosity must be positive");

    if (!(c.time.dt > 0.0))
        fail(root["time"], "time step must be positive");
    if (c.time.steps < 1)
        fail(root["time"], "number of steps must be >= 1");

    for (std::size_t w = 0; w < c.wells.size(); ++w) {
        const auto& well = c.wells[w];
        const YAML::Node node = root["wells"][w];
        for (std::size_t a = 0; a < 3; ++a)
            if (well.cell[a] < 0 || well.cell[a] >= c.mesh.cells[a])
                fail(node, fmt::format("well {} refers to a cell outside the mesh", w));
        if (!(well.stop > well.start))
            fail(node, fmt::format("well {} must stop after it starts", w));
        if (!on_time_grid(well.start, c.time) || !on_time_grid(well.stop, c.time))
            fail(node, fmt::format("well {} schedule times must lie on the time grid", w));
    }

    if (!(c.scheme.tol > 0.0))
        fail(root["scheme"], "scheme tolerance must be positive");
    if (c.scheme.max_iter < 1)
        fail(root["scheme"], "scheme max_iter must be >= 1");
    if (c.scheme.anderson < 0)
        fail(root["scheme"], "anderson window must be >= 0");
    if (!(c.solver.rtol > 0.0) || c.solver.max_iter < 1)
        fail(root["solver"], "solver rtol must be positive and max_iter >= 1");

    if (c.kind == CaseKind::Manufactured) {
        if (c.mesh.lengths != std::array<double, 3>{1.0, 1.0, 1.0})
            fail(root["mesh"], "manufactured case requires the unit cube");
        if (!c.wells.empty())
            fail(root["wells"], "manufactured case takes no wells");
        for (const auto& bc : c.boundary.sides)
            if (!std::holds_alternative<tpsa::FixedBoundary>(bc))
                fail(root["boundary"], "manufactured case requires fixed boundaries");
    }
}

CaseConfig parse_node(const YAML::Node& root)
{
    check_keys(root, "case file",
               {"case", "mesh", "properties", "boundary", "wells", "time", "scheme", "solver", "output"});
    CaseConfig c;

    if (const auto n = root["case"]) {
        const auto s = scalar_as<std::string>(n, "case");
        if (s == "standard")
            c.kind = CaseKind::Standard;
        else if (s == "manufactured")
            c.kind = CaseKind::Manufactured;
        else
            fail(n, fmt::format("unknown case '{}' (standard or manufactured)", s));
    }

    const YAML::Node mesh = required(root, "mesh", "section");
    check_keys(mesh, "mesh", {"cells", "lengths", "barrier"});
    c.mesh.cells = int_triple(required(mesh, "cells", "mesh entry"), "cells");
    if (const auto n = mesh["lengths"])
        c.mesh.lengths = quantity_triple(n, "lengths", "length");
    if (const auto b = mesh["barrier"]) {
        check_keys(b, "mesh.barrier", {"axis", "index"});
        BarrierPlane plane;
        const auto ax = scalar_as<std::string>(required(b, "axis", "barrier entry"), "axis");
        if (ax == "x")
            plane.axis = Axis::X;
        else if (ax == "y")
            plane.axis = Axis::Y;
        else if (ax == "z")
            plane.axis = Axis::Z;
        else
            fail(b["axis"], fmt::format("barrier axis must be x, y or z, got '{}'", ax));
        plane.index = scalar_as<int>(required(b, "index", "barrier entry"), "index");
        c.mesh.barrier = plane;
    }

    const YAML::Node props = required(root, "properties", "section");
    check_keys(props, "properties",
               {"mu", "lambda", "alpha", "c0", "permeability", "viscosity", "density", "gravity",
                "reference_pressure"});
    auto& m = c.material;
    m.mu = quantity(required(props, "mu", "property"), "mu", "pressure");
    m.lambda = quantity(required(props, "lambda", "property"), "lambda", "pressure");
    m.alpha = quantity(required(props, "alpha", "property"), "alpha", "dimensionless");
    m.c0 = quantity(required(props, "c0", "property"), "c0", "compressibility");
    m.permeability =
        quantity(required(props, "permeability", "property"), "permeability", "permeability");
    m.viscosity = quantity(required(props, "viscosity", "property"), "viscosity", "viscosity");
    if (const auto n = props["density"])
        m.density = quantity(n, "density", "density");
    if (const auto n = props["gravity"]) {
        const auto g = quantity_triple(n, "gravity", "acceleration");
        m.gravity = {g[0], g[1], g[2]};
    }
    if (const auto n = props["reference_pressure"])
        m.reference_pressure = quantity(n, "reference_pressure", "pressure");

    c.boundary.sides.fill(tpsa::FixedBoundary{});
    if (const auto b = root["boundary"]) {
        check_keys(b, "boundary", {"default", "xmin", "xmax", "ymin", "ymax", "zmin", "zmax"});
        if (const auto d = b["default"])
            c.boundary.sides.fill(parse_bc(d, "default"));
        for (std::size_t s = 0; s < 6; ++s)
            if (const auto n = b[kSides[s]])
                c.boundary.sides[s] = parse_bc(n, kSides[s]);
    }

    if (const auto wells = root["wells"]) {
        if (!wells.IsSequence())
            fail(wells, "'wells' must be a list");
        for (const auto& w : wells) {
            check_keys(w, "wells", {"cell", "rate", "start", "stop"});
            WellSpec well;
            well.cell = int_triple(required(w, "cell", "well entry"), "cell");
            well.rate = quantity(required(w, "rate", "well entry"), "rate", "rate");
            well.start = quantity(required(w, "start", "well entry"), "start", "time");
            well.stop = quantity(required(w, "stop", "well entry"), "stop", "time");
            c.wells.push_back(well);
        }
    }

    const YAML::Node time = required(root, "time", "section");
    check_keys(time, "time", {"t0", "dt", "steps"});
    if (const auto n = time["t0"])
        c.time.t0 = quantity(n, "t0", "time");
    c.time.dt = quantity(required(time, "dt", "time entry"), "dt", "time");
    c.time.steps = scalar_as<int>(required(time, "steps", "time entry"), "steps");

    if (const auto s = root["scheme"]) {
        check_keys(s, "scheme", {"type", "tol", "max_iter", "anderson"});
        if (const auto n = s["type"]) {
            const auto t = scalar_as<std::string>(n, "type");
            if (t == "lagged")
                c.scheme.kind = SchemeKind::Lagged;
            else if (t == "fixed_stress")
                c.scheme.kind = SchemeKind::FixedStress;
            else
                fail(n, fmt::format("unknown scheme '{}' (lagged or fixed_stress)", t));
        }
        if (const auto n = s["tol"])
            c.scheme.tol = scalar_as<double>(n, "tol");
        if (const auto n = s["max_iter"])
            c.scheme.max_iter = scalar_as<int>(n, "max_iter");
        if (const auto n = s["anderson"])
            c.scheme.anderson = scalar_as<int>(n, "anderson");
    }

    if (const auto s = root["solver"]) {
        check_keys(s, "solver", {"rtol", "max_iter", "direct_limit"});
        if (const auto n = s["rtol"])
            c.solver.rtol = scalar_as<double>(n, "rtol");
        if (const auto n = s["max_iter"])
            c.solver.max_iter = scalar_as<int>(n, "max_iter");
        if (const auto n = s["direct_limit"])
            c.solver.direct_limit = scalar_as<int>(n, "direct_limit");
    }

    if (const auto o = root["output"]) {
        check_keys(o, "output", {"directory", "vtk", "csv", "source_history"});
        if (const auto n = o["directory"])
            c.output.directory = scalar_as<std::string>(n, "directory");
        if (const auto n = o["vtk"])
            c.output.vtk = scalar_as<bool>(n, "vtk");
        if (const auto n = o["csv"])
            c.output.csv = scalar_as<bool>(n, "csv");
        if (const auto n = o["source_history"])
            c.output.source_history = scalar_as<bool>(n, "source_history");
    }

    validate(c, root);
    return c;
}

YAML::Node load(const std::string& text)
{
    try {
        return YAML::Load(text);
    }
    catch (const YAML::ParserException& e) {
        throw ConfigError(fmt::format("line {}: {}", e.mark.line + 1, e.msg));
    }
}

void emit_bc(YAML::Emitter& out, const tpsa::BoundaryCondition& bc)
{
    if (std::holds_alternative<tpsa::FixedBoundary>(bc))
        out << "fixed";
    else if (std::holds_alternative<tpsa::FreeBoundary>(bc))
        out << "free";
    else {
        const auto& rb = std::get<tpsa::RobinBoundary>(bc);
        out << YAML::BeginMap << YAML::Key << "robin" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "distance" << YAML::Value << rb.distance;
        out << YAML::Key << "modulus" << YAML::Value << rb.modulus;
        out << YAML::EndMap << YAML::EndMap;
    }
}

template <class T>
void emit_triple(YAML::Emitter& out, const T& a)
{
    out << YAML::Flow << YAML::BeginSeq << a[0] << a[1] << a[2] << YAML::EndSeq;
}

} // namespace

double to_si(double value, const std::string& unit, const std::string& kind)
{
    if (kind == "dimensionless") {
        if (unit == "1" || unit == "-")
            return value;
        throw ConfigError(fmt::format("unit '{}' given for a dimensionless quantity", unit));
    }
    const auto& table = unit_table();
    const auto it = table.find(unit);
    if (it == table.end())
        throw ConfigError(fmt::format("unknown unit '{}'", unit));
    if (it->second.kind != kind)
        throw ConfigError(fmt::format("unit '{}' is a {} unit, expected a {} unit", unit,
                                      it->second.kind, kind));
    return value * it->second.factor;
}

CaseConfig parse_config_string(const std::string& text)
{
    const YAML::Node root = load(text);
    if (!root || root.IsNull())
        throw ConfigError("empty case file");
    try {
        return parse_node(root);
    }
    catch (const YAML::Exception& e) {
        throw ConfigError(fmt::format("line {}: {}", e.mark.line + 1, e.msg));
    }
}

CaseConfig parse_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError(fmt::format("cannot open case file {}", path.string()));
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config_string(ss.str());
    }
    catch (const ConfigError& e) {
        throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

std::string serialize_config(const CaseConfig& c)
{
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << YAML::BeginMap;
    out << YAML::Key << "case" << YAML::Value
        << (c.kind == CaseKind::Manufactured ? "manufactured" : "standard");

    out << YAML::Key << "mesh" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "cells" << YAML::Value;
    emit_triple(out, c.mesh.cells);
    out << YAML::Key << "lengths" << YAML::Value;
    emit_triple(out, c.mesh.lengths);
    if (c.mesh.barrier) {
        const char* axes[] = {"x", "y", "z"};
        out << YAML::Key << "barrier" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "axis" << YAML::Value << axes[static_cast<int>(c.mesh.barrier->axis)];
        out << YAML::Key << "index" << YAML::Value << c.mesh.barrier->index;
        out << YAML::EndMap;
    }
    out << YAML::EndMap;

    const auto& m = c.material;
    out << YAML::Key << "properties" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "mu" << YAML::Value << m.mu;
    out << YAML::Key << "lambda" << YAML::Value << m.lambda;
    out << YAML::Key << "alpha" << YAML::Value << m.alpha;
    out << YAML::Key << "c0" << YAML::Value << m.c0;
    out << YAML::Key << "permeability" << YAML::Value << m.permeability;
    out << YAML::Key << "viscosity" << YAML::Value << m.viscosity;
    out << YAML::Key << "density" << YAML::Value << m.density;
    out << YAML::Key << "gravity" << YAML::Value;
    emit_triple(out, m.gravity);
    out << YAML::Key << "reference_pressure" << YAML::Value << m.reference_pressure;
    out << YAML::EndMap;

    out << YAML::Key << "boundary" << YAML::Value << YAML::BeginMap;
    for (std::size_t s = 0; s < 6; ++s) {
        out << YAML::Key << kSides[s] << YAML::Value;
        emit_bc(out, c.boundary.sides[s]);
    }
    out << YAML::EndMap;

    if (!c.wells.empty()) {
        out << YAML::Key << "wells" << YAML::Value << YAML::BeginSeq;
        for (const auto& w : c.wells) {
            out << YAML::BeginMap;
            out << YAML::Key << "cell" << YAML::Value;
            emit_triple(out, w.cell);
            out << YAML::Key << "rate" << YAML::Value << w.rate;
            out << YAML::Key << "start" << YAML::Value << w.start;
            out << YAML::Key << "stop" << YAML::Value << w.stop;
            out << YAML::EndMap;
        }
        out << YAML::EndSeq;
    }

    out << YAML::Key << "time" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "t0" << YAML::Value << c.time.t0;
    out << YAML::Key << "dt" << YAML::Value << c.time.dt;
    out << YAML::Key << "steps" << YAML::Value << c.time.steps;
    out << YAML::EndMap;

    out << YAML::Key << "scheme" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "type" << YAML::Value
        << (c.scheme.kind == SchemeKind::Lagged ? "lagged" : "fixed_stress");
    out << YAML::Key << "tol" << YAML::Value << c.scheme.tol;
    out << YAML::Key << "max_iter" << YAML::Value << c.scheme.max_iter;
    out << YAML::Key << "anderson" << YAML::Value << c.scheme.anderson;
    out << YAML::EndMap;

    out << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "rtol" << YAML::Value << c.solver.rtol;
    out << YAML::Key << "max_iter" << YAML::Value << c.solver.max_iter;
    out << YAML::Key << "direct_limit" << YAML::Value << c.solver.direct_limit;
    out << YAML::EndMap;

    out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "directory" << YAML::Value << YAML::DoubleQuoted << c.output.directory;
    out << YAML::Key << "vtk" << YAML::Value << c.output.vtk;
    out << YAML::Key << "csv" << YAML::Value << c.output.csv;
    out << YAML::Key << "source_history" << YAML::Value << c.output.source_history;
    out << YAML::EndMap;

    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

} // namespace biot::app
