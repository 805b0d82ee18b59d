#pragma once

#include "biot/config.hpp"
#include "biot/coupling.hpp"
#include "biot/io.hpp"
#include "biot/manufactured.hpp"

#include <array>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace biot::app {

/// A configured case with an owned mesh.
struct Simulation {
    std::unique_ptr<Mesh> mesh;
    coupling::BiotCase problem;
    coupling::MechanicsSolverOptions mechanics;
    std::optional<ManufacturedSolution> exact;
};

Simulation build_simulation(const CaseConfig& config);

/// Scheme names: "lagged", "fixed" (plain fixed stress), "anderson".
coupling::CoupledResult run_scheme(const Simulation& sim, const std::string& scheme,
                                   const SchemeSpec& spec, coupling::MechanicsSolver& mechanics);

/// The scheme named by the config.
std::string scheme_name(const SchemeSpec& spec);

/// Runs the configured case and writes the outputs selected in the config
/// into `out_dir`.
coupling::CoupledResult run_case(const CaseConfig& config, const std::filesystem::path& out_dir);

// ---- manufactured-solution convergence study ----

struct ErrorReport {
    double h = 0.0;
    int cells_per_side = 0;
    /// Relative L2 errors of dp_f, u, r, p_hat.
    std::array<double, 4> errors{};
    /// Zero-guess preconditioned BiCGStab on the final mechanics system.
    int probe_iterations = 0;
    std::vector<double> probe_residuals;
    coupling::CouplingReport coupling;
    double seconds = 0.0;
};

struct ConvergenceStudy {
    std::vector<ErrorReport> grids;
    /// Least-squares log-log slopes of the four errors against h.
    std::array<double, 4> orders{};
};

inline constexpr std::array<const char*, 4> kErrorNames{"pressure_deviation", "displacement",
                                                        "rotation", "effective_pressure"};

/// Relative cell-centre L2 errors of (dp_f, u, r, p_hat) against the exact solution.
std::array<double, 4> relative_errors(const Mesh& mesh, const ManufacturedSolution& exact,
                                      std::span<const double> pressure,
                                      const tpsa::MechState& mechanics);

/// Least-squares slope of log(e) against log(h).
double fitted_order(std::span<const double> h, std::span<const double> e);

/// Parses "1/8,1/12,0.0625" style lists into mesh sizes.
std::vector<double> parse_grid_list(const std::string& text);

/// Requires at least three grids whose inverse is an integer. Writes
/// convergence.csv, orders.csv and solver_trace.csv when `out_dir` is set.
ConvergenceStudy run_convergence_study(const CaseConfig& config, const std::vector<double>& h,
                                       const std::filesystem::path* out_dir = nullptr);

// ---- sealing-barrier case ----

struct BarrierRun {
    std::string scheme;
    coupling::CoupledResult result;
    std::vector<double> avg_omega1; ///< per time level t_0..t_N
    std::vector<double> avg_omega2;
    double mass_residual = 0.0;
};

struct BarrierReport {
    std::vector<BarrierRun> runs;
};

/// 1 for cells on the lower side of the barrier plane (Omega_1), 0 otherwise.
std::vector<char> omega1_mask(const Mesh& mesh, const BarrierPlane& plane);

/// Volume-weighted average of `values` over cells with mask == want.
double subdomain_average(const Mesh& mesh, std::span<const double> values,
                         std::span<const char> mask, char want);

/// Runs each scheme on a barrier config and writes barrier_<scheme>.csv (and
/// residuals_<scheme>.csv for iterative schemes) when `out_dir` is set.
BarrierReport run_barrier_case(const CaseConfig& config, const std::vector<std::string>& schemes,
                               const std::filesystem::path* out_dir = nullptr);

} // namespace biot::app
