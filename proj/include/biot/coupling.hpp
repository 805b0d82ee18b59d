#pragma once

#include "biot/mechanics_solver.hpp"
#include "biot/mesh.hpp"
#include "biot/tpfa.hpp"
#include "biot/tpsa.hpp"

#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace biot::coupling {

using linalg::Vector;

struct TimeGrid {
    double t0 = 0.0;
    double dt = 0.0; ///< [s]
    int steps = 0;

    double time(int i) const { return t0 + dt * i; }
    double end() const { return time(steps); }
    void validate() const;
};

/// A complete coupled problem. The Biot compressibility of `flow` is ignored
/// and recomputed from the elastic properties as alpha^2 / lambda.
struct BiotCase {
    const Mesh* mesh = nullptr;
    tpsa::ElasticProperties elastic;
    tpfa::FlowProperties flow;
    tpfa::FlowSources sources; ///< f_p and wells; the mechanical source is managed here
    TimeGrid time;
    Vector initial_pressure; ///< Delta p_f(t0); empty means zero
};

/// Space-time source field psi, stored step-major: entry (step, cell) at
/// step * num_cells + cell, steps numbered 1..N and stored at index step - 1.
struct SourceHistory {
    int steps = 0;
    int num_cells = 0;
    Vector psi;

    static SourceHistory zero(int steps, int num_cells);
    std::span<const double> step(int s) const;
    std::span<double> step(int s);
};

struct Trajectory {
    TimeGrid time;
    std::vector<Vector> pressure;            ///< Delta p_f at t_0..t_N
    std::vector<tpsa::MechState> mechanics;  ///< u, r, p_hat at t_0..t_N
    SourceHistory psi;                       ///< psi used in each flow step
};

struct CouplingReport {
    std::string scheme;
    /// Relative fixed-point residual ||F(psi) - psi|| / ||F(psi)|| per iteration.
    std::vector<double> residuals;
    int iterations = 0;
    bool converged = false;
    /// Krylov iterations per mechanics solve, in solve order (empty for direct solves).
    std::vector<int> linear_iterations;
};

struct CoupledResult {
    Trajectory trajectory;
    CouplingReport report;
};

struct FixedStressOptions {
    double tol = 1e-6;
    int max_iter = 25;
    int anderson_window = 0; ///< 0 disables acceleration
    /// Starting source history; empty means psi = 0.
    SourceHistory initial_psi;
    /// Called after each iteration with (iteration, residual).
    std::function<void(int, double)> on_iteration;
};

/// -(alpha_i / lambda_i) dp_i per cell.
Vector mech_rhs_from_pressure(std::span<const double> dp, const tpsa::ElasticProperties& props);

/// -(alpha_i / lambda_i) (p_hat_now - p_hat_prev) / dt per cell.
Vector flow_source_from_mech(std::span<const double> p_hat_prev,
                             std::span<const double> p_hat_now, double dt,
                             const tpsa::ElasticProperties& props);

/// Flow properties with biot_compressibility = alpha^2 / lambda.
tpfa::FlowProperties coupled_flow_properties(const tpfa::FlowProperties& flow,
                                             const tpsa::ElasticProperties& elastic);

/// Space-time inner product weighted by cell volume and time step.
double space_time_dot(const Mesh& mesh, const TimeGrid& time, std::span<const double> a,
                      std::span<const double> b);
double space_time_norm(const Mesh& mesh, const TimeGrid& time, std::span<const double> a);

/// Affine weights beta (sum 1) minimizing ||sum_i beta_i r_i|| in the given
/// inner product; residuals[0] is the most recent. Uses the difference
/// formulation with a relative 1e-12 diagonal shift and falls back to
/// beta = (1, 0, ...) if the reduced problem is degenerate.
std::vector<double> anderson_weights(
    const std::vector<Vector>& residuals,
    const std::function<double(std::span<const double>, std::span<const double>)>& inner);

/// Sliding window of fixed-point pairs (psi, F(psi)).
class AndersonState {
public:
    explicit AndersonState(int window);

    void push(Vector psi, Vector image);
    int size() const { return static_cast<int>(psi_.size()); }
    int window() const { return window_; }
    const std::vector<double>& last_weights() const { return beta_; }

    /// sum_i beta_i F(psi_i) with weights from anderson_weights.
    Vector next(const std::function<double(std::span<const double>, std::span<const double>)>& inner);

private:
    int window_;
    std::vector<Vector> psi_;   ///< newest first
    std::vector<Vector> image_; ///< newest first
    std::vector<double> beta_;
};

/// One-way coupled scheme: each flow step uses psi from the previous two
/// mechanics states; psi = 0 in the first step.
CoupledResult run_lagged(const BiotCase& problem, MechanicsSolver& mechanics);

/// Whole-simulation fixed-stress iteration on psi, optionally Anderson accelerated.
CoupledResult run_fixed_stress(const BiotCase& problem, MechanicsSolver& mechanics,
                               const FixedStressOptions& options);

/// One application of the fixed-point map: a full flow run with sources
/// `psi` followed by mechanics at every step. The returned trajectory's psi
/// member holds the input; `image` receives F(psi).
Trajectory evaluate_fixed_point_map(const BiotCase& problem, MechanicsSolver& mechanics,
                                    const SourceHistory& psi, const tpsa::MechState& initial_mech,
                                    const Trajectory* warm_start, SourceHistory& image,
                                    std::vector<int>* linear_iterations = nullptr);

/// |sum c0 |w| (dp(T) - dp(t0)) - injected volume| / injected volume, or the
/// absolute value when nothing is injected.
double global_mass_check(const BiotCase& problem, const Trajectory& trajectory);

/// CSV with header `step,cell,psi`, one row per entry, full double precision.
void write_source_history(const SourceHistory& history, const std::filesystem::path& path);
SourceHistory read_source_history(const std::filesystem::path& path);

} // namespace biot::coupling
