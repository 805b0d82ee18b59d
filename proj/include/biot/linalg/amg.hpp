#pragma once

#include "biot/linalg/sparse.hpp"

#include <memory>
#include <span>
#include <vector>

namespace biot::linalg {

struct AmgOptions {
    /// Symmetric strength threshold: |a_ij| > theta * sqrt(|a_ii a_jj|).
    double strength_threshold = 0.08;
    /// Prolongator smoothing weight is prolongator_weight / rho(D^-1 A).
    double prolongator_weight = 1.0;
    /// Levels with at most this many unknowns are solved directly.
    int max_coarse = 64;
    int max_levels = 25;
    /// Largest coarsest level that is factorized densely; larger ones get
    /// symmetric Gauss-Seidel sweeps instead (happens when coarsening stalls).
    int dense_coarse_limit = 1200;
    int coarse_sweeps = 8;
    int power_iterations = 20;
};

/// Strength-of-connection graph: off-diagonal pattern of strong couplings.
CsrMatrix strength_of_connection(const CsrMatrix& a, double theta);

/// Greedy (Vanek-style) aggregation on a strength graph. Returns the aggregate
/// id per node, or -1 for isolated nodes that are left to the smoother.
std::vector<int> standard_aggregation(const CsrMatrix& strength, int& num_aggregates);

/// Piecewise-constant prolongator with unit-norm columns.
CsrMatrix tentative_prolongator(std::span<const int> aggregates, int num_aggregates);

/// Power-iteration estimate of the spectral radius of D^-1 A.
double estimate_spectral_radius(const CsrMatrix& a, int iterations);

struct AmgLevel {
    CsrMatrix a;
    CsrMatrix p; ///< prolongation to this level from the next coarser one
    CsrMatrix r; ///< p transposed
    std::vector<int> aggregates;
    int num_aggregates = 0;
};

/// Smoothed-aggregation hierarchy applied as a V(1,1) cycle with
/// forward Gauss-Seidel pre-smoothing and backward post-smoothing.
class AmgHierarchy {
public:
    explicit AmgHierarchy(const CsrMatrix& a, AmgOptions options = {});
    ~AmgHierarchy();
    AmgHierarchy(AmgHierarchy&&) noexcept;
    AmgHierarchy& operator=(AmgHierarchy&&) noexcept;

    int num_levels() const { return static_cast<int>(levels_.size()); }
    const AmgLevel& level(int l) const { return levels_[static_cast<std::size_t>(l)]; }
    int size() const { return levels_.front().a.rows(); }
    bool coarsest_is_direct() const;

    /// x = V(b), starting from a zero guess. Linear in b.
    void vcycle(std::span<const double> b, std::span<double> x) const;
    Vector vcycle(std::span<const double> b) const;

private:
    struct CoarseSolver;

    void cycle(std::size_t l, std::span<const double> b, std::span<double> x) const;

    AmgOptions options_;
    std::vector<AmgLevel> levels_;
    std::unique_ptr<CoarseSolver> coarse_;
};

/// One Gauss-Seidel sweep on A x = b; rows with zero diagonal are skipped.
void gauss_seidel_forward(const CsrMatrix& a, std::span<const double> b, std::span<double> x);
void gauss_seidel_backward(const CsrMatrix& a, std::span<const double> b, std::span<double> x);

} // namespace biot::linalg
