#pragma once

#include "biot/linalg/sparse.hpp"

#include <memory>
#include <span>

namespace biot::linalg {

/// Sparse direct solver, factorized once and reused for many right-hand sides.
/// General matrices use LU; symmetric positive definite ones may request an
/// LDL^T factorization.
class DirectSolver {
public:
    enum class Kind { LU, SymmetricLDLT };

    explicit DirectSolver(const CsrMatrix& a, Kind kind = Kind::LU);
    ~DirectSolver();
    DirectSolver(DirectSolver&&) noexcept;
    DirectSolver& operator=(DirectSolver&&) noexcept;

    Vector solve(std::span<const double> b) const;
    int size() const { return n_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    int n_ = 0;
};

} // namespace biot::linalg
