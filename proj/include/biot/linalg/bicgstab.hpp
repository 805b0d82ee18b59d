#pragma once

#include "biot/linalg/sparse.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace biot::linalg {

/// y = Op(x); used for both the system operator and the preconditioner.
using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

LinearOperator as_operator(const CsrMatrix& a);

struct BicgstabOptions {
    double rtol = 1e-5;
    int max_iter = 500;
};

enum class KrylovStatus { Converged, MaxIterations, Breakdown };

struct KrylovResult {
    Vector x;
    /// ||b - A x|| / ||b|| before the first iteration and after each iteration.
    std::vector<double> residuals;
    int iterations = 0;
    int restarts = 0;
    KrylovStatus status = KrylovStatus::Converged;
    std::string message;

    bool converged() const { return status == KrylovStatus::Converged; }
};

/// Right-preconditioned BiCGStab. The monitored residual is the residual of
/// the unpreconditioned system. A breakdown triggers one restart from the
/// current iterate; a second breakdown is reported in the result.
KrylovResult bicgstab(const LinearOperator& a, std::span<const double> b,
                      const LinearOperator* preconditioner, const BicgstabOptions& options,
                      std::span<const double> x0 = {});

} // namespace biot::linalg
