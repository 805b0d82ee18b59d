#include "biot/linalg/direct.hpp"

#include "biot/errors.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <variant>

#include <fmt/format.h>

namespace biot::linalg {

namespace {

Eigen::SparseMatrix<double> to_eigen(const CsrMatrix& a)
{
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(a.nnz()));
    auto rp = a.row_ptr();
    auto ci = a.col_idx();
    auto va = a.values();
    for (int i = 0; i < a.rows(); ++i)
        for (int p = rp[i]; p < rp[i + 1]; ++p)
            t.emplace_back(i, ci[p], va[p]);
    Eigen::SparseMatrix<double> m(a.rows(), a.cols());
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    return m;
}

} // namespace

struct DirectSolver::Impl {
    using Lu = Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>;
    using Ldlt = Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>;
    std::variant<std::unique_ptr<Lu>, std::unique_ptr<Ldlt>> solver;
};

DirectSolver::DirectSolver(const CsrMatrix& a, Kind kind) : impl_(std::make_unique<Impl>()), n_(a.rows())
{
    if (a.rows() != a.cols())
        throw std::invalid_argument("direct solver requires a square matrix");
    auto m = to_eigen(a);
    if (kind == Kind::LU) {
        auto lu = std::make_unique<Impl::Lu>();
        lu->analyzePattern(m);
        lu->factorize(m);
        if (lu->info() != Eigen::Success)
            throw SolverError(fmt::format("sparse LU factorization failed: {}", lu->lastErrorMessage()));
        impl_->solver = std::move(lu);
    }
    else {
        auto ldlt = std::make_unique<Impl::Ldlt>();
        ldlt->compute(m);
        if (ldlt->info() != Eigen::Success)
            throw SolverError("sparse LDL^T factorization failed (matrix not positive definite?)");
        const auto d = ldlt->vectorD();
        for (Eigen::Index i = 0; i < d.size(); ++i)
            if (!(d[i] > 0.0))
                throw SolverError("sparse LDL^T factorization produced a non-positive pivot; "
                                  "the matrix is singular or indefinite");
        impl_->solver = std::move(ldlt);
    }
}

DirectSolver::~DirectSolver() = default;
DirectSolver::DirectSolver(DirectSolver&&) noexcept = default;
DirectSolver& DirectSolver::operator=(DirectSolver&&) noexcept = default;

Vector DirectSolver::solve(std::span<const double> b) const
{
    Eigen::Map<const Eigen::VectorXd> bb(b.data(), static_cast<Eigen::Index>(b.size()));
    Eigen::VectorXd x = std::visit([&](const auto& s) -> Eigen::VectorXd { return s->solve(bb); },
                                   impl_->solver);
    return Vector(x.data(), x.data() + x.size());
}

} // namespace biot::linalg
