#include "biot/linalg/amg.hpp"

#include "biot/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

namespace biot::linalg {

CsrMatrix strength_of_connection(const CsrMatrix& a, double theta)
{
    const auto d = a.diagonal_entries();
    auto rp = a.row_ptr();
    auto ci = a.col_idx();
    auto va = a.values();
    std::vector<Triplet> t;
    for (int i = 0; i < a.rows(); ++i) {
        for (int p = rp[i]; p < rp[i + 1]; ++p) {
            const int j = ci[p];
            if (j == i)
                continue;
            if (std::abs(va[p]) > theta * std::sqrt(std::abs(d[i] * d[j])))
                t.push_back({i, j, 1.0});
        }
    }
    return CsrMatrix::from_triplets(a.rows(), a.cols(), t);
}

std::vector<int> standard_aggregation(const CsrMatrix& s, int& num_aggregates)
{
    const int n = s.rows();
    auto rp = s.row_ptr();
    auto ci = s.col_idx();
    std::vector<int> agg(static_cast<std::size_t>(n), -1);
    num_aggregates = 0;

    // Pass 1: seed aggregates from nodes whose whole strong neighbourhood is free.
    for (int i = 0; i < n; ++i) {
        if (agg[i] >= 0 || rp[i] == rp[i + 1])
            continue;
        bool free = true;
        for (int p = rp[i]; p < rp[i + 1] && free; ++p)
            free = agg[ci[p]] < 0;
        if (!free)
            continue;
        agg[i] = num_aggregates;
        for (int p = rp[i]; p < rp[i + 1]; ++p)
            agg[ci[p]] = num_aggregates;
        ++num_aggregates;
    }

    // Pass 2: attach leftovers to a neighbouring pass-1 aggregate.
    const auto pass1 = agg;
    for (int i = 0; i < n; ++i) {
        if (agg[i] >= 0)
            continue;
        for (int p = rp[i]; p < rp[i + 1]; ++p) {
            if (pass1[ci[p]] >= 0) {
                agg[i] = pass1[ci[p]];
                break;
            }
        }
    }

    // Pass 3: remaining connected nodes form new aggregates with free neighbours.
    for (int i = 0; i < n; ++i) {
        if (agg[i] >= 0 || rp[i] == rp[i + 1])
            continue;
        agg[i] = num_aggregates;
        for (int p = rp[i]; p < rp[i + 1]; ++p)
            if (agg[ci[p]] < 0)
                agg[ci[p]] = num_aggregates;
        ++num_aggregates;
    }
    return agg;
}

CsrMatrix tentative_prolongator(std::span<const int> aggregates, int num_aggregates)
{
    std::vector<int> size(static_cast<std::size_t>(num_aggregates), 0);
    for (int a : aggregates)
        if (a >= 0)
            ++size[a];
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < aggregates.size(); ++i) {
        const int a = aggregates[i];
        if (a >= 0)
            t.push_back({static_cast<int>(i), a, 1.0 / std::sqrt(static_cast<double>(size[a]))});
    }
    return CsrMatrix::from_triplets(static_cast<int>(aggregates.size()), num_aggregates, t);
}

double estimate_spectral_radius(const CsrMatrix& a, int iterations)
{
    const int n = a.rows();
    const auto d = a.diagonal_entries();
    std::mt19937 gen(7);
    std::uniform_real_distribution<double> dist(0.5, 1.5);
    Vector x(static_cast<std::size_t>(n));
    for (auto& v : x)
        v = dist(gen);
    Vector y(x.size());
    double rho = 0.0;
    for (int it = 0; it < iterations; ++it) {
        const double nx = norm2(x);
        if (nx == 0.0)
            return 0.0;
        a.multiply(x, y);
        for (int i = 0; i < n; ++i)
            y[i] = d[i] != 0.0 ? y[i] / d[i] : 0.0;
        const double ny = norm2(y);
        rho = ny / nx;
        if (ny == 0.0)
            return 0.0;
        for (int i = 0; i < n; ++i)
            x[i] = y[i] / ny;
    }
    return rho;
}

void gauss_seidel_forward(const CsrMatrix& a, std::span<const double> b, std::span<double> x)
{
    auto rp = a.row_ptr();
    auto ci = a.col_idx();
    auto va = a.values();
    for (int i = 0; i < a.rows(); ++i) {
        double diag = 0.0;
        double s = b[i];
        for (int p = rp[i]; p < rp[i + 1]; ++p) {
            if (ci[p] == i)
                diag = va[p];
            else
                s -= va[p] * x[ci[p]];
        }
        if (diag != 0.0)
            x[i] = s / diag;
    }
}

void gauss_seidel_backward(const CsrMatrix& a, std::span<const double> b, std::span<double> x)
{
    auto rp = a.row_ptr();
    auto ci = a.col_idx();
    auto va = a.values();
    for (int i = a.rows() - 1; i >= 0; --i) {
        double diag = 0.0;
        double s = b[i];
        for (int p = rp[i]; p < rp[i + 1]; ++p) {
            if (ci[p] == i)
                diag = va[p];
            else
                s -= va[p] * x[ci[p]];
        }
        if (diag != 0.0)
            x[i] = s / diag;
    }
}

struct AmgHierarchy::CoarseSolver {
    enum class Kind { Dense, PseudoInverse, Sweeps } kind = Kind::Dense;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;
    Eigen::MatrixXd pinv;
};

AmgHierarchy::AmgHierarchy(const CsrMatrix& a, AmgOptions options)
    : options_(options), coarse_(std::make_unique<CoarseSolver>())
{
    if (a.rows() != a.cols())
        throw std::invalid_argument("AMG requires a square matrix");
    for (double d : a.diagonal_entries())
        if (d < 0.0)
            throw ConfigError("AMG requires a nonnegative diagonal");

    levels_.push_back({a, {}, {}, {}, 0});
    while (static_cast<int>(levels_.size()) < options_.max_levels) {
        auto& fine = levels_.back();
        const int n = fine.a.rows();
        if (n <= options_.max_coarse)
            break;
        auto strength = strength_of_connection(fine.a, options_.strength_threshold);
        int nagg = 0;
        auto agg = standard_aggregation(strength, nagg);
        if (nagg == 0 || nagg >= n)
            break;

        const auto t = tentative_prolongator(agg, nagg);
        const double rho = estimate_spectral_radius(fine.a, options_.power_iterations);
        CsrMatrix p = t;
        if (rho > 0.0) {
            const double omega = options_.prolongator_weight / rho;
            auto at = fine.a * t;
            const auto d = fine.a.diagonal_entries();
            std::vector<Triplet> tr;
            tr.reserve(static_cast<std::size_t>(at.nnz() + t.nnz()));
            for (int i = 0; i < t.rows(); ++i)
                for (int q = t.row_ptr()[i]; q < t.row_ptr()[i + 1]; ++q)
                    tr.push_back({i, t.col_idx()[q], t.values()[q]});
            for (int i = 0; i < at.rows(); ++i) {
                if (d[i] == 0.0)
                    continue;
                for (int q = at.row_ptr()[i]; q < at.row_ptr()[i + 1]; ++q)
                    tr.push_back({i, at.col_idx()[q], -omega * at.values()[q] / d[i]});
            }
            p = CsrMatrix::from_triplets(t.rows(), t.cols(), tr);
        }
        auto r = p.transpose();
        auto coarse = r * (fine.a * p);
        fine.p = std::move(p);
        fine.r = std::move(r);
        fine.aggregates = std::move(agg);
        fine.num_aggregates = nagg;
        levels_.push_back({std::move(coarse), {}, {}, {}, 0});
    }

    const auto& ac = levels_.back().a;
    const int nc = ac.rows();
    if (nc <= std::max(options_.dense_coarse_limit, options_.max_coarse)) {
        Eigen::MatrixXd dense(nc, nc);
        const auto d = ac.to_dense();
        for (int i = 0; i < nc; ++i)
            for (int j = 0; j < nc; ++j)
                dense(i, j) = d[static_cast<std::size_t>(i) * nc + j];
        coarse_->lu.compute(dense);
        if (nc > 0 && !(coarse_->lu.rcond() > 1e-13)) {
            // Singular coarsest operator: pseudo-solve on the complement of the
            // constant vector.
            coarse_->kind = CoarseSolver::Kind::PseudoInverse;
            Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(dense);
            coarse_->pinv = cod.pseudoInverse();
        }
    }
    else {
        coarse_->kind = CoarseSolver::Kind::Sweeps;
    }
}

AmgHierarchy::~AmgHierarchy() = default;
AmgHierarchy::AmgHierarchy(AmgHierarchy&&) noexcept = default;
AmgHierarchy& AmgHierarchy::operator=(AmgHierarchy&&) noexcept = default;

bool AmgHierarchy::coarsest_is_direct() const
{
    return coarse_->kind != CoarseSolver::Kind::Sweeps;
}

void AmgHierarchy::vcycle(std::span<const double> b, std::span<double> x) const
{
    cycle(0, b, x);
}

Vector AmgHierarchy::vcycle(std::span<const double> b) const
{
    Vector x(b.size());
    cycle(0, b, x);
    return x;
}

void AmgHierarchy::cycle(std::size_t l, std::span<const double> b, std::span<double> x) const
{
    const auto& lev = levels_[l];
    const auto n = static_cast<std::size_t>(lev.a.rows());
    if (l + 1 == levels_.size()) {
        switch (coarse_->kind) {
        case CoarseSolver::Kind::Dense: {
            Eigen::Map<const Eigen::VectorXd> bb(b.data(), static_cast<Eigen::Index>(n));
            Eigen::Map<Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(n)) =
                coarse_->lu.solve(bb);
            break;
        }
        case CoarseSolver::Kind::PseudoInverse: {
            Eigen::Map<const Eigen::VectorXd> bb(b.data(), static_cast<Eigen::Index>(n));
            Eigen::VectorXd bc = bb.array() - bb.mean();
            Eigen::VectorXd xc = coarse_->pinv * bc;
            xc.array() -= xc.mean();
            Eigen::Map<Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(n)) = xc;
            break;
        }
        case CoarseSolver::Kind::Sweeps:
            std::fill(x.begin(), x.end(), 0.0);
            for (int s = 0; s < options_.coarse_sweeps; ++s) {
                gauss_seidel_forward(lev.a, b, x);
                gauss_seidel_backward(lev.a, b, x);
            }
            break;
        }
        return;
    }

    std::fill(x.begin(), x.end(), 0.0);
    gauss_seidel_forward(lev.a, b, x);

    Vector res(n);
    lev.a.multiply(x, res);
    for (std::size_t i = 0; i < n; ++i)
        res[i] = b[i] - res[i];
    const auto nc = static_cast<std::size_t>(lev.r.rows());
    Vector bc(nc), xc(nc);
    lev.r.multiply(res, bc);
    cycle(l + 1, bc, xc);
    Vector corr(n);
    lev.p.multiply(xc, corr);
    for (std::size_t i = 0; i < n; ++i)
        x[i] += corr[i];

    gauss_seidel_backward(lev.a, b, x);
}

} // namespace biot::linalg
