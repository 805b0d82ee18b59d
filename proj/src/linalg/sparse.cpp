#include "biot/linalg/sparse.hpp"

#include "biot/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <fmt/format.h>
#include <fmt/os.h>

namespace biot::linalg {

CsrMatrix::CsrMatrix(int rows, int cols)
    : rows_(rows), cols_(cols), row_ptr_(static_cast<std::size_t>(rows) + 1, 0)
{
}

CsrMatrix CsrMatrix::from_triplets(int rows, int cols, std::span<const Triplet> triplets)
{
    CsrMatrix m(rows, cols);
    for (const auto& t : triplets) {
        if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
            throw std::out_of_range(
                fmt::format("triplet ({}, {}) outside {}x{} matrix", t.row, t.col, rows, cols));
        ++m.row_ptr_[static_cast<std::size_t>(t.row) + 1];
    }
    std::partial_sum(m.row_ptr_.begin(), m.row_ptr_.end(), m.row_ptr_.begin());

    std::vector<int> cols_tmp(triplets.size());
    Vector vals_tmp(triplets.size());
    std::vector<int> fill(m.row_ptr_.begin(), m.row_ptr_.end() - 1);
    for (const auto& t : triplets) {
        auto pos = static_cast<std::size_t>(fill[static_cast<std::size_t>(t.row)]++);
        cols_tmp[pos] = t.col;
        vals_tmp[pos] = t.value;
    }

    // Sort each row by column and merge duplicates.
    std::vector<int> new_ptr(static_cast<std::size_t>(rows) + 1, 0);
    std::vector<std::size_t> order;
    for (int i = 0; i < rows; ++i) {
        auto b = static_cast<std::size_t>(m.row_ptr_[static_cast<std::size_t>(i)]);
        auto e = static_cast<std::size_t>(m.row_ptr_[static_cast<std::size_t>(i) + 1]);
        order.resize(e - b);
        std::iota(order.begin(), order.end(), b);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t x, std::size_t y) { return cols_tmp[x] < cols_tmp[y]; });
        int last = -1;
        for (auto idx : order) {
            if (cols_tmp[idx] == last) {
                m.values_.back() += vals_tmp[idx];
            }
            else {
                m.col_idx_.push_back(cols_tmp[idx]);
                m.values_.push_back(vals_tmp[idx]);
                last = cols_tmp[idx];
            }
        }
        new_ptr[static_cast<std::size_t>(i) + 1] = static_cast<int>(m.col_idx_.size());
    }
    m.row_ptr_ = std::move(new_ptr);
    return m;
}

CsrMatrix CsrMatrix::diagonal(std::span<const double> d)
{
    const int n = static_cast<int>(d.size());
    CsrMatrix m(n, n);
    m.col_idx_.resize(d.size());
    m.values_.assign(d.begin(), d.end());
    for (int i = 0; i < n; ++i) {
        m.row_ptr_[static_cast<std::size_t>(i) + 1] = i + 1;
        m.col_idx_[static_cast<std::size_t>(i)] = i;
    }
    return m;
}

CsrMatrix CsrMatrix::from_dense(int rows, int cols, std::span<const double> row_major,
                                double drop_tol)
{
    std::vector<Triplet> t;
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            double v = row_major[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols) +
                                 static_cast<std::size_t>(j)];
            if (std::abs(v) > drop_tol)
                t.push_back({i, j, v});
        }
    return from_triplets(rows, cols, t);
}

double CsrMatrix::at(int i, int j) const
{
    auto b = col_idx_.begin() + row_ptr_[static_cast<std::size_t>(i)];
    auto e = col_idx_.begin() + row_ptr_[static_cast<std::size_t>(i) + 1];
    auto it = std::lower_bound(b, e, j);
    if (it == e || *it != j)
        return 0.0;
    return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

Vector CsrMatrix::diagonal_entries() const
{
    Vector d(static_cast<std::size_t>(std::min(rows_, cols_)), 0.0);
    for (int i = 0; i < static_cast<int>(d.size()); ++i)
        d[static_cast<std::size_t>(i)] = at(i, i);
    return d;
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const
{
    for (int i = 0; i < rows_; ++i) {
        double s = 0.0;
        for (int p = row_ptr_[static_cast<std::size_t>(i)];
             p < row_ptr_[static_cast<std::size_t>(i) + 1]; ++p)
            s += values_[static_cast<std::size_t>(p)] *
                 x[static_cast<std::size_t>(col_idx_[static_cast<std::size_t>(p)])];
        y[static_cast<std::size_t>(i)] = s;
    }
}

Vector CsrMatrix::operator*(std::span<const double> x) const
{
    Vector y(static_cast<std::size_t>(rows_));
    multiply(x, y);
    return y;
}

CsrMatrix CsrMatrix::transpose() const
{
    CsrMatrix t(cols_, rows_);
    for (int c : col_idx_)
        ++t.row_ptr_[static_cast<std::size_t>(c) + 1];
    std::partial_sum(t.row_ptr_.begin(), t.row_ptr_.end(), t.row_ptr_.begin());
    t.col_idx_.resize(col_idx_.size());
    t.values_.resize(values_.size());
    std::vector<int> fill(t.row_ptr_.begin(), t.row_ptr_.end() - 1);
    for (int i = 0; i < rows_; ++i)
        for (int p = row_ptr_[static_cast<std::size_t>(i)];
             p < row_ptr_[static_cast<std::size_t>(i) + 1]; ++p) {
            int c = col_idx_[static_cast<std::size_t>(p)];
            auto pos = static_cast<std::size_t>(fill[static_cast<std::size_t>(c)]++);
            t.col_idx_[pos] = i;
            t.values_[pos] = values_[static_cast<std::size_t>(p)];
        }
    return t;
}

CsrMatrix CsrMatrix::block(int r0, int r1, int c0, int c1) const
{
    CsrMatrix b(r1 - r0, c1 - c0);
    for (int i = r0; i < r1; ++i) {
        for (int p = row_ptr_[static_cast<std::size_t>(i)];
             p < row_ptr_[static_cast<std::size_t>(i) + 1]; ++p) {
            int c = col_idx_[static_cast<std::size_t>(p)];
            if (c >= c0 && c < c1) {
                b.col_idx_.push_back(c - c0);
                b.values_.push_back(values_[static_cast<std::size_t>(p)]);
            }
        }
        b.row_ptr_[static_cast<std::size_t>(i - r0) + 1] = static_cast<int>(b.col_idx_.size());
    }
    return b;
}

void CsrMatrix::scale(std::span<const double> left, std::span<const double> right)
{
    for (int i = 0; i < rows_; ++i)
        for (int p = row_ptr_[static_cast<std::size_t>(i)];
             p < row_ptr_[static_cast<std::size_t>(i) + 1]; ++p)
            values_[static_cast<std::size_t>(p)] *=
                left[static_cast<std::size_t>(i)] *
                right[static_cast<std::size_t>(col_idx_[static_cast<std::size_t>(p)])];
}

CsrMatrix CsrMatrix::pruned(double tol) const
{
    CsrMatrix m(rows_, cols_);
    for (int i = 0; i < rows_; ++i) {
        for (int p = row_ptr_[static_cast<std::size_t>(i)];
             p < row_ptr_[static_cast<std::size_t>(i) + 1]; ++p) {
            if (std::abs(values_[static_cast<std::size_t>(p)]) > tol) {
                m.col_idx_.push_back(col_idx_[static_cast<std::size_t>(p)]);
                m.values_.push_back(values_[static_cast<std::size_t>(p)]);
            }
        }
        m.row_ptr_[static_cast<std::size_t>(i) + 1] = static_cast<int>(m.col_idx_.size());
    }
    return m;
}

double CsrMatrix::max_abs() const
{
    double m = 0.0;
    for (double v : values_)
        m = std::max(m, std::abs(v));
    return m;
}

bool CsrMatrix::is_diagonal() const
{
    for (int i = 0; i < rows_; ++i)
        for (int p = row_ptr_[static_cast<std::size_t>(i)];
             p < row_ptr_[static_cast<std::size_t>(i) + 1]; ++p)
            if (col_idx_[static_cast<std::size_t>(p)] != i &&
                values_[static_cast<std::size_t>(p)] != 0.0)
                return false;
    return true;
}

Vector CsrMatrix::to_dense() const
{
    Vector d(static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_), 0.0);
    for (int i = 0; i < rows_; ++i)
        for (int p = row_ptr_[static_cast<std::size_t>(i)];
             p < row_ptr_[static_cast<std::size_t>(i) + 1]; ++p)
            d[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols_) +
              static_cast<std::size_t>(col_idx_[static_cast<std::size_t>(p)])] =
                values_[static_cast<std::size_t>(p)];
    return d;
}

CsrMatrix operator*(const CsrMatrix& a, const CsrMatrix& b)
{
    if (a.cols_ != b.rows_)
        throw std::invalid_argument(fmt::format("cannot multiply {}x{} by {}x{}", a.rows_, a.cols_,
                                                b.rows_, b.cols_));
    CsrMatrix c(a.rows_, b.cols_);
    // Gustavson's row-by-row product with a dense accumulator.
    std::vector<int> marker(static_cast<std::size_t>(b.cols_), -1);
    Vector acc(static_cast<std::size_t>(b.cols_), 0.0);
    std::vector<int> row_cols;
    for (int i = 0; i < a.rows_; ++i) {
        row_cols.clear();
        for (int p = a.row_ptr_[static_cast<std::size_t>(i)];
             p < a.row_ptr_[static_cast<std::size_t>(i) + 1]; ++p) {
            int k = a.col_idx_[static_cast<std::size_t>(p)];
            double av = a.values_[static_cast<std::size_t>(p)];
            for (int q = b.row_ptr_[static_cast<std::size_t>(k)];
                 q < b.row_ptr_[static_cast<std::size_t>(k) + 1]; ++q) {
                int j = b.col_idx_[static_cast<std::size_t>(q)];
                if (marker[static_cast<std::size_t>(j)] != i) {
                    marker[static_cast<std::size_t>(j)] = i;
                    acc[static_cast<std::size_t>(j)] = 0.0;
                    row_cols.push_back(j);
                }
                acc[static_cast<std::size_t>(j)] += av * b.values_[static_cast<std::size_t>(q)];
            }
        }
        std::sort(row_cols.begin(), row_cols.end());
        for (int j : row_cols) {
            c.col_idx_.push_back(j);
            c.values_.push_back(acc[static_cast<std::size_t>(j)]);
        }
        c.row_ptr_[static_cast<std::size_t>(i) + 1] = static_cast<int>(c.col_idx_.size());
    }
    return c;
}

void write_matrix_market(const CsrMatrix& a, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out)
        throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << fmt::format("{} {} {}\n", a.rows(), a.cols(), a.nnz());
    auto rp = a.row_ptr();
    auto ci = a.col_idx();
    auto va = a.values();
    for (int i = 0; i < a.rows(); ++i)
        for (int p = rp[static_cast<std::size_t>(i)]; p < rp[static_cast<std::size_t>(i) + 1]; ++p)
            out << fmt::format("{} {} {:.17g}\n", i + 1, ci[static_cast<std::size_t>(p)] + 1,
                               va[static_cast<std::size_t>(p)]);
    if (!out)
        throw IoError(fmt::format("failed writing '{}'", path.string()));
}

double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y)
{
    for (std::size_t i = 0; i < x.size(); ++i)
        y[i] += alpha * x[i];
}

} // namespace biot::linalg
