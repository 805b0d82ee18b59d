#pragma once

#include <filesystem>
#include <span>
#include <vector>

namespace biot::linalg {

using Vector = std::vector<double>;

struct Triplet {
    int row;
    int col;
    double value;
};

/// Compressed sparse row matrix with sorted, unique column indices per row.
class CsrMatrix {
public:
    CsrMatrix() = default;
    CsrMatrix(int rows, int cols);

    /// Duplicate (row, col) entries are summed.
    static CsrMatrix from_triplets(int rows, int cols, std::span<const Triplet> triplets);
    static CsrMatrix diagonal(std::span<const double> d);
    static CsrMatrix from_dense(int rows, int cols, std::span<const double> row_major,
                                double drop_tol = 0.0);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int nnz() const { return static_cast<int>(values_.size()); }

    std::span<const int> row_ptr() const { return row_ptr_; }
    std::span<const int> col_idx() const { return col_idx_; }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    /// Entry (i, j), zero when structurally absent.
    double at(int i, int j) const;
    Vector diagonal_entries() const;

    /// y = A x
    void multiply(std::span<const double> x, std::span<double> y) const;
    Vector operator*(std::span<const double> x) const;

    CsrMatrix transpose() const;

    /// Rows [r0, r1) and columns [c0, c1) as a new matrix.
    CsrMatrix block(int r0, int r1, int c0, int c1) const;

    /// A <- diag(left) A diag(right)
    void scale(std::span<const double> left, std::span<const double> right);

    /// Drops stored entries with |a_ij| <= tol.
    CsrMatrix pruned(double tol = 0.0) const;

    double max_abs() const;
    bool is_diagonal() const;

    /// Row-major dense copy; intended for small matrices and tests.
    Vector to_dense() const;

    friend CsrMatrix operator*(const CsrMatrix& a, const CsrMatrix& b);

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<int> row_ptr_{0};
    std::vector<int> col_idx_;
    Vector values_;
};

/// MatrixMarket "coordinate real general" export.
void write_matrix_market(const CsrMatrix& a, const std::filesystem::path& path);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
/// y += alpha x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

} // namespace biot::linalg
