#pragma once

#include <cstddef>
#include <vector>

namespace branchtail {

// Dense row-major matrix. Class counts stay small (a few dozen at most), so
// everything here is plain O(n^3) with no blocking.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    std::vector<double> multiply(const std::vector<double>& v) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> a_;
};

// Solves A x = b by LU with partial pivoting. Throws no_convergence when the
// matrix is numerically singular.
std::vector<double> lu_solve(Matrix a, std::vector<double> b);

double max_abs(const std::vector<double>& v);

} // namespace branchtail
