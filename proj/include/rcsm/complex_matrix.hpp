#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "rcsm/errors.hpp"

namespace rcsm {

using cxd = std::complex<double>;
using CVec = std::vector<cxd>;

// Dense row-major complex matrix. Deliberately minimal: element access, column
// extraction, and the structural checks the detectors rely on.
class ComplexMatrix {
public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols);

    static ComplexMatrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    cxd& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const cxd& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    cxd* row(std::size_t i) { return data_.data() + i * cols_; }
    const cxd* row(std::size_t i) const { return data_.data() + i * cols_; }

    CVec column(std::size_t j) const;

    bool is_finite() const;
    double max_abs() const;        // largest entry magnitude
    double frobenius_norm() const;

    std::vector<cxd>& data() { return data_; }
    const std::vector<cxd>& data() const { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cxd> data_;
};

// y = A x with x of length A.cols() and y of length A.rows().
void matvec(const ComplexMatrix& a, const cxd* x, cxd* y);

} // namespace rcsm
