#include "rcsm/complex_matrix.hpp"

#include <cmath>

namespace rcsm {

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, cxd{0.0, 0.0}) {
    if (rows == 0 || cols == 0) {
        throw ArgumentError("matrix dimensions must be positive");
    }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = cxd{1.0, 0.0};
    }
    return m;
}

CVec ComplexMatrix::column(std::size_t j) const {
    if (j >= cols_) {
        throw ArgumentError("column index out of range");
    }
    CVec c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
        c[i] = data_[i * cols_ + j];
    }
    return c;
}

bool ComplexMatrix::is_finite() const {
    for (const cxd& v : data_) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            return false;
        }
    }
    return true;
}

double ComplexMatrix::max_abs() const {
    double m = 0.0;
    for (const cxd& v : data_) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

double ComplexMatrix::frobenius_norm() const {
    double s = 0.0;
    for (const cxd& v : data_) {
        s += std::norm(v);
    }
    return std::sqrt(s);
}

void matvec(const ComplexMatrix& a, const cxd* x, cxd* y) {
    const std::size_t n = a.rows();
    const std::size_t m = a.cols();
    for (std::size_t i = 0; i < n; ++i) {
        const cxd* ai = a.row(i);
        cxd acc{0.0, 0.0};
        for (std::size_t j = 0; j < m; ++j) {
            acc += ai[j] * x[j];
        }
        y[i] = acc;
    }
}

} // namespace rcsm
