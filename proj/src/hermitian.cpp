#include "rcsm/hermitian.hpp"

#include <cmath>
#include <string>

namespace rcsm {

ComplexMatrix sample_cscg(RngStream& rng, std::size_t rows, std::size_t cols, double variance) {
    if (!(variance > 0.0)) {
        throw ArgumentError("sample_cscg: variance must be positive");
    }
    ComplexMatrix m(rows, cols);
    for (cxd& v : m.data()) {
        v = rng.next_cscg(variance);
    }
    return m;
}

ComplexMatrix cholesky_lower(const ComplexMatrix& a) {
    const std::size_t n = a.rows();
    if (n == 0 || a.cols() != n) {
        throw ArgumentError("cholesky_lower: matrix must be square");
    }
    ComplexMatrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j).real();
        for (std::size_t k = 0; k < j; ++k) {
            d -= std::norm(l(j, k));
        }
        if (!(d > 0.0)) {
            throw NumericalError("cholesky_lower: non-positive pivot " + std::to_string(d) +
                                 " at column " + std::to_string(j) + " (matrix not positive definite)");
        }
        const double root = std::sqrt(d);
        l(j, j) = root;
        const double inv_root = 1.0 / root;
        for (std::size_t i = j + 1; i < n; ++i) {
            cxd s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) {
                s -= l(i, k) * std::conj(l(j, k));
            }
            l(i, j) = s * inv_root;
        }
    }
    return l;
}

HermitianFactor invert_and_logdet(const ComplexMatrix& a) {
    const std::size_t n = a.rows();
    if (n == 0 || a.cols() != n) {
        throw ArgumentError("invert_and_logdet: matrix must be square");
    }
    // Cheap O(N^2) sanity check before the O(N^3) factorization.
    const double scale = a.max_abs();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            if (std::abs(a(i, j) - std::conj(a(j, i))) > 1e-8 * scale) {
                throw ArgumentError("invert_and_logdet: matrix is not Hermitian within tolerance");
            }
        }
    }

    const ComplexMatrix l = cholesky_lower(a);

    double log_det = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        log_det += std::log(l(j, j).real());
    }
    log_det *= 2.0;

    // Forward-substitute L^{-1}, then assemble A^{-1} = (L^{-1})^H (L^{-1}).
    ComplexMatrix linv(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        linv(j, j) = 1.0 / l(j, j).real();
        for (std::size_t i = j + 1; i < n; ++i) {
            cxd s{0.0, 0.0};
            for (std::size_t k = j; k < i; ++k) {
                s += l(i, k) * linv(k, j);
            }
            linv(i, j) = -s / l(i, i).real();
        }
    }

    HermitianFactor f;
    f.inverse = ComplexMatrix(n, n);
    f.log_det = log_det;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            cxd s{0.0, 0.0};
            for (std::size_t k = j; k < n; ++k) {
                s += std::conj(linv(k, i)) * linv(k, j);
            }
            if (i == j) {
                f.inverse(i, i) = s.real(); // diagonal of a Hermitian matrix is real
            } else {
                f.inverse(i, j) = s;
                f.inverse(j, i) = std::conj(s);
            }
        }
    }
    return f;
}

namespace detail {

Rank1Context rank1_prepare(const HermitianFactor& f, std::span<const cxd> h) {
    Rank1Context ctx;
    rank1_prepare(f, h, ctx);
    return ctx;
}

void rank1_prepare(const HermitianFactor& f, std::span<const cxd> h, Rank1Context& ctx) {
    const std::size_t n = f.dim();
    if (h.size() != n) {
        throw ArgumentError("rank-1 update: vector length does not match factor dimension");
    }
    ctx.z.resize(n);
    matvec(f.inverse, h.data(), ctx.z.data());
    double u = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        // h^H z is real for Hermitian A^{-1}; accumulate only the real part.
        u += h[i].real() * ctx.z[i].real() + h[i].imag() * ctx.z[i].imag();
    }
    ctx.u = u;
}

double rank1_denominator(const Rank1Context& ctx, double c) {
    return 1.0 + c * ctx.u;
}

void rank1_apply(HermitianFactor& f, const Rank1Context& ctx, double c, double denom) {
    const std::size_t n = f.dim();
    const double a = c / denom;
    ComplexMatrix& inv = f.inverse;
    const cxd* z = ctx.z.data();
    for (std::size_t i = 0; i < n; ++i) {
        cxd* row = inv.row(i);
        row[i] = cxd{row[i].real() - a * std::norm(z[i]), 0.0};
        for (std::size_t j = i + 1; j < n; ++j) {
            const cxd v = row[j] - a * (z[i] * std::conj(z[j]));
            row[j] = v;
            inv(j, i) = std::conj(v); // mirrored write keeps the inverse exactly Hermitian
        }
    }
    f.log_det += std::log(denom);
}

} // namespace detail

HermitianFactor rank1_inverse_update(const HermitianFactor& f, std::span<const cxd> h, double c) {
    const detail::Rank1Context ctx = detail::rank1_prepare(f, h);
    const double denom = detail::rank1_denominator(ctx, c);
    if (!(denom > kSingularUpdateTol)) {
        throw SingularUpdateError("rank-1 inverse update is singular: 1 + c h^H A^{-1} h = " +
                                  std::to_string(denom));
    }
    HermitianFactor out = f;
    detail::rank1_apply(out, ctx, c, denom);
    return out;
}

double rank1_logdet_update(const HermitianFactor& f, std::span<const cxd> h, double c) {
    const detail::Rank1Context ctx = detail::rank1_prepare(f, h);
    const double denom = detail::rank1_denominator(ctx, c);
    if (!(denom > kSingularUpdateTol)) {
        throw SingularUpdateError("rank-1 log-det update is singular: 1 + c h^H A^{-1} h = " +
                                  std::to_string(denom));
    }
    return f.log_det + std::log(denom);
}

double quadratic_form(std::span<const cxd> y, const HermitianFactor& f) {
    const std::size_t n = f.dim();
    if (y.size() != n) {
        throw ArgumentError("quadratic_form: vector length does not match factor dimension");
    }
    const ComplexMatrix& inv = f.inverse;
    // Split into the real diagonal part and twice the real part of the strict
    // upper triangle; the imaginary parts cancel exactly for Hermitian A^{-1}.
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const cxd* row = inv.row(i);
        acc += row[i].real() * std::norm(y[i]);
        cxd cross{0.0, 0.0};
        for (std::size_t j = i + 1; j < n; ++j) {
            cross += row[j] * y[j];
        }
        // 2 Re(conj(y_i) * cross)
        acc += 2.0 * (y[i].real() * cross.real() + y[i].imag() * cross.imag());
    }
    return acc;
}

} // namespace rcsm
