#pragma once

#include <span>

#include "rcsm/complex_matrix.hpp"
#include "rcsm/rng.hpp"

namespace rcsm {

// A rank-1 perturbation A + c h h^H is treated as singular when the scalar
// 1 + c h^H A^{-1} h drops to this level.
inline constexpr double kSingularUpdateTol = 1e-12;

// Inverse and log-determinant of a Hermitian positive definite matrix. The two
// are kept together because every consumer needs both and the rank-1 formulas
// refresh them from shared intermediates.
struct HermitianFactor {
    ComplexMatrix inverse;
    double log_det = 0.0;

    std::size_t dim() const { return inverse.rows(); }
};

// Matrix with i.i.d. CN(0, variance) entries.
ComplexMatrix sample_cscg(RngStream& rng, std::size_t rows, std::size_t cols, double variance);

// Lower-triangular Cholesky factor (real positive diagonal). Reads only the
// lower triangle of `a`. Throws NumericalError on a non-positive pivot.
ComplexMatrix cholesky_lower(const ComplexMatrix& a);

// Cholesky-based inverse; log-determinant accumulated as twice the sum of the
// log pivots, which stays accurate where a naive det() would under/overflow.
HermitianFactor invert_and_logdet(const ComplexMatrix& a);

// Factor of A + c h h^H from the factor of A in O(N^2) (Sherman-Morrison for
// the inverse, the matrix determinant lemma for the log-det). The updated
// inverse is written Hermitian-symmetrically so drift cannot accumulate skew.
// Throws SingularUpdateError when 1 + c h^H A^{-1} h <= kSingularUpdateTol.
HermitianFactor rank1_inverse_update(const HermitianFactor& f, std::span<const cxd> h, double c);

// Log-determinant of A + c h h^H alone; same guard as rank1_inverse_update.
double rank1_logdet_update(const HermitianFactor& f, std::span<const cxd> h, double c);

// Re(y^H A^{-1} y), organized so the result is real by construction.
double quadratic_form(std::span<const cxd> y, const HermitianFactor& f);

namespace detail {

// Shared first half of the rank-1 formulas: z = A^{-1} h and u = h^H z. One
// preparation serves any number of coefficients c against the same base, which
// is what keeps the coordinate updates in the variational detector at O(N^2).
struct Rank1Context {
    CVec z;
    double u = 0.0;
};

Rank1Context rank1_prepare(const HermitianFactor& f, std::span<const cxd> h);

// Same, reusing the context's buffer (hot loops call this thousands of times).
void rank1_prepare(const HermitianFactor& f, std::span<const cxd> h, Rank1Context& ctx);

double rank1_denominator(const Rank1Context& ctx, double c);

// In-place A^{-1} -= (c / denom) z z^H plus the log-det bump. The caller must
// have validated denom via rank1_denominator.
void rank1_apply(HermitianFactor& f, const Rank1Context& ctx, double c, double denom);

} // namespace detail

} // namespace rcsm
