#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "rcsm/hermitian.hpp"
#include "rcsm/rng.hpp"

using namespace rcsm;

namespace {

using EMat = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic>;

EMat to_eigen(const ComplexMatrix& a) {
    EMat m(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) m(i, j) = a(i, j);
    return m;
}

// G G^H + I: Hermitian and safely positive definite.
ComplexMatrix random_pd(RngStream& rng, std::size_t n) {
    ComplexMatrix g = sample_cscg(rng, n, n, 1.0);
    ComplexMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            cxd acc = (i == j) ? cxd{1.0, 0.0} : cxd{0.0, 0.0};
            for (std::size_t k = 0; k < n; ++k) acc += g(i, k) * std::conj(g(j, k));
            a(i, j) = acc;
        }
    }
    return a;
}

double rel_frobenius(const ComplexMatrix& a, const ComplexMatrix& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            num += std::norm(a(i, j) - b(i, j));
            den += std::norm(b(i, j));
        }
    return std::sqrt(num / den);
}

ComplexMatrix add_rank1(const ComplexMatrix& a, const CVec& h, double c) {
    ComplexMatrix out = a;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) += c * h[i] * std::conj(h[j]);
    return out;
}

} // namespace

TEST_CASE("rng streams replay bit-identically and separate by id") {
    RngStream a(123, 7);
    RngStream b(123, 7);
    RngStream c(123, 8);
    bool all_equal = true;
    bool any_diff_stream = false;
    for (int i = 0; i < 64; ++i) {
        const std::uint64_t va = a.next_u64();
        all_equal = all_equal && (va == b.next_u64());
        any_diff_stream = any_diff_stream || (va != c.next_u64());
    }
    CHECK(all_equal);
    CHECK(any_diff_stream);
}

TEST_CASE("rng uniform helpers stay in range") {
    RngStream rng(5, 0);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.next_unit();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    std::array<int, 7> counts{};
    for (int i = 0; i < 70000; ++i) {
        const std::uint64_t v = rng.next_below(7);
        REQUIRE(v < 7);
        ++counts[v];
    }
    for (int bin : counts) {
        // 5 sigma around 10000 with sigma = sqrt(n p (1-p)) ~ 92.6
        CHECK(bin > 10000 - 500);
        CHECK(bin < 10000 + 500);
    }
}

TEST_CASE("gaussian draws match their first and second moments") {
    RngStream rng(9, 1);
    const int n = 100000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n / 2; ++i) {
        const auto [g0, g1] = rng.next_normal_pair();
        sum += g0 + g1;
        sum_sq += g0 * g0 + g1 * g1;
    }
    CHECK(std::abs(sum / n) < 5.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(sum_sq / n - 1.0) < 0.03);

    cxd mean{0.0, 0.0};
    double power = 0.0;
    cxd pseudo{0.0, 0.0}; // E[z^2] = 0 for circular symmetry
    const double variance = 3.0;
    for (int i = 0; i < n; ++i) {
        const cxd z = rng.next_cscg(variance);
        mean += z;
        power += std::norm(z);
        pseudo += z * z;
    }
    mean /= static_cast<double>(n);
    power /= static_cast<double>(n);
    pseudo /= static_cast<double>(n);
    CHECK(std::abs(mean) < 5.0 * std::sqrt(variance / n));
    CHECK(std::abs(power - variance) < 0.1);
    CHECK(std::abs(pseudo) < 5.0 * variance / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("rng rejects nonsense") {
    RngStream rng(1, 0);
    CHECK_THROWS_AS(rng.next_cscg(0.0), ArgumentError);
    CHECK_THROWS_AS(rng.next_cscg(-1.0), ArgumentError);
}

TEST_CASE("complex matrix basics") {
    CHECK_THROWS_AS(ComplexMatrix(0, 3), ArgumentError);
    CHECK_THROWS_AS(ComplexMatrix(3, 0), ArgumentError);

    ComplexMatrix a(2, 3);
    a(0, 0) = {1, 0}; a(0, 1) = {0, 1}; a(0, 2) = {2, 0};
    a(1, 0) = {0, 0}; a(1, 1) = {1, 1}; a(1, 2) = {0, -1};
    const CVec col1 = a.column(1);
    CHECK(col1[0] == cxd{0, 1});
    CHECK(col1[1] == cxd{1, 1});

    const CVec x{{1, 0}, {0, 1}, {1, 0}};
    CVec y(2);
    matvec(a, x.data(), y.data());
    // row 0: 1*1 + i*i + 2*1 = 3 + i^2 = 2... computed with complex algebra:
    CHECK(std::abs(y[0] - (cxd{1, 0} + cxd{0, 1} * cxd{0, 1} + cxd{2, 0})) < 1e-15);
    CHECK(std::abs(y[1] - (cxd{1, 1} * cxd{0, 1} + cxd{0, -1})) < 1e-15);

    const ComplexMatrix eye = ComplexMatrix::identity(3);
    CHECK(eye(0, 0) == cxd{1, 0});
    CHECK(eye(0, 1) == cxd{0, 0});
    CHECK(eye.is_finite());
    CHECK(eye.frobenius_norm() == doctest::Approx(std::sqrt(3.0)));
    CHECK(eye.max_abs() == 1.0);
}

TEST_CASE("cholesky factors simple fixtures") {
    ComplexMatrix d(2, 2);
    d(0, 0) = {4, 0}; d(0, 1) = {0, 0};
    d(1, 0) = {0, 0}; d(1, 1) = {9, 0};
    const ComplexMatrix l = cholesky_lower(d);
    CHECK(l(0, 0).real() == doctest::Approx(2.0));
    CHECK(l(1, 1).real() == doctest::Approx(3.0));
    CHECK(std::abs(l(1, 0)) == 0.0);

    // [[2, i], [-i, 2]] has det 3; L = [[sqrt2, 0], [-i/sqrt2, sqrt(3/2)]]
    ComplexMatrix a(2, 2);
    a(0, 0) = {2, 0}; a(0, 1) = {0, 1};
    a(1, 0) = {0, -1}; a(1, 1) = {2, 0};
    const ComplexMatrix la = cholesky_lower(a);
    CHECK(std::abs(la(0, 0) - std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(la(1, 0) - cxd{0, -1} / std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(la(1, 1) - std::sqrt(1.5)) < 1e-15);

    const HermitianFactor f = invert_and_logdet(a);
    CHECK(f.log_det == doctest::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("inverse and log-determinant agree with an independent solver") {
    RngStream rng(2024, 0);
    for (const std::size_t n : {2ul, 5ul, 12ul, 30ul}) {
        const ComplexMatrix a = random_pd(rng, n);
        const HermitianFactor f = invert_and_logdet(a);

        // A * A^{-1} = I
        const EMat ea = to_eigen(a);
        const EMat einv = to_eigen(f.inverse);
        const double resid = (ea * einv - EMat::Identity(n, n)).norm();
        CHECK(resid < 1e-9);

        // log det against Eigen's LLT pivots
        const Eigen::LLT<EMat> llt(ea);
        REQUIRE(llt.info() == Eigen::Success);
        double ld = 0.0;
        for (std::size_t i = 0; i < n; ++i) ld += 2.0 * std::log(llt.matrixL()(i, i).real());
        CHECK(f.log_det == doctest::Approx(ld).epsilon(1e-10));

        // the assembled inverse is Hermitian with a real diagonal, exactly
        bool hermitian = true;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                hermitian = hermitian && (f.inverse(i, j) == std::conj(f.inverse(j, i)));
        CHECK(hermitian);
    }
}

TEST_CASE("factorization rejects bad inputs") {
    ComplexMatrix neg = ComplexMatrix::identity(3);
    neg(1, 1) = {-1.0, 0.0};
    CHECK_THROWS_AS(invert_and_logdet(neg), NumericalError);

    ComplexMatrix skew = ComplexMatrix::identity(2);
    skew(0, 1) = {0.5, 0.0};
    skew(1, 0) = {0.4, 0.0}; // not the conjugate transpose entry
    CHECK_THROWS_AS(invert_and_logdet(skew), ArgumentError);

    ComplexMatrix rect(2, 3);
    CHECK_THROWS_AS(invert_and_logdet(rect), ArgumentError);
}

TEST_CASE("rank-1 update on a hand fixture") {
    // (I + e1 e1^H)^{-1} = diag(1/2, 1), log det = ln 2
    const HermitianFactor f = invert_and_logdet(ComplexMatrix::identity(2));
    const CVec e1{{1, 0}, {0, 0}};
    const HermitianFactor g = rank1_inverse_update(f, e1, 1.0);
    CHECK(std::abs(g.inverse(0, 0) - cxd{0.5, 0}) < 1e-15);
    CHECK(std::abs(g.inverse(1, 1) - cxd{1.0, 0}) < 1e-15);
    CHECK(std::abs(g.inverse(0, 1)) < 1e-15);
    CHECK(g.log_det == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(rank1_logdet_update(f, e1, 1.0) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("rank-1 update matches direct factorization on random instances") {
    RngStream rng(77, 3);
    for (const std::size_t n : {3ul, 8ul, 20ul}) {
        const ComplexMatrix a = random_pd(rng, n);
        const HermitianFactor f = invert_and_logdet(a);
        CVec h(n);
        for (auto& v : h) v = rng.next_cscg(1.0);

        for (const double c : {1.0, -0.3, 0.2}) {
            const HermitianFactor updated = rank1_inverse_update(f, h, c);
            const HermitianFactor direct = invert_and_logdet(add_rank1(a, h, c));
            CHECK(rel_frobenius(updated.inverse, direct.inverse) < 1e-9);
            CHECK(std::abs(updated.log_det - direct.log_det) < 1e-9);
            CHECK(rank1_logdet_update(f, h, c) ==
                  doctest::Approx(direct.log_det).epsilon(1e-9));
        }

        // c = 0 must be a bitwise no-op
        const HermitianFactor same = rank1_inverse_update(f, h, 0.0);
        CHECK(same.log_det == f.log_det);
        bool identical = true;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                identical = identical && (same.inverse(i, j) == f.inverse(i, j));
        CHECK(identical);

        // update then downdate returns to the start
        const HermitianFactor up = rank1_inverse_update(f, h, 1.0);
        const HermitianFactor back = rank1_inverse_update(up, h, -1.0);
        CHECK(rel_frobenius(back.inverse, f.inverse) < 1e-8);
        CHECK(std::abs(back.log_det - f.log_det) < 1e-8);
    }
}

TEST_CASE("rank-1 update refuses a singular target") {
    const HermitianFactor f = invert_and_logdet(ComplexMatrix::identity(3));
    const CVec e1{{1, 0}, {0, 0}, {0, 0}};
    CHECK_THROWS_AS(rank1_inverse_update(f, e1, -1.0), SingularUpdateError);
    CHECK_THROWS_AS(rank1_logdet_update(f, e1, -1.0), SingularUpdateError);
}

TEST_CASE("quadratic form is the real sesquilinear value") {
    const HermitianFactor eye = invert_and_logdet(ComplexMatrix::identity(2));
    const CVec y{{1, 0}, {0, 1}};
    CHECK(quadratic_form(y, eye) == doctest::Approx(2.0).epsilon(1e-15));

    RngStream rng(31, 0);
    const std::size_t n = 9;
    const ComplexMatrix a = random_pd(rng, n);
    const HermitianFactor f = invert_and_logdet(a);
    CVec v(n);
    for (auto& z : v) z = rng.next_cscg(2.0);

    cxd naive{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) naive += std::conj(v[i]) * f.inverse(i, j) * v[j];
    CHECK(std::abs(naive.imag()) < 1e-12);
    CHECK(quadratic_form(v, f) == doctest::Approx(naive.real()).epsilon(1e-12));
}

TEST_CASE("sampled channel matrices have the requested entry variance") {
    RngStream rng(8, 0);
    const std::size_t n = 40, l = 25;
    const ComplexMatrix h = sample_cscg(rng, n, l, 1.0 / static_cast<double>(n));
    double energy = 0.0; // average squared column norm should be ~1
    for (std::size_t j = 0; j < l; ++j) {
        const CVec col = h.column(j);
        for (const cxd& v : col) energy += std::norm(v);
    }
    energy /= static_cast<double>(l);
    CHECK(energy == doctest::Approx(1.0).epsilon(0.15));
}
