#include <doctest.h>

#include <numbers>
#include <random>

#include "oracles.hpp"
#include "qfz/errors.hpp"
#include "qfz/series.hpp"

using namespace qfz;

namespace {

// theta(it) - 1 = sum_{j>0} 2 e^{-pi j^2 t} written as sum A(n) e^{-pi n t}; theta(i/t) = t^{1/2} theta(it)
SplitData theta_pair(long long n_max)
{
    SplitData d;
    d.A.assign(n_max + 1, 0.0);
    for (long long j = 1; j * j <= n_max; ++j) d.A[j * j] = 2.0;
    d.B = d.A;
    d.a0 = d.b0 = 1.0;
    d.C = 1.0;
    d.lambda = std::numbers::pi;
    d.k = 0.5;
    return d;
}

Errc code_of(auto&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error");
    return Errc::InvalidArgument;
}

} // namespace

TEST_CASE("two-branch identity on a random grid")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-3, 3);
    for (auto [m, p] : std::vector<std::pair<int, int>>{{5, 4}, {5, 1}, {6, 2}, {6, 3}, {7, 4}}) {
        double worst = 0;
        for (int i = 0; i < 100; ++i) worst = std::max(worst, modified_fe_identity_defect(cplx(U(rng), U(rng)), m, p));
        CAPTURE(m);
        CAPTURE(p);
        CHECK(worst < 1e-12);
    }
    CHECK(code_of([] { modified_fe_identity_defect(cplx(2, 0), 5, 4); }) == Errc::SingularGamma);
}

TEST_CASE("the identity detects a wrong signature")
{
    // Sigma of 2p - m evaluated with the wrong p
    const cplx s(0.3, 0.7);
    const Eigen::Matrix2cd bad = gamma_matrix(s).inverse() * sigma_matrix(2 * 3 - 5) * gamma_matrix(2.0 - 2.5 - s);
    const Eigen::Matrix2cd good = gamma_matrix(s).inverse() * sigma_matrix(2 * 4 - 5) * gamma_matrix(2.0 - 2.5 - s);
    CHECK((bad - good).norm() > 0.1);
}

TEST_CASE("smoothed Lambda on the theta pair")
{
    const SplitData d = theta_pair(2500);
    // Lambda(s) = 2 pi^{-s} Gamma(s) zeta(2s); at s = 2 this is pi^2 / 45
    CHECK(smoothed_lambda(d, cplx(2, 0), 1.0).value.real() == doctest::Approx(std::numbers::pi * std::numbers::pi / 45).epsilon(1e-12));
    for (cplx s : {cplx(0.25, 1.0), cplx(0.25, 4.0), cplx(0.7, -2.0), cplx(2.0, 0.5)}) {
        CHECK(t0_defect(d, s, 0.8, 1.7) < 1e-12);
        CHECK(two_sided_defect(d, s, 1.3) < 1e-12);
    }
    // with one coefficient off, both checks see it
    SplitData bad = d;
    bad.A[1] *= 1.1;
    bad.B[1] *= 1.1;
    CHECK(two_sided_defect(bad, cplx(0.25, 1.0), 1.3) > 1e-3);
    CHECK(t0_defect(bad, cplx(0.25, 1.0), 0.8, 1.7) > 1e-3);
}

TEST_CASE("the two-sided check is an identity at t0 = 1 only")
{
    SplitData bad = theta_pair(400);
    bad.A[1] = 2.2;
    CHECK(two_sided_defect(bad, cplx(0.25, 1.0), 1.0) < 1e-14);
    CHECK(two_sided_defect(bad, cplx(0.25, 1.0), 1.3) > 1e-3);
}

TEST_CASE("swapped pair")
{
    SplitData d = theta_pair(100);
    d.C = cplx(0, 2);
    d.b0 = 3.0;
    const SplitData w = swapped(d);
    CHECK(w.C == cplx(0, -0.5));
    CHECK(w.a0 == cplx(3, 0));
    CHECK(w.b0 == cplx(1, 0));
    CHECK(swapped(w).C == d.C);
}

TEST_CASE("series errors")
{
    const SplitData d = theta_pair(100);
    CHECK(code_of([&] { smoothed_lambda(d, cplx(0, 0), 1.0); }) == Errc::PoleProximity);
    CHECK(code_of([&] { smoothed_lambda(d, cplx(0.5, 0), 1.0); }) == Errc::PoleProximity);
    CHECK(code_of([&] { smoothed_lambda(d, cplx(0.2, 0), -1.0); }) == Errc::DomainError);
    CoefficientSeries s;
    s.m = 6;
    s.N = 4;
    s.a.assign(3, 1.0);
    s.b.assign(3, 1.0);
    CHECK(code_of([&] { untwisted_data(s); }) == Errc::MissingConstants);

    const FormProfile odd = validate(oracle::diag({2, 2, 2, 2, -2}));
    MeasureTable t;
    CHECK(code_of([&] { coeff_a_holomorphic(odd, t, 1); }) == Errc::ParityViolation);
}

TEST_CASE("twist constants")
{
    const FormProfile six = validate(oracle::diag({2, 2, -2, -2, -2, -2}));
    const FormProfile five = validate(oracle::diag({2, 2, 2, -2, -2}));
    const FormProfile third = validate(oracle::third_form());
    for (long long r : {3, 5, 7})
        for (const auto& psi : enumerate_characters(r)) {
            if (psi.principal()) {
                CHECK(code_of([&] { twist_constants(six, psi, TwistVariant::EvenM); }) == Errc::VariantMismatch);
                continue;
            }
            CHECK(std::abs(std::abs(twist_constants(six, psi, TwistVariant::EvenM)) - 1) < 1e-12);
            const TwistVariant v = twist_variant(5, psi);
            CHECK(v == (psi.quadratic() ? TwistVariant::OddQuadratic : TwistVariant::OddGeneric));
            const cplx c = twist_constants(five, psi, v);
            CHECK(std::abs(std::abs(c) - 1) < 1e-12);
            if (v == TwistVariant::OddQuadratic) CHECK(std::abs(std::abs(c.real()) - 1) < 1e-15);
            CHECK(code_of([&] { twist_constants(five, psi, TwistVariant::EvenM); }) == Errc::VariantMismatch);
        }
    CHECK(code_of([&] { twist_constants(third, enumerate_characters(3)[1], TwistVariant::OddQuadratic); }) ==
          Errc::ModulusDividesLevel);
}
