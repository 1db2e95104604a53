#include <doctest.h>

#include <numbers>

#include "oracles.hpp"
#include "qfz/bruhat.hpp"
#include "qfz/errors.hpp"

using namespace qfz;

TEST_CASE("phi0 is the characteristic function of Z^m and is self-dual")
{
    const SchwartzBruhatFn phi = build_phi0(3);
    IntVector v(3);
    v << 4, -7, 0;
    CHECK(phi(v, 1) == cplx(1, 0));
    CHECK(phi(v, 2) == cplx(0, 0));
    v << 4, -8, 0;
    CHECK(phi(v, 2) == cplx(1, 0));
    const SchwartzBruhatFn hat = fourier_transform(phi);
    CHECK(hat.size() == 1);
    CHECK(std::abs(hat.table()[0] - 1.0) < 1e-15);
}

TEST_CASE("Fourier transform against the defining sum")
{
    const QuadraticForm f = make_form(oracle::diag({2, -4}));
    const auto psi = enumerate_characters(5)[1];
    const SchwartzBruhatFn phi = build_phi_psi_P(f, psi);
    const SchwartzBruhatFn hat = fourier_transform(phi);
    CHECK(hat.denom() == 5);
    CHECK(hat.period() == 1);
    for (std::size_t i = 0; i < hat.size(); ++i) {
        const IntVector w = hat.point(i);
        cplx s = 0;
        for (long long a = 0; a < 5; ++a)
            for (long long b = 0; b < 5; ++b) {
                IntVector u(2);
                u << a, b;
                const double ang = -2 * std::numbers::pi * double(a * w(0) + b * w(1)) / 5;
                s += phi.at_scaled(u) * std::polar(1.0, ang);
            }
        CHECK(std::abs(hat.table()[i] - s / 25.0) < 1e-13);
    }
}

TEST_CASE("Parseval for the Gauss-sum functions")
{
    const QuadraticForm f = make_form(oracle::diag({2, 2, 2, 2, -2}));
    for (const auto& psi : enumerate_characters(7)) {
        const SchwartzBruhatFn phi = build_phi_psi_P(f, psi);
        const SchwartzBruhatFn hat = fourier_transform(phi);
        double a = 0, b = 0;
        for (const cplx x : phi.table()) a += std::norm(x);
        for (const cplx x : hat.table()) b += std::norm(x);
        CHECK(std::abs(b - a / std::pow(7.0, 5)) < 1e-10 * b);
    }
}

TEST_CASE("Stark identity on the three reference forms")
{
    const std::vector<IntMatrix> forms = {oracle::diag({2, 2, 2, 2, -2}), oracle::diag({2, 2, -2, -2, -2, -2}),
                                          oracle::third_form()};
    int checked = 0;
    for (const auto& g : forms) {
        const QuadraticForm f = make_form(g);
        const long long N = validate(f).N;
        for (long long r : {3, 5, 7}) {
            if (N % r == 0) {
                CHECK_THROWS_AS(stark_defect(f, enumerate_characters(r)[1]), Error);
                continue;
            }
            for (const auto& psi : enumerate_characters(r)) {
                CHECK(stark_defect(f, psi) < 1e-10);
                ++checked;
            }
        }
    }
    CHECK(checked == 12 + 12 + 10);
}

TEST_CASE("Stark identity fails for a wrong dual form")
{
    // sanity: the defect is not identically small. Swapping a sign of P changes the right side.
    const QuadraticForm f = make_form(oracle::diag({2, 2, 2, 2, -2}));
    const auto psi = enumerate_characters(5)[1];
    const SchwartzBruhatFn hat = fourier_transform(build_phi_psi_P(f, psi));
    const SchwartzBruhatFn other = fourier_transform(build_phi_psi_P(make_form(oracle::diag({2, 2, 2, -2, -2})), psi));
    double diff = 0;
    for (std::size_t i = 0; i < hat.size(); ++i) diff = std::max(diff, std::abs(hat.table()[i] - other.table()[i]));
    CHECK(diff > 1e-3);
}

TEST_CASE("bruhat errors")
{
    const QuadraticForm f = make_form(oracle::third_form());
    try {
        build_phi_psi_P(f, enumerate_characters(3)[1]);
        FAIL("expected ModulusDividesLevel");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::ModulusDividesLevel);
    }
    try {
        build_phi_psi_P(f, enumerate_characters(5)[1], 100);
        FAIL("expected TableOverflow");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::TableOverflow);
    }
    CHECK_THROWS_AS(SchwartzBruhatFn(2, 0, 1), Error);
}
