#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "qfz/errors.hpp"
#include "qfz/forms.hpp"

using namespace qfz;

namespace {

const EvalOptions kEval{0.2, 1e-12};

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

std::vector<GammaElement> gamma0_4(std::size_t count, std::uint64_t seed)
{
    return sample_gamma0(4, count, seed, 200);
}

} // namespace

TEST_CASE("expansion metadata")
{
    const auto& M = fixture::maass_pair();
    CHECK(M.kind == FormKind::Maass);
    CHECK(M.ell == 3);
    CHECK(M.F.eigenvalue == doctest::Approx(-0.5));
    CHECK(M.F.growth_exponent() == doctest::Approx(0.5));
    CHECK(M.F.decay_exponent() == doctest::Approx(-1.0));
    CHECK(M.F.chi.principal());
    const auto& H = fixture::holomorphic_pair();
    CHECK(H.kind == FormKind::Holomorphic);
    CHECK(H.ell == 6);
    CHECK(H.F.chi.disc() == -4);
    CHECK(H.G.chi.disc() == validate(oracle::diag({2, 2, -2, -2, -2, -2})).K_N.disc);
}

TEST_CASE("gamma sampler")
{
    const auto g = sample_gamma0(4, 30, 5, 60, 5);
    REQUIRE(g.size() == 30);
    CHECK(g[0] == GammaElement{1, 1, 0, 1});
    CHECK(g[1] == GammaElement{1, 0, 4, 1});
    CHECK(g[2] == GammaElement{-1, 0, 0, -1});
    for (const auto& x : g) {
        CHECK(x.in_gamma0(4));
        CHECK(std::llabs(x.c) <= 5);
        CHECK(x.max_entry() <= 60);
    }
    CHECK(sample_gamma0(4, 30, 5, 60, 5) == g);
    CHECK(sample_gamma0(4, 30, 6, 60, 5) != g);
}

TEST_CASE("sampled points lie above y_min on both sides")
{
    std::mt19937_64 rng(3);
    for (const auto& g : gamma0_4(40, 9)) {
        for (int i = 0; i < 5; ++i) {
            const auto z = sample_point(g, 0.2, rng);
            if (std::llabs(g.c) * 0.2 > 1) {
                CHECK(!z);
                break;
            }
            REQUIRE(z);
            CHECK(z->imag() >= 0.2 - 1e-12);
            CHECK(g.act(*z).imag() >= 0.2 - 1e-12);
        }
    }
}

TEST_CASE("automorphy factors are cocycles on Gamma0(4)")
{
    const auto gs = gamma0_4(30, 17);
    for (const FormPair* pair : {&fixture::holomorphic_pair(), &fixture::maass_pair()})
        for (std::size_t i = 0; i + 1 < gs.size(); ++i) {
            const GammaElement& g = gs[i];
            const GammaElement& h = gs[i + 1];
            const cplx z(0.137, 0.61);
            const cplx lhs = automorphy_factor(pair->F, g * h, z);
            const cplx rhs = automorphy_factor(pair->F, g, h.act(z)) * automorphy_factor(pair->F, h, z);
            CHECK(std::abs(lhs - rhs) < 1e-9 * std::abs(lhs));
        }
}

TEST_CASE("translation and -I act trivially")
{
    const GammaElement T{1, 1, 0, 1}, minus{-1, 0, 0, -1};
    for (const FormPair* pair : {&fixture::holomorphic_pair(), &fixture::maass_pair()})
        for (cplx z : {cplx(0.1, 0.4), cplx(-0.37, 0.9), cplx(0.45, 0.25)}) {
            CHECK(modularity_defect(pair->F, T, z, kEval) < 1e-12);
            CHECK(modularity_defect(pair->F, minus, z, kEval) < 1e-12);
            CHECK(modularity_defect(pair->G, T, z, kEval) < 1e-12);
        }
}

TEST_CASE("fitted holomorphic form is modular and Fricke-compatible")
{
    const auto& H = fixture::holomorphic_pair();
    const ModularityReport rep = modularity_report(H.F, H.check_samples, kEval);
    CHECK(rep.samples.size() >= 20);
    CHECK(rep.median() < 1e-10);
    for (const auto& s : H.check_samples) CHECK(s.gamma.c != 0);
    CHECK(H.fricke_points.size() == 10);
    CHECK(std::abs(H.fricke_points[0] - cplx(0, 0.5)) < 1e-15);
    for (cplx z : H.fricke_points) CHECK(fricke_defect(H.F, H.G, z, kEval) < 1e-10);
}

TEST_CASE("fit round trip: masked constants are recovered")
{
    const auto& H = fixture::holomorphic_pair();
    // F carries a0 from the fit; refit it from a different sample set
    FourierExpansion F = fixture::fresh_F(H);
    const auto samples = modularity_samples(sample_gamma0(4, 40, 99, 60, 5), 2, 0.2, 123);
    const FitResult r = fit_constants(F, samples, kEval);
    CHECK(F.growth.state == ConstState::Fitted);
    CHECK(std::abs(r.values[0] - H.F.growth.value) < 1e-8 * std::abs(H.F.growth.value));

    // G: two masked constants from the Fricke relation. The scale is N^{-m/2} relative to the direct side
    FourierExpansion G = build_dual_holomorphic(H.profile, H.measures.dual_plus, H.G.n_max());
    fit_fricke(H.F, G, fricke_sample(4, 12, 0.2, 5), kEval);
    CHECK(std::abs(G.scale_plus.value - std::pow(4.0, -3.0)) < 1e-8 * std::pow(4.0, -3.0));
    CHECK(std::abs(G.growth.value - b0_ratio(H.profile) * H.F.growth.value) < 1e-8 * std::abs(G.growth.value));
}

TEST_CASE("fit residual is invariant under common rescaling")
{
    const auto& M = fixture::maass_pair();
    FourierExpansion a = fixture::fresh_F(M), b = fixture::fresh_F(M);
    for (auto& x : b.plus) x *= 3.0;
    for (auto& x : b.minus) x *= 3.0;
    const FitResult ra = fit_constants(a, M.fit_samples, kEval), rb = fit_constants(b, M.fit_samples, kEval);
    CHECK(rb.residual == doctest::Approx(ra.residual).epsilon(1e-6));
    // growth and decay scale with the data; scale_minus is a ratio and does not
    CHECK(std::abs(rb.values[0] - 3.0 * ra.values[0]) < 1e-9 * std::abs(rb.values[0]));
    CHECK(std::abs(rb.values[2] - ra.values[2]) < 1e-9);
}

TEST_CASE("perturbing one coefficient raises the residual")
{
    for (const FormPair* pair : {&fixture::holomorphic_pair(), &fixture::maass_pair()}) {
        FourierExpansion F = fixture::fresh_F(*pair);
        F.plus[1] *= 1.1;
        const FitResult r = fit_constants(F, pair->fit_samples, kEval);
        CHECK(r.residual > 10 * pair->fit_F.residual);
    }
}

TEST_CASE("Maass constants are stable across disjoint sample sets")
{
    const auto& M = fixture::maass_pair();
    FourierExpansion F = fixture::fresh_F(M);
    const FitResult other = fit_constants(F, M.check_samples, kEval);
    for (std::size_t i = 0; i < other.values.size(); ++i)
        CHECK(std::abs(other.values[i] - M.fit_F.values[i]) < 1e-3 * std::abs(M.fit_F.values[i]));
    CHECK(modularity_report(M.F, M.check_samples, kEval).median() < 1e-3);
}

TEST_CASE("Laplacian eigenvalue: single terms and constant powers")
{
    const auto& M = fixture::maass_pair();
    const EvalOptions fine{1e-4, 1e-14};
    CHECK(laplacian_defect(single_term(M.F, 1), cplx(0.1, 1.2), 1e-3, fine) < 1e-4);
    for (long long n : {1, -1, 2, -2, 5, -5, 10, -10})
        CHECK(laplacian_defect(single_term(M.F, n), cplx(0.1, 0.3), 1e-3, fine) < 1e-4);
    for (bool growth : {true, false})
        for (double y : {0.3, 1.0, 2.5})
            CHECK(laplacian_defect(single_constant(M.F, growth), cplx(0.2, y), 1e-3, fine) < 1e-6);
}

TEST_CASE("Laplacian defect converges at fourth order in h")
{
    const auto& M = fixture::maass_pair();
    const EvalOptions fine{1e-4, 1e-15};
    const FourierExpansion t = single_term(M.F, 2);
    const double a = laplacian_defect(t, cplx(0.1, 0.5), 2e-2, fine);
    const double b = laplacian_defect(t, cplx(0.1, 0.5), 1e-2, fine);
    MESSAGE("defect ratio " << a / b);
    CHECK(a / b > 12);
    CHECK(a / b < 20);
}

TEST_CASE("forms errors")
{
    const auto& M = fixture::maass_pair();
    const auto& H = fixture::holomorphic_pair();
    CHECK(code_of([&] { evaluate(M.F, cplx(0, 0.1), kEval); }) == Errc::BelowYMin);
    CHECK(code_of([&] { evaluate(fixture::fresh_F(M), cplx(0, 0.5), kEval); }) == Errc::UnresolvedConstants);
    CHECK(code_of([&] { laplacian_defect(H.F, cplx(0, 1), 1e-3, kEval); }) == Errc::InvalidArgument);
    CHECK(code_of([&] { laplacian_defect(M.F, cplx(0, 0.201), 1e-3, kEval); }) == Errc::BelowYMin);
    CHECK(code_of([&] { single_term(M.F, 0); }) == Errc::InvalidArgument);
    CHECK(code_of([&] { modularity_defect(M.F, GammaElement{1, 0, 2, 1}, cplx(0, 0.5), kEval); }) ==
          Errc::InvalidArgument);
    FourierExpansion F = fixture::fresh_F(M);
    std::vector<ModularitySample> few(M.fit_samples.begin(), M.fit_samples.begin() + 5);
    CHECK(code_of([&] { fit_constants(F, few, kEval); }) == Errc::IllConditioned);
    const FormProfile even_p = validate(oracle::diag({2, 2, 2, 2, -2, -2}));
    CHECK(code_of([&] { build_holomorphic(validate(oracle::diag({2, 2, 2, 2, -2})), MeasureTable{}, 1); }) ==
          Errc::ParityViolation);
    CHECK(code_of([&] { build_maass(even_p, 2, MeasureTable{}, MeasureTable{}, 1); }) == Errc::ParityViolation);
}
