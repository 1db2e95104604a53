#include "qfz/series.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <utility>

#include "qfz/errors.hpp"
#include "qfz/special.hpp"

namespace qfz {

namespace {

constexpr double kPi = 3.14159265358979323846;
const cplx I(0, 1);

cplx expi_pi(double x) { return std::polar(1.0, kPi * x); }

double abs_d(long long D) { return std::fabs(static_cast<double>(D)); }

void require_holomorphic(const FormProfile& pr)
{
    if ((pr.m - pr.p) % 2 != 0)
        throw Error(Errc::ParityViolation, "holomorphic coefficients need m - p even (use -P when p is even)");
}

std::pair<double, double> growth_of(const std::vector<cplx>& a, const std::vector<cplx>& b)
{
    // C n^K through the envelope: K from the steepest log-slope against n = 1, C from the worst ratio
    double K = 0;
    for (const auto* v : {&a, &b})
        for (std::size_t n = 2; n < v->size(); ++n) {
            const double x = std::abs((*v)[n]), y = std::abs((*v)[1]);
            if (x > 0 && y > 0) K = std::max(K, std::log(x / y) / std::log(double(n)));
        }
    double C = 0;
    for (const auto* v : {&a, &b})
        for (std::size_t n = 1; n < v->size(); ++n) C = std::max(C, std::abs((*v)[n]) / std::pow(double(n), K));
    return {C, K};
}

cplx series_sum(const std::vector<cplx>& c, double lambda, cplx s, double x_scale, double& tail, double gC, double gK)
{
    cplx acc = 0;
    const long long n_max = static_cast<long long>(c.size()) - 1;
    for (long long n = 1; n <= n_max; ++n) {
        if (c[n] == cplx(0)) continue;
        const double ln = lambda * n;
        acc += c[n] * std::pow(cplx(ln), -s) * upper_incomplete_gamma(s, ln * x_scale);
    }
    // |Gamma(s, x)| <= x^{Re s - 1} e^{-x} (1 + |s| / x) for x past the turning point
    const double n1 = static_cast<double>(n_max + 1);
    const double x1 = lambda * n1 * x_scale;
    const double q = std::exp(-lambda * x_scale);
    tail = gC * std::pow(n1, gK) * std::pow(lambda * n1, -s.real()) * std::pow(x1, s.real() - 1) * std::exp(-x1) *
           (1 + std::abs(s) / x1) / (1 - q);
    return acc;
}

} // namespace

cplx coeff_a(const FormProfile& pr, const MeasureTable& measures, long long n)
{
    const double an = static_cast<double>(n < 0 ? -n : n);
    return std::pow(abs_d(pr.D), -0.5) * expi_pi((2.0 * pr.p - pr.m) / 4.0) * std::pow(an, 1 - pr.m / 2.0) *
           measures.value(n < 0 ? -n : n);
}

cplx coeff_b(const FormProfile& pr, const MeasureTable& dual_measures, long long n)
{
    const double an = static_cast<double>(n < 0 ? -n : n);
    return std::pow(an / pr.N, 1 - pr.m / 2.0) * dual_measures.value(n < 0 ? -n : n);
}

cplx coeff_a_holomorphic(const FormProfile& pr, const MeasureTable& measures, long long n)
{
    require_holomorphic(pr);
    return std::pow(abs_d(pr.D), -0.5) * measures.value(n);
}

cplx coeff_b_holomorphic(const FormProfile& pr, const MeasureTable& dual_measures, long long n)
{
    require_holomorphic(pr);
    return expi_pi((pr.m - 2.0 * pr.p) / 4.0) * std::pow(static_cast<double>(pr.N), pr.m / 4.0) *
           dual_measures.value(n);
}

void update_growth(CoefficientSeries& s)
{
    std::tie(s.growth_C, s.growth_K) = growth_of(s.a, s.b);
}

CoefficientSeries holomorphic_series(const FormProfile& pr, const MeasureTable& measures,
                                     const MeasureTable& dual_measures, cplx dual_scale)
{
    require_holomorphic(pr);
    CoefficientSeries s;
    s.m = pr.m;
    s.N = pr.N;
    const long long n_max = std::min<long long>(measures.size(), dual_measures.size());
    s.a.assign(n_max + 1, 0.0);
    s.b.assign(n_max + 1, 0.0);
    for (long long n = 1; n <= n_max; ++n) {
        s.a[n] = coeff_a_holomorphic(pr, measures, n);
        s.b[n] = dual_scale * coeff_b_holomorphic(pr, dual_measures, n);
    }
    update_growth(s);
    return s;
}

Eigen::Matrix2cd gamma_matrix(cplx s)
{
    const cplx e = std::exp(I * kPi * s / 2.0), f = std::exp(-I * kPi * s / 2.0);
    Eigen::Matrix2cd g;
    g << e, f, f, e;
    return g;
}

Eigen::Matrix2cd sigma_matrix(long long ell)
{
    Eigen::Matrix2cd g;
    g << 0.0, ipow_i(ell), 1.0, 0.0;
    return g;
}

double modified_fe_identity_defect(cplx s, int m, int p)
{
    const cplx sn = std::sin(kPi * s);
    if (std::abs(sn) < 1e-10) throw Error(Errc::SingularGamma, "sin(pi s) vanishes");
    Eigen::Matrix2cd lhs;
    lhs << std::sin(kPi * (s + p / 2.0 - 1.0)), std::sin(kPi * (m - p) / 2.0), std::sin(kPi * p / 2.0),
        std::sin(kPi * (s + (m - p) / 2.0 - 1.0));
    lhs *= expi_pi((2.0 * p - m) / 4.0) / sn;
    const Eigen::Matrix2cd rhs =
        gamma_matrix(s).inverse() * sigma_matrix(2LL * p - m) * gamma_matrix(2.0 - m / 2.0 - s);
    return (lhs - rhs).norm();
}

SplitValue smoothed_lambda(const SplitData& d, cplx s, double t0)
{
    if (std::abs(s) < 1e-8 || std::abs(d.k - s) < 1e-8)
        throw Error(Errc::PoleProximity, "s too close to 0 or k");
    if (!(t0 > 0)) throw Error(Errc::DomainError, "t0 must be positive");
    const auto [gC, gK] = growth_of(d.A, d.B);
    double tail_a = 0, tail_b = 0;
    SplitValue out;
    out.value = series_sum(d.A, d.lambda, s, t0, tail_a, gC, gK) +
                d.C * series_sum(d.B, d.lambda, d.k - s, 1.0 / t0, tail_b, gC, gK) - d.a0 * std::pow(t0, s) / s -
                d.C * d.b0 * std::pow(t0, s - d.k) / (d.k - s);
    out.tail = tail_a + std::abs(d.C) * tail_b;
    return out;
}

SplitData swapped(const SplitData& d)
{
    SplitData w = d;
    std::swap(w.A, w.B);
    std::swap(w.a0, w.b0);
    w.C = 1.0 / d.C;
    return w;
}

SplitData untwisted_data(const CoefficientSeries& series)
{
    if (!series.a0 || !series.b0) throw Error(Errc::MissingConstants, "a0 and b0 must be known or fitted");
    SplitData d;
    d.A = series.a;
    d.B = series.b;
    d.a0 = *series.a0;
    d.b0 = *series.b0;
    d.C = series.root_number();
    d.lambda = 2 * kPi / std::sqrt(static_cast<double>(series.N));
    d.k = series.m / 2.0;
    return d;
}

cplx lambda_completed(const CoefficientSeries& series, cplx s, double t0)
{
    return smoothed_lambda(untwisted_data(series), s, t0).value;
}

double t0_defect(const SplitData& d, cplx s, double t0a, double t0b)
{
    const cplx x = smoothed_lambda(d, s, t0a).value, y = smoothed_lambda(d, s, t0b).value;
    return std::abs(x - y) / std::abs(x);
}

double two_sided_defect(const SplitData& d, cplx s, double t0)
{
    const cplx x = smoothed_lambda(d, s, t0).value;
    const cplx y = d.C * smoothed_lambda(swapped(d), d.k - s, t0).value;
    return std::abs(x - y) / std::abs(x);
}

const char* to_string(TwistVariant v)
{
    switch (v) {
    case TwistVariant::EvenM: return "even-m";
    case TwistVariant::OddGeneric: return "odd-m";
    case TwistVariant::OddQuadratic: return "odd-m-quadratic";
    }
    return "?";
}

TwistVariant twist_variant(int m, const DirichletCharacter& psi)
{
    if (m % 2 == 0) return TwistVariant::EvenM;
    return psi.quadratic() ? TwistVariant::OddQuadratic : TwistVariant::OddGeneric;
}

cplx twist_constants(const FormProfile& pr, const DirichletCharacter& psi, TwistVariant variant)
{
    const long long r = psi.modulus();
    if (psi.principal()) throw Error(Errc::VariantMismatch, "twisted equations need a primitive character");
    if (pr.N % r == 0) throw Error(Errc::ModulusDividesLevel, "r divides N");
    if (variant != twist_variant(pr.m, psi)) throw Error(Errc::VariantMismatch, "variant does not match m and psi");
    const double chi_r = KroneckerCharacter(pr.K)(r);
    const cplx psi_mN = psi(-pr.N);
    switch (variant) {
    case TwistVariant::EvenM:
        return chi_r * psi_mN * gauss_sum(psi) / gauss_sum(psi.conj());
    case TwistVariant::OddGeneric: {
        const auto phi = legendre_character(r);
        const double sign = std::pow(jacobi(-1, pr.m), (pr.m - 1) / 2);
        return sign * chi_r * double(jacobi(pr.N, r)) * psi_mN / epsilon_d(r) * gauss_sum(psi * phi) /
               gauss_sum(psi.conj());
    }
    case TwistVariant::OddQuadratic:
        return std::pow(jacobi(-1, pr.m), (pr.m - 1) / 2) * chi_r;
    }
    return 0;
}

SplitData twisted_data(const CoefficientSeries& series, const FormProfile& pr, const DirichletCharacter& psi)
{
    const TwistVariant v = twist_variant(series.m, psi);
    const cplx c = twist_constants(pr, psi, v);
    const long long r = psi.modulus();
    const long long n_max = series.n_max();
    SplitData d;
    d.A.assign(n_max + 1, 0.0);
    d.B.assign(n_max + 1, 0.0);
    d.C = series.root_number() * c;
    d.lambda = 2 * kPi / (r * std::sqrt(static_cast<double>(series.N)));
    d.k = series.m / 2.0;
    const auto phi = legendre_character(r);
    for (long long n = 1; n <= n_max; ++n) {
        d.A[n] = psi(n) * series.a[n];
        switch (v) {
        case TwistVariant::EvenM: d.B[n] = psi.conj()(n) * series.b[n]; break;
        case TwistVariant::OddGeneric: d.B[n] = (psi.conj() * phi)(n) * series.b[n]; break;
        case TwistVariant::OddQuadratic:
            d.B[n] = ((n % r == 0 ? double(r) : 0.0) * series.b[n] - series.b[n]) / std::sqrt(double(r));
            break;
        }
    }
    if (v == TwistVariant::OddQuadratic) {
        if (!series.b0) throw Error(Errc::MissingConstants, "the quadratic twist needs b(0)");
        // r b(0) - b(0) from the recombined series, with the same r^{-1/2}; the pole of Lambda at m/2
        // is then i^{m/2} C^(2) (r^{1/2} - r^{-1/2}) b(0) / (m/2 - s)
        d.b0 = (std::sqrt(double(r)) - 1 / std::sqrt(double(r))) * *series.b0;
    }
    return d;
}

TwistedResult twisted_lambda(const CoefficientSeries& series, const FormProfile& pr, const DirichletCharacter& psi,
                             cplx s, double t0)
{
    const SplitData d = twisted_data(series, pr, psi);
    TwistedResult out;
    out.variant = twist_variant(series.m, psi);
    out.constant = twist_constants(pr, psi, out.variant);
    out.lhs = smoothed_lambda(d, s, t0).value;
    out.rhs = d.C * smoothed_lambda(swapped(d), d.k - s, t0).value;
    out.defect = std::abs(out.lhs - out.rhs) / std::abs(out.lhs);
    out.t0_defect = t0_defect(d, s, t0, 1.5 * t0);
    return out;
}

} // namespace qfz
