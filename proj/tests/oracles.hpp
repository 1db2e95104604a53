#pragma once

// Independent reference implementations used only by the tests.

#include <complex>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "qfz/quadform.hpp"

namespace oracle {

using Big = boost::multiprecision::cpp_bin_float_100;
using qfz::IntMatrix;
using qfz::IntVector;
using qfz::Rational;

inline IntMatrix diag(std::initializer_list<long long> d)
{
    IntMatrix g = IntMatrix::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
    Eigen::Index i = 0;
    for (long long x : d) g(i, i) = x, ++i;
    return g;
}

// 2Y = [[2,1],[1,2]] + diag(2,2,-2), m = 5, N = 12
inline IntMatrix third_form()
{
    IntMatrix g = diag({2, 2, 2, 2, -2});
    g(0, 1) = g(1, 0) = 1;
    return g;
}

// Gauss-Jordan over Q, written out without Eigen
inline std::vector<std::vector<Rational>> rational_inverse(const IntMatrix& a)
{
    const int n = static_cast<int>(a.rows());
    std::vector<std::vector<Rational>> m(n, std::vector<Rational>(2 * n, 0));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) m[i][j] = a(i, j);
        m[i][n + i] = 1;
    }
    for (int c = 0; c < n; ++c) {
        int piv = c;
        while (m[piv][c] == 0) ++piv;
        std::swap(m[piv], m[c]);
        const Rational inv = 1 / m[c][c];
        for (auto& x : m[c]) x *= inv;
        for (int r = 0; r < n; ++r)
            if (r != c && m[r][c] != 0) {
                const Rational f = m[r][c];
                for (int j = 0; j < 2 * n; ++j) m[r][j] -= f * m[c][j];
            }
    }
    std::vector<std::vector<Rational>> out(n, std::vector<Rational>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out[i][j] = m[i][n + j];
    return out;
}

// smallest N with N (2Y)^{-1} integral and even on the diagonal, by trial
inline long long level_by_trial(const IntMatrix& gram2)
{
    const auto inv = rational_inverse(gram2);
    for (long long N = 1;; ++N) {
        bool ok = true;
        for (std::size_t i = 0; i < inv.size() && ok; ++i)
            for (std::size_t j = 0; j < inv.size() && ok; ++j) {
                const Rational x = N * inv[i][j];
                if (denominator(x) != 1) ok = false;
                else if (i == j && numerator(x) % 2 != 0) ok = false;
            }
        if (ok) return N;
    }
}

// #{v mod q : Y[v] = t mod q} by direct enumeration
inline long long brute_count(const IntMatrix& gram2, long long t, long long q)
{
    const int m = static_cast<int>(gram2.rows());
    std::vector<long long> v(m, 0);
    long long count = 0;
    while (true) {
        long long s = 0;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) s += v[i] * gram2(i, j) * v[j];
        s /= 2;
        if (((s - t) % q + q) % q == 0) ++count;
        int i = 0;
        while (i < m && ++v[i] == q) v[i++] = 0;
        if (i == m) break;
    }
    return count;
}

// theta(z) = sum_n e[n^2 z]
inline std::complex<double> theta(std::complex<double> z)
{
    std::complex<double> s = 1;
    for (int n = 1; n < 400; ++n) {
        const std::complex<double> t = std::exp(std::complex<double>(0, 2 * M_PI * n * n) * z);
        s += 2.0 * t;
        if (std::abs(t) < 1e-20) break;
    }
    return s;
}

// M(a, b, y) by its power series
inline Big kummer_m(Big a, Big b, Big y)
{
    Big term = 1, sum = 1;
    for (int k = 0; k < 5000; ++k) {
        term *= (a + k) * y / ((b + k) * (k + 1));
        sum += term;
        if (abs(term) < abs(sum) * Big("1e-95")) break;
    }
    return sum;
}

// 1/Gamma(x), zero at the poles
inline Big rgamma(Big x)
{
    if (x <= 0 && x == round(x)) return 0;
    return 1 / boost::math::tgamma(x);
}

inline Big kummer_u_connection(Big a, Big b, Big y)
{
    using boost::math::tgamma;
    return tgamma(1 - b) * rgamma(a - b + 1) * kummer_m(a, b, y) +
           tgamma(b - 1) * rgamma(a) * pow(y, 1 - b) * kummer_m(a - b + 1, 2 - b, y);
}

// W_{kappa,mu}(y) = e^{-y/2} y^{mu+1/2} U(mu - kappa + 1/2, 1 + 2 mu, y), with U from the connection
// formula in 100 digits; integer b is approached symmetrically from both sides.
inline double whittaker_w(double kappa, double mu, double y)
{
    const Big a = Big(mu) - Big(kappa) + Big(0.5), b = 1 + 2 * Big(mu), Y = y;
    Big u;
    if (abs(b - round(b)) < Big(1e-12)) {
        const Big d("1e-40");
        u = (kummer_u_connection(a + d, b + d, Y) + kummer_u_connection(a - d, b - d, Y)) / 2;
    } else {
        u = kummer_u_connection(a, b, Y);
    }
    return static_cast<double>(exp(-Y / 2) * pow(Y, Big(mu) + Big(0.5)) * u);
}

// Gamma(s, x) = int_0^inf (x + u)^{s-1} e^{-(x+u)} du by exp-sinh quadrature
inline std::complex<double> upper_gamma(std::complex<double> s, double x)
{
    boost::math::quadrature::exp_sinh<double> q;
    auto part = [&](bool imag) {
        return q.integrate([&](double u) {
            const std::complex<double> v = std::pow(std::complex<double>(x + u), s - 1.0) * std::exp(-(x + u));
            return imag ? v.imag() : v.real();
        });
    };
    return {part(false), part(true)};
}

} // namespace oracle
