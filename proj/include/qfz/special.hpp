#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/bernoulli.hpp>
#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "qfz/errors.hpp"

namespace qfz {

template <class T>
struct PrecisionPolicy {
    T target = T(1e-10);
    T asymptotic_min_y = T(30);
};

template <class T>
struct Checked {
    T value{};
    bool precision_loss = false;
};

namespace detail {

template <class T>
T eps()
{
    return std::numeric_limits<T>::epsilon();
}

template <class T>
int digits10()
{
    return std::numeric_limits<T>::digits10;
}

template <class T>
bool near_nonpositive_integer(const std::complex<T>& s)
{
    using std::abs;
    using std::round;
    if (abs(s.imag()) > 0) return false;
    const T r = round(s.real());
    return r <= 0 && abs(s.real() - r) <= 8 * eps<T>() * (1 + abs(r));
}

} // namespace detail

// principal branch of log Gamma (continuous off the negative real axis)
template <class T>
std::complex<T> log_gamma(std::complex<T> z)
{
    using C = std::complex<T>;
    using std::log;
    if (detail::near_nonpositive_integer(z)) throw Error(Errc::PoleError, "Gamma has a pole here");
    const int d = detail::digits10<T>();
    const T shift_to = T(d < 17 ? 15 : d);
    C acc(0);
    while (z.real() < shift_to) {
        acc -= log(z);
        z += T(1);
    }
    const T half_log_2pi = log(2 * std::numbers::pi_v<T>) / 2;
    C r = (z - T(0.5)) * log(z) - z + half_log_2pi;
    const C z2 = z * z;
    C zp = z;
    const int terms = d < 17 ? 12 : d / 2 + 5;
    for (int k = 1; k <= terms; ++k) {
        const T b = boost::math::bernoulli_b2n<T>(k);
        r += b / (T(2 * k) * T(2 * k - 1)) / zp;
        zp *= z2;
    }
    return r + acc;
}

template <class T>
std::complex<T> gamma_c(std::complex<T> z)
{
    return std::exp(log_gamma(z));
}

// Gamma(s, x) for complex s and x > 0
template <class T>
Checked<std::complex<T>> upper_incomplete_gamma_checked(std::complex<T> s, T x)
{
    using C = std::complex<T>;
    using std::abs;
    using std::exp;
    using std::log;
    using std::pow;
    if (!(x > 0)) throw Error(Errc::DomainError, "incomplete gamma needs x > 0");
    const T tol = 4 * detail::eps<T>();
    const C prefactor = exp(s * log(x) - x);

    if (x >= 1 + abs(s) / 3) {
        // modified Lentz on the Legendre continued fraction
        const T tiny = std::numeric_limits<T>::min() * 1e10;
        C b = x + T(1) - s;
        C c = C(1) / tiny;
        C dd = C(1) / b;
        C h = dd;
        bool ok = false;
        for (int i = 1; i < 20000; ++i) {
            const C an = -T(i) * (T(i) - s);
            b += T(2);
            dd = an * dd + b;
            if (abs(dd) < tiny) dd = tiny;
            c = b + an / c;
            if (abs(c) < tiny) c = tiny;
            dd = C(1) / dd;
            const C del = dd * c;
            h *= del;
            if (abs(del - T(1)) < tol) {
                ok = true;
                break;
            }
        }
        if (ok) return {prefactor * h, false};
    }

    if (s.real() < T(0.5)) {
        if (detail::near_nonpositive_integer(s)) {
            // Gamma(-n, x) from E1(x) by downward recurrence
            const int n = static_cast<int>(-std::round(static_cast<double>(s.real())));
            T g = boost::math::expint(1, x);
            for (int k = 1; k <= n; ++k) g = (exp(-x) * pow(x, T(-k)) - g) / T(k);
            return {C(g), false};
        }
        auto up = upper_incomplete_gamma_checked(s + T(1), x);
        return {(up.value - prefactor) / s, up.precision_loss};
    }

    // Gamma(s) - gamma(s, x) with gamma(s, x) = x^s e^{-x} sum x^k / (s)_{k+1}
    C term = C(1) / s;
    C sum = term;
    for (int k = 1; k < 100000; ++k) {
        term *= x / (s + T(k));
        sum += term;
        if (abs(term) < tol * abs(sum)) break;
    }
    const C full = gamma_c(s);
    const C lower = prefactor * sum;
    const C value = full - lower;
    const bool loss = abs(value) < T(1e-4) * abs(full);
    return {value, loss};
}

template <class T>
std::complex<T> upper_incomplete_gamma(std::complex<T> s, T x)
{
    auto r = upper_incomplete_gamma_checked(s, x);
    if (r.precision_loss) throw Error(Errc::PrecisionLoss, "cancellation in Gamma(s) - gamma(s,x)");
    return r.value;
}

namespace detail {

template <class T>
bool is_nonpositive_integer(T a, long long& n)
{
    using std::abs;
    using std::round;
    const T r = round(a);
    if (r <= 0 && abs(a - r) <= 64 * eps<T>() * (1 + abs(r))) {
        n = static_cast<long long>(-static_cast<double>(r));
        return true;
    }
    return false;
}

// U(-n, b, y) as a finite sum
template <class T>
T kummer_u_polynomial(long long n, T b, T y)
{
    using std::pow;
    T sum = 0;
    T binom = 1;
    for (long long k = 0; k <= n; ++k) {
        T poch = 1;
        for (long long j = 0; j < n - k; ++j) poch *= b + T(k + j);
        sum += binom * poch * ((k % 2) ? -1 : 1) * pow(y, T(k));
        binom = binom * T(n - k) / T(k + 1);
    }
    return (n % 2) ? -sum : sum;
}

// y^{-a} sum (a)_k (a-b+1)_k / k! (-y)^{-k}, stopped at the smallest term
template <class T>
Checked<T> kummer_u_asymptotic(T a, T b, T y, T target)
{
    using std::abs;
    using std::pow;
    T term = 1, sum = 1;
    T last = 1;
    for (int k = 0; k < 400; ++k) {
        const T next = term * (a + T(k)) * (a - b + T(k + 1)) / (T(k + 1) * (-y));
        if (abs(next) > abs(term)) break;
        term = next;
        sum += term;
        last = abs(term);
        if (last < target * eps<T>() * abs(sum)) break;
    }
    return {pow(y, -a) * sum, !(last <= target * abs(sum))};
}

// U(a,b,y) = y^{-a}/Gamma(a) * int_0^inf e^{-u} u^{a-1} (1+u/y)^{b-a-1} du, a > 0,
// by trapezoidal quadrature after u = exp(t - exp(-t))
template <class T>
Checked<T> kummer_u_integral(T a, T b, T y, T target)
{
    using std::abs;
    using std::exp;
    using std::log;
    using std::log1p;
    const T c = b - a - 1;
    const T tiny = eps<T>() * eps<T>();
    auto g = [&](T t) -> T {
        const T en = exp(-t);
        const T lu = t - en;
        const T u = exp(lu);
        const T lg = -u + a * lu + c * log1p(u / y);
        if (lg < log(std::numeric_limits<T>::min()) + 50) return T(0);
        return exp(lg) * (1 + en);
    };
    const T tol = std::max(target * T(1e-3), 16 * eps<T>());

    // integration window: extend until the integrand is negligible
    T peak = 0;
    for (T t = -4; t <= 4; t += T(0.25)) peak = std::max(peak, abs(g(t)));
    T lo = -4, hi = 4;
    while (abs(g(lo)) > tiny * peak && lo > -60) lo -= 1;
    while (abs(g(hi)) > tiny * peak && hi < 60) hi += 1;

    T h = T(0.5);
    long long count = static_cast<long long>(std::ceil(static_cast<double>((hi - lo) / h)));
    T sum = 0;
    for (long long k = 0; k <= count; ++k) sum += g(lo + h * T(k));
    T est = sum * h;
    bool converged = false;
    for (int level = 0; level < 12; ++level) {
        T add = 0;
        for (long long k = 0; k < count; ++k) add += g(lo + h * (T(k) + T(0.5)));
        sum += add;
        count *= 2;
        h /= 2;
        const T next = sum * h;
        const bool done = abs(next - est) <= tol * abs(next);
        est = next;
        if (done && level >= 2) {
            converged = true;
            break;
        }
    }
    const T value = exp(-a * log(y) - boost::math::lgamma(a)) * est;
    return {value, !converged};
}

template <class T>
Checked<T> kummer_u(T a, T b, T y, const PrecisionPolicy<T>& pol)
{
    using std::pow;
    long long n = 0;
    if (is_nonpositive_integer(a, n)) return {kummer_u_polynomial(n, b, y), false};
    const T a2 = a - b + 1;
    if (is_nonpositive_integer(a2, n)) return {pow(y, 1 - b) * kummer_u_polynomial(n, 2 - b, y), false};
    if (y >= pol.asymptotic_min_y) {
        auto r = kummer_u_asymptotic(a, b, y, pol.target);
        if (!r.precision_loss) return r;
    }
    if (a > 0) return kummer_u_integral(a, b, y, pol.target);
    if (a2 > 0) {
        auto r = kummer_u_integral(a2, 2 - b, y, pol.target);
        return {pow(y, 1 - b) * r.value, r.precision_loss};
    }
    // both parameters negative: U(a-1) = (2a-b+y)U(a) - a(a-b+1)U(a+1), downward from a+j > 0
    const long long j = static_cast<long long>(std::ceil(static_cast<double>(-a))) + 1;
    auto u1 = kummer_u_integral(a + T(j), b, y, pol.target);
    auto u2 = kummer_u_integral(a + T(j + 1), b, y, pol.target);
    T hi = u2.value, cur = u1.value;
    for (long long k = j; k > 0; --k) {
        const T aa = a + T(k);
        const T lower = (2 * aa - b + y) * cur - aa * (aa - b + 1) * hi;
        hi = cur;
        cur = lower;
    }
    return {cur, u1.precision_loss || u2.precision_loss};
}

} // namespace detail

// W_{kappa,mu}(y) = e^{-y/2} y^{mu+1/2} U(1/2+mu-kappa, 1+2mu, y)
template <class T>
Checked<T> whittaker_w_checked(T kappa, T mu, T y, const PrecisionPolicy<T>& pol = {})
{
    using std::exp;
    using std::log;
    if (!(y > 0)) throw Error(Errc::DomainError, "Whittaker W needs y > 0");
    const T a = T(0.5) + mu - kappa;
    const T b = 1 + 2 * mu;
    auto u = detail::kummer_u(a, b, y, pol);
    const T pre = exp(-y / 2 + (mu + T(0.5)) * log(y));
    return {pre * u.value, u.precision_loss};
}

template <class T>
T whittaker_w(T kappa, T mu, T y, const PrecisionPolicy<T>& pol = {})
{
    auto r = whittaker_w_checked(kappa, mu, y, pol);
    if (r.precision_loss) throw Error(Errc::PrecisionLoss, "Whittaker W did not reach the target");
    return r.value;
}

inline double whittaker_w(double kappa, double mu, double y) { return whittaker_w<double>(kappa, mu, y); }

inline std::complex<double> log_gamma(std::complex<double> s) { return log_gamma<double>(s); }

inline std::complex<double> upper_incomplete_gamma(std::complex<double> s, double x)
{
    return upper_incomplete_gamma<double>(s, x);
}

} // namespace qfz
