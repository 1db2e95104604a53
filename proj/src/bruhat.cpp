#include "qfz/bruhat.hpp"

#include <cmath>
#include <numbers>

#include "qfz/errors.hpp"

namespace qfz {

SchwartzBruhatFn::SchwartzBruhatFn(int m, long long denom, long long period) : m_(m), M_(denom), L_(period)
{
    if (m < 1 || denom < 1 || period < 1) throw Error(Errc::InvalidArgument, "bad Schwartz-Bruhat shape");
    const double cells = std::pow(static_cast<double>(denom * period), m);
    if (cells > 1e9) throw Error(Errc::TableOverflow, "table too large");
    table_.assign(static_cast<std::size_t>(cells), cplx(0));
}

std::size_t SchwartzBruhatFn::index(const IntVector& u) const
{
    if (u.size() != m_) throw Error(Errc::DimensionMismatch, "point dimension");
    const long long s = side();
    std::size_t idx = 0;
    for (int i = 0; i < m_; ++i) idx = idx * s + static_cast<std::size_t>(mod(u(i), s));
    return idx;
}

IntVector SchwartzBruhatFn::point(std::size_t idx) const
{
    const long long s = side();
    IntVector u(m_);
    for (int i = m_ - 1; i >= 0; --i) {
        u(i) = static_cast<long long>(idx % s);
        idx /= s;
    }
    return u;
}

cplx SchwartzBruhatFn::operator()(const IntVector& num, long long den) const
{
    IntVector u(m_);
    for (int i = 0; i < m_; ++i) {
        // v_i = num_i / den lies in (1/M)Z iff num_i * M is divisible by den
        const __int128 t = static_cast<__int128>(num(i)) * M_;
        if (t % den != 0) return 0;
        u(i) = static_cast<long long>(t / den);
    }
    return at_scaled(u);
}

SchwartzBruhatFn build_phi0(int m)
{
    SchwartzBruhatFn phi(m, 1, 1);
    phi.table()[0] = 1;
    return phi;
}

SchwartzBruhatFn build_phi_psi_P(const QuadraticForm& form, const DirichletCharacter& psi, double budget)
{
    const long long r = psi.modulus();
    const long long N = level(form);
    if (N % r == 0) throw Error(Errc::ModulusDividesLevel, "r divides the level");
    const int m = form.dim();
    if (std::pow(static_cast<double>(r), m) > budget) throw Error(Errc::TableOverflow, "r^m exceeds budget");
    std::vector<cplx> tau(r);
    for (long long t = 0; t < r; ++t) tau[t] = gauss_sum(psi, t);
    SchwartzBruhatFn phi(m, 1, r);
    auto& tab = phi.table();
    for (std::size_t i = 0; i < tab.size(); ++i) tab[i] = tau[mod(form.value(phi.point(i)), r)];
    return phi;
}

SchwartzBruhatFn fourier_transform(const SchwartzBruhatFn& phi, long long multiple, double budget)
{
    const int m = phi.dim();
    const long long M = phi.denom(), L = phi.period(), K = M * L;
    const long long r = multiple * L;
    if (std::pow(static_cast<double>(r), m) > budget) throw Error(Errc::TableOverflow, "r^m exceeds budget");

    // e[-t / K] for t mod K
    std::vector<cplx> root(K);
    for (long long t = 0; t < K; ++t) {
        const double a = -2 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(K);
        root[t] = {std::cos(a), std::sin(a)};
    }

    // separable sum, one axis at a time; along each axis u runs over Z/(rM), values repeat mod K
    std::vector<cplx> cur = phi.table();
    std::vector<cplx> next(cur.size());
    std::size_t stride = 1;
    for (int axis = m - 1; axis >= 0; --axis) {
        const std::size_t outer = cur.size() / (stride * K);
#pragma omp parallel for
        for (std::size_t o = 0; o < outer; ++o)
            for (std::size_t in = 0; in < stride; ++in) {
                const std::size_t base = o * stride * K + in;
                for (long long w = 0; w < K; ++w) {
                    cplx s = 0;
                    for (long long u = 0; u < multiple * K; ++u)
                        s += cur[base + (u % K) * stride] * root[(u % K) * w % K];
                    next[base + w * stride] = s;
                }
            }
        std::swap(cur, next);
        stride *= K;
    }
    const double scale = std::pow(static_cast<double>(r), -m);
    SchwartzBruhatFn out(m, L, M);
    auto& tab = out.table();
    for (std::size_t i = 0; i < tab.size(); ++i) tab[i] = cur[i] * scale;
    return out;
}

double stark_defect(const QuadraticForm& form, const DirichletCharacter& psi, double budget)
{
    const FormProfile pr = validate(form);
    const long long r = psi.modulus();
    const int m = pr.m;
    const SchwartzBruhatFn hat = fourier_transform(build_phi_psi_P(form, psi, budget), 1, budget);
    const QuadraticForm dual(pr.dual_gram2);
    const DirichletCharacter ps = psi_star(psi, m);
    const KroneckerCharacter chiK(pr.K);
    const cplx pre = std::pow(static_cast<double>(r), -m / 2.0) * static_cast<double>(chiK(r)) *
                     c_lr(2 * pr.p - m, r) * ps(-pr.N);
    std::vector<cplx> tau(r);
    for (long long t = 0; t < r; ++t) tau[t] = gauss_sum(ps, t);
    double worst = 0;
    // hat has denominator r and period 1, so its table index is v* mod r
    for (std::size_t i = 0; i < hat.size(); ++i) {
        const IntVector w = hat.point(i);
        const cplx rhs = pre * tau[mod(dual.value(w), r)];
        worst = std::max(worst, std::abs(hat.table()[i] - rhs));
    }
    return worst;
}

} // namespace qfz
