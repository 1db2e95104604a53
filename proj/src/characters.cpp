#include "qfz/characters.hpp"

#include <cmath>
#include <numbers>

#include "qfz/errors.hpp"

namespace qfz {

cplx ipow_i(long long k)
{
    switch (mod(k, 4)) {
    case 0: return {1, 0};
    case 1: return {0, 1};
    case 2: return {-1, 0};
    default: return {0, -1};
    }
}

int quad_residue_symbol(long long c, long long d)
{
    if (d % 2 == 0) throw Error(Errc::DomainError, "(c/d) needs odd d");
    if (d > 0) return jacobi(c, d);
    const int s = jacobi(c, -d);
    return c < 0 ? -s : s;
}

cplx epsilon_d(long long d)
{
    if (d % 2 == 0) throw Error(Errc::DomainError, "epsilon_d needs odd d");
    return mod(d, 4) == 1 ? cplx(1, 0) : cplx(0, 1);
}

cplx theta_multiplier(long long a, long long b, long long c, long long d, cplx z)
{
    if (a * d - b * c != 1) throw Error(Errc::DomainError, "det(gamma) != 1");
    if (c % 4 != 0) throw Error(Errc::DomainError, "gamma not in Gamma0(4)");
    const cplx w = std::sqrt(cplx(static_cast<double>(c)) * z + static_cast<double>(d));
    return std::conj(epsilon_d(d)) * static_cast<double>(quad_residue_symbol(c, d)) * w;
}

long long least_primitive_root(long long r)
{
    if (!is_prime(r) || r == 2) throw Error(Errc::DomainError, "modulus must be an odd prime");
    const auto fac = factorize(r - 1);
    for (long long g = 2; g < r; ++g) {
        bool ok = true;
        for (auto [q, e] : fac) {
            long long x = 1;
            for (long long i = 0; i < (r - 1) / q; ++i) x = x * g % r;
            if (x == 1) {
                ok = false;
                break;
            }
        }
        if (ok) return g;
    }
    return 1;
}

namespace {

// root of unity e^{2 pi i k / n} with exact values at quarter turns
cplx unit_root(long long k, long long n)
{
    k = mod(k, n);
    if ((4 * k) % n == 0) return ipow_i(4 * k / n);
    const double t = 2 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    return {std::cos(t), std::sin(t)};
}

} // namespace

DirichletCharacter::DirichletCharacter(long long r, long long index)
    : r_(r), index_(mod(index, r - 1)), values_(r, cplx(0, 0))
{
    const long long g = least_primitive_root(r);
    long long x = 1;
    for (long long k = 0; k < r - 1; ++k) {
        values_[x] = unit_root(index_ * k, r - 1);
        x = x * g % r;
    }
}

DirichletCharacter DirichletCharacter::conj() const { return DirichletCharacter(r_, -index_); }

DirichletCharacter DirichletCharacter::operator*(const DirichletCharacter& o) const
{
    if (r_ != o.r_) throw Error(Errc::DomainError, "characters with different moduli");
    return DirichletCharacter(r_, index_ + o.index_);
}

std::vector<DirichletCharacter> enumerate_characters(long long r)
{
    std::vector<DirichletCharacter> out;
    for (long long j = 0; j < r - 1; ++j) out.emplace_back(r, j);
    return out;
}

DirichletCharacter legendre_character(long long r) { return DirichletCharacter(r, (r - 1) / 2); }

cplx gauss_sum(const DirichletCharacter& psi, long long n)
{
    const long long r = psi.modulus();
    cplx s = 0;
    for (long long m = 1; m < r; ++m) s += psi(m) * unit_root(m * n, r);
    return s;
}

DirichletCharacter psi_star(const DirichletCharacter& psi, long long ell)
{
    const long long r = psi.modulus();
    const long long shift = mod(ell, 2) ? (r - 1) / 2 : 0;
    return DirichletCharacter(r, -psi.index() + shift);
}

cplx c_lr(long long ell, long long r)
{
    if (mod(ell, 2) == 0) return 1;
    return mod(r, 4) == 1 ? cplx(1, 0) : ipow_i(ell);
}

int KroneckerCharacter::operator()(long long n) const
{
    if (disc_ == 1) return 1;
    if (n == 0) return 0;
    int s = 1;
    if (n < 0) {
        n = -n;
        if (disc_ < 0) s = -s;
    }
    while (n % 2 == 0) {
        n /= 2;
        if (disc_ % 2 == 0) return 0;
        const long long r = mod(disc_, 8);
        if (r == 3 || r == 5) s = -s;
    }
    return s * jacobi(disc_, n);
}

int kronecker_chi(const KroneckerCharacter& chi, long long n) { return chi(n); }

} // namespace qfz
