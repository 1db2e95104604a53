#pragma once

#include <complex>
#include <vector>

#include "qfz/quadform.hpp"

namespace qfz {

using cplx = std::complex<double>;

// Shimura's symbol (c/d) for odd d. For d > 0 this is the Jacobi symbol with
// (0/1) = 1. For d < 0: (c/d) = (c/|d|) if c >= 0 and -(c/|d|) if c < 0,
// which makes (0/-1) = 1 (Shimura, Ann. of Math. 97 (1973), p. 442).
int quad_residue_symbol(long long c, long long d);

// epsilon_d = 1 if d = 1 mod 4, i if d = 3 mod 4 (residues taken in 0..3)
cplx epsilon_d(long long d);

// J(gamma, z) = epsilon_d^{-1} (c/d) (cz + d)^{1/2}, principal square root
cplx theta_multiplier(long long a, long long b, long long c, long long d, cplx z);

// Dirichlet character mod an odd prime r: psi(g^k) = exp(2 pi i index k / (r-1))
// with g the least primitive root.
class DirichletCharacter {
public:
    DirichletCharacter(long long r, long long index);

    long long modulus() const { return r_; }
    long long index() const { return index_; }
    bool principal() const { return index_ == 0; }
    bool quadratic() const { return 2 * index_ == r_ - 1; }

    cplx operator()(long long n) const { return values_[mod(n, r_)]; }

    DirichletCharacter conj() const;
    DirichletCharacter operator*(const DirichletCharacter& o) const;
    bool operator==(const DirichletCharacter& o) const { return r_ == o.r_ && index_ == o.index_; }

private:
    long long r_;
    long long index_;
    std::vector<cplx> values_;
};

long long least_primitive_root(long long r);
std::vector<DirichletCharacter> enumerate_characters(long long r);

// the quadratic character (./r)
DirichletCharacter legendre_character(long long r);

// tau_psi(n) = sum over units m of psi(m) e^{2 pi i m n / r}
cplx gauss_sum(const DirichletCharacter& psi, long long n = 1);

// psi*(k) = conj(psi(k)) (k/r)^ell
DirichletCharacter psi_star(const DirichletCharacter& psi, long long ell);

// C_{ell,r} = 1 for even ell, epsilon_r^ell for odd ell
cplx c_lr(long long ell, long long r);

// Kronecker symbol (disc/n) of a fundamental discriminant; identically 1 for Q
class KroneckerCharacter {
public:
    explicit KroneckerCharacter(FieldDisc f = {}) : disc_(f.disc) {}
    long long disc() const { return disc_; }
    bool principal() const { return disc_ == 1; }
    int operator()(long long n) const;

private:
    long long disc_;
};

int kronecker_chi(const KroneckerCharacter& chi, long long n);

// i^k for integer k, exact
cplx ipow_i(long long k);

} // namespace qfz
