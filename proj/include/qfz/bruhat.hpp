#pragma once

#include <complex>
#include <vector>

#include "qfz/characters.hpp"
#include "qfz/quadform.hpp"

namespace qfz {

// phi on Q^m supported on (1/M)Z^m and periodic mod L Z^m, stored densely on
// u in (Z/(ML))^m with v = u/M; index is row-major with u_0 most significant.
class SchwartzBruhatFn {
public:
    SchwartzBruhatFn(int m, long long denom, long long period);

    int dim() const { return m_; }
    long long denom() const { return M_; }
    long long period() const { return L_; }
    long long side() const { return M_ * L_; }
    std::size_t size() const { return table_.size(); }

    std::vector<cplx>& table() { return table_; }
    const std::vector<cplx>& table() const { return table_; }

    std::size_t index(const IntVector& u) const;
    IntVector point(std::size_t idx) const;

    // value at v = u/M
    cplx at_scaled(const IntVector& u) const { return table_[index(u)]; }
    // value at the rational point num/den (componentwise common denominator)
    cplx operator()(const IntVector& num, long long den) const;

private:
    int m_;
    long long M_, L_;
    std::vector<cplx> table_;
};

constexpr double kTableBudget = 1e7;

SchwartzBruhatFn build_phi0(int m);

// phi(v) = tau_psi(P(v)) ch_{Z^m}(v), period r
SchwartzBruhatFn build_phi_psi_P(const QuadraticForm& form, const DirichletCharacter& psi,
                                 double budget = kTableBudget);

// phi^(v*) = r^{-m} sum_{v in (1/M)Z^m / rZ^m} phi(v) e[-<v, v*>] with r = multiple * L
SchwartzBruhatFn fourier_transform(const SchwartzBruhatFn& phi, long long multiple = 1,
                                   double budget = kTableBudget);

// max over v* mod r of |phi^_{psi,P}(v*/r) - r^{-m/2} chi_K(r) C_{2p-m,r} psi*(-N) tau_{psi*}(Phat(v*))|
double stark_defect(const QuadraticForm& form, const DirichletCharacter& psi, double budget = kTableBudget);

} // namespace qfz
