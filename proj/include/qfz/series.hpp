#pragma once

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "qfz/characters.hpp"
#include "qfz/localdensity.hpp"
#include "qfz/quadform.hpp"

namespace qfz {

// Coefficients built from relative measures carry an unknown global factor.
constexpr const char* kCoefficientNormalization = "relative";

// a(n) = |D|^{-1/2} e^{pi i (2p-m)/4} |n|^{1-m/2} M(P;n), n taken with the table's sign
cplx coeff_a(const FormProfile& pr, const MeasureTable& measures, long long n);
// b(n) = (|n|/N)^{1-m/2} M*(Phat;n)
cplx coeff_b(const FormProfile& pr, const MeasureTable& dual_measures, long long n);
// m - p even: a(n) = |D|^{-1/2} M(P;n)
cplx coeff_a_holomorphic(const FormProfile& pr, const MeasureTable& measures, long long n);
// m - p even: b(n) = (-1)^{(m-2p)/4} N^{m/4} M*(Phat;n), principal branch
cplx coeff_b_holomorphic(const FormProfile& pr, const MeasureTable& dual_measures, long long n);

// Dirichlet coefficients of L(M;s) and L(M*;s); slot 0 of a and b is unused.
struct CoefficientSeries {
    int m = 0;
    long long N = 1;
    std::vector<cplx> a, b;
    std::optional<cplx> a0, b0;
    // |a(n)|, |b(n)| <= growth_C n^growth_K on the stored range
    double growth_C = 0, growth_K = 0;

    long long n_max() const { return a.empty() ? 0 : static_cast<long long>(a.size()) - 1; }
    cplx root_number() const { return std::pow(cplx(0, 1), m / 2.0); }
};

void update_growth(CoefficientSeries& s);
// b is multiplied by dual_scale
CoefficientSeries holomorphic_series(const FormProfile& pr, const MeasureTable& measures,
                                     const MeasureTable& dual_measures, cplx dual_scale = 1.0);

Eigen::Matrix2cd gamma_matrix(cplx s);
Eigen::Matrix2cd sigma_matrix(long long ell);
double modified_fe_identity_defect(cplx s, int m, int p);

// Data of a Mellin pair f_A(1/t) = C t^k f_B(t) with
// f_A(t) = a0 + sum A(n) e^{-lambda n t}, f_B(t) = b0 + sum B(n) e^{-lambda n t}.
struct SplitData {
    std::vector<cplx> A, B;   // slot 0 unused
    cplx a0 = 0, b0 = 0;
    cplx C = 1;
    double lambda = 1;
    double k = 1;
};

struct SplitValue {
    cplx value;
    double tail = 0;   // bound on the dropped terms n > n_max
};

// Integral of (f_A - a0) t^{s-1} split at t0
SplitValue smoothed_lambda(const SplitData& d, cplx s, double t0);
// the same pair seen from the B side: f_B(1/t) = C^{-1} t^k f_A(t)
SplitData swapped(const SplitData& d);
SplitData untwisted_data(const CoefficientSeries& series);

cplx lambda_completed(const CoefficientSeries& series, cplx s, double t0 = 1.0);
// |Lambda(s; t0a) - Lambda(s; t0b)| / |Lambda(s; t0a)|
double t0_defect(const SplitData& d, cplx s, double t0a = 1.0, double t0b = 1.5);
// |Lambda_A(s) - C Lambda_B(k - s)| / |Lambda_A(s)|, both sides at the same t0 (t0 = 1 makes it an identity)
double two_sided_defect(const SplitData& d, cplx s, double t0 = 1.2);

enum class TwistVariant { EvenM, OddGeneric, OddQuadratic };
const char* to_string(TwistVariant v);

TwistVariant twist_variant(int m, const DirichletCharacter& psi);
cplx twist_constants(const FormProfile& pr, const DirichletCharacter& psi, TwistVariant variant);
// Pair for Lambda_N(s; M, psi) and Lambda_N(s; M*, psi'), C = i^{m/2} times the twist constant.
// For odd m and psi = (./r) the dual side is r^{-1/2} (r b(rn) - b(n)) and the pair carries the
// constant term (r^{1/2} - r^{-1/2}) b(0).
SplitData twisted_data(const CoefficientSeries& series, const FormProfile& pr, const DirichletCharacter& psi);

struct TwistedResult {
    TwistVariant variant;
    cplx constant;
    cplx lhs;          // Lambda_N(s; M, psi)
    cplx rhs;          // i^{m/2} C Lambda_N(m/2 - s; M*, psi')
    double defect;     // |lhs - rhs| / |lhs|
    double t0_defect;
};
TwistedResult twisted_lambda(const CoefficientSeries& series, const FormProfile& pr, const DirichletCharacter& psi,
                             cplx s, double t0 = 1.2);

} // namespace qfz
