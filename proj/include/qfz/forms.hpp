#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qfz/characters.hpp"
#include "qfz/localdensity.hpp"
#include "qfz/quadform.hpp"

namespace qfz {

enum class FormKind { Maass, Holomorphic };
enum class ConstState { Unknown, Known, Fitted };

const char* to_string(FormKind k);
const char* to_string(ConstState s);

struct ConstTerm {
    ConstState state = ConstState::Unknown;
    cplx value = 0;
    bool resolved() const { return state != ConstState::Unknown; }
    static ConstTerm known(cplx v) { return {ConstState::Known, v}; }
};

// F(z) = growth * y^{(m-l)/4} + decay * y^{1-(m+l)/4}
//        + scale_plus * sum_{n>0} plus[n] T_n(z) + scale_minus * sum_{n>0} minus[n] T_{-n}(z)
// Maass: T_n(z) = y^{-l/4} W_{sgn(n) l/4, m/4-1/2}(4 pi |n| y) e[nx].
// Holomorphic (l = m): T_n(z) = e[nz], the constant is `growth` and there is no decay or minus part.
struct FourierExpansion {
    FormKind kind = FormKind::Holomorphic;
    int m = 0;
    int ell = 0;
    long long N = 1;
    KroneckerCharacter chi;
    double lambda_param = 0;   // m/4
    double eigenvalue = 0;     // (m-l)(4-m-l)/16, Maass only
    ConstTerm growth, decay;
    ConstTerm scale_plus = ConstTerm::known(1.0), scale_minus = ConstTerm::known(1.0);
    std::vector<cplx> plus, minus;   // slot 0 unused

    long long n_max() const { return plus.empty() ? 0 : static_cast<long long>(plus.size()) - 1; }
    double growth_exponent() const { return (m - ell) / 4.0; }
    double decay_exponent() const { return 1 - (m + ell) / 4.0; }
    double weight() const { return ell / 2.0; }
};

FourierExpansion build_maass(const FormProfile& pr, int ell, const MeasureTable& plus, const MeasureTable& minus,
                             long long n_max);
FourierExpansion build_holomorphic(const FormProfile& pr, const MeasureTable& plus, long long n_max);
// G(z): dual measures, character chi_{K_N}, constants and scales left Unknown
FourierExpansion build_dual_maass(const FormProfile& pr, int ell, const MeasureTable& dual_plus,
                                  const MeasureTable& dual_minus, long long n_max);
FourierExpansion build_dual_holomorphic(const FormProfile& pr, const MeasureTable& dual_plus, long long n_max);

// the expansion reduced to one Fourier term (n != 0) or one constant power (n = 0: growth, else decay)
FourierExpansion single_term(const FourierExpansion& e, long long n);
FourierExpansion single_constant(const FourierExpansion& e, bool growth);

struct EvalOptions {
    double y_min = 0.3;
    double target = 1e-12;   // Whittaker precision target
};

// unit-coefficient contributions of each unknown-capable part at z
struct PartValues {
    cplx growth = 0, decay = 0, plus = 0, minus = 0;
    double tail = 0;
};

struct Evaluation {
    cplx value;
    double tail = 0;   // estimate of the dropped terms |n| > n_max
};

PartValues evaluate_parts(const FourierExpansion& e, cplx z, const EvalOptions& opt = {});
Evaluation evaluate(const FourierExpansion& e, cplx z, const EvalOptions& opt = {});

struct GammaElement {
    long long a = 1, b = 0, c = 0, d = 1;

    GammaElement operator*(const GammaElement& o) const;
    GammaElement inverse() const { return {d, -b, -c, a}; }
    cplx act(cplx z) const { return (double(a) * z + double(b)) / (double(c) * z + double(d)); }
    bool in_gamma0(long long N) const { return a * d - b * c == 1 && c % N == 0; }
    long long max_entry() const;
    bool operator==(const GammaElement& o) const = default;
};

std::string to_string(const GammaElement& g);

// deterministic words in T, [[1,0],[N,1]] and -I with entries bounded by max_entry and |c| <= max_c
// (0: no bound on c); the first three outputs are the generators themselves
std::vector<GammaElement> sample_gamma0(long long N, std::size_t count, std::uint64_t seed,
                                        long long max_entry = 60, long long max_c = 0);

// random z with Im z >= y_min and Im gz >= y_min; nullopt when no such z exists (|c| y_min > 1)
template <class Rng>
std::optional<cplx> sample_point(const GammaElement& g, double y_min, Rng& rng);

// chi(d) j(g,z)^{l/2} (even l) or chi(d) J(g,z)^l (odd l)
cplx automorphy_factor(const FourierExpansion& e, const GammaElement& g, cplx z);

// |F(gz) - factor F(z)| / max(|F(z)|, floor)
double modularity_defect(const FourierExpansion& e, const GammaElement& g, cplx z, const EvalOptions& opt = {},
                         double floor = 1e-12);

struct ModularitySample {
    GammaElement gamma;
    cplx z;
};

struct FitResult {
    std::vector<std::string> names;
    std::vector<cplx> values;
    double residual = 0;     // ||A x - b|| / ||b||
    double condition = 0;    // singular-value ratio of the column-scaled system
    std::size_t equations = 0;
};

// Least squares over the modularity equations, affine in the Unknown parts; writes Fitted values into e.
FitResult fit_constants(FourierExpansion& e, const std::vector<ModularitySample>& samples,
                        const EvalOptions& opt = {});
// Fits the Unknown parts of G from F(-1/(Nz)) (sqrt(N) z)^{-l/2} = G(z) at the given points.
FitResult fit_fricke(const FourierExpansion& F, FourierExpansion& G, const std::vector<cplx>& points,
                     const EvalOptions& opt = {});

// |Delta_{l/2} F - Lambda F| / |F| with five-point central differences per axis, step h
double laplacian_defect(const FourierExpansion& e, cplx z, double h, const EvalOptions& opt = {});

// |F(-1/(Nz)) (sqrt(N) z)^{-l/2} - G(z)| / max(|G(z)|, floor)
double fricke_defect(const FourierExpansion& F, const FourierExpansion& G, cplx z, const EvalOptions& opt = {},
                     double floor = 1e-12);

struct SampleDefect {
    GammaElement gamma;
    cplx z;
    double defect;
};

struct ModularityReport {
    std::vector<SampleDefect> samples;
    FitResult fit;
    long long n_max = 0;
    double max_tail = 0;
    double median() const;
};

// gammas with c != 0 paired with points from sample_point; gammas admitting no point are skipped
std::vector<ModularitySample> modularity_samples(const std::vector<GammaElement>& gammas, std::size_t per_gamma,
                                                 double y_min, std::uint64_t seed, bool skip_upper_triangular = true);

ModularityReport modularity_report(const FourierExpansion& e, const std::vector<ModularitySample>& samples,
                                   const EvalOptions& opt = {});

// -------- implementation of the sampler template --------

template <class Rng>
std::optional<cplx> sample_point(const GammaElement& g, double y_min, Rng& rng)
{
    std::uniform_real_distribution<double> U(0.0, 1.0);
    if (g.c == 0) return cplx(U(rng) - 0.5, y_min + U(rng));
    // z = -d/c + w with |c w| = rho; then Im gz = Im z / rho^2
    const double ac = std::abs(static_cast<double>(g.c));
    const double lo = ac * y_min, hi = 1 / (ac * y_min);
    if (lo > hi) return std::nullopt;
    const double rho = lo + (hi - lo) * U(rng);
    const double ylo = y_min * std::max(1.0, rho * rho), yhi = rho / ac;
    const double y = ylo + (yhi - ylo) * U(rng);
    double x = std::sqrt(std::max(0.0, rho * rho / (ac * ac) - y * y));
    if (U(rng) < 0.5) x = -x;
    return cplx(-static_cast<double>(g.d) / static_cast<double>(g.c) + x, y);
}

} // namespace qfz
