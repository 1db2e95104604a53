#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qfz/forms.hpp"
#include "qfz/localdensity.hpp"
#include "qfz/series.hpp"

namespace qfz {

struct PipelineParams {
    long long n_max = 40;
    MeasureParams measures;
    std::optional<int> ell;   // set: Maass of weight l/2; unset: holomorphic when m - p is even
    std::size_t gammas = 24;
    std::size_t points_per_gamma = 3;
    std::size_t fricke_points = 10;
    std::uint64_t seed = 1;
    EvalOptions eval{0.2, 1e-12};
};

struct MeasureSet {
    MeasureTable plus, minus, dual_plus, dual_minus;   // minus tables are empty for holomorphic builds
};

// F, G with fitted constants. F is fitted on `fit_samples`; G's constants and scales come from
// the Fricke relation at `fricke_points`.
struct FormPair {
    FormProfile profile;
    FormKind kind = FormKind::Holomorphic;
    int ell = 0;
    MeasureSet measures;
    FourierExpansion F, G;
    FitResult fit_F, fit_G;
    std::vector<ModularitySample> fit_samples, check_samples;
    std::vector<cplx> fricke_points;
};

FormKind default_kind(const FormProfile& pr, std::optional<int> ell);
int default_ell(const FormProfile& pr, std::optional<int> ell);

MeasureSet compute_measures(const QuadraticForm& form, const FormProfile& pr, FormKind kind, long long n_max,
                            const MeasureParams& params);

// points z with Im z and Im(-1/(Nz)) >= y_min; the first is the fixed point i/sqrt(N)
std::vector<cplx> fricke_sample(long long N, std::size_t count, double y_min, std::uint64_t seed);

// modularity samples split alternately into fit and check halves
std::pair<std::vector<ModularitySample>, std::vector<ModularitySample>>
split_samples(long long N, const PipelineParams& p);

FormPair build_pair(const QuadraticForm& form, const PipelineParams& p);

// relative scale of the dual measures against the direct ones in the Hecke-type equation: N^{-m/2}
cplx dual_scale(const FormProfile& pr);
// b(0)/a(0) = i^{-m/2} N^{m/4} |D|^{-1/2} (-1)^{(m-p)/2}
cplx b0_ratio(const FormProfile& pr);

// L(M;s), L(M*;s) for a holomorphic pair: b carries dual_scale, a0 is the fitted constant of F and
// b0 = b0_ratio * a0. G's own Fricke-fitted constants are not used.
CoefficientSeries series_from_pair(const FormPair& pair);

} // namespace qfz
