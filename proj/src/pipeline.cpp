#include "qfz/pipeline.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <tuple>

#include "qfz/errors.hpp"

namespace qfz {

FormKind default_kind(const FormProfile& pr, std::optional<int> ell)
{
    if (ell) return FormKind::Maass;
    return (pr.m - pr.p) % 2 == 0 ? FormKind::Holomorphic : FormKind::Maass;
}

int default_ell(const FormProfile& pr, std::optional<int> ell)
{
    if (ell) return *ell;
    return default_kind(pr, ell) == FormKind::Holomorphic ? pr.m : 2 * pr.p - pr.m;
}

MeasureSet compute_measures(const QuadraticForm& form, const FormProfile& pr, FormKind kind, long long n_max,
                            const MeasureParams& params)
{
    MeasureSet s;
    const QuadraticForm dual = pr.dual();
    s.plus = measure_table(form, 1, n_max, params);
    s.dual_plus = measure_table(dual, 1, n_max, params);
    if (kind == FormKind::Maass) {
        s.minus = measure_table(form, -1, n_max, params);
        s.dual_minus = measure_table(dual, -1, n_max, params);
    }
    return s;
}

std::vector<cplx> fricke_sample(long long N, std::size_t count, double y_min, std::uint64_t seed)
{
    const double rN = std::sqrt(static_cast<double>(N));
    std::vector<cplx> out;
    if (count == 0) return out;
    out.push_back(cplx(0, 1 / rN));
    // z = (rho / sqrt(N)) e^{i theta}: Im(-1/(Nz)) = Im z / rho^2
    const double lo = rN * y_min, hi = 1 / (rN * y_min);
    if (lo > hi) throw Error(Errc::BelowYMin, "no point has both Im z and Im(-1/(Nz)) above y_min");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    while (out.size() < count) {
        const double rho = lo + (hi - lo) * U(rng);
        const double ylo = y_min * std::max(1.0, rho * rho), yhi = rho / rN;
        const double y = ylo + (yhi - ylo) * U(rng);
        double x = std::sqrt(std::max(0.0, rho * rho / N - y * y));
        if (U(rng) < 0.5) x = -x;
        out.push_back(cplx(x, y));
    }
    return out;
}

std::pair<std::vector<ModularitySample>, std::vector<ModularitySample>>
split_samples(long long N, const PipelineParams& p)
{
    // Im z Im gz <= 1/c^2, so only |c| <= 1/y_min can contribute points
    const auto max_c = static_cast<long long>(std::floor(1 / p.eval.y_min));
    if (max_c < N) throw Error(Errc::BelowYMin, "no element with c != 0 admits points above y_min");
    const auto gammas = sample_gamma0(N, p.gammas, p.seed, 60, max_c);
    const auto all = modularity_samples(gammas, p.points_per_gamma, p.eval.y_min, p.seed + 1);
    std::pair<std::vector<ModularitySample>, std::vector<ModularitySample>> out;
    for (std::size_t i = 0; i < all.size(); ++i) (i % 2 ? out.second : out.first).push_back(all[i]);
    return out;
}

FormPair build_pair(const QuadraticForm& form, const PipelineParams& p)
{
    FormPair pair;
    pair.profile = validate(form);
    const auto& pr = pair.profile;
    pair.kind = default_kind(pr, p.ell);
    pair.ell = default_ell(pr, p.ell);
    pair.measures = compute_measures(form, pr, pair.kind, p.n_max, p.measures);
    const auto& ms = pair.measures;
    if (pair.kind == FormKind::Holomorphic) {
        pair.F = build_holomorphic(pr, ms.plus, p.n_max);
        pair.G = build_dual_holomorphic(pr, ms.dual_plus, p.n_max);
    } else {
        pair.F = build_maass(pr, pair.ell, ms.plus, ms.minus, p.n_max);
        pair.G = build_dual_maass(pr, pair.ell, ms.dual_plus, ms.dual_minus, p.n_max);
    }
    std::tie(pair.fit_samples, pair.check_samples) = split_samples(pr.N, p);
    pair.fit_F = fit_constants(pair.F, pair.fit_samples, p.eval);
    pair.fricke_points = fricke_sample(pr.N, p.fricke_points, p.eval.y_min, p.seed + 2);
    // the Fricke equations need three rows per unknown; extra points are drawn for the fit only
    const std::size_t unknowns = pair.kind == FormKind::Holomorphic ? 2 : 4;
    std::vector<cplx> fit_points = fricke_sample(pr.N, std::max(p.fricke_points, 3 * unknowns + 2),
                                                 p.eval.y_min, p.seed + 3);
    pair.fit_G = fit_fricke(pair.F, pair.G, fit_points, p.eval);
    return pair;
}

CoefficientSeries series_from_pair(const FormPair& pair)
{
    if (pair.kind != FormKind::Holomorphic)
        throw Error(Errc::ParityViolation, "the Hecke-type equation needs a holomorphic pair");
    if (!pair.F.growth.resolved()) throw Error(Errc::UnresolvedConstants, "a(0) has not been fitted");
    const FormProfile& pr = pair.profile;
    CoefficientSeries s = holomorphic_series(pr, pair.measures.plus, pair.measures.dual_plus, dual_scale(pr));
    const cplx scale = pair.F.scale_plus.value;
    for (auto& x : s.a) x *= scale;
    for (auto& x : s.b) x *= scale;
    s.a0 = pair.F.growth.value;
    s.b0 = b0_ratio(pr) * pair.F.growth.value;
    update_growth(s);
    return s;
}

cplx dual_scale(const FormProfile& pr) { return std::pow(static_cast<double>(pr.N), -pr.m / 2.0); }

cplx b0_ratio(const FormProfile& pr)
{
    const double sign = ((pr.m - pr.p) / 2) % 2 == 0 ? 1.0 : -1.0;
    return std::polar(1.0, -std::numbers::pi * pr.m / 4.0) * std::pow(double(pr.N), pr.m / 4.0) *
           std::pow(std::fabs(double(pr.D)), -0.5) * sign;
}

} // namespace qfz
