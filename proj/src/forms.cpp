#include "qfz/forms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "qfz/errors.hpp"
#include "qfz/special.hpp"

namespace qfz {

namespace {

constexpr double kPi = 3.14159265358979323846;
const cplx I(0, 1);

double rgamma(double x)
{
    if (x <= 0 && x == std::floor(x)) return 0;
    return 1 / boost::math::tgamma(x);
}

double abs_d(long long D) { return std::fabs(static_cast<double>(D)); }

void check_maass(const FormProfile& pr, int ell)
{
    if (pr.m % 2 == 0 && pr.p % 2 == 0)
        throw Error(Errc::ParityViolation, "Maass forms need m or p odd");
    if (mod(2LL * pr.p - pr.m - ell, 4) != 0)
        throw Error(Errc::ParityViolation, "need l = 2p - m (mod 4)");
}

void check_holomorphic(const FormProfile& pr)
{
    if ((pr.m - pr.p) % 2 != 0) {
        if (pr.p % 2 == 0) throw Error(Errc::ParityViolation, "m - p is odd but p is even: build from -P instead");
        throw Error(Errc::ParityViolation, "holomorphic forms need m - p even");
    }
}

FourierExpansion base(FormKind kind, const FormProfile& pr, int ell, FieldDisc field)
{
    FourierExpansion e;
    e.kind = kind;
    e.m = pr.m;
    e.ell = ell;
    e.N = pr.N;
    e.chi = KroneckerCharacter(field);
    e.lambda_param = pr.m / 4.0;
    if (kind == FormKind::Maass) e.eigenvalue = (pr.m - ell) * (4.0 - pr.m - ell) / 16.0;
    return e;
}

void check_y(cplx z, double y_min)
{
    if (z.imag() < y_min)
        throw Error(Errc::BelowYMin, "Im z = " + std::to_string(z.imag()) + " below y_min " + std::to_string(y_min));
}

cplx e_of(double x) { return std::polar(1.0, 2 * kPi * x); }

cplx total(const FourierExpansion& e, const PartValues& v)
{
    if (!e.growth.resolved() || (e.kind == FormKind::Maass && !e.decay.resolved()) || !e.scale_plus.resolved() ||
        (e.kind == FormKind::Maass && !e.scale_minus.resolved()))
        throw Error(Errc::UnresolvedConstants, "constants of the expansion are not resolved");
    cplx s = e.growth.value * v.growth + e.scale_plus.value * v.plus;
    if (e.kind == FormKind::Maass) s += e.decay.value * v.decay + e.scale_minus.value * v.minus;
    return s;
}

// unknown parts of an expansion, in a fixed order
struct Unknown {
    std::string name;
    ConstTerm FourierExpansion::*slot;
    cplx PartValues::*part;
};

std::vector<Unknown> unknowns_of(const FourierExpansion& e)
{
    std::vector<Unknown> all = {{"growth", &FourierExpansion::growth, &PartValues::growth},
                                {"decay", &FourierExpansion::decay, &PartValues::decay},
                                {"scale_plus", &FourierExpansion::scale_plus, &PartValues::plus},
                                {"scale_minus", &FourierExpansion::scale_minus, &PartValues::minus}};
    if (e.kind == FormKind::Holomorphic) all = {all[0], all[2]};
    std::vector<Unknown> out;
    for (const auto& u : all)
        if (!(e.*(u.slot)).resolved()) out.push_back(u);
    return out;
}

cplx known_part(const FourierExpansion& e, const PartValues& v)
{
    cplx s = 0;
    auto add = [&](const ConstTerm& t, cplx x) {
        if (t.resolved()) s += t.value * x;
    };
    add(e.growth, v.growth);
    add(e.scale_plus, v.plus);
    if (e.kind == FormKind::Maass) {
        add(e.decay, v.decay);
        add(e.scale_minus, v.minus);
    }
    return s;
}

FitResult solve(const Eigen::MatrixXcd& A, const Eigen::VectorXcd& b, const std::vector<Unknown>& unk,
                FourierExpansion& e)
{
    FitResult r;
    r.equations = static_cast<std::size_t>(A.rows());
    for (const auto& u : unk) r.names.push_back(u.name);
    if (unk.empty()) {
        r.residual = 0;
        return r;
    }
    if (A.rows() < 3 * A.cols())
        throw Error(Errc::IllConditioned, "need at least three equations per unknown");
    Eigen::VectorXd scale = A.colwise().norm().transpose();
    for (Eigen::Index j = 0; j < scale.size(); ++j)
        if (scale(j) == 0) throw Error(Errc::IllConditioned, "unknown '" + unk[j].name + "' is not determined");
    const Eigen::MatrixXcd As = A * scale.cwiseInverse().asDiagonal();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(As, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    r.condition = sv(0) / sv(sv.size() - 1);
    if (!(r.condition < 1e12)) throw Error(Errc::IllConditioned, "condition number " + std::to_string(r.condition));
    const Eigen::VectorXcd x = scale.cwiseInverse().asDiagonal() * svd.solve(b);
    const double bn = b.norm();
    r.residual = bn > 0 ? (A * x - b).norm() / bn : (A * x).norm();
    for (std::size_t j = 0; j < unk.size(); ++j) {
        e.*(unk[j].slot) = {ConstState::Fitted, x(static_cast<Eigen::Index>(j))};
        r.values.push_back(x(static_cast<Eigen::Index>(j)));
    }
    return r;
}

} // namespace

const char* to_string(FormKind k) { return k == FormKind::Maass ? "maass" : "holomorphic"; }

const char* to_string(ConstState s)
{
    switch (s) {
    case ConstState::Unknown: return "unknown";
    case ConstState::Known: return "known";
    case ConstState::Fitted: return "fitted";
    }
    return "?";
}

FourierExpansion build_maass(const FormProfile& pr, int ell, const MeasureTable& plus, const MeasureTable& minus,
                             long long n_max)
{
    check_maass(pr, ell);
    if (ell % 2 != 0 && pr.N % 4 != 0) throw Error(Errc::ParityViolation, "odd l needs 4 | N");
    FourierExpansion e = base(FormKind::Maass, pr, ell, pr.K);
    e.scale_minus = {};
    const double sign = mod(2LL * pr.p - pr.m - ell, 8) == 0 ? 1.0 : -1.0;
    const double pref = sign * std::pow(abs_d(pr.D), -0.5) * std::pow(kPi, pr.m / 4.0);
    e.plus.assign(n_max + 1, 0.0);
    e.minus.assign(n_max + 1, 0.0);
    for (long long n = 1; n <= n_max; ++n) {
        const double w = pref * std::pow(double(n), -pr.m / 4.0);
        e.plus[n] = w * plus.value(n) * rgamma((pr.m + ell) / 4.0);
        e.minus[n] = w * minus.value(n) * rgamma((pr.m - ell) / 4.0);
    }
    return e;
}

FourierExpansion build_holomorphic(const FormProfile& pr, const MeasureTable& plus, long long n_max)
{
    check_holomorphic(pr);
    FourierExpansion e = base(FormKind::Holomorphic, pr, pr.m, pr.K);
    e.decay = ConstTerm::known(0.0);
    e.plus.assign(n_max + 1, 0.0);
    for (long long n = 1; n <= n_max; ++n) e.plus[n] = std::pow(abs_d(pr.D), -0.5) * plus.value(n);
    return e;
}

FourierExpansion build_dual_maass(const FormProfile& pr, int ell, const MeasureTable& dual_plus,
                                  const MeasureTable& dual_minus, long long n_max)
{
    check_maass(pr, ell);
    FourierExpansion e = base(FormKind::Maass, pr, ell, pr.K_N);
    e.scale_plus = {};
    e.scale_minus = {};
    const cplx pref = std::polar(1.0, -kPi * ell / 4.0) * std::pow(kPi, pr.m / 4.0);
    e.plus.assign(n_max + 1, 0.0);
    e.minus.assign(n_max + 1, 0.0);
    for (long long n = 1; n <= n_max; ++n) {
        const cplx w = pref * std::pow(double(n) / pr.N, -pr.m / 4.0);
        e.plus[n] = w * dual_plus.value(n) * rgamma((pr.m + ell) / 4.0);
        e.minus[n] = w * dual_minus.value(n) * rgamma((pr.m - ell) / 4.0);
    }
    return e;
}

FourierExpansion build_dual_holomorphic(const FormProfile& pr, const MeasureTable& dual_plus, long long n_max)
{
    check_holomorphic(pr);
    FourierExpansion e = base(FormKind::Holomorphic, pr, pr.m, pr.K_N);
    e.decay = ConstTerm::known(0.0);
    e.scale_plus = {};
    const cplx pref = std::polar(1.0, kPi * (pr.m - 2.0 * pr.p) / 4.0) * std::pow(double(pr.N), pr.m / 4.0);
    e.plus.assign(n_max + 1, 0.0);
    for (long long n = 1; n <= n_max; ++n) e.plus[n] = pref * dual_plus.value(n);
    return e;
}

FourierExpansion single_term(const FourierExpansion& e, long long n)
{
    if (n == 0 || std::llabs(n) > e.n_max()) throw Error(Errc::InvalidArgument, "term index out of range");
    FourierExpansion t = e;
    std::fill(t.plus.begin(), t.plus.end(), 0.0);
    std::fill(t.minus.begin(), t.minus.end(), 0.0);
    if (n > 0)
        t.plus[n] = e.plus[n];
    else
        t.minus[-n] = e.minus[-n];
    t.growth = t.decay = ConstTerm::known(0.0);
    t.scale_plus = t.scale_minus = ConstTerm::known(1.0);
    return t;
}

FourierExpansion single_constant(const FourierExpansion& e, bool growth)
{
    FourierExpansion t = e;
    std::fill(t.plus.begin(), t.plus.end(), 0.0);
    std::fill(t.minus.begin(), t.minus.end(), 0.0);
    t.growth = ConstTerm::known(growth ? 1.0 : 0.0);
    t.decay = ConstTerm::known(growth ? 0.0 : 1.0);
    t.scale_plus = t.scale_minus = ConstTerm::known(1.0);
    return t;
}

PartValues evaluate_parts(const FourierExpansion& e, cplx z, const EvalOptions& opt)
{
    check_y(z, opt.y_min);
    const double x = z.real(), y = z.imag();
    PartValues v;
    const long long n_max = e.n_max();
    const double q = std::exp(-2 * kPi * y);
    if (e.kind == FormKind::Holomorphic) {
        v.growth = 1.0;
        const cplx step = std::exp(2 * kPi * I * z);
        cplx qn = 1.0;
        for (long long n = 1; n <= n_max; ++n) {
            qn *= step;
            v.plus += e.plus[n] * qn;
        }
        if (n_max > 0) v.tail = std::abs(e.plus[n_max]) * std::pow(q, double(n_max)) * q / (1 - q);
        return v;
    }
    v.growth = std::pow(y, e.growth_exponent());
    v.decay = std::pow(y, e.decay_exponent());
    PrecisionPolicy<double> pol;
    pol.target = opt.target;
    const double mu = e.m / 4.0 - 0.5, kappa = e.ell / 4.0, ypow = std::pow(y, -e.ell / 4.0);
    double last = 0;
    for (long long n = 1; n <= n_max; ++n) {
        const double arg = 4 * kPi * n * y;
        const cplx en = e_of(n * x);
        if (e.plus[n] != cplx(0)) {
            const cplx t = e.plus[n] * ypow * whittaker_w<double>(kappa, mu, arg, pol) * en;
            v.plus += t;
            if (n == n_max) last = std::max(last, std::abs(t));
        }
        if (e.minus[n] != cplx(0)) {
            const cplx t = e.minus[n] * ypow * whittaker_w<double>(-kappa, mu, arg, pol) * std::conj(en);
            v.minus += t;
            if (n == n_max) last = std::max(last, std::abs(t));
        }
    }
    v.tail = last * q / (1 - q);
    return v;
}

Evaluation evaluate(const FourierExpansion& e, cplx z, const EvalOptions& opt)
{
    const PartValues v = evaluate_parts(e, z, opt);
    double scale = std::abs(e.scale_plus.value);
    if (e.kind == FormKind::Maass) scale = std::max(scale, std::abs(e.scale_minus.value));
    return {total(e, v), v.tail * scale};
}

GammaElement GammaElement::operator*(const GammaElement& o) const
{
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
}

long long GammaElement::max_entry() const
{
    return std::max({std::llabs(a), std::llabs(b), std::llabs(c), std::llabs(d)});
}

std::string to_string(const GammaElement& g)
{
    std::ostringstream os;
    os << "[[" << g.a << "," << g.b << "],[" << g.c << "," << g.d << "]]";
    return os.str();
}

std::vector<GammaElement> sample_gamma0(long long N, std::size_t count, std::uint64_t seed, long long max_entry,
                                        long long max_c)
{
    if (N < 1) throw Error(Errc::InvalidArgument, "N must be positive");
    const GammaElement T{1, 1, 0, 1}, Ti{1, -1, 0, 1}, U{1, 0, N, 1}, Ui{1, 0, -N, 1}, minus{-1, 0, 0, -1};
    const GammaElement gens[] = {T, Ti, U, Ui, minus};
    std::vector<GammaElement> out = {T, U, minus};
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> len(2, 7), pick(0, 4);
    std::size_t attempts = 0;
    while (out.size() < count && attempts < 1000 * count) {
        ++attempts;
        GammaElement g;
        const int L = len(rng);
        for (int i = 0; i < L; ++i) g = g * gens[pick(rng)];
        if (g.max_entry() > max_entry) continue;
        if (max_c > 0 && std::llabs(g.c) > max_c) continue;
        if (std::find(out.begin(), out.end(), g) != out.end()) continue;
        out.push_back(g);
    }
    if (out.size() > count) out.resize(count);
    return out;
}

cplx automorphy_factor(const FourierExpansion& e, const GammaElement& g, cplx z)
{
    const double chi = e.chi(g.d);
    if (e.ell % 2 != 0) return chi * std::pow(theta_multiplier(g.a, g.b, g.c, g.d, z), e.ell);
    return chi * std::pow(double(g.c) * z + double(g.d), e.ell / 2);
}

double modularity_defect(const FourierExpansion& e, const GammaElement& g, cplx z, const EvalOptions& opt,
                         double floor)
{
    if (!g.in_gamma0(e.N)) throw Error(Errc::InvalidArgument, to_string(g) + " is not in Gamma0(N)");
    const cplx gz = g.act(z);
    check_y(z, opt.y_min);
    check_y(gz, opt.y_min);
    const cplx fz = evaluate(e, z, opt).value;
    const cplx fgz = evaluate(e, gz, opt).value;
    return std::abs(fgz - automorphy_factor(e, g, z) * fz) / std::max(std::abs(fz), floor);
}

FitResult fit_constants(FourierExpansion& e, const std::vector<ModularitySample>& samples, const EvalOptions& opt)
{
    const auto unk = unknowns_of(e);
    const auto rows = static_cast<Eigen::Index>(samples.size());
    Eigen::MatrixXcd A(rows, static_cast<Eigen::Index>(unk.size()));
    Eigen::VectorXcd b(rows);
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
    for (Eigen::Index i = 0; i < rows; ++i) {
        try {
            const auto& s = samples[i];
            const cplx gz = s.gamma.act(s.z);
            const cplx mu = automorphy_factor(e, s.gamma, s.z);
            const PartValues pz = evaluate_parts(e, s.z, opt), pg = evaluate_parts(e, gz, opt);
            for (std::size_t j = 0; j < unk.size(); ++j)
                A(i, static_cast<Eigen::Index>(j)) = pg.*(unk[j].part) - mu * (pz.*(unk[j].part));
            b(i) = -(known_part(e, pg) - mu * known_part(e, pz));
        } catch (...) {
#pragma omp critical(qfz_fit_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    if (!unk.empty() && b.norm() == 0)
        throw Error(Errc::IllConditioned, "homogeneous system: fix at least one scale");
    return solve(A, b, unk, e);
}

namespace {

cplx fricke_target(const FourierExpansion& F, cplx z, const EvalOptions& opt)
{
    const cplx w = -1.0 / (double(F.N) * z);
    return evaluate(F, w, opt).value * std::pow(std::sqrt(double(F.N)) * z, -F.ell / 2.0);
}

} // namespace

FitResult fit_fricke(const FourierExpansion& F, FourierExpansion& G, const std::vector<cplx>& points,
                     const EvalOptions& opt)
{
    const auto unk = unknowns_of(G);
    const auto rows = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXcd A(rows, static_cast<Eigen::Index>(unk.size()));
    Eigen::VectorXcd b(rows);
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
    for (Eigen::Index i = 0; i < rows; ++i) {
        try {
            const PartValues pg = evaluate_parts(G, points[i], opt);
            for (std::size_t j = 0; j < unk.size(); ++j) A(i, static_cast<Eigen::Index>(j)) = pg.*(unk[j].part);
            b(i) = fricke_target(F, points[i], opt) - known_part(G, pg);
        } catch (...) {
#pragma omp critical(qfz_fit_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return solve(A, b, unk, G);
}

double laplacian_defect(const FourierExpansion& e, cplx z, double h, const EvalOptions& opt)
{
    if (e.kind != FormKind::Maass) throw Error(Errc::InvalidArgument, "the Laplacian check is for Maass forms");
    check_y(cplx(0, z.imag() - 2 * h), opt.y_min);
    auto f = [&](double dx, double dy) { return evaluate(e, z + cplx(dx, dy), opt).value; };
    // five-point central stencils per axis
    const cplx f0 = f(0, 0);
    const cplx xp1 = f(h, 0), xm1 = f(-h, 0), xp2 = f(2 * h, 0), xm2 = f(-2 * h, 0);
    const cplx yp1 = f(0, h), ym1 = f(0, -h), yp2 = f(0, 2 * h), ym2 = f(0, -2 * h);
    auto d1 = [&](cplx p1, cplx m1, cplx p2, cplx m2) { return (8.0 * (p1 - m1) - (p2 - m2)) / (12 * h); };
    auto d2 = [&](cplx p1, cplx m1, cplx p2, cplx m2) {
        return (16.0 * (p1 + m1) - (p2 + m2) - 30.0 * f0) / (12 * h * h);
    };
    const cplx fx = d1(xp1, xm1, xp2, xm2), fy = d1(yp1, ym1, yp2, ym2);
    const cplx fxx = d2(xp1, xm1, xp2, xm2), fyy = d2(yp1, ym1, yp2, ym2);
    const double y = z.imag();
    const cplx lap = -y * y * (fxx + fyy) + I * double(e.ell) * y / 2.0 * (fx + I * fy);
    return std::abs(lap - e.eigenvalue * f0) / std::abs(f0);
}

double fricke_defect(const FourierExpansion& F, const FourierExpansion& G, cplx z, const EvalOptions& opt,
                     double floor)
{
    const cplx g = evaluate(G, z, opt).value;
    return std::abs(fricke_target(F, z, opt) - g) / std::max(std::abs(g), floor);
}

double ModularityReport::median() const
{
    if (samples.empty()) return 0;
    std::vector<double> d;
    for (const auto& s : samples) d.push_back(s.defect);
    std::sort(d.begin(), d.end());
    const std::size_t k = d.size() / 2;
    return d.size() % 2 ? d[k] : 0.5 * (d[k - 1] + d[k]);
}

std::vector<ModularitySample> modularity_samples(const std::vector<GammaElement>& gammas, std::size_t per_gamma,
                                                 double y_min, std::uint64_t seed, bool skip_upper_triangular)
{
    std::mt19937_64 rng(seed);
    std::vector<ModularitySample> out;
    for (const auto& g : gammas) {
        if (skip_upper_triangular && g.c == 0) continue;
        for (std::size_t i = 0; i < per_gamma; ++i) {
            auto z = sample_point(g, y_min, rng);
            if (!z) break;
            out.push_back({g, *z});
        }
    }
    return out;
}

ModularityReport modularity_report(const FourierExpansion& e, const std::vector<ModularitySample>& samples,
                                   const EvalOptions& opt)
{
    ModularityReport r;
    r.n_max = e.n_max();
    r.samples.resize(samples.size());
    std::vector<double> tails(samples.size(), 0);
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t i = 0; i < samples.size(); ++i) {
        try {
            const auto& s = samples[i];
            r.samples[i] = {s.gamma, s.z, modularity_defect(e, s.gamma, s.z, opt)};
            tails[i] = std::max(evaluate(e, s.z, opt).tail, evaluate(e, s.gamma.act(s.z), opt).tail);
        } catch (...) {
#pragma omp critical(qfz_report_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    for (double t : tails) r.max_tail = std::max(r.max_tail, t);
    return r;
}

} // namespace qfz
