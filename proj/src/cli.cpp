#include "qfz/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <json.hpp>
#include <omp.h>

#include "qfz/bruhat.hpp"
#include "qfz/errors.hpp"
#include "qfz/pipeline.hpp"

namespace qfz {

using json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string trim(const std::string& s)
{
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void bad(const std::string& what) { throw Error(Errc::InvalidArgument, what); }

long long to_ll(const std::string& key, const std::string& v)
{
    try {
        std::size_t pos = 0;
        const long long x = std::stoll(v, &pos);
        if (pos != v.size()) bad(key + ": not an integer: " + v);
        return x;
    } catch (const std::logic_error&) {
        bad(key + ": not an integer: " + v);
    }
}

double to_d(const std::string& key, const std::string& v)
{
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) bad(key + ": not a number: " + v);
        return x;
    } catch (const std::logic_error&) {
        bad(key + ": not a number: " + v);
    }
}

std::size_t to_count(const std::string& key, const std::string& v)
{
    const long long x = to_ll(key, v);
    if (x < 0) bad(key + " must be non-negative");
    return static_cast<std::size_t>(x);
}

std::vector<long long> to_list(const std::string& key, const std::string& v)
{
    std::vector<long long> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(to_ll(key, item));
    }
    return out;
}

json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

json matrix_json(const IntMatrix& g)
{
    json rows = json::array();
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < g.cols(); ++j) row.push_back(g(i, j));
        rows.push_back(row);
    }
    return rows;
}

json field_json(const FieldDisc& f) { return {{"disc", f.disc}, {"name", to_string(f)}}; }

std::string hex64(std::uint64_t h)
{
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

class Csv {
public:
    Csv(std::string task, std::vector<std::string> columns) : task_(std::move(task)), columns_(std::move(columns)) {}
    template <class... T>
    void row(const T&... xs)
    {
        std::ostringstream os;
        os << std::setprecision(17);
        bool first = true;
        ((os << (first ? "" : ",") << xs, first = false), ...);
        rows_.push_back(os.str());
    }
    bool empty() const { return rows_.empty(); }
    void write(const std::filesystem::path& path) const
    {
        std::ofstream out(path);
        out << "# " << kCsvSchema << " task=" << task_ << '\n';
        for (std::size_t i = 0; i < columns_.size(); ++i) out << (i ? "," : "") << columns_[i];
        out << '\n';
        for (const auto& r : rows_) out << r << '\n';
    }

private:
    std::string task_;
    std::vector<std::string> columns_;
    std::vector<std::string> rows_;
};

struct TaskResult {
    json results = json::object();
    std::optional<bool> pass;
    std::optional<Csv> csv;
};

std::vector<int> signs_of(const JobConfig& c)
{
    if (c.signs == "plus") return {1};
    if (c.signs == "minus") return {-1};
    if (c.signs == "both") return {1, -1};
    bad("signs must be plus, minus or both");
}

MeasureParams measure_params(const JobConfig& c, DensityCache* cache)
{
    MeasureParams mp;
    mp.prime_bound = c.prime_bound;
    mp.tail_bound = c.tail_bound;
    mp.density.k_max = c.k_max;
    mp.density.budget = c.budget;
    mp.density.cache = cache;
    return mp;
}

PipelineParams pipeline_params(const JobConfig& c, DensityCache* cache)
{
    PipelineParams p;
    p.n_max = c.n_max;
    p.measures = measure_params(c, cache);
    p.ell = c.ell;
    p.gammas = c.gammas;
    p.points_per_gamma = c.points_per_gamma;
    p.fricke_points = c.fricke_points;
    p.seed = c.seed;
    p.eval.y_min = c.y_min;
    return p;
}

json fit_json(const FitResult& f)
{
    json j = {{"residual", f.residual}, {"condition", f.condition}, {"equations", f.equations}};
    json v = json::object();
    for (std::size_t i = 0; i < f.names.size(); ++i) v[f.names[i]] = cjson(f.values[i]);
    j["values"] = v;
    return j;
}

json expansion_json(const FourierExpansion& e)
{
    auto ct = [](const ConstTerm& t) { return json{{"state", to_string(t.state)}, {"value", cjson(t.value)}}; };
    json j = {{"kind", to_string(e.kind)}, {"ell", e.ell},          {"weight", e.weight()},
              {"N", e.N},                  {"character", e.chi.disc()}, {"lambda", e.lambda_param}};
    if (e.kind == FormKind::Maass) j["eigenvalue"] = e.eigenvalue;
    j["const_growth"] = ct(e.growth);
    if (e.kind == FormKind::Maass) j["const_decay"] = ct(e.decay);
    j["scale_plus"] = ct(e.scale_plus);
    if (e.kind == FormKind::Maass) j["scale_minus"] = ct(e.scale_minus);
    j["n_max"] = e.n_max();
    return j;
}

// ---- tasks ----

TaskResult task_analyze(const JobConfig& c, const QuadraticForm& form, const FormProfile& pr)
{
    TaskResult r;
    const auto [pos, neg] = signature(form);
    r.results = {{"m", pr.m},
                 {"D", pr.D},
                 {"signature", json::array({pos, neg})},
                 {"N", pr.N},
                 {"K", field_json(pr.K)},
                 {"K_N", field_json(pr.K_N)},
                 {"dual_gram2", matrix_json(pr.dual_gram2)},
                 {"form_hash", hex64(form.hash())},
                 {"holomorphic_case", (pr.m - pr.p) % 2 == 0}};
    (void)c;
    return r;
}

TaskResult task_densities(const JobConfig& c, const QuadraticForm& form, DensityCache* cache)
{
    TaskResult r;
    Csv csv("densities", {"n", "p", "k", "count", "alpha", "alpha_float"});
    json per_sign = json::array();
    std::size_t records = 0;
    int k_top = 0;
    for (int sign : signs_of(c)) {
        const MeasureTable t = measure_table(form, sign, c.n_max, measure_params(c, cache));
        for (const auto& e : t.entries)
            for (const auto& d : e.records) {
                csv.row(d.n, d.p, d.k, d.count, d.alpha, d.alpha.convert_to<double>());
                ++records;
                k_top = std::max(k_top, d.k);
            }
        per_sign.push_back({{"sign", sign}, {"n_max", c.n_max}, {"prime_bound", c.prime_bound}});
    }
    r.results = {{"tables", per_sign}, {"records", records}, {"max_stable_k", k_top}};
    r.csv = std::move(csv);
    return r;
}

TaskResult task_measures(const JobConfig& c, const QuadraticForm& form, DensityCache* cache)
{
    TaskResult r;
    Csv csv("measures", {"n", "measure"});
    json tables = json::array();
    for (int sign : signs_of(c)) {
        const MeasureTable t = measure_table(form, sign, c.n_max, measure_params(c, cache));
        json vals = json::array();
        for (const auto& e : t.entries) {
            vals.push_back(e.value);
            csv.row(sign * e.n, e.value);
        }
        tables.push_back({{"sign", sign}, {"normalization", MeasureTable::normalization}, {"values", vals}});
    }
    r.results = {{"prime_bound", c.prime_bound}, {"tail_bound", c.tail_bound}, {"tables", tables}};
    r.csv = std::move(csv);
    return r;
}

TaskResult task_build(const JobConfig& c, const QuadraticForm& form, DensityCache* cache)
{
    TaskResult r;
    const FormPair pair = build_pair(form, pipeline_params(c, cache));
    Csv csv("build", {"side", "n", "re", "im"});
    for (const auto* e : {&pair.F, &pair.G}) {
        const char* side = e == &pair.F ? "F" : "G";
        for (long long n = 1; n <= e->n_max(); ++n) {
            csv.row(side, n, e->plus[n].real(), e->plus[n].imag());
            if (e->kind == FormKind::Maass) csv.row(side, -n, e->minus[n].real(), e->minus[n].imag());
        }
    }
    r.results = {{"F", expansion_json(pair.F)},
                 {"G", expansion_json(pair.G)},
                 {"fit_F", fit_json(pair.fit_F)},
                 {"fit_G", fit_json(pair.fit_G)}};
    r.csv = std::move(csv);
    return r;
}

FourierExpansion fresh_F(const FormPair& pair)
{
    const long long n_max = pair.F.n_max();
    if (pair.kind == FormKind::Holomorphic) return build_holomorphic(pair.profile, pair.measures.plus, n_max);
    return build_maass(pair.profile, pair.ell, pair.measures.plus, pair.measures.minus, n_max);
}

double relative_spread(const FitResult& a, const FitResult& b)
{
    double worst = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        worst = std::max(worst, std::abs(a.values[i] - b.values[i]) / std::abs(a.values[i]));
    return worst;
}

json check(double value, double threshold, bool below = true)
{
    return {{"value", value}, {"threshold", threshold}, {"pass", below ? value < threshold : value > threshold}};
}

bool all_pass(const json& checks)
{
    for (const auto& [k, v] : checks.items())
        if (!v["pass"].get<bool>()) return false;
    return true;
}

TaskResult task_verify(const JobConfig& c, const QuadraticForm& form, DensityCache* cache)
{
    TaskResult r;
    const PipelineParams pp = pipeline_params(c, cache);
    const FormPair pair = build_pair(form, pp);
    const double tol = c.tolerance ? *c.tolerance : (pair.kind == FormKind::Holomorphic ? 5e-2 : 1e-1);

    const ModularityReport repF = modularity_report(pair.F, pair.check_samples, pp.eval);
    const ModularityReport repG = modularity_report(pair.G, pair.check_samples, pp.eval);
    Csv csv("verify", {"check", "gamma", "z_re", "z_im", "defect"});
    for (const auto* rep : {&repF, &repG})
        for (const auto& s : rep->samples)
            csv.row(rep == &repF ? "modularity_F" : "modularity_G", to_string(s.gamma), s.z.real(), s.z.imag(),
                    s.defect);
    double fricke_max = 0;
    json fricke = json::array();
    for (const cplx z : pair.fricke_points) {
        const double d = fricke_defect(pair.F, pair.G, z, pp.eval);
        fricke_max = std::max(fricke_max, d);
        fricke.push_back({{"z", cjson(z)}, {"defect", d}});
        csv.row("fricke", "", z.real(), z.imag(), d);
    }

    // the same constants refitted on the held-out half
    FourierExpansion F2 = fresh_F(pair);
    const FitResult refit = fit_constants(F2, pair.check_samples, pp.eval);
    const double spread = relative_spread(pair.fit_F, refit);

    FourierExpansion Fp = fresh_F(pair);
    Fp.plus[1] *= 1 + c.perturbation;
    const FitResult fit_p = fit_constants(Fp, pair.fit_samples, pp.eval);
    const double sensitivity = fit_p.residual / std::max(pair.fit_F.residual, 1e-300);

    json checks = {{"median_modularity_F", check(repF.median(), tol)},
                   {"median_modularity_G", check(repG.median(), tol)},
                   {"max_fricke", check(fricke_max, tol)},
                   {"constant_stability", check(spread, 1e-3)},
                   {"perturbation_ratio", check(sensitivity, 10, false)}};

    json trend = nullptr;
    if (c.trend_prime_bound > 0) {
        PipelineParams low = pp;
        low.measures.prime_bound = c.trend_prime_bound;
        const FormPair pair_low = build_pair(form, low);
        const double m_low = modularity_report(pair_low.F, pair_low.check_samples, pp.eval).median();
        trend = {{"prime_bound", c.trend_prime_bound}, {"median_F", m_low}};
        checks["prime_bound_trend"] = check(m_low, repF.median(), false);
    }

    r.results = {{"kind", to_string(pair.kind)},
                 {"F", expansion_json(pair.F)},
                 {"G", expansion_json(pair.G)},
                 {"fit_F", fit_json(pair.fit_F)},
                 {"refit_F", fit_json(refit)},
                 {"fit_G", fit_json(pair.fit_G)},
                 {"fit_samples", pair.fit_samples.size()},
                 {"check_samples", pair.check_samples.size()},
                 {"median_F", repF.median()},
                 {"median_G", repG.median()},
                 {"max_tail_F", repF.max_tail},
                 {"fricke", fricke},
                 {"perturbed_residual", fit_p.residual},
                 {"trend", trend},
                 {"checks", checks}};
    r.pass = all_pass(checks);
    r.csv = std::move(csv);
    return r;
}

std::vector<cplx> fe_points(const JobConfig& c, int m)
{
    std::vector<cplx> s;
    for (std::size_t j = 0; j < c.fe_points; ++j) s.push_back(cplx(m / 4.0, 0.5 + double(j)));
    return s;
}

TaskResult task_fe_check(const JobConfig& c, const QuadraticForm& form, DensityCache* cache)
{
    TaskResult r;
    const PipelineParams pp = pipeline_params(c, cache);
    const FormPair pair = build_pair(form, pp);
    const FormProfile& pr = pair.profile;
    const CoefficientSeries series = series_from_pair(pair);
    const SplitData d = untwisted_data(series);
    const auto points = fe_points(c, pr.m);
    Csv csv("fe-check", {"check", "r", "psi", "s_re", "s_im", "defect", "t0_defect"});

    double worst_t0 = 0, worst_fe = 0;
    json untwisted = json::array();
    for (const cplx s : points) {
        const double dt = t0_defect(d, s, c.t0, c.t0_alt), df = two_sided_defect(d, s, c.t0);
        worst_t0 = std::max(worst_t0, dt);
        worst_fe = std::max(worst_fe, df);
        untwisted.push_back({{"s", cjson(s)}, {"lambda", cjson(lambda_completed(series, s, c.t0))},
                             {"t0_defect", dt}, {"fe_defect", df}});
        csv.row("untwisted", 1, 0, s.real(), s.imag(), df, dt);
    }

    double worst_tw = 0;
    json twisted = json::array();
    for (long long mod_r : c.twist_moduli) {
        if (pr.N % mod_r == 0) {
            twisted.push_back({{"r", mod_r}, {"skipped", "r divides N"}});
            continue;
        }
        for (const auto& psi : enumerate_characters(mod_r)) {
            if (psi.principal()) continue;
            json rows = json::array();
            TwistVariant variant = twist_variant(pr.m, psi);
            cplx constant = 0;
            for (const cplx s : points) {
                const TwistedResult t = twisted_lambda(series, pr, psi, s, c.t0);
                constant = t.constant;
                worst_tw = std::max({worst_tw, t.defect, t.t0_defect});
                rows.push_back({{"s", cjson(s)}, {"lhs", cjson(t.lhs)}, {"rhs", cjson(t.rhs)},
                                {"defect", t.defect}, {"t0_defect", t.t0_defect}});
                csv.row("twisted", mod_r, psi.index(), s.real(), s.imag(), t.defect, t.t0_defect);
            }
            twisted.push_back({{"r", mod_r}, {"psi_index", psi.index()}, {"variant", to_string(variant)},
                               {"constant", cjson(constant)}, {"points", rows}});
        }
    }

    CoefficientSeries perturbed = series;
    perturbed.a[1] *= 1 + c.perturbation;
    update_growth(perturbed);
    const SplitData dp = untwisted_data(perturbed);
    double least_perturbed = std::numeric_limits<double>::infinity();
    for (const cplx s : points) least_perturbed = std::min(least_perturbed, two_sided_defect(dp, s, c.t0));

    json checks = {{"t0_invariance", check(worst_t0, c.fe_tolerance)},
                   {"functional_equation", check(worst_fe, c.fe_tolerance)},
                   {"twisted", check(worst_tw, c.twist_tolerance)},
                   {"perturbed_defect", check(least_perturbed, 1e-2, false)}};
    r.results = {{"m", pr.m},
                 {"N", pr.N},
                 {"a0", cjson(*series.a0)},
                 {"b0", cjson(*series.b0)},
                 {"dual_scale", cjson(dual_scale(pr))},
                 {"fricke_dual_scale", cjson(pair.G.scale_plus.value)},
                 {"fricke_b0", cjson(pair.G.growth.value)},
                 {"root_number", cjson(series.root_number())},
                 {"untwisted", untwisted},
                 {"twisted", twisted},
                 {"checks", checks}};
    r.pass = all_pass(checks);
    r.csv = std::move(csv);
    return r;
}

TaskResult task_stark(const JobConfig& c, const QuadraticForm& form, const FormProfile& pr)
{
    TaskResult r;
    Csv csv("stark-check", {"r", "psi", "defect"});
    json rows = json::array();
    double worst = 0;
    for (long long mod_r : c.stark_moduli) {
        if (pr.N % mod_r == 0) {
            rows.push_back({{"r", mod_r}, {"skipped", "r divides N"}});
            continue;
        }
        for (const auto& psi : enumerate_characters(mod_r)) {
            const double d = stark_defect(form, psi);
            worst = std::max(worst, d);
            rows.push_back({{"r", mod_r}, {"psi_index", psi.index()}, {"defect", d}});
            csv.row(mod_r, psi.index(), d);
        }
    }
    json checks = {{"max_defect", check(worst, c.stark_tolerance)}};
    r.results = {{"characters", rows}, {"max_defect", worst}, {"checks", checks}};
    r.pass = all_pass(checks);
    r.csv = std::move(csv);
    return r;
}

json environment()
{
    return {{"version", kVersion},
            {"compiler", __VERSION__},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"boost", BOOST_LIB_VERSION},
            {"openmp", _OPENMP}};
}

void write_json(const std::filesystem::path& path, const json& j)
{
    std::ofstream out(path);
    if (!out) throw Error(Errc::InvalidArgument, "cannot write " + path.string());
    out << j.dump(2) << '\n';
}

const std::vector<std::string> kTasks = {"analyze", "densities", "measures", "build", "verify", "fe-check",
                                         "stark-check"};

} // namespace

JobConfig parse_config(std::istream& in)
{
    JobConfig c;
    std::string line;
    std::vector<std::vector<long long>> rows;
    bool in_matrix = false, have_matrix = false;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        if (in_matrix) {
            if (line == "end") {
                in_matrix = false;
                have_matrix = true;
                continue;
            }
            std::istringstream is(line);
            std::vector<long long> row;
            std::string tok;
            while (is >> tok) row.push_back(to_ll("gram2", tok));
            rows.push_back(row);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) bad("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
        if (c.entries.count(key)) bad("duplicate key " + key);
        if (key == "gram2") {
            if (v != "begin") bad("gram2 must be followed by 'begin'");
            in_matrix = true;
            c.entries[key] = "matrix";
            continue;
        }
        c.entries[key] = v;
        if (key == "task") c.task = v;
        else if (key == "n_max") c.n_max = to_ll(key, v);
        else if (key == "prime_bound") c.prime_bound = to_ll(key, v);
        else if (key == "tail_bound") c.tail_bound = to_ll(key, v);
        else if (key == "k_max") c.k_max = static_cast<int>(to_ll(key, v));
        else if (key == "budget") c.budget = to_d(key, v);
        else if (key == "signs") c.signs = v;
        else if (key == "ell") c.ell = static_cast<int>(to_ll(key, v));
        else if (key == "gammas") c.gammas = to_count(key, v);
        else if (key == "points_per_gamma") c.points_per_gamma = to_count(key, v);
        else if (key == "fricke_points") c.fricke_points = to_count(key, v);
        else if (key == "fe_points") c.fe_points = to_count(key, v);
        else if (key == "seed") c.seed = to_count(key, v);
        else if (key == "y_min") c.y_min = to_d(key, v);
        else if (key == "tolerance") c.tolerance = to_d(key, v);
        else if (key == "fe_tolerance") c.fe_tolerance = to_d(key, v);
        else if (key == "twist_tolerance") c.twist_tolerance = to_d(key, v);
        else if (key == "stark_tolerance") c.stark_tolerance = to_d(key, v);
        else if (key == "t0") c.t0 = to_d(key, v);
        else if (key == "t0_alt") c.t0_alt = to_d(key, v);
        else if (key == "trend_prime_bound") c.trend_prime_bound = to_ll(key, v);
        else if (key == "perturbation") c.perturbation = to_d(key, v);
        else if (key == "twist_moduli") c.twist_moduli = to_list(key, v);
        else if (key == "stark_moduli") c.stark_moduli = to_list(key, v);
        else if (key == "report") c.report = v;
        else if (key == "csv") c.csv = v;
        else bad("unknown key " + key);
    }
    if (in_matrix) bad("gram2 block is missing 'end'");
    if (!have_matrix || rows.empty()) bad("no gram2 block");
    if (std::find(kTasks.begin(), kTasks.end(), c.task) == kTasks.end()) bad("unknown task '" + c.task + "'");

    const auto m = static_cast<Eigen::Index>(rows.size());
    c.gram2 = IntMatrix(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        if (static_cast<Eigen::Index>(rows[i].size()) != m)
            throw Error(Errc::DimensionMismatch, "gram2 row " + std::to_string(i + 1) + " has " +
                                                     std::to_string(rows[i].size()) + " entries, expected " +
                                                     std::to_string(m));
        for (Eigen::Index j = 0; j < m; ++j) c.gram2(i, j) = rows[i][j];
    }

    if (c.n_max < 1) bad("n_max must be at least 1");
    if (c.prime_bound < 2) bad("prime_bound must be at least 2");
    if (c.tail_bound != 0 && c.tail_bound <= c.prime_bound) bad("tail_bound must be 0 or above prime_bound");
    if (c.k_max < 1 || c.k_max > 64) bad("k_max must lie in [1, 64]");
    if (!(c.budget > 0)) bad("budget must be positive");
    if (!(c.y_min > 0 && c.y_min < 1)) bad("y_min must lie in (0, 1)");
    if (!(c.t0 > 0 && c.t0_alt > 0)) bad("t0 values must be positive");
    if (c.t0 == 1.0) bad("t0 = 1 makes the two-sided check vacuous");
    if (c.t0_alt == c.t0) bad("t0_alt must differ from t0");
    if (!(c.perturbation > 0)) bad("perturbation must be positive");
    for (long long q : c.twist_moduli)
        if (q < 3 || !is_prime(q)) bad("twist_moduli must be odd primes");
    for (long long q : c.stark_moduli)
        if (q < 3 || !is_prime(q)) bad("stark_moduli must be odd primes");
    signs_of(c);
    return c;
}

JobConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) bad("cannot read config " + path.string());
    return parse_config(in);
}

int run(const RunOptions& opt, std::ostream& log)
{
    const auto t_start = std::chrono::steady_clock::now();
    if (opt.threads > 0) omp_set_num_threads(opt.threads);
    std::filesystem::create_directories(opt.out);

    json report = {{"schema", kReportSchema}};
    JobConfig c;
    int code = kExitOk;
    std::optional<Csv> csv;
    try {
        c = load_config(opt.config);
        if (opt.seed) c.seed = *opt.seed;
        report["task"] = c.task;
        json echo = json::object();
        for (const auto& [k, v] : c.entries) echo[k] = v;
        echo["seed"] = std::to_string(c.seed);
        json gram_rows = json::array();
        for (Eigen::Index i = 0; i < c.gram2.rows(); ++i) {
            std::ostringstream os;
            for (Eigen::Index j = 0; j < c.gram2.cols(); ++j) os << (j ? " " : "") << c.gram2(i, j);
            gram_rows.push_back(os.str());
        }
        echo["gram2"] = gram_rows;
        report["config"] = echo;
        report["environment"] = environment();

        std::optional<DensityCache> cache;
        if (opt.cache) cache.emplace(*opt.cache);
        DensityCache* cp = cache ? &*cache : nullptr;

        const QuadraticForm form = make_form(c.gram2);
        const FormProfile pr = validate(form);
        TaskResult t;
        if (c.task == "analyze") t = task_analyze(c, form, pr);
        else if (c.task == "densities") t = task_densities(c, form, cp);
        else if (c.task == "measures") t = task_measures(c, form, cp);
        else if (c.task == "build") t = task_build(c, form, cp);
        else if (c.task == "verify") t = task_verify(c, form, cp);
        else if (c.task == "fe-check") t = task_fe_check(c, form, cp);
        else t = task_stark(c, form, pr);

        report["results"] = t.results;
        if (t.pass) {
            report["pass"] = *t.pass;
            if (!*t.pass) code = kExitAcceptance;
        }
        csv = std::move(t.csv);
        log << c.task << (t.pass ? (*t.pass ? ": pass" : ": FAIL") : ": done") << '\n';
    } catch (const Error& e) {
        code = (e.code() == Errc::BudgetExceeded || e.code() == Errc::TableOverflow) ? kExitBudget : kExitValidation;
        report["error"] = {{"code", errc_name(e.code())}, {"message", e.what()}};
        log << "error: " << e.what() << '\n';
    } catch (const std::exception& e) {
        code = kExitValidation;
        report["error"] = {{"code", "Exception"}, {"message", e.what()}};
        log << "error: " << e.what() << '\n';
    }
    report["exit_code"] = code;

    const std::string report_name = c.report.empty() ? "report.json" : c.report;
    write_json(opt.out / report_name, report);
    if (csv) csv->write(opt.out / (c.csv.empty() ? c.task + ".csv" : c.csv));

    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    const std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    write_json(opt.out / "meta.json",
               {{"report", report_name}, {"finished", stamp}, {"elapsed_seconds", elapsed},
                {"threads", omp_get_max_threads()}});
    return code;
}

int cache_admin(const std::string& sub, const std::filesystem::path& cache_dir, const std::filesystem::path& out,
                std::ostream& log)
{
    std::filesystem::create_directories(out);
    json report = {{"schema", kReportSchema}, {"task", "cache " + sub}};
    int code = kExitOk;
    try {
        DensityCache cache(cache_dir);
        if (sub == "stats") {
            const auto s = cache.stats();
            json by = json::array();
            for (const auto& [pk, n] : s.by_prime_power) by.push_back({{"p", pk.first}, {"k", pk.second}, {"records", n}});
            report["results"] = {{"records", s.records}, {"by_prime_power", by}};
            log << s.records << " records\n";
        } else if (sub == "verify") {
            const auto v = cache.verify();
            report["results"] = {{"good", v.good}, {"bad_offsets", v.bad_offsets}};
            if (!v.bad_offsets.empty()) {
                std::ostringstream os;
                os << v.bad_offsets.size() << " corrupt record(s) at byte offsets";
                for (auto o : v.bad_offsets) os << ' ' << o;
                throw Error(Errc::CorruptRecord, os.str());
            }
            log << v.good << " records verified\n";
        } else if (sub == "clear") {
            cache.clear();
            report["results"] = {{"records", 0}};
            log << "cache cleared\n";
        } else {
            bad("unknown cache subcommand " + sub);
        }
    } catch (const Error& e) {
        code = kExitValidation;
        report["error"] = {{"code", errc_name(e.code())}, {"message", e.what()}};
        log << "error: " << e.what() << '\n';
    } catch (const std::exception& e) {
        code = kExitValidation;
        report["error"] = {{"code", "Exception"}, {"message", e.what()}};
        log << "error: " << e.what() << '\n';
    }
    report["exit_code"] = code;
    write_json(out / "cache-report.json", report);
    return code;
}

} // namespace qfz
