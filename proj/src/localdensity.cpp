#include "qfz/localdensity.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <boost/crc.hpp>

#include "qfz/errors.hpp"

namespace qfz {

namespace {

using u128 = unsigned __int128;

int rational_valuation(const Rational& x, long long p)
{
    if (x == 0) return INT_MAX;
    auto count = [p](BigInt v) {
        if (v < 0) v = -v;
        int e = 0;
        while (v % p == 0) {
            v /= p;
            ++e;
        }
        return e;
    };
    return count(numerator(x)) - count(denominator(x));
}

long long reduce_mod(const Rational& x, long long M)
{
    BigInt num = numerator(x) % M;
    if (num < 0) num += M;
    BigInt den = denominator(x) % M;
    const long long inv = mod_inverse(static_cast<long long>(den), M);
    return static_cast<long long>((num * inv) % M);
}

// Q restricted to a Jordan block: q11 x^2 + q12 x y + q22 y^2 (dim 2) or q11 x^2 (dim 1)
struct Block {
    int dim = 1;
    Rational q11, q12, q22;
};

// Congruence over Z_(p) to block-diagonal form; 1x1 blocks for odd p, 1x1 or 2x2 for p = 2.
std::vector<Block> jordan_split(const IntMatrix& gram2, long long p)
{
    const int m = static_cast<int>(gram2.rows());
    std::vector<std::vector<Rational>> B(m, std::vector<Rational>(m));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) B[i][j] = gram2(i, j);
    std::vector<int> rem(m);
    for (int i = 0; i < m; ++i) rem[i] = i;

    auto row_sub = [&](int k, int i, const Rational& f) {
        if (f == 0) return;
        for (int c : rem) B[k][c] -= f * B[i][c];
        for (int r : rem) B[r][k] -= f * B[r][i];
    };

    std::vector<Block> out;
    while (!rem.empty()) {
        int best = INT_MAX, bi = -1, bj = -1;
        for (int i : rem)
            for (int j : rem) {
                if (j < i) continue;
                const int v = rational_valuation(B[i][j], p);
                if (v < best || (v == best && i == j && bi != bj)) {
                    best = v;
                    bi = i;
                    bj = j;
                }
            }
        if (best == INT_MAX) throw Error(Errc::Singular, "degenerate form over Z_p");
        if (bi != bj && p != 2) {
            for (int c : rem) B[bi][c] += B[bj][c];
            for (int r : rem) B[r][bi] += B[r][bj];
            bj = bi;
        }
        if (bi == bj) {
            const int i = bi;
            for (int k : rem)
                if (k != i) row_sub(k, i, B[k][i] / B[i][i]);
            out.push_back({1, B[i][i] / 2, 0, 0});
            rem.erase(std::find(rem.begin(), rem.end(), i));
            continue;
        }
        const int i = bi, j = bj;
        const Rational det = B[i][i] * B[j][j] - B[i][j] * B[i][j];
        for (int k : rem) {
            if (k == i || k == j) continue;
            const Rational x = (B[j][j] * B[i][k] - B[i][j] * B[j][k]) / det;
            const Rational y = (B[i][i] * B[j][k] - B[i][j] * B[i][k]) / det;
            for (int c : rem) B[k][c] -= x * B[i][c] + y * B[j][c];
            for (int r : rem) B[r][k] -= x * B[r][i] + y * B[r][j];
        }
        out.push_back({2, B[i][i] / 2, B[i][j], B[j][j] / 2});
        rem.erase(std::find(rem.begin(), rem.end(), i));
        rem.erase(std::find(rem.begin(), rem.end(), j));
    }
    return out;
}

// Orbits of Z/p^k under t -> s^2 t for units s. Every block histogram is
// constant on these orbits, and so is every convolution of them.
struct OrbitSpace {
    long long p = 0, M = 0;
    int k = 0;
    std::vector<std::uint32_t> orbit;   // residue -> orbit id
    std::vector<long long> rep;         // orbit id -> representative

    OrbitSpace(long long p_, int k_) : p(p_), M(ipow(p_, k_)), k(k_), orbit(static_cast<std::size_t>(M))
    {
        const int classes = p == 2 ? 4 : 2;
        std::vector<char> square(p == 2 ? 8 : p, 0);
        if (p != 2)
            for (long long x = 1; x < p; ++x) square[x * x % p] = 1;
        rep.assign(1 + static_cast<std::size_t>(classes) * k, -1);
        for (long long t = 0; t < M; ++t) {
            std::uint32_t id = 0;
            if (t != 0) {
                long long u = t;
                int j = 0;
                while (u % p == 0) {
                    u /= p;
                    ++j;
                }
                int cls;
                if (p == 2) {
                    const int e = k - j;
                    cls = static_cast<int>((u % (1LL << std::min(e, 3))) >> 1);
                } else {
                    cls = square[u % p] ? 0 : 1;
                }
                id = static_cast<std::uint32_t>(1 + classes * j + cls);
            }
            orbit[t] = id;
            if (rep[id] < 0) rep[id] = t;
        }
    }
};

struct Histogram {
    std::shared_ptr<OrbitSpace> space;
    std::vector<u128> values;   // per orbit id

    u128 at(long long t) const { return values[space->orbit[mod(t, space->M)]]; }
};

double histogram_work(const std::vector<Block>& blocks, long long M, std::size_t orbits)
{
    double w = 0;
    for (const auto& b : blocks) w += std::pow(static_cast<double>(M), b.dim);
    w += static_cast<double>(blocks.size()) * static_cast<double>(orbits) * static_cast<double>(M);
    return w;
}

Histogram build_histogram(const std::vector<Block>& blocks, long long p, int k, int m, double budget)
{
    const long long M = ipow(p, k);
    if (std::log2(static_cast<double>(M)) * m >= 126)
        throw Error(Errc::BudgetExceeded, "counts mod " + std::to_string(M) + " overflow 128 bits");
    const double est_orbits = 1 + (p == 2 ? 4.0 : 2.0) * k;
    if (histogram_work(blocks, M, static_cast<std::size_t>(est_orbits)) > budget)
        throw Error(Errc::BudgetExceeded,
                    "histogram mod " + std::to_string(p) + "^" + std::to_string(k) + " exceeds budget");
    auto space = std::make_shared<OrbitSpace>(p, k);
    const std::size_t O = space->rep.size();

    auto block_values = [&](const Block& b) {
        std::vector<std::uint64_t> h(static_cast<std::size_t>(M), 0);
        const long long a = reduce_mod(b.q11, M);
        if (b.dim == 1) {
            for (long long x = 0; x < M; ++x) h[static_cast<u128>(a) * x % M * x % M]++;
        } else {
            const long long c = reduce_mod(b.q12, M);
            const long long d = reduce_mod(b.q22, M);
            std::vector<long long> sq(static_cast<std::size_t>(M));
            for (long long x = 0; x < M; ++x) sq[x] = static_cast<long long>(static_cast<u128>(x) * x % M);
            for (long long x = 0; x < M; ++x) {
                const long long ax = static_cast<long long>(static_cast<u128>(a) * sq[x] % M);
                const long long cx = static_cast<long long>(static_cast<u128>(c) * x % M);
                for (long long y = 0; y < M; ++y) {
                    const u128 v = ax + static_cast<u128>(cx) * y + static_cast<u128>(d) * sq[y];
                    h[static_cast<std::size_t>(v % M)]++;
                }
            }
        }
        std::vector<u128> out(O, 0);
        for (std::size_t o = 0; o < O; ++o)
            if (space->rep[o] >= 0) out[o] = h[space->rep[o]];
        return out;
    };

    std::vector<u128> acc = block_values(blocks.front());
    for (std::size_t bi = 1; bi < blocks.size(); ++bi) {
        const std::vector<u128> next = block_values(blocks[bi]);
        std::vector<u128> res(O, 0);
        for (std::size_t o = 0; o < O; ++o) {
            const long long t = space->rep[o];
            if (t < 0) continue;
            u128 s = 0;
            for (long long x = 0; x < M; ++x) {
                const u128 lhs = acc[space->orbit[x]];
                if (lhs == 0) continue;
                long long y = t - x;
                if (y < 0) y += M;
                s += lhs * next[space->orbit[y]];
            }
            res[o] = s;
        }
        acc = std::move(res);
    }
    return {space, std::move(acc)};
}

BigInt to_big(u128 v)
{
    BigInt r = static_cast<std::uint64_t>(v >> 64);
    r <<= 64;
    r += static_cast<std::uint64_t>(v);
    return r;
}

// per-(form, p) state: Jordan blocks and memoized histograms
class PrimeEngine {
public:
    PrimeEngine(const QuadraticForm& form, long long p, double budget)
        : m_(form.dim()), p_(p), budget_(budget), blocks_(jordan_split(form.gram2(), p))
    {
    }

    const Histogram& hist(int k)
    {
        auto it = memo_.find(k);
        if (it != memo_.end()) return it->second;
        return memo_.emplace(k, build_histogram(blocks_, p_, k, m_, budget_)).first->second;
    }

    BigInt count(long long t, int k) { return to_big(hist(k).at(t)); }

private:
    int m_;
    long long p_;
    double budget_;
    std::vector<Block> blocks_;
    std::map<int, Histogram> memo_;
};

Rational alpha_of(const BigInt& count, long long p, int k, int m)
{
    BigInt den = 1;
    for (int i = 0; i < k * (m - 1); ++i) den *= p;
    return Rational(count, den);
}

using PendingRecords = std::vector<std::pair<DensityCache::Key, BigInt>>;

DensityRecord stabilized_density(PrimeEngine& eng, std::uint64_t hash, long long t, long long p, int m,
                                 const DensityParams& params, PendingRecords& pending)
{
    auto count_at = [&](int k) {
        if (params.cache)
            if (auto c = params.cache->get(hash, t, p, k)) return *c;
        BigInt c = eng.count(t, k);
        if (params.cache) pending.push_back({{hash, t, p, k}, c});
        return c;
    };
    // for k <= v_p(n) the congruence does not see n, so comparisons start above it
    const int k0 = valuation(t, p) + 1;
    BigInt prev_count = count_at(k0);
    Rational prev = alpha_of(prev_count, p, k0, m);
    for (int k = k0 + 1; k <= params.k_max; ++k) {
        BigInt c = count_at(k);
        Rational a = alpha_of(c, p, k, m);
        if (a == prev) return {t, p, k - 1, prev_count, prev, true};
        prev = a;
        prev_count = c;
    }
    throw Error(Errc::NotStabilized, "alpha_" + std::to_string(p) + "(" + std::to_string(t) +
                                         ") not stable up to k=" + std::to_string(params.k_max));
}

void check_zeta_form(const QuadraticForm& form)
{
    if (form.dim() < 5) throw Error(Errc::DomainError, "measures need m >= 5");
    auto [pos, neg] = signature(form);
    if (pos == 0 || neg == 0) throw Error(Errc::DomainError, "measures need an indefinite form");
}

} // namespace

BigInt count_solutions(const QuadraticForm& form, long long n, long long p, int k, double budget)
{
    if (!is_prime(p) || k < 1) throw Error(Errc::InvalidArgument, "need prime p and k >= 1");
    PrimeEngine eng(form, p, budget);
    return eng.count(n, k);
}

std::vector<BigInt> value_histogram(const QuadraticForm& form, long long p, int k, double budget)
{
    PrimeEngine eng(form, p, budget);
    const auto& h = eng.hist(k);
    std::vector<BigInt> out(static_cast<std::size_t>(h.space->M));
    for (long long t = 0; t < h.space->M; ++t) out[t] = to_big(h.at(t));
    return out;
}

BigInt count_solutions_naive(const QuadraticForm& form, long long n, long long p, int k, double budget)
{
    const int m = form.dim();
    const long long M = ipow(p, k);
    if (std::pow(static_cast<double>(M), m) > budget)
        throw Error(Errc::BudgetExceeded, "enumeration exceeds budget");
    const IntMatrix& g = form.gram2();
    IntVector v = IntVector::Zero(m);
    BigInt count = 0;
    const long long target = mod(n, M);
    while (true) {
        if (mod(form.value(v), M) == target) ++count;
        int i = 0;
        while (i < m && ++v(i) == M) v(i++) = 0;
        if (i == m) break;
    }
    (void)g;
    return count;
}

DensityRecord local_density(const QuadraticForm& form, long long n, long long p, const DensityParams& params)
{
    if (n == 0) throw Error(Errc::DomainError, "n must be non-zero");
    PrimeEngine eng(form, p, params.budget);
    PendingRecords pending;
    DensityRecord r = stabilized_density(eng, form.hash(), n, p, form.dim(), params, pending);
    if (params.cache && !pending.empty()) params.cache->put(pending);
    return r;
}

const MeasureEntry& MeasureTable::at(long long n) const
{
    if (n < 1 || n > static_cast<long long>(entries.size()))
        throw Error(Errc::MissingMeasure, "no measure for n=" + std::to_string(n));
    return entries[n - 1];
}

double measure_from_records(int m, const MeasureEntry& e)
{
    double v = std::pow(static_cast<double>(e.n), m / 2.0 - 1.0);
    for (const auto& r : e.records) v *= r.alpha.convert_to<double>();
    return v * e.tail_factor;
}

Rational generic_density(int m, long long D, long long n, long long p)
{
    if (p == 2 || !is_prime(p) || D % p == 0 || n == 0)
        throw Error(Errc::DomainError, "generic density needs an odd prime not dividing D and n != 0");
    // alpha = sum_k p^{-km} sum_{a mod p^k, unit} G(a / p^k) e(-a n / p^k) over a diagonal unimodular
    // splitting; the Gauss sums are explicit, and the k-th term vanishes past v_p(n) + 1.
    const int v = valuation(n, p);
    long long u = n;
    for (int i = 0; i < v; ++i) u /= p;
    const int det_sym = jacobi(mod(D, p), p) * (m % 2 ? jacobi(2, p) : 1);   // (det Y / p)
    auto p_pow = [&](long long e) {
        BigInt x = 1;
        for (long long i = 0; i < (e < 0 ? -e : e); ++i) x *= p;
        return e < 0 ? Rational(1, x) : Rational(x);
    };
    Rational alpha = 1;
    for (int k = 1; k <= v + 1; ++k) {
        const int s = k % 2 ? det_sym : 1;
        const bool eps_is_i = k % 2 == 1 && p % 4 == 3;
        if ((static_cast<long long>(k) * m) % 2 == 0) {
            const int e = eps_is_i ? ((m / 2) % 2 ? -1 : 1) : 1;
            const Rational ram = k <= v ? p_pow(k) - p_pow(k - 1) : -p_pow(k - 1);
            alpha += p_pow(-static_cast<long long>(k) * m / 2) * (e * s) * ram;
        } else if (k == v + 1) {
            const int e = eps_is_i ? (((m + 1) / 2) % 2 ? -1 : 1) : 1;
            alpha += p_pow(v - (static_cast<long long>(k) * m - 1) / 2) * (e * s * jacobi(mod(-u, p), p));
        }
    }
    return alpha;
}

namespace {

// product over the tail primes; primes dividing D are counted exactly
double tail_factor(const QuadraticForm& form, long long D, long long t, const std::vector<long long>& primes,
                   const DensityParams& params)
{
    const int m = form.dim();
    const long long sgn = (m / 2) % 2 ? -1 : 1;   // (-1)^{m/2} or (-1)^{(m-1)/2}
    double f = 1;
    for (long long p : primes) {
        if (D % p == 0)
            f *= local_density(form, t, p, params).alpha.convert_to<double>();
        else if (t % p != 0) {
            // the p-free closed form in double; same values as generic_density
            const double q = static_cast<double>(p);
            if (m % 2 == 0)
                f *= 1 - jacobi(mod(sgn * D, p), p) * std::pow(q, -m / 2.0);
            else
                f *= 1 + jacobi(mod(mod(sgn * 2 * t, p) * mod(D, p), p), p) * std::pow(q, (1 - m) / 2.0);
        } else
            f *= generic_density(m, D, t, p).convert_to<double>();
    }
    return f;
}

std::vector<long long> tail_primes(const MeasureParams& params)
{
    std::vector<long long> out;
    if (params.tail_bound <= params.prime_bound) return out;
    for (long long p : primes_up_to(params.tail_bound))
        if (p > params.prime_bound) out.push_back(p);
    return out;
}

} // namespace

MeasureTable measure_table(const QuadraticForm& form, int sign, long long n_max, const MeasureParams& params)
{
    MeasureTable table;
    table.form_hash = form.hash();
    table.sign = sign >= 0 ? 1 : -1;
    table.prime_bound = params.prime_bound;
    if (n_max <= 0) return table;
    check_zeta_form(form);

    const int m = form.dim();
    const auto primes = primes_up_to(params.prime_bound);
    const std::uint64_t hash = form.hash();
    std::vector<std::vector<DensityRecord>> per_prime(primes.size());
    std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t i = 0; i < primes.size(); ++i) {
        try {
            PrimeEngine eng(form, primes[i], params.density.budget);
            PendingRecords pending;
            std::vector<DensityRecord> recs;
            for (long long n = 1; n <= n_max; ++n)
                recs.push_back(stabilized_density(eng, hash, table.sign * n, primes[i], m, params.density, pending));
            if (params.density.cache && !pending.empty()) params.density.cache->put(pending);
            per_prime[i] = std::move(recs);
        } catch (...) {
#pragma omp critical(qfz_measure_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    for (long long n = 1; n <= n_max; ++n) {
        MeasureEntry e;
        e.n = n;
        e.prime_bound = params.prime_bound;
        for (const auto& recs : per_prime) e.records.push_back(recs[n - 1]);
        table.entries.push_back(std::move(e));
    }
    const auto tail = tail_primes(params);
    if (!tail.empty()) {
        const long long D = static_cast<long long>(determinant(form.gram2()));
#pragma omp parallel for schedule(dynamic, 4)
        for (long long n = 1; n <= n_max; ++n) {
            try {
                table.entries[n - 1].tail_factor = tail_factor(form, D, table.sign * n, tail, params.density);
            } catch (...) {
#pragma omp critical(qfz_measure_failure)
                if (!failure) failure = std::current_exception();
            }
        }
        if (failure) std::rethrow_exception(failure);
    }
    for (auto& e : table.entries) e.value = measure_from_records(m, e);
    return table;
}

double measure_relative(const QuadraticForm& form, long long n, const MeasureParams& params)
{
    if (n == 0) throw Error(Errc::DomainError, "n must be non-zero");
    check_zeta_form(form);
    MeasureEntry e;
    e.n = n < 0 ? -n : n;
    for (long long p : primes_up_to(params.prime_bound)) e.records.push_back(local_density(form, n, p, params.density));
    const auto tail = tail_primes(params);
    if (!tail.empty())
        e.tail_factor = tail_factor(form, static_cast<long long>(determinant(form.gram2())), n, tail, params.density);
    return measure_from_records(form.dim(), e);
}

// ---- cache ----

namespace {

std::uint32_t crc_of(const std::string& s)
{
    boost::crc_32_type crc;
    crc.process_bytes(s.data(), s.size());
    return crc.checksum();
}

bool parse_record(const std::string& line, DensityCache::Key& key, BigInt& count)
{
    const auto cut = line.rfind(' ');
    if (cut == std::string::npos) return false;
    const std::string body = line.substr(0, cut);
    std::uint32_t stored = 0;
    {
        std::istringstream cs(line.substr(cut + 1));
        if (!(cs >> std::hex >> stored) || line.size() - cut - 1 != 8) return false;
    }
    if (crc_of(body) != stored) return false;
    std::istringstream is(body);
    std::string tag, hash_hex, count_str;
    long long n = 0, p = 0;
    int k = 0;
    if (!(is >> tag >> hash_hex >> n >> p >> k >> count_str) || tag != "v1") return false;
    std::string rest;
    if (is >> rest) return false;
    std::uint64_t h = 0;
    std::istringstream hs(hash_hex);
    if (!(hs >> std::hex >> h)) return false;
    try {
        count = BigInt(count_str);
    } catch (...) {
        return false;
    }
    key = {h, n, p, k};
    return true;
}

class FileLock {
public:
    FileLock(const std::filesystem::path& path, int mode) : fd_(::open(path.c_str(), O_RDWR | O_CREAT, 0644))
    {
        if (fd_ >= 0) ::flock(fd_, mode);
    }
    ~FileLock()
    {
        if (fd_ >= 0) {
            ::flock(fd_, LOCK_UN);
            ::close(fd_);
        }
    }
    FileLock(const FileLock&) = delete;
    FileLock& operator=(const FileLock&) = delete;

private:
    int fd_;
};

} // namespace

std::string DensityCache::format_record(const Key& key, const BigInt& count)
{
    std::ostringstream os;
    os << "v1 " << std::hex << std::setw(16) << std::setfill('0') << std::get<0>(key) << std::dec << ' '
       << std::get<1>(key) << ' ' << std::get<2>(key) << ' ' << std::get<3>(key) << ' ' << count;
    const std::string body = os.str();
    std::ostringstream line;
    line << body << ' ' << std::hex << std::setw(8) << std::setfill('0') << crc_of(body);
    return line.str();
}

DensityCache::DensityCache(std::filesystem::path dir)
{
    std::filesystem::create_directories(dir);
    file_ = dir / "densities.log";
    load();
}

void DensityCache::load()
{
    std::lock_guard<std::mutex> g(mu_);
    records_.clear();
    if (!std::filesystem::exists(file_)) return;
    FileLock lock(file_.string() + ".lock", LOCK_SH);
    std::ifstream in(file_);
    std::string line;
    while (std::getline(in, line)) {
        Key key;
        BigInt count;
        if (parse_record(line, key, count)) records_[key] = count;
    }
}

std::optional<BigInt> DensityCache::get(std::uint64_t form_hash, long long n, long long p, int k) const
{
    std::lock_guard<std::mutex> g(mu_);
    auto it = records_.find({form_hash, n, p, k});
    if (it == records_.end()) return std::nullopt;
    return it->second;
}

void DensityCache::put(const std::vector<std::pair<Key, BigInt>>& records)
{
    std::lock_guard<std::mutex> g(mu_);
    FileLock lock(file_.string() + ".lock", LOCK_EX);
    std::ofstream out(file_, std::ios::app);
    for (const auto& [key, count] : records) {
        if (records_.count(key)) continue;
        out << format_record(key, count) << '\n';
        records_[key] = count;
    }
    out.flush();
}

DensityCache::VerifyReport DensityCache::verify() const
{
    std::lock_guard<std::mutex> g(mu_);
    VerifyReport rep;
    if (!std::filesystem::exists(file_)) return rep;
    FileLock lock(file_.string() + ".lock", LOCK_SH);
    std::ifstream in(file_, std::ios::binary);
    std::string line;
    std::uintmax_t offset = 0;
    while (std::getline(in, line)) {
        Key key;
        BigInt count;
        if (parse_record(line, key, count))
            ++rep.good;
        else
            rep.bad_offsets.push_back(offset);
        offset += line.size() + 1;
    }
    return rep;
}

DensityCache::Stats DensityCache::stats() const
{
    std::lock_guard<std::mutex> g(mu_);
    Stats s;
    s.records = records_.size();
    for (const auto& [key, count] : records_) s.by_prime_power[{std::get<2>(key), std::get<3>(key)}]++;
    return s;
}

void DensityCache::clear()
{
    std::lock_guard<std::mutex> g(mu_);
    FileLock lock(file_.string() + ".lock", LOCK_EX);
    std::ofstream(file_, std::ios::trunc);
    records_.clear();
}

} // namespace qfz
