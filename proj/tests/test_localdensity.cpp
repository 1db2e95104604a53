#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "qfz/errors.hpp"
#include "qfz/localdensity.hpp"

using namespace qfz;

namespace {

const std::vector<IntMatrix>& test_forms()
{
    static const std::vector<IntMatrix> f = {oracle::diag({2, 2, 2, 2, -2}), oracle::diag({2, 2, -2, -2, -2, -2}),
                                             oracle::third_form(), oracle::diag({2, 2, 2, -2, -2})};
    return f;
}

Rational alpha_at(const QuadraticForm& f, long long n, long long p, int k)
{
    BigInt q = 1;
    for (int i = 0; i < k * (f.dim() - 1); ++i) q *= p;
    return Rational(count_solutions(f, n, p, k)) / Rational(q);
}

std::filesystem::path fresh_dir(const std::string& name)
{
    const auto d = std::filesystem::temp_directory_path() / ("qfz-test-" + name);
    std::filesystem::remove_all(d);
    return d;
}

} // namespace

TEST_CASE("histogram counts agree with enumeration")
{
    IntMatrix h(3, 3);
    h << 2, 1, 0, 1, 4, 1, 0, 1, -6;
    const std::vector<IntMatrix> small = {oracle::diag({2, 2, -2}), oracle::diag({2, 6, -4}), h,
                                          oracle::third_form()};
    for (const auto& g : small) {
        const QuadraticForm f = make_form(g);
        for (long long p : {2, 3, 5})
            for (int k = 1; k <= 3; ++k) {
                const long long q = ipow(p, k);
                if (std::pow(double(q), f.dim()) > 2e6) continue;
                for (long long t : {1, 2, 3, 6, -1, -5, 0}) {
                    CAPTURE(p);
                    CAPTURE(k);
                    CAPTURE(t);
                    CHECK(count_solutions(f, t, p, k) == BigInt(oracle::brute_count(g, t, q)));
                }
            }
    }
    const QuadraticForm f = make_form(oracle::diag({2, 2, -2}));
    CHECK(count_solutions_naive(f, 3, 3, 2) == BigInt(oracle::brute_count(oracle::diag({2, 2, -2}), 3, 9)));
    CHECK_THROWS_AS(count_solutions_naive(f, 3, 7, 4, 1e3), Error);
}

TEST_CASE("value histogram sums to p^{km}")
{
    const QuadraticForm f = make_form(oracle::third_form());
    const auto h = value_histogram(f, 3, 2);
    BigInt total = 0;
    for (const auto& x : h) total += x;
    CHECK(total == BigInt(ipow(9, 5)));
    CHECK(h[4] == count_solutions(f, 4, 3, 2));
}

TEST_CASE("densities are constant in k for p not dividing 2nD")
{
    for (const auto& g : test_forms()) {
        const QuadraticForm f = make_form(g);
        const long long D = validate(f).D;
        for (long long n = 1; n <= 10; ++n)
            for (long long p : {3, 5, 7, 11, 13}) {
                if ((2 * n * D) % p == 0) continue;
                CAPTURE(n);
                CAPTURE(p);
                CHECK(alpha_at(f, n, p, 1) == alpha_at(f, n, p, 2));
                CHECK(alpha_at(f, -n, p, 1) == alpha_at(f, -n, p, 2));
            }
    }
}

TEST_CASE("densities at p | 2nD stabilize by k = 6")
{
    DensityParams dp;
    dp.k_max = 6;
    for (const auto& g : test_forms()) {
        const QuadraticForm f = make_form(g);
        const long long D = validate(f).D;
        for (long long n = 1; n <= 10; ++n)
            for (long long p : {2, 3, 5, 7, 11, 13}) {
                if ((2 * n * D) % p != 0) continue;
                for (long long t : {n, -n}) {
                    CAPTURE(t);
                    CAPTURE(p);
                    const DensityRecord r = local_density(f, t, p, dp);
                    CHECK(r.stabilized);
                    CHECK(r.k <= 6);
                    CHECK(r.alpha == alpha_at(f, t, p, r.k));
                    CHECK(r.alpha == alpha_at(f, t, p, r.k + 1));
                }
            }
    }
}

TEST_CASE("closed-form densities match exact counting")
{
    int cases = 0;
    for (const auto& g : test_forms()) {
        const QuadraticForm f = make_form(g);
        const FormProfile pr = validate(f);
        DensityParams dp;
        dp.k_max = 8;
        for (long long p : {3, 5, 7, 11, 13}) {
            if (pr.D % p == 0) continue;
            for (long long n : {1LL, -1LL, 2LL, p, -p, 3 * p, p * p, -2 * p * p, p * p * p}) {
                CAPTURE(p);
                CAPTURE(n);
                CHECK(generic_density(pr.m, pr.D, n, p) == local_density(f, n, p, dp).alpha);
                ++cases;
            }
        }
    }
    CHECK(cases > 100);
    CHECK_THROWS_AS(generic_density(5, -32, 1, 2), Error);
    CHECK_THROWS_AS(generic_density(5, -24, 1, 3), Error);
    CHECK_THROWS_AS(generic_density(5, -32, 0, 3), Error);
}

TEST_CASE("the tail factor is the product of closed-form densities")
{
    const QuadraticForm f = make_form(oracle::diag({2, 2, 2, -2, -2}));
    const FormProfile pr = validate(f);
    MeasureParams mp;
    mp.prime_bound = 13;
    mp.tail_bound = 300;
    for (int sign : {1, -1}) {
        const MeasureTable t = measure_table(f, sign, 40, mp);
        for (long long n : {1, 17, 19, 34, 38}) {
            double expect = 1;
            for (long long p : primes_up_to(300))
                if (p > 13) expect *= generic_density(pr.m, pr.D, sign * n, p).convert_to<double>();
            CHECK(t.at(n).tail_factor == doctest::Approx(expect).epsilon(1e-13));
        }
    }
    mp.tail_bound = 0;
    CHECK(measure_table(f, 1, 3, mp).at(2).tail_factor == 1.0);
}

TEST_CASE("measure values rebuild from their records")
{
    const QuadraticForm f = make_form(oracle::third_form());
    MeasureParams mp;
    mp.prime_bound = 20;
    mp.tail_bound = 100;
    const MeasureTable t = measure_table(f, -1, 12, mp);
    CHECK(t.size() == 12);
    for (const auto& e : t.entries) {
        CHECK(measure_from_records(5, e) == doctest::Approx(e.value).epsilon(1e-14));
        CHECK(measure_relative(f, -e.n, mp) == doctest::Approx(e.value).epsilon(1e-14));
    }
    CHECK_THROWS_AS(t.at(13), Error);
}

TEST_CASE("measures need an indefinite form with m >= 5")
{
    CHECK_THROWS_AS(measure_table(make_form(oracle::diag({2, 2, -2})), 1, 3), Error);
    CHECK_THROWS_AS(measure_table(make_form(oracle::diag({2, 2, 2, 2, 2})), 1, 3), Error);
}

TEST_CASE("budget is enforced")
{
    DensityParams dp;
    dp.budget = 10;
    try {
        local_density(make_form(oracle::diag({2, 2, 2, 2, -2})), 8, 2, dp);
        FAIL("expected BudgetExceeded");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::BudgetExceeded);
    }
}

TEST_CASE("cache: reuse, idempotent writes and fault injection")
{
    const auto dir = fresh_dir("cache");
    const QuadraticForm f = make_form(oracle::diag({2, 2, 2, 2, -2}));
    MeasureParams mp;
    mp.prime_bound = 13;
    MeasureTable first, second;
    std::size_t records = 0;
    {
        DensityCache cache(dir);
        CHECK(cache.stats().records == 0);
        mp.density.cache = &cache;
        first = measure_table(f, 1, 10, mp);
        records = cache.stats().records;
        CHECK(records > 0);
    }
    std::string before;
    {
        std::ifstream in(dir / "densities.log");
        before.assign(std::istreambuf_iterator<char>(in), {});
    }
    {
        DensityCache cache(dir);
        CHECK(cache.stats().records == records);
        mp.density.cache = &cache;
        second = measure_table(f, 1, 10, mp);
        CHECK(cache.stats().records == records);
        CHECK(cache.verify().good == records);
        CHECK(cache.verify().bad_offsets.empty());
    }
    for (long long n = 1; n <= 10; ++n) CHECK(first.value(n) == second.value(n));
    {
        std::ifstream in(dir / "densities.log");
        CHECK(std::string(std::istreambuf_iterator<char>(in), {}) == before);
    }

    // flip one digit inside the third record
    std::size_t third = 0;
    for (int i = 0; i < 2; ++i) third = before.find('\n', third) + 1;
    std::string corrupted = before;
    const std::size_t pos = corrupted.find(' ', third + 3) + 1;
    corrupted[pos] = corrupted[pos] == '1' ? '2' : '1';
    {
        std::ofstream out(dir / "densities.log", std::ios::trunc | std::ios::binary);
        out << corrupted;
    }
    {
        DensityCache cache(dir);
        const auto v = cache.verify();
        REQUIRE(v.bad_offsets.size() == 1);
        CHECK(v.bad_offsets[0] == third);
        CHECK(v.good == records - 1);
        // the damaged record is ignored and recomputed
        mp.density.cache = &cache;
        const MeasureTable again = measure_table(f, 1, 10, mp);
        for (long long n = 1; n <= 10; ++n) CHECK(again.value(n) == first.value(n));
        cache.clear();
        CHECK(cache.stats().records == 0);
        CHECK(cache.verify().good == 0);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("record format")
{
    const std::string line = DensityCache::format_record({0x1234abcdULL, -7, 3, 2}, BigInt(81));
    CHECK(line.rfind("v1 000000001234abcd -7 3 2 81 ", 0) == 0);
    CHECK(line.size() == std::string("v1 000000001234abcd -7 3 2 81 ").size() + 8);
}
