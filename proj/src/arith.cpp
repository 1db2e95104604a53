#include "qfz/arith.hpp"

#include "qfz/errors.hpp"

namespace qfz {

bool is_prime(long long n)
{
    if (n < 2) return false;
    for (long long d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

std::vector<long long> primes_up_to(long long bound)
{
    std::vector<long long> out;
    if (bound < 2) return out;
    std::vector<char> sieve(static_cast<std::size_t>(bound) + 1, 1);
    for (long long i = 2; i <= bound; ++i) {
        if (!sieve[i]) continue;
        out.push_back(i);
        for (long long j = i * i; j <= bound; j += i) sieve[j] = 0;
    }
    return out;
}

int valuation(long long n, long long p)
{
    if (n == 0) throw Error(Errc::DomainError, "valuation of zero");
    int v = 0;
    while (n % p == 0) {
        n /= p;
        ++v;
    }
    return v;
}

long long ipow(long long base, int e)
{
    long long r = 1;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

long long mod(long long a, long long m)
{
    long long r = a % m;
    return r < 0 ? r + m : r;
}

long long mod_inverse(long long a, long long m)
{
    long long g = m, x = 0, x1 = 1, a1 = mod(a, m);
    while (a1 != 0) {
        long long q = g / a1;
        std::swap(g, a1);
        a1 -= q * g;
        std::swap(x, x1);
        x1 -= q * x;
    }
    if (g != 1) throw Error(Errc::DomainError, "no inverse modulo " + std::to_string(m));
    return mod(x, m);
}

std::vector<long long> divisors(long long n)
{
    std::vector<long long> small, large;
    for (long long d = 1; d * d <= n; ++d) {
        if (n % d) continue;
        small.push_back(d);
        if (d != n / d) large.push_back(n / d);
    }
    small.insert(small.end(), large.rbegin(), large.rend());
    return small;
}

std::vector<std::pair<long long, int>> factorize(long long n)
{
    std::vector<std::pair<long long, int>> out;
    if (n < 0) n = -n;
    for (long long p = 2; p * p <= n; ++p) {
        int e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        if (e) out.emplace_back(p, e);
    }
    if (n > 1) out.emplace_back(n, 1);
    return out;
}

int jacobi(long long a, long long n)
{
    if (n <= 0 || n % 2 == 0) throw Error(Errc::DomainError, "Jacobi symbol needs odd positive modulus");
    a = mod(a, n);
    int t = 1;
    while (a != 0) {
        while (a % 2 == 0) {
            a /= 2;
            long long r = n % 8;
            if (r == 3 || r == 5) t = -t;
        }
        std::swap(a, n);
        if (a % 4 == 3 && n % 4 == 3) t = -t;
        a %= n;
    }
    return n == 1 ? t : 0;
}

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t seed)
{
    auto* bytes = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace qfz
