#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace qfz {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

bool is_prime(long long n);
std::vector<long long> primes_up_to(long long bound);

// v_p(n) for n != 0
int valuation(long long n, long long p);

long long ipow(long long base, int e);
long long mod(long long a, long long m);
long long mod_inverse(long long a, long long m);

// positive divisors of n > 0, ascending
std::vector<long long> divisors(long long n);

// prime factorization of |n| as (p, e) pairs
std::vector<std::pair<long long, int>> factorize(long long n);

// Jacobi symbol (a/n) for odd n > 0
int jacobi(long long a, long long n);

// 64-bit FNV-1a over raw bytes
std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t seed = 0xcbf29ce484222325ULL);

} // namespace qfz
