#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "qfz/quadform.hpp"

namespace qfz {

struct DensityRecord {
    long long n = 0;
    long long p = 0;
    int k = 0;
    BigInt count = 0;     // #{v mod p^k : Y[v] = n mod p^k}
    Rational alpha = 0;   // count / p^{k(m-1)}
    bool stabilized = false;
};

// Append-only log of exact counts, one text record per line:
//   v1 <form-hash:16 hex> <n> <p> <k> <count> <crc32:8 hex>
// The CRC-32 covers every byte of the line before the final space.
class DensityCache {
public:
    using Key = std::tuple<std::uint64_t, long long, long long, int>;

    struct VerifyReport {
        std::size_t good = 0;
        std::vector<std::uintmax_t> bad_offsets;
    };

    struct Stats {
        std::size_t records = 0;
        std::map<std::pair<long long, int>, std::size_t> by_prime_power;
    };

    explicit DensityCache(std::filesystem::path dir);

    std::optional<BigInt> get(std::uint64_t form_hash, long long n, long long p, int k) const;
    void put(const std::vector<std::pair<Key, BigInt>>& records);

    VerifyReport verify() const;
    Stats stats() const;
    void clear();

    const std::filesystem::path& file() const { return file_; }

    static std::string format_record(const Key& key, const BigInt& count);

private:
    void load();

    std::filesystem::path file_;
    mutable std::mutex mu_;
    std::map<Key, BigInt> records_;
};

struct DensityParams {
    int k_max = 16;
    double budget = 1e8;                  // work units per (p, k) histogram
    DensityCache* cache = nullptr;
};

// exact count by histogram convolution over a p-adic Jordan splitting
BigInt count_solutions(const QuadraticForm& form, long long n, long long p, int k, double budget = 1e8);

// reference count by direct enumeration over (Z/p^k)^m
BigInt count_solutions_naive(const QuadraticForm& form, long long n, long long p, int k, double budget = 1e8);

// all residues t mod p^k at once: result[t] = #{v : Y[v] = t mod p^k}
std::vector<BigInt> value_histogram(const QuadraticForm& form, long long p, int k, double budget = 1e8);

DensityRecord local_density(const QuadraticForm& form, long long n, long long p, const DensityParams& params = {});

struct MeasureEntry {
    long long n = 0;          // target is sign * n
    double value = 0;         // |n|^{m/2-1} prod alpha_p
    long long prime_bound = 0;
    std::vector<DensityRecord> records;
    double tail_factor = 1;   // closed-form factors for primes in (prime_bound, tail_bound]
};

struct MeasureTable {
    std::uint64_t form_hash = 0;
    int sign = 1;
    long long prime_bound = 0;
    std::vector<MeasureEntry> entries;   // entries[i].n == i + 1
    static constexpr const char* normalization = "relative";

    std::size_t size() const { return entries.size(); }
    const MeasureEntry& at(long long n) const;
    double value(long long n) const { return at(n).value; }
};

struct MeasureParams {
    long long prime_bound = 50;
    // primes in (prime_bound, tail_bound] not dividing D use generic_density; 0 disables
    long long tail_bound = 0;
    DensityParams density;
};

// alpha_p(n) in closed form for odd p not dividing D = det(2Y). For p not dividing n:
//   m even: 1 - ((-1)^{m/2} D / p) p^{-m/2}
//   m odd:  1 + ((-1)^{(m-1)/2} 2 n D / p) p^{(1-m)/2}
Rational generic_density(int m, long long D, long long n, long long p);

double measure_relative(const QuadraticForm& form, long long n, const MeasureParams& params = {});
MeasureTable measure_table(const QuadraticForm& form, int sign, long long n_max, const MeasureParams& params = {});

// rebuild values from stored records (reproducibility check)
double measure_from_records(int m, const MeasureEntry& e);

} // namespace qfz
