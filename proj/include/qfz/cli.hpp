#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qfz/quadform.hpp"

namespace qfz {

constexpr const char* kReportSchema = "qfz-report/1";
constexpr const char* kCsvSchema = "qfz-csv/1";

enum ExitCode { kExitOk = 0, kExitValidation = 1, kExitBudget = 2, kExitAcceptance = 3 };

// Flat key = value text; '#' starts a comment. The form is given as
//   gram2 = begin
//   2 0 ...
//   end
struct JobConfig {
    std::string task;
    IntMatrix gram2;
    long long n_max = 40;
    long long prime_bound = 50;
    long long tail_bound = 0;
    int k_max = 16;
    double budget = 1e8;
    std::string signs = "both";   // densities / measures: plus | minus | both
    std::optional<int> ell;
    std::size_t gammas = 24;
    std::size_t points_per_gamma = 3;
    std::size_t fricke_points = 10;
    std::size_t fe_points = 5;
    std::uint64_t seed = 1;
    double y_min = 0.2;
    std::optional<double> tolerance;
    double fe_tolerance = 1e-5;
    double twist_tolerance = 1e-4;
    double stark_tolerance = 1e-10;
    double t0 = 1.2;   // != 1: at t0 = 1 the two-sided check is an identity
    double t0_alt = 1.5;
    long long trend_prime_bound = 10;   // verify: second build for the convergence trend; 0 skips it
    double perturbation = 0.1;          // relative change of one coefficient in the sensitivity checks
    std::vector<long long> twist_moduli = {3, 5, 7};
    std::vector<long long> stark_moduli = {3, 5, 7};
    std::string report = "report.json";
    std::string csv;   // empty: <task>.csv

    std::map<std::string, std::string> entries;   // everything as read, for the report echo
};

JobConfig parse_config(std::istream& in);
JobConfig load_config(const std::filesystem::path& path);

struct RunOptions {
    std::filesystem::path config;
    std::optional<std::filesystem::path> cache;
    std::filesystem::path out = ".";
    int threads = 0;
    std::optional<std::uint64_t> seed;
};

// runs one job; writes <out>/<report>, <out>/<csv> and <out>/meta.json; returns an ExitCode
int run(const RunOptions& opt, std::ostream& log);

// stats | verify | clear on the density cache; writes <out>/cache-report.json
int cache_admin(const std::string& sub, const std::filesystem::path& cache, const std::filesystem::path& out,
                std::ostream& log);

} // namespace qfz
