#include <iostream>

#include <CLI11.hpp>

#include "qfz/cli.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Siegel zeta and theta-lift toolkit for indefinite quadratic forms"};
    std::string config, cache, out = ".";
    int threads = 0;
    std::optional<std::uint64_t> seed;
    app.add_option("--config", config, "job config file");
    app.add_option("--cache", cache, "density cache directory");
    app.add_option("--threads", threads, "OpenMP threads (0: default)")->check(CLI::NonNegativeNumber);
    app.add_option("--seed", seed, "override the config seed");
    app.add_option("--out", out, "output directory");

    std::string sub;
    auto* cache_cmd = app.add_subcommand("cache", "inspect the density cache");
    cache_cmd->add_option("action", sub, "stats | verify | clear")
        ->required()
        ->check(CLI::IsMember({"stats", "verify", "clear"}));
    cache_cmd->fallthrough();

    CLI11_PARSE(app, argc, argv);

    if (*cache_cmd) {
        if (cache.empty()) {
            std::cerr << "cache: --cache DIR is required\n";
            return qfz::kExitValidation;
        }
        return qfz::cache_admin(sub, cache, out, std::cerr);
    }
    if (config.empty()) {
        std::cerr << "--config PATH is required\n";
        return qfz::kExitValidation;
    }
    qfz::RunOptions opt;
    opt.config = config;
    if (!cache.empty()) opt.cache = cache;
    opt.out = out;
    opt.threads = threads;
    opt.seed = seed;
    return qfz::run(opt, std::cerr);
}
