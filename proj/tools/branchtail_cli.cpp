// Command-line front end. Talks to the library exclusively through the C
// API in branchtail.h; exit codes are a stable contract:
//   0 ok, 2 config error, 3 criticality, 4 I/O, 5 validation band.

#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "branchtail.h"

namespace {

int exit_code(bt_status status) {
    switch (status) {
        case BT_OK: return 0;
        case BT_ERR_CONFIG: return 2;
        case BT_ERR_SUPERCRITICAL: return 3;
        case BT_ERR_IO: return 4;
        case BT_ERR_BAND: return 5;
        default: return 1;
    }
}

struct RunHandle {
    bt_run* run = nullptr;
    ~RunHandle() { bt_run_close(run); }
};

int open_run(const std::string& config, bool has_seed, std::uint64_t seed, unsigned workers,
             RunHandle& handle) {
    char errbuf[512] = {0};
    bt_status status = bt_run_open(config.c_str(), &handle.run, errbuf, sizeof errbuf);
    if (status != BT_OK) {
        std::fprintf(stderr, "error: %s\n", errbuf);
        return exit_code(status);
    }
    if (has_seed) bt_run_set_seed(handle.run, seed);
    if (workers > 0) bt_run_set_workers(handle.run, workers);
    return 0;
}

int report_failure(const RunHandle& handle, bt_status status) {
    std::fprintf(stderr, "error: %s\n", bt_run_last_error(handle.run));
    return exit_code(status);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"heavy-tailed branching fixed points: analysis, simulation, validation"};
    app.require_subcommand(1);

    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    unsigned workers = 0;
    bool quiet = false;
    bool has_seed = false;

    auto add_common = [&](CLI::App* cmd, bool needs_out) {
        cmd->add_option("--config", config, "config file (JSON)")->required();
        auto* seed_opt = cmd->add_option("--seed", seed, "override the simulation seed");
        seed_opt->each([&](const std::string&) { has_seed = true; });
        cmd->add_option("--workers", workers, "override the worker count");
        cmd->add_flag("--quiet", quiet, "suppress stdout summaries");
        auto* out_opt = cmd->add_option("--out", out, "output path");
        if (needs_out) out_opt->required();
    };

    CLI::App* analyze = app.add_subcommand("analyze", "print closed-form constants and reductions");
    add_common(analyze, false);
    CLI::App* simulate = app.add_subcommand("simulate", "write one sample per line plus sidecar");
    add_common(simulate, true);
    CLI::App* validate = app.add_subcommand("validate", "compare simulated against predicted tails");
    add_common(validate, true);
    CLI::App* reduce = app.add_subcommand("reduce", "emit the one-type-fewer config");
    add_common(reduce, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    RunHandle handle;
    int rc = open_run(config, has_seed, seed, workers, handle);
    if (rc != 0) return rc;

    if (analyze->parsed()) {
        char* text = nullptr;
        bt_status status = bt_analyze(handle.run, &text);
        if (status != BT_OK) return report_failure(handle, status);
        if (!quiet) std::fputs(text, stdout);
        bt_free_text(text);
        return 0;
    }
    if (simulate->parsed()) {
        uint64_t truncated = 0;
        bt_status status = bt_simulate(handle.run, out.c_str(), &truncated);
        if (status != BT_OK) return report_failure(handle, status);
        if (!quiet)
            std::printf("wrote %s (+.meta.json), truncated replications: %llu\n", out.c_str(),
                        static_cast<unsigned long long>(truncated));
        return 0;
    }
    if (validate->parsed()) {
        char* summary = nullptr;
        int band_ok = 0;
        bt_status status = bt_validate(handle.run, out.c_str(), &summary, &band_ok);
        if (status != BT_OK) return report_failure(handle, status);
        if (!quiet && summary != nullptr) std::fputs(summary, stdout);
        bt_free_text(summary);
        return band_ok ? 0 : 5;
    }
    if (reduce->parsed()) {
        bt_status status = bt_reduce(handle.run, out.c_str());
        if (status != BT_OK) return report_failure(handle, status);
        if (!quiet) std::printf("wrote %s\n", out.c_str());
        return 0;
    }
    return 2;
}
