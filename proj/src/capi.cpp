#include "branchtail.h"

#include <cstring>
#include <new>
#include <string>

#include "branchtail/config.hpp"
#include "branchtail/error.hpp"
#include "branchtail/pipeline.hpp"

using namespace branchtail;

struct bt_run {
    RunConfig cfg;
    std::string last_error;
};

namespace {

bt_status status_of(errc code) {
    switch (code) {
        case errc::none: return BT_OK;
        case errc::config: return BT_ERR_CONFIG;
        case errc::supercritical: return BT_ERR_SUPERCRITICAL;
        case errc::io: return BT_ERR_IO;
        case errc::no_convergence:
        case errc::degenerate_subtree:
        case errc::infinite_mean: return BT_ERR_NUMERIC;
        case errc::unsupported_analytic:
        case errc::index_out_of_range:
        case errc::dimension_mismatch:
        case errc::empty_sample:
        case errc::insufficient_data:
        case errc::too_few_exceedances:
        case errc::invalid_argument: return BT_ERR_INVALID;
    }
    return BT_ERR_INTERNAL;
}

void put_error(char* errbuf, size_t errlen, const char* msg) {
    if (errbuf == nullptr || errlen == 0) return;
    std::strncpy(errbuf, msg, errlen - 1);
    errbuf[errlen - 1] = '\0';
}

template <class F>
bt_status open_impl(F&& load, bt_run** out, char* errbuf, size_t errlen) {
    if (out == nullptr) return BT_ERR_INVALID;
    *out = nullptr;
    try {
        RunConfig cfg = load();
        *out = new bt_run{std::move(cfg), {}};
        return BT_OK;
    } catch (const Error& e) {
        put_error(errbuf, errlen, e.what());
        return status_of(e.code());
    } catch (const std::bad_alloc&) {
        put_error(errbuf, errlen, "out of memory");
        return BT_ERR_INTERNAL;
    } catch (const std::exception& e) {
        put_error(errbuf, errlen, e.what());
        return BT_ERR_INTERNAL;
    }
}

template <class F>
bt_status call_impl(bt_run* run, F&& body) {
    if (run == nullptr) return BT_ERR_INVALID;
    run->last_error.clear();
    try {
        body();
        return BT_OK;
    } catch (const Error& e) {
        run->last_error = e.what();
        return status_of(e.code());
    } catch (const std::bad_alloc&) {
        run->last_error = "out of memory";
        return BT_ERR_INTERNAL;
    } catch (const std::exception& e) {
        run->last_error = e.what();
        return BT_ERR_INTERNAL;
    }
}

char* dup_text(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.data(), s.size() + 1);
    return out;
}

} // namespace

extern "C" {

const char* bt_version(void) { return "branchtail 1.0.0"; }

bt_status bt_run_open(const char* config_path, bt_run** out, char* errbuf, size_t errlen) {
    if (config_path == nullptr) return BT_ERR_INVALID;
    return open_impl([&] { return load_config_file(config_path); }, out, errbuf, errlen);
}

bt_status bt_run_open_text(const char* config_json, bt_run** out, char* errbuf, size_t errlen) {
    if (config_json == nullptr) return BT_ERR_INVALID;
    return open_impl([&] { return load_config_text(config_json); }, out, errbuf, errlen);
}

void bt_run_close(bt_run* run) { delete run; }

const char* bt_run_last_error(const bt_run* run) {
    return run == nullptr ? "null handle" : run->last_error.c_str();
}

bt_status bt_run_set_seed(bt_run* run, uint64_t seed) {
    return call_impl(run, [&] { run->cfg.sim.seed = seed; });
}

bt_status bt_run_set_workers(bt_run* run, unsigned workers) {
    return call_impl(run, [&] {
        if (workers < 1 || workers > 4096) fail(errc::invalid_argument, "workers must lie in 1..4096");
        run->cfg.sim.workers = workers;
    });
}

bt_status bt_analyze(bt_run* run, char** text) {
    if (text == nullptr) return BT_ERR_INVALID;
    *text = nullptr;
    return call_impl(run, [&] { *text = dup_text(analyze_report(run->cfg)); });
}

bt_status bt_simulate(bt_run* run, const char* out_path, uint64_t* truncated) {
    if (out_path == nullptr) return BT_ERR_INVALID;
    return call_impl(run, [&] {
        SimulateSummary summary = simulate_to_files(run->cfg, out_path);
        if (truncated != nullptr) *truncated = summary.truncated;
    });
}

bt_status bt_validate(bt_run* run, const char* report_path, char** summary, int* band_ok) {
    if (summary != nullptr) *summary = nullptr;
    if (band_ok != nullptr) *band_ok = 0;
    return call_impl(run, [&] {
        ValidateOutcome outcome =
            run_validation(run->cfg, report_path == nullptr ? std::string() : report_path);
        if (summary != nullptr) *summary = dup_text(outcome.summary);
        if (band_ok != nullptr) *band_ok = outcome.band_ok ? 1 : 0;
    });
}

bt_status bt_reduce(bt_run* run, const char* out_path) {
    if (out_path == nullptr) return BT_ERR_INVALID;
    return call_impl(run, [&] { reduce_to_file(run->cfg, out_path); });
}

void bt_free_text(char* text) { delete[] text; }

} // extern "C"
