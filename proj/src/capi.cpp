#include "bnmimo/bnmimo.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include <nlohmann/json.hpp>

#include "bnmimo/app.hpp"
#include "bnmimo/errors.hpp"
#include "bnmimo/schemes.hpp"
#include "bnmimo/selftest.hpp"
#include "bnmimo/stcode.hpp"

struct bnm_run {
    bnmimo::app::RunConfig config;
    std::optional<bnmimo::app::RunResult> result;
};

namespace {

thread_local std::string last_error;

bnm_status fail(bnm_status s, const std::string& msg) {
    last_error = msg;
    return s;
}

template <class F>
bnm_status guarded(F&& f) {
    try {
        last_error.clear();
        return f();
    } catch (const bnmimo::ValidationError& e) {
        return fail(BNM_ERR_VALIDATION, e.what());
    } catch (const bnmimo::NumericalError& e) {
        return fail(BNM_ERR_NUMERICAL, e.what());
    } catch (const bnmimo::SelfTestError& e) {
        return fail(BNM_ERR_SELFTEST, e.what());
    } catch (const bnmimo::IoError& e) {
        return fail(BNM_ERR_IO, e.what());
    } catch (const std::bad_alloc&) {
        return fail(BNM_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(BNM_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(BNM_ERR_INTERNAL, "unknown error");
    }
}

char* dup(const std::string& s) {
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (!p) throw std::bad_alloc();
    std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

bnm_status need(const void* p, const char* what) {
    if (!p) return fail(BNM_ERR_VALIDATION, std::string(what) + " must not be NULL");
    return BNM_OK;
}

#define BNM_NEED(p)                                                 \
    do {                                                            \
        if (bnm_status s_ = need((p), #p); s_ != BNM_OK) return s_; \
    } while (0)

const bnmimo::app::RunResult& result_of(const bnm_run* run) {
    if (!run->result) throw bnmimo::ValidationError("run has not been executed");
    return *run->result;
}

} // namespace

extern "C" {

const char* bnm_version(void) { return "1.0.0"; }

const char* bnm_last_error(void) { return last_error.c_str(); }

void bnm_string_free(char* s) { std::free(s); }

bnm_status bnm_run_create(bnm_run** out) {
    BNM_NEED(out);
    return guarded([&] {
        *out = new bnm_run();
        return BNM_OK;
    });
}

void bnm_run_destroy(bnm_run* run) { delete run; }

bnm_status bnm_run_set(bnm_run* run, const char* key, const char* value) {
    BNM_NEED(run);
    BNM_NEED(key);
    BNM_NEED(value);
    return guarded([&] {
        run->config.set(key, value);
        run->result.reset();
        return BNM_OK;
    });
}

bnm_status bnm_run_load_config(bnm_run* run, const char* path) {
    BNM_NEED(run);
    BNM_NEED(path);
    return guarded([&] {
        bnmimo::app::load_config_file(run->config, path);
        run->result.reset();
        return BNM_OK;
    });
}

bnm_status bnm_run_load_config_text(bnm_run* run, const char* text) {
    BNM_NEED(run);
    BNM_NEED(text);
    return guarded([&] {
        bnmimo::app::load_config_text(run->config, text);
        run->result.reset();
        return BNM_OK;
    });
}

bnm_status bnm_run_apply_preset(bnm_run* run, const char* name) {
    BNM_NEED(run);
    BNM_NEED(name);
    return guarded([&] {
        bnmimo::app::apply_preset(run->config, name);
        run->result.reset();
        return BNM_OK;
    });
}

bnm_status bnm_run_validate(bnm_run* run) {
    BNM_NEED(run);
    return guarded([&] {
        run->config.validate();
        return BNM_OK;
    });
}

bnm_status bnm_run_config_text(const bnm_run* run, char** out) {
    BNM_NEED(run);
    BNM_NEED(out);
    return guarded([&] {
        *out = dup(run->config.to_text());
        return BNM_OK;
    });
}

bnm_status bnm_run_execute(bnm_run* run) {
    BNM_NEED(run);
    return guarded([&] {
        run->result.reset();
        run->result = bnmimo::app::execute(run->config);
        return BNM_OK;
    });
}

bnm_status bnm_run_write(const bnm_run* run, const char* path, const char* format, char** written) {
    BNM_NEED(run);
    BNM_NEED(path);
    BNM_NEED(format);
    return guarded([&] {
        std::string list;
        for (const auto& p : bnmimo::app::write_outputs(result_of(run), path, format)) list += p + "\n";
        if (written) *written = dup(list);
        return BNM_OK;
    });
}

bnm_status bnm_run_render(const bnm_run* run, const char* format, char** out) {
    BNM_NEED(run);
    BNM_NEED(format);
    BNM_NEED(out);
    return guarded([&] {
        const std::string f = format;
        if (f == "csv") *out = dup(bnmimo::app::render_csv(result_of(run)));
        else if (f == "json") *out = dup(bnmimo::app::render_json(result_of(run)));
        else throw bnmimo::ValidationError("output format must be csv or json, got '" + f + "'");
        return BNM_OK;
    });
}

bnm_status bnm_run_summary(const bnm_run* run, char** out) {
    BNM_NEED(run);
    BNM_NEED(out);
    return guarded([&] {
        *out = dup(bnmimo::app::summary(result_of(run)));
        return BNM_OK;
    });
}

bnm_status bnm_preset_list(char** out) {
    BNM_NEED(out);
    return guarded([&] {
        std::string s;
        for (const auto& n : bnmimo::app::preset_names()) s += n + "\t" + bnmimo::app::preset_description(n) + "\n";
        *out = dup(s);
        return BNM_OK;
    });
}

bnm_status bnm_selftest(uint64_t seed, size_t instances, int inject_fault, char** report) {
    BNM_NEED(report);
    return guarded([&] {
        bnmimo::selftest::Options opts;
        opts.seed = seed;
        opts.instances = instances;
        opts.inject_fault = inject_fault != 0;
        const auto rep = bnmimo::selftest::run(opts);
        *report = dup(rep.text());
        if (!rep.passed()) return fail(BNM_ERR_SELFTEST, "self-test: one or more properties failed");
        return BNM_OK;
    });
}

bnm_status bnm_ldc_export_json(int streams, int block_length, char** out) {
    BNM_NEED(out);
    return guarded([&] {
        const auto code = bnmimo::stcode::LinearDispersionCode::generate(streams, block_length);
        *out = dup(bnmimo::stcode::to_json(code).dump(2) + "\n");
        return BNM_OK;
    });
}

bnm_status bnm_capacity_bits(const char* scheme, const double* sigma, size_t n, double rho, int nt, double* out) {
    BNM_NEED(scheme);
    BNM_NEED(out);
    if (n > 0) BNM_NEED(sigma);
    return guarded([&] {
        const auto spec = bnmimo::schemes::SchemeSpec::parse(scheme);
        spec.validate(nt);
        if (static_cast<int>(n) != nt) throw bnmimo::ValidationError("capacity: expected one singular value per transmit antenna");
        if (!(rho > 0.0) || !std::isfinite(rho)) throw bnmimo::ValidationError("capacity: rho must be positive and finite");
        *out = bnmimo::schemes::capacity_nats(spec, std::span<const double>(sigma, n), rho, nt) / std::log(2.0);
        return BNM_OK;
    });
}

} // extern "C"
