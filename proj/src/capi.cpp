#include "feesim/feesim.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "errors.hpp"
#include "json.hpp"
#include "scenario.hpp"

struct feesim_engine {
    std::string last_error;
};

namespace {

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void set_error(feesim_engine* engine, int code, const std::string& message) {
    if (!engine) return;
    nlohmann::ordered_json j;
    j["error"] = {{"code", code}, {"message", message}};
    engine->last_error = j.dump();
}

template <typename Fn>
feesim_status guarded(feesim_engine* engine, char** result_json, Fn&& fn) {
    if (!engine) return FEESIM_ERR_INVALID_ARGUMENT;
    if (result_json) *result_json = nullptr;
    try {
        std::string out = fn();
        if (result_json) {
            *result_json = dup_string(out);
            if (!*result_json) {
                set_error(engine, FEESIM_ERR_RUNTIME, "out of memory");
                return FEESIM_ERR_RUNTIME;
            }
        }
        engine->last_error.clear();
        return FEESIM_OK;
    } catch (const feesim::ValidationError& e) {
        set_error(engine, FEESIM_ERR_INVALID_ARGUMENT, e.what());
        return FEESIM_ERR_INVALID_ARGUMENT;
    } catch (const std::exception& e) {
        set_error(engine, FEESIM_ERR_RUNTIME, e.what());
        return FEESIM_ERR_RUNTIME;
    }
}

std::string or_empty(const char* s) { return s ? std::string(s) : std::string(); }

nlohmann::json parse_or_invalid(const char* text, const char* what) {
    try {
        return nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw feesim::ValidationError(std::string(what) + ": invalid JSON: " + e.what());
    }
}

}  // namespace

extern "C" {

feesim_engine* feesim_engine_create(void) {
    return new (std::nothrow) feesim_engine();
}

void feesim_engine_destroy(feesim_engine* engine) { delete engine; }

const char* feesim_version(void) { return feesim::artifact_version(); }

const char* feesim_last_error(const feesim_engine* engine) {
    static const char kEmpty[] = "{}";
    if (!engine || engine->last_error.empty()) return kEmpty;
    return engine->last_error.c_str();
}

void feesim_string_free(char* s) { std::free(s); }

feesim_status feesim_run_scenario(feesim_engine* engine, const char* scenario_json,
                                  const char* out_dir, char** result_json) {
    return guarded(engine, result_json, [&] {
        if (!scenario_json) throw feesim::ValidationError("scenario_json is NULL");
        return feesim::run_scenario_json(scenario_json, or_empty(out_dir));
    });
}

feesim_status feesim_reproduce(feesim_engine* engine, const char* name,
                               const char* overrides_json, const char* out_dir,
                               char** result_json) {
    return guarded(engine, result_json, [&] {
        if (!name) throw feesim::ValidationError("name is NULL");
        return feesim::reproduce(name, or_empty(overrides_json), or_empty(out_dir));
    });
}

feesim_status feesim_tfm_eval(feesim_engine* engine, const char* mechanism_json,
                              const char* bids_json, const char* mode, uint64_t seed,
                              char** result_json) {
    return guarded(engine, result_json, [&] {
        if (!mechanism_json || !bids_json)
            throw feesim::ValidationError("mechanism_json and bids_json are required");
        nlohmann::ordered_json scenario;
        scenario["kind"] = "tfm";
        scenario["seed"] = seed;
        scenario["params"] = {{"mechanism", parse_or_invalid(mechanism_json, "mechanism")},
                              {"bids", parse_or_invalid(bids_json, "bids")},
                              {"mode", mode ? mode : "expected"}};
        return feesim::run_scenario_json(scenario.dump(), "");
    });
}

feesim_status feesim_audit(feesim_engine* engine, const char* params_json, char** result_json) {
    return guarded(engine, result_json, [&] {
        if (!params_json) throw feesim::ValidationError("params_json is NULL");
        nlohmann::ordered_json scenario;
        scenario["kind"] = "audit";
        scenario["params"] = parse_or_invalid(params_json, "audit params");
        return feesim::run_scenario_json(scenario.dump(), "");
    });
}

feesim_status feesim_analytic(feesim_engine* engine, const char* params_json,
                              char** result_json) {
    return guarded(engine, result_json, [&] {
        if (!params_json) throw feesim::ValidationError("params_json is NULL");
        nlohmann::ordered_json scenario;
        scenario["kind"] = "analytic";
        scenario["params"] = parse_or_invalid(params_json, "analytic params");
        return feesim::run_scenario_json(scenario.dump(), "");
    });
}

}  // extern "C"
