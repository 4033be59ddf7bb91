// Exercises the shared-library surface the way an external binding would.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstring>
#include <filesystem>
#include <string>

#include "feesim/feesim.h"

namespace {

struct Engine {
    feesim_engine* h = feesim_engine_create();
    ~Engine() { feesim_engine_destroy(h); }
};

std::string take(char* s) {
    std::string out = s ? s : "";
    feesim_string_free(s);
    return out;
}

}  // namespace

TEST_CASE("engine lifecycle and version") {
    Engine e;
    REQUIRE(e.h != nullptr);
    CHECK(std::strlen(feesim_version()) > 0);
    CHECK(std::string(feesim_last_error(e.h)) == "{}");
}

TEST_CASE("tfm eval through the c api") {
    Engine e;
    char* result = nullptr;
    feesim_status st = feesim_tfm_eval(e.h, R"({"kind":"second-price","B":4,"k":3})",
                                       "[10,9,8,3]", "expected", 0, &result);
    REQUIRE(st == FEESIM_OK);
    std::string out = take(result);
    CHECK(out.find("\"miner_revenue\": 9.0") != std::string::npos);
}

TEST_CASE("audit through the c api") {
    Engine e;
    char* result = nullptr;
    feesim_status st = feesim_audit(
        e.h,
        R"({"mechanism":{"kind":"posted-price","B":2,"p":10},"notion":"oca","values":[5,0,0,0]})",
        &result);
    REQUIRE(st == FEESIM_OK);
    std::string out = take(result);
    CHECK(out.find("\"gain\": 5.0") != std::string::npos);
}

TEST_CASE("analytic through the c api") {
    Engine e;
    char* result = nullptr;
    feesim_status st = feesim_analytic(
        e.h, R"({"formula":"whale_overtake_prob","q":0.3,"z":[0,1]})", &result);
    REQUIRE(st == FEESIM_OK);
    std::string out = take(result);
    CHECK(out.find("rows") != std::string::npos);
}

TEST_CASE("scenario run writes files") {
    Engine e;
    std::string dir = (std::filesystem::temp_directory_path() / "feesim_capi_test").string();
    std::filesystem::remove_all(dir);
    char* result = nullptr;
    std::string doc = R"({
      "name": "walk", "kind": "sim", "seed": 4,
      "params": {"mode": "whale-walk", "q": 0.3, "z": 1, "trials": 20000}
    })";
    feesim_status st = feesim_run_scenario(e.h, doc.c_str(), dir.c_str(), &result);
    REQUIRE(st == FEESIM_OK);
    take(result);
    CHECK(std::filesystem::exists(dir + "/walk.csv"));
    CHECK(std::filesystem::exists(dir + "/walk.json"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("reproduce through the c api") {
    Engine e;
    char* result = nullptr;
    feesim_status st = feesim_reproduce(e.h, "undercut-equilibrium", nullptr, nullptr, &result);
    REQUIRE(st == FEESIM_OK);
    std::string out = take(result);
    CHECK(out.find("\"scenario\": \"undercut-equilibrium\"") != std::string::npos);
}

TEST_CASE("validation failures map to status 2 with a machine-readable document") {
    Engine e;
    char* result = nullptr;
    CHECK(feesim_run_scenario(e.h, "{nope", nullptr, &result) == FEESIM_ERR_INVALID_ARGUMENT);
    CHECK(result == nullptr);
    std::string err = feesim_last_error(e.h);
    CHECK(err.find("\"code\":2") != std::string::npos);
    CHECK(err.find("message") != std::string::npos);

    CHECK(feesim_reproduce(e.h, "bogus", "{}", nullptr, &result) == FEESIM_ERR_INVALID_ARGUMENT);
    CHECK(feesim_tfm_eval(e.h, R"({"kind":"second-price","B":2,"k":5})", "[1,2]", "expected", 0,
                          &result) == FEESIM_ERR_INVALID_ARGUMENT);

    // a successful call clears the error
    CHECK(feesim_analytic(e.h, R"({"formula":"lambert_w0","x":1})", &result) == FEESIM_OK);
    take(result);
    CHECK(std::string(feesim_last_error(e.h)) == "{}");
}

TEST_CASE("null arguments are rejected, not crashed on") {
    Engine e;
    char* result = nullptr;
    CHECK(feesim_run_scenario(e.h, nullptr, nullptr, &result) == FEESIM_ERR_INVALID_ARGUMENT);
    CHECK(feesim_reproduce(e.h, nullptr, nullptr, nullptr, &result) ==
          FEESIM_ERR_INVALID_ARGUMENT);
    CHECK(feesim_run_scenario(nullptr, "{}", nullptr, &result) == FEESIM_ERR_INVALID_ARGUMENT);
    feesim_string_free(nullptr);  // must be a no-op
}
