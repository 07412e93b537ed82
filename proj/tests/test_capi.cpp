#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "uavsim.h"

using nlohmann::json;

namespace {

struct Ctx {
  uavsim_ctx* handle = nullptr;
  ~Ctx() { uavsim_ctx_free(handle); }
};

struct Str {
  char* s = nullptr;
  ~Str() { uavsim_string_free(s); }
};

const char* kSmallConfig = R"({
  "synth": {"bs_cols": 2, "bs_rows": 1, "events_per_bs": 1,
             "horizon_s": 4000.0, "fleet_size": 2}
})";

}  // namespace

TEST_CASE("context lifecycle and configuration validation") {
  CHECK(std::strlen(uavsim_version()) > 0);

  Ctx ctx;
  CHECK(uavsim_ctx_new(nullptr, &ctx.handle) == UAVSIM_OK);
  REQUIRE(ctx.handle != nullptr);
  CHECK(std::string(uavsim_last_error(ctx.handle)).empty());

  Str cfg;
  CHECK(uavsim_effective_config(ctx.handle, &cfg.s) == UAVSIM_OK);
  const json j = json::parse(cfg.s);
  CHECK(j.contains("channel"));
  CHECK(j.contains("sweep"));

  // Re-feeding the effective config reproduces it byte for byte.
  Ctx ctx2;
  REQUIRE(uavsim_ctx_new(cfg.s, &ctx2.handle) == UAVSIM_OK);
  Str cfg2;
  CHECK(uavsim_effective_config(ctx2.handle, &cfg2.s) == UAVSIM_OK);
  CHECK(std::string(cfg.s) == cfg2.s);

  uavsim_ctx* bad = nullptr;
  CHECK(uavsim_ctx_new("{\"bogus\": 1}", &bad) == UAVSIM_ERR_PARSE);
  CHECK(bad == nullptr);
  CHECK(uavsim_ctx_new("{]", &bad) == UAVSIM_ERR_PARSE);
}

TEST_CASE("error reporting carries a message") {
  Ctx ctx;
  REQUIRE(uavsim_ctx_new(nullptr, &ctx.handle) == UAVSIM_OK);
  Str out;
  CHECK(uavsim_simulate(ctx.handle, "/nonexistent/scenario.json", "predictive",
                        -1.0, nullptr, &out.s) == UAVSIM_ERR_IO);
  CHECK(std::string(uavsim_last_error(ctx.handle)).find("scenario") !=
        std::string::npos);
  CHECK(uavsim_detect(ctx.handle, nullptr, &out.s) == UAVSIM_ERR_INVALID_ARGUMENT);
}

TEST_CASE("scenario, simulate, and learn through the shared library") {
  Ctx ctx;
  REQUIRE(uavsim_ctx_new(kSmallConfig, &ctx.handle) == UAVSIM_OK);

  Str scenario;
  REQUIRE(uavsim_make_scenario(ctx.handle, 5, 0, 0.0, &scenario.s) == UAVSIM_OK);
  const std::string dir = "/tmp/uavsim_capi";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir + "/scenario.json");
    f << scenario.s;
  }

  Str m1, m2;
  REQUIRE(uavsim_simulate(ctx.handle, (dir + "/scenario.json").c_str(), "closest",
                          -1.0, (dir + "/run1").c_str(), &m1.s) == UAVSIM_OK);
  REQUIRE(uavsim_simulate(ctx.handle, (dir + "/scenario.json").c_str(), "closest",
                          -1.0, (dir + "/run2").c_str(), &m2.s) == UAVSIM_OK);
  CHECK(std::string(m1.s) == m2.s);
  const json metrics = json::parse(m1.s);
  CHECK(metrics.at("policy") == "closest");
  CHECK(metrics.at("fleet_size") == 2);

  Str learn;
  REQUIRE(uavsim_learn(ctx.handle, (dir + "/scenario.json").c_str(),
                       (dir + "/learn").c_str(), &learn.s) == UAVSIM_OK);
  CHECK(json::parse(learn.s).contains("mre"));

  Str contract;
  REQUIRE(uavsim_contract_check(ctx.handle, 1e10, 100, &contract.s) == UAVSIM_OK);
  CHECK(json::parse(contract.s).at("ic").at("pass").get<bool>());
}

TEST_CASE("ingest through the shared library") {
  const std::string dir = "/tmp/uavsim_capi_ingest";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  {
    std::ofstream bs(dir + "/bs.csv");
    bs << "id,longitude,latitude\n1,116.30,39.90\n2,116.34,39.93\n";
    std::ofstream tr(dir + "/traffic.csv");
    tr << "id,hour,users,packets,bytes\n1,0,30,200,250000\n2,0,20,100,90000\n";
  }
  Ctx ctx;
  REQUIRE(uavsim_ctx_new(nullptr, &ctx.handle) == UAVSIM_OK);
  Str summary;
  REQUIRE(uavsim_ingest(ctx.handle, (dir + "/bs.csv").c_str(),
                        (dir + "/traffic.csv").c_str(), (dir + "/out").c_str(), 7,
                        &summary.s) == UAVSIM_OK);
  const json s = json::parse(summary.s);
  CHECK(s.at("records").get<int>() == 300);
  CHECK(std::filesystem::exists(dir + "/out/records.csv"));

  // Same seed, same bytes.
  Str again;
  REQUIRE(uavsim_ingest(ctx.handle, (dir + "/bs.csv").c_str(),
                        (dir + "/traffic.csv").c_str(), (dir + "/out2").c_str(), 7,
                        &again.s) == UAVSIM_OK);
  std::ifstream a(dir + "/out/records.csv"), b(dir + "/out2/records.csv");
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(sa.str() == sb.str());
}
