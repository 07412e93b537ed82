#include "uavsim.h"

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "runner.hpp"

using uavsim::Error;
using uavsim::RunConfig;

struct uavsim_ctx {
  RunConfig config;
  std::string last_error;
};

namespace {

uavsim_status status_of(Error::Kind kind) {
  switch (kind) {
    case Error::Kind::invalid_argument: return UAVSIM_ERR_INVALID_ARGUMENT;
    case Error::Kind::io: return UAVSIM_ERR_IO;
    case Error::Kind::parse: return UAVSIM_ERR_PARSE;
    case Error::Kind::runtime: return UAVSIM_ERR_RUNTIME;
    case Error::Kind::internal: return UAVSIM_ERR_INTERNAL;
  }
  return UAVSIM_ERR_INTERNAL;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename F>
uavsim_status guarded(uavsim_ctx* ctx, F&& body) {
  if (!ctx) return UAVSIM_ERR_INVALID_ARGUMENT;
  ctx->last_error.clear();
  try {
    return body();
  } catch (const Error& e) {
    ctx->last_error = e.what();
    return status_of(e.kind);
  } catch (const std::exception& e) {
    ctx->last_error = e.what();
    return UAVSIM_ERR_INTERNAL;
  }
}

}  // namespace

extern "C" {

const char* uavsim_version(void) { return "1.0.0"; }

uavsim_status uavsim_ctx_new(const char* config_json, uavsim_ctx** out) {
  if (!out) return UAVSIM_ERR_INVALID_ARGUMENT;
  *out = nullptr;
  try {
    auto ctx = new uavsim_ctx;
    if (config_json && *config_json)
      ctx->config = uavsim::config_from_string(config_json);
    *out = ctx;
    return UAVSIM_OK;
  } catch (const Error& e) {
    return status_of(e.kind);
  } catch (...) {
    return UAVSIM_ERR_INTERNAL;
  }
}

uavsim_status uavsim_ctx_new_from_file(const char* path, uavsim_ctx** out) {
  if (!path || !out) return UAVSIM_ERR_INVALID_ARGUMENT;
  std::ifstream f(path);
  if (!f) return UAVSIM_ERR_IO;
  std::stringstream buf;
  buf << f.rdbuf();
  return uavsim_ctx_new(buf.str().c_str(), out);
}

void uavsim_ctx_free(uavsim_ctx* ctx) { delete ctx; }

const char* uavsim_last_error(const uavsim_ctx* ctx) {
  return ctx ? ctx->last_error.c_str() : "null context";
}

void uavsim_string_free(char* s) { std::free(s); }

uavsim_status uavsim_effective_config(uavsim_ctx* ctx, char** json_out) {
  return guarded(ctx, [&]() -> uavsim_status {
    if (!json_out) throw uavsim::invalid("json_out is null");
    *json_out = dup_string(uavsim::config_to_json(ctx->config).dump(2));
    return UAVSIM_OK;
  });
}

uavsim_status uavsim_ingest(uavsim_ctx* ctx, const char* bs_csv,
                            const char* traffic_csv, const char* out_dir,
                            uint64_t seed, char** summary_json) {
  return guarded(ctx, [&]() -> uavsim_status {
    if (!bs_csv || !traffic_csv || !out_dir)
      throw uavsim::invalid("ingest needs bs_csv, traffic_csv and out_dir");
    const auto summary =
        uavsim::cmd_ingest(ctx->config, bs_csv, traffic_csv, out_dir, seed);
    if (summary_json) *summary_json = dup_string(summary.dump(2));
    return UAVSIM_OK;
  });
}

uavsim_status uavsim_detect(uavsim_ctx* ctx, const char* traffic_csv,
                            char** flags_json) {
  return guarded(ctx, [&]() -> uavsim_status {
    if (!traffic_csv) throw uavsim::invalid("detect needs a traffic table");
    const auto flags = uavsim::cmd_detect(ctx->config, traffic_csv);
    if (flags_json) *flags_json = dup_string(flags.dump(2));
    return UAVSIM_OK;
  });
}

uavsim_status uavsim_make_scenario(uavsim_ctx* ctx, uint64_t seed, int fleet_size,
                                   double rho_ratio, char** scenario_json) {
  return guarded(ctx, [&]() -> uavsim_status {
    if (!scenario_json) throw uavsim::invalid("scenario_json is null");
    const auto sj =
        uavsim::make_scenario_json(ctx->config, seed, fleet_size, rho_ratio);
    *scenario_json = dup_string(sj.dump(2));
    return UAVSIM_OK;
  });
}

uavsim_status uavsim_learn(uavsim_ctx* ctx, const char* scenario_path,
                           const char* out_dir, char** report_json) {
  return guarded(ctx, [&]() -> uavsim_status {
    if (!scenario_path || !out_dir)
      throw uavsim::invalid("learn needs scenario_path and out_dir");
    const auto report = uavsim::cmd_learn(ctx->config, scenario_path, out_dir);
    if (report_json) *report_json = dup_string(report.dump(2));
    return UAVSIM_OK;
  });
}

uavsim_status uavsim_contract_check(uavsim_ctx* ctx, double demand_bits,
                                    int grid_size, char** report_json) {
  return guarded(ctx, [&]() -> uavsim_status {
    const auto report =
        uavsim::cmd_contract_check(ctx->config, demand_bits, grid_size);
    if (report_json) *report_json = dup_string(report.dump(2));
    return UAVSIM_OK;
  });
}

uavsim_status uavsim_simulate(uavsim_ctx* ctx, const char* scenario_path,
                              const char* policy, double horizon_s,
                              const char* out_dir, char** metrics_json) {
  return guarded(ctx, [&]() -> uavsim_status {
    if (!scenario_path || !policy)
      throw uavsim::invalid("simulate needs scenario_path and policy");
    const auto metrics = uavsim::cmd_simulate(
        ctx->config, scenario_path, policy, horizon_s, out_dir ? out_dir : "");
    if (metrics_json) *metrics_json = dup_string(metrics.dump(2));
    return UAVSIM_OK;
  });
}

uavsim_status uavsim_compare(uavsim_ctx* ctx, const char* out_dir, int jobs,
                             char** summary_json) {
  return guarded(ctx, [&]() -> uavsim_status {
    if (!out_dir) throw uavsim::invalid("compare needs out_dir");
    const auto summary = uavsim::cmd_compare(ctx->config, out_dir, jobs);
    if (summary_json) *summary_json = dup_string(summary.dump(2));
    return UAVSIM_OK;
  });
}

uavsim_status uavsim_report(uavsim_ctx* ctx, const char* sweep_csv,
                            char** report_json) {
  return guarded(ctx, [&]() -> uavsim_status {
    if (!sweep_csv) throw uavsim::invalid("report needs a sweep table");
    const auto report = uavsim::cmd_report(ctx->config, sweep_csv);
    if (report_json) *report_json = dup_string(report.dump(2));
    return UAVSIM_OK;
  });
}

}  // extern "C"
